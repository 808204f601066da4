import logging
import math

import numpy as np

from ..control import closed_loop_ensemble, receding_replay
from ..errors import (ConfigError, ContractViolation, IllPosedError, IntegrationError,
                      InvariantViolation, SolverError)
from ..model import FractionState, integrate
from ..observe import counterexample_pair, reconstruct_from_molecular, reconstruct_from_serology
from ..policy import (solve_constant_rate, solve_switching, solve_theorem1,
                      switching_cost_curve)
from ..stochastic import ensemble_run
from .artifacts import ArtifactBuilder, Table
from .config import load_scenario
from .sweep import closed_loop_options, controller_config, cost_sweep


__all__ = ["SUBCOMMANDS", "EXIT_OK", "EXIT_CONFIG", "EXIT_INVARIANT", "EXIT_SOLVER",
           "RunResult", "solve_policy", "run_scenario"]


logger = logging.getLogger(__name__)


SUBCOMMANDS = ("deterministic", "optimize", "simulate", "closed-loop", "cost-sweep",
               "observability")

EXIT_OK        = 0
EXIT_CONFIG    = 1
EXIT_INVARIANT = 2
EXIT_SOLVER    = 3

# slack of the deterministic ceiling monitor
CEILING_TOLERANCE = 1e-4


class RunResult:
    """Outcome of :func:`run_scenario`.

    Attributes
    ----------
    status : int
        Exit status.
    summary : str
        One-line summary.
    paths : list of str
        Written files.
    lines : list of str
        Extra report lines, such as a solved schedule.
    error : Exception or None
    """
    def __init__(self, status, summary, paths=(), lines=(), error=None):
        self.status  = status
        self.summary = summary
        self.paths   = list(paths)
        self.lines   = list(lines)
        self.error   = error


class _Outcome:
    def __init__(self, tables, cost=math.nan, violations=0, lines=()):
        self.tables     = tables
        self.cost       = cost
        self.violations = violations
        self.lines      = list(lines)


def solve_policy(scenario):
    """Solve the scenario's open-loop policy on the deterministic model."""
    x0, params = scenario.initial.fractions(), scenario.params
    kind = scenario.policy
    if kind == "theorem1":
        if not scenario.beta.is_non_increasing(scenario.horizon):
            raise ConfigError("Policy kind theorem1 needs a non-increasing contact rate",
                              section="model", key="beta_mode")
        return solve_theorem1(x0, scenario.i_max, params, scenario.beta,
                              horizon=scenario.horizon, step=scenario["simulation"]["step"])
    if not scenario.beta.is_constant:
        raise ConfigError("Policy kind {} needs a constant contact rate".format(kind),
                          section="model", key="beta_mode")
    if kind == "switching":
        return solve_switching(x0, scenario.i_max, params.replace(theta_b=0.0))
    if kind == "constant":
        return solve_constant_rate(x0, scenario.i_max, params)
    raise ConfigError("Policy kind {} has no open-loop schedule".format(kind),
                      section="policy", key="kind")


def _trajectory_table(traj):
    return Table("trajectory", {
        "t": traj.times, "s": traj.s, "i_u": traj.i_u, "i_d": traj.i_d, "r_u": traj.r_u,
        "r_d": traj.r_d, "theta": traj.theta, "cost": traj.cost,
    })


def _deterministic(scenario, options):
    step = scenario["simulation"]["step"]
    if scenario.policy == "receding-closed-loop":
        traj = receding_replay(scenario.initial.fractions(), controller_config(scenario),
                               scenario.params, scenario.horizon, beta=scenario.beta,
                               step=step)
    else:
        traj = solve_policy(scenario).replay(scenario.horizon, step)
    monitored  = traj.i_u if scenario.policy == "theorem1" else traj.infected
    violations = int(np.count_nonzero(monitored > scenario.i_max + CEILING_TOLERANCE))
    if violations:
        logger.warning("Ceiling %.6g exceeded at %d sample(s)", scenario.i_max, violations)
    return _Outcome([_trajectory_table(traj)], traj.total_cost, violations)


def _schedule_entries(policy, horizon):
    if policy.kind == "theorem1":
        entries = [("t_hit", policy.t_hit), ("t_herd", policy.t_herd)]
    elif policy.kind == "switching":
        entries = [("t_a", policy.t_a), ("t_b", policy.t_b), ("t_c", policy.t_c),
                   ("t_d", policy.t_d), ("t_e", policy.t_e), ("tau3", policy.tau3),
                   ("tau3_min", policy.tau3_min), ("tau3_bar", policy.tau3_bar)]
    else:
        entries = [("theta", policy.theta), ("s_bar", policy.s_bar),
                   ("t_bar", policy.t_bar)]
    entries.append(("cost", policy.cost(horizon)))
    entries.extend(("residual_{}".format(name), value)
                   for name, value in sorted(getattr(policy, "residuals", {}).items()))
    return entries


def _optimize(scenario, options):
    policy  = solve_policy(scenario)
    entries = _schedule_entries(policy, scenario.horizon)
    tables  = [Table("schedule", {"quantity": [name for name, _ in entries],
                                  "value": [value for _, value in entries]})]
    if options.get("cost_curve"):
        if policy.kind != "switching":
            raise ConfigError("A cost curve needs the switching policy kind",
                              section="policy", key="kind")
        x0 = scenario.initial.fractions()
        grid, costs = switching_cost_curve(x0, scenario.i_max, scenario.params)
        constant    = solve_constant_rate(x0, scenario.i_max, scenario.params)
        reference   = constant.cost(scenario.horizon)
        normalized  = costs / reference if reference > 0 else np.full_like(costs, np.nan)
        tables.append(Table("cost_curve", {"tau3": grid, "cost": costs,
                                           "normalized": normalized}))
    lines = ["{} {} = {:.10g}".format(policy.kind, name, value) for name, value in entries]
    return _Outcome(tables, policy.cost(scenario.horizon), 0, lines)


def _simulate(scenario, options):
    policy     = solve_policy(scenario)
    simulation = scenario["simulation"]
    summary    = ensemble_run(simulation["replicates"], scenario.initial, policy,
                              scenario.params, scenario.horizon, scenario.seed,
                              epoch=simulation["epoch"], beta=scenario.beta,
                              jobs=scenario.jobs)
    columns = {"t": summary.times, "theta_mean": summary.theta_mean}
    for index, name in enumerate(summary.columns):
        columns["{}_mean".format(name)]  = summary.mean[:, index]
        columns["{}_lower".format(name)] = summary.lower[:, index]
        columns["{}_upper".format(name)] = summary.upper[:, index]
    n        = scenario.initial.n
    infected = (summary.mean[:, 1] + summary.mean[:, 2]) * n
    violations = int(np.count_nonzero(infected > scenario.i_max * n + 2 * math.sqrt(n)))
    return _Outcome([Table("ensemble", columns)], policy.cost(scenario.horizon), violations)


def _closed_loop(scenario, options):
    cfg     = controller_config(scenario)
    summary = closed_loop_ensemble(scenario["simulation"]["replicates"], scenario.initial,
                                   cfg, scenario.params, scenario.seed,
                                   horizon=scenario.horizon, jobs=scenario.jobs,
                                   **closed_loop_options(scenario))
    first = summary.records[0]
    trace = Table("closed_loop", {
        "t": first.times,
        "S": first.counts[:, 0], "I_u": first.counts[:, 1], "I_d": first.counts[:, 2],
        "R_u": first.counts[:, 3],
        "s_hat": first.estimates[:, 0], "i_u_hat": first.estimates[:, 1],
        "r_u_hat": first.estimates[:, 2], "i_d_hat": first.estimates[:, 3],
        "i_u_var": first.covariances[:, 1, 1],
        "theta": first.theta, "beta_true": first.beta_true, "beta_hat": first.beta_hat,
        "adaptive": first.adaptive, "cost": first.cost, "tests": first.tests,
    })
    records = summary.records
    replicates = Table("replicates", {
        "replicate":     list(range(len(records))),
        "total_cost":    [rec.total_cost for rec in records],
        "constant_cost": summary.constant_costs,
        "eradicated_at": [rec.eradicated_at for rec in records],
        "max_excess":    [rec.max_excess(cfg.i_max) for rec in records],
        "violated":      [rec.violates(cfg.i_max) for rec in records],
    })
    return _Outcome([trace, replicates], float(summary.costs.mean()),
                    len(summary.violations),
                    ["normalized cost = {:.6g}".format(summary.normalized_cost)])


def _cost_sweep(scenario, options):
    report = cost_sweep(scenario)
    best   = report.best()
    lines  = ["constant theta = {:.6g}".format(report.constant_theta)]
    if best is not None:
        lines.append("best theta_b = {:.6g} (normalized {:.6g})".format(
            best["theta_b"], best["normalized"]))
    violations = len(report.flagged) if options.get("strict") else 0
    if report.flagged and not options.get("strict"):
        logger.warning("%d row(s) flagged for ceiling violations", len(report.flagged))
    cost = best["total"] if best is not None else math.nan
    return _Outcome([report.as_table()], cost, violations, lines)


def _observability(scenario, options):
    settings = scenario["observability"]
    params   = scenario.params
    twins = counterexample_pair(settings["s0"], settings["s0_shadow"], settings["i0"],
                                settings["theta"], params, settings["horizon"],
                                step=settings["step"])
    tables = [Table("twins", {
        "t": twins.primary.times,
        "s": twins.primary.s, "s_shadow": twins.shadow.s,
        "i_u": twins.primary.i_u, "i_u_shadow": twins.shadow.i_u,
        "i_d": twins.primary.i_d, "i_d_shadow": twins.shadow.i_d,
        "beta_shadow": twins.shadow_beta,
    })]
    lines = ["detected gap = {:.3g}".format(twins.detected_gap),
             "susceptible gap = {:.3g}".format(twins.susceptible_gap)]
    try:
        for label, traj in (("primary", twins.primary), ("shadow", twins.shadow)):
            rec = reconstruct_from_molecular(traj.times, traj.i_d, settings["theta"], params)
            lines.append("{} beta from molecular data = {:.6g}".format(label, rec.beta))
    except IllPosedError as e:
        logger.warning("Skipping molecular reconstruction: %s", e)

    if params.theta_b > 0 and params.eta_br > 0:
        s0, i0 = settings["s0"], settings["i0"]
        traj = integrate(FractionState(s0, i0, 0.0, 1.0 - s0 - i0), params, settings["theta"],
                         beta=scenario.beta, horizon=settings["horizon"],
                         step=settings["step"])
        rec  = reconstruct_from_serology(traj.times, traj.i_d, traj.r_d, settings["theta"],
                                         params)
        tables.append(Table("serology", {
            "t": traj.times, "i_u": traj.i_u, "i_u_hat": rec.i_u, "r_u": traj.r_u,
            "r_u_hat": rec.r_u, "s": traj.s, "s_hat": rec.s,
            "beta": scenario.beta(traj.times), "beta_hat": rec.beta,
        }))
    else:
        logger.warning("Background serology is off; skipping the serology reconstruction")
    return _Outcome(tables, math.nan, 0, lines)


_RUNNERS = {
    "deterministic": _deterministic,
    "optimize":      _optimize,
    "simulate":      _simulate,
    "closed-loop":   _closed_loop,
    "cost-sweep":    _cost_sweep,
    "observability": _observability,
}


def _status_of(error):
    if isinstance(error, ConfigError):
        return EXIT_CONFIG
    if isinstance(error, SolverError):
        return EXIT_SOLVER
    if isinstance(error, (InvariantViolation, IntegrationError, ContractViolation,
                          IllPosedError)):
        return EXIT_INVARIANT
    return None


def run_scenario(config, subcommand, *, seed=None, jobs=None, out=None, cost_curve=False,
                 strict=False):
    """Load a scenario, run one subcommand and write its artifacts.

    Parameters
    ----------
    config : str or path-like or file object
        Scenario file.
    subcommand : str
        One of :data:`SUBCOMMANDS`.
    seed, jobs, out : optional
        Overrides of the master seed, the worker count and the output directory.
    cost_curve : bool
        Also emit the switching cost curve (``optimize`` only).
    strict : bool
        Make flagged cost-sweep rows fail the run.

    Return value
    ------------
    A :class:`RunResult`. Domain failures are reported through its status rather
    than raised.
    """
    if subcommand not in _RUNNERS:
        raise ValueError("Subcommand must be one of {}, not {!r}"
                         .format(", ".join(SUBCOMMANDS), subcommand))
    scenario = None
    try:
        scenario = load_scenario(config)
        scenario.override(seed=seed, jobs=jobs, out_dir=out)
        outcome = _RUNNERS[subcommand](scenario, {"cost_curve": cost_curve, "strict": strict})
        plan    = ArtifactBuilder().prepare(scenario, subcommand, outcome.tables)
        paths   = plan.write(scenario.out_dir)
    except Exception as e:
        status = _status_of(e)
        if status is None:
            raise
        summary = "[OPTITEST] {}: failed ({}: {})".format(subcommand, type(e).__name__, e)
        if scenario is not None:
            summary += " seed={}".format(scenario.seed)
        return RunResult(status, summary, error=e)

    status = EXIT_OK
    if outcome.violations and (subcommand != "cost-sweep" or strict):
        status = EXIT_INVARIANT
        error  = InvariantViolation("{} ceiling violation(s) during {}"
                                    .format(outcome.violations, subcommand))
    else:
        error  = None
    summary = "[OPTITEST] {}: policy={} seed={} cost={:.6g} violations={} files={}".format(
        subcommand, scenario.policy, scenario.seed, outcome.cost, outcome.violations,
        len(paths))
    return RunResult(status, summary, paths, outcome.lines, error)
