import logging
import math

import numpy as np

from ..control import ControllerConfig, closed_loop_ensemble
from ..policy import solve_switching
from .artifacts import Table


__all__ = ["controller_config", "closed_loop_options", "CostReport", "cost_sweep"]


logger = logging.getLogger(__name__)


def controller_config(scenario):
    """Controller settings of a scenario.

    Unless the controller is always on or its start is given explicitly, it starts at
    the first switching time of the optimal switching policy for the nominal model.
    """
    controller = scenario["controller"]
    t_a        = controller["t_a"]
    if t_a is None and not controller["always_on"]:
        policy = solve_switching(scenario.initial.fractions(), scenario.i_max,
                                 scenario.params.replace(theta_b=0.0))
        t_a    = policy.t_a if math.isfinite(policy.t_a) else 0.0
        logger.info("Receding-horizon control starts at t=%.6g", t_a)
    return ControllerConfig(scenario.i_max, horizon=controller["horizon"], t_a=t_a or 0.0,
                            epoch=scenario["simulation"]["epoch"],
                            always_on=controller["always_on"])


def closed_loop_options(scenario):
    estimator = scenario["estimator"]
    return {
        "beta":        scenario.beta,
        "track_beta":  estimator["track_beta"],
        "filter_step": estimator["filter_step"],
        "beta_window": estimator["beta_window"],
        "i_max_count": scenario["population"]["i_max_count"],
    }


class CostReport:
    """Mean cost of closed-loop control per background serology rate.

    Attributes
    ----------
    rows : list of dict
        One row per serology rate, with the keys of :attr:`columns`.
    constant_theta : float
        Rate of the constant-testing reference.
    """
    columns = ("theta_b", "adaptive", "serology", "total", "normalized", "ci_half_width",
               "n_reps", "violations")

    def __init__(self, rows, constant_theta):
        self.rows           = list(rows)
        self.constant_theta = constant_theta

    @property
    def flagged(self):
        return [row for row in self.rows if row["violations"]]

    def best(self):
        """Row with the smallest normalized total cost."""
        finite = [row for row in self.rows if math.isfinite(row["normalized"])]
        if not finite:
            return None
        return min(finite, key=lambda row: row["normalized"])

    def as_table(self, name="cost_report"):
        return Table(name, {column: [row[column] for row in self.rows]
                            for column in self.columns})


def _row(theta_b, summary, constant_costs):
    costs    = np.array([rec.total_cost for rec in summary.records])
    adaptive = np.array([rec.adaptive[-1] if len(rec.adaptive) else 0.0
                         for rec in summary.records])
    n_reps   = len(costs)
    mean_adaptive = float(adaptive.mean())
    mean_serology = float((costs - adaptive).mean())
    total    = mean_adaptive + mean_serology
    reference = float(np.mean(constant_costs))
    return {
        "theta_b":       theta_b,
        "adaptive":      mean_adaptive,
        "serology":      mean_serology,
        "total":         total,
        "normalized":    total / reference if reference > 0 else math.nan,
        "ci_half_width": 1.96 * float(costs.std(ddof=1)) / math.sqrt(n_reps)
                         if n_reps > 1 else math.nan,
        "n_reps":        n_reps,
        "violations":    len(summary.violations),
    }


def cost_sweep(scenario, theta_b_grid=None, *, jobs=None):
    """Closed-loop cost against the constant-testing reference over serology rates.

    Every grid point reuses the scenario's master seed, so each replicate sees the
    same population stream at every rate, and the constant arm, which runs without
    serology, is simulated once.

    Exceptions
    ----------
    Raises :exn:`ValueError` if the grid is empty.
    """
    grid = tuple(scenario["sweep"]["theta_b"] if theta_b_grid is None else theta_b_grid)
    if not grid:
        raise ValueError("Serology rate grid must not be empty")
    jobs    = scenario.jobs if jobs is None else jobs
    options = closed_loop_options(scenario)
    cfg     = controller_config(scenario)
    rows, reference, constant_theta = [], None, math.nan
    for theta_b in grid:
        params  = scenario.params.replace(theta_b=theta_b)
        summary = closed_loop_ensemble(
            scenario["simulation"]["replicates"], scenario.initial, cfg, params,
            scenario.seed, horizon=scenario.horizon, compare=reference is None, jobs=jobs,
            **options)
        if reference is None:
            reference, constant_theta = summary.constant_costs, summary.constant_theta
        row = _row(theta_b, summary, reference)
        if row["violations"]:
            logger.warning("theta_b=%g: %d replicate(s) exceeded the ceiling", theta_b,
                           row["violations"])
        logger.info("theta_b=%g: total cost %.6g, normalized %.4g", theta_b, row["total"],
                    row["normalized"])
        rows.append(row)
    return CostReport(rows, constant_theta)
