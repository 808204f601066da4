import logging
import math

import numpy as np
from joblib import Parallel, delayed

from ..estimate import Observation, estimate_beta, initial_estimate, predict, update
from ..model import ConstantBeta, as_beta_signal
from ..policy import solve_constant_rate
from ..stochastic import CountState, GillespieSimulator, gillespie_run, replicate_rng
from .receding import control_law


__all__ = ["ClosedLoopRecord", "closed_loop", "constant_arm", "ClosedLoopSummary",
           "closed_loop_ensemble"]


logger = logging.getLogger(__name__)


class ClosedLoopRecord:
    """Per-epoch trace of one closed-loop run.

    Attributes
    ----------
    times : ndarray
        Epoch starts.
    counts : ndarray
        ``(n, 4)`` true counts ``(S, I_u, I_d, R_u)`` at each epoch start.
    estimates : ndarray
        ``(n, 4)`` filter means, ordered ``(s, i_u, r_u, i_d)``, after each update.
    covariances : ndarray
        ``(n, 4, 4)`` filter covariances after each update.
    theta : ndarray
        Molecular testing rate held over each epoch.
    beta_true, beta_hat : ndarray
        Contact rate driving the population and the controller's estimate.
    adaptive : ndarray
        Cumulative molecular testing effort ``sum theta * epoch``.
    cost : ndarray
        Cumulative cost ``sum (theta + c_ser theta_b) * epoch`` at the end of each epoch.
    tests : ndarray
        Cumulative tests per capita ``sum (theta + theta_b) * epoch``.
    eradicated_at : float
        Time no infected individual is left; infinite if not within the horizon.
    n : int
        Population size.
    """
    def __init__(self, times, counts, estimates, covariances, theta, beta_true, beta_hat,
                 adaptive, cost, tests, eradicated_at, n):
        self.times       = np.asarray(times, dtype=float)
        self.counts      = np.asarray(counts, dtype=np.int64).reshape(-1, 4)
        self.estimates   = np.asarray(estimates, dtype=float).reshape(-1, 4)
        self.covariances = np.asarray(covariances, dtype=float).reshape(-1, 4, 4)
        self.theta       = np.asarray(theta, dtype=float)
        self.beta_true   = np.asarray(beta_true, dtype=float)
        self.beta_hat    = np.asarray(beta_hat, dtype=float)
        self.adaptive    = np.asarray(adaptive, dtype=float)
        self.cost        = np.asarray(cost, dtype=float)
        self.tests       = np.asarray(tests, dtype=float)
        self.eradicated_at = eradicated_at
        self.n           = n

    @property
    def total_cost(self):
        return float(self.cost[-1]) if len(self.cost) else 0.0

    @property
    def infected(self):
        return self.counts[:, 1] + self.counts[:, 2]

    def max_excess(self, i_max):
        """Largest number of infected individuals above the ceiling."""
        peak = int(self.infected.max()) if len(self.counts) else 0
        return peak - i_max * self.n

    def violates(self, i_max):
        """Whether the ceiling was exceeded by more than two standard deviations of the
        population noise."""
        return self.max_excess(i_max) > 2 * math.sqrt(self.n)


def closed_loop(x0, cfg, params, seed, *, beta=None, track_beta=False, horizon=365.0,
                filter_step=0.1, i_max_count=None, beta_window=7):
    """Run the estimate-then-control loop against a stochastic population.

    At each epoch boundary the exact detected counts are observed, the filter is
    updated, the contact rate estimate is refreshed if ``track_beta`` is set, the
    controller picks a rate, and the population is simulated over the epoch with
    that rate held. The run stops at eradication or at the horizon.

    Parameters
    ----------
    x0 : :class:`CountState`
        Initial counts.
    cfg : :class:`ControllerConfig`
        Controller settings.
    seed : int, :class:`numpy.random.SeedSequence` or :class:`numpy.random.Generator`
        Randomness of the population.
    beta : :class:`BetaSignal`, float or None
        True contact rate; defaults to ``params.beta``.
    track_beta : bool
        Refit the contact rate from the last ``beta_window`` epochs of estimates.
    i_max_count : int or None
        Ceiling in individuals, used for the prior; defaults to ``round(i_max * n)``.
    """
    if not isinstance(x0, CountState):
        raise TypeError("Initial state must be an instance of CountState, not {!r}"
                        .format(x0))
    truth  = ConstantBeta(params.beta) if beta is None else as_beta_signal(beta)
    rng    = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    sim    = GillespieSimulator(x0, params, rng)
    n      = x0.n
    i_max_count = round(cfg.i_max * n) if i_max_count is None else i_max_count
    epoch  = cfg.epoch
    serology_rate = params.c_ser * params.theta_b

    columns  = {key: [] for key in ("times", "counts", "estimates", "covariances", "theta",
                                    "beta_true", "beta_hat", "adaptive", "cost", "tests")}
    history  = []
    beta_hat = params.beta
    model    = params
    adaptive = cost = tests = 0.0
    eradicated_at = math.inf
    est = initial_estimate(n, i_max_count)
    for k in range(max(1, math.ceil(horizon / epoch - 1e-9))):
        t = k * epoch
        if sim.eradicated:
            eradicated_at = t
            break
        if k:
            est = predict(est, theta, epoch, model, n=n, step=filter_step)
        est = update(est, Observation.from_counts(sim.state))

        if track_beta:
            fit = estimate_beta(history + [(est, None)], params, window=beta_window,
                                previous=beta_hat)
            beta_hat = fit.beta
            model    = params.replace(beta=beta_hat)
        theta = control_law(t, est, cfg, model)
        history.append((est, theta))

        beta_t = float(truth(t))
        counts = sim.counts.copy()
        span   = min(t + epoch, horizon) - t
        sim.advance(t + span, theta, beta_t)
        adaptive += theta * span
        cost     += (theta + serology_rate) * span
        tests    += (theta + params.theta_b) * span
        for key, value in (("times", t), ("counts", counts), ("estimates", est.x),
                           ("covariances", est.P), ("theta", theta), ("beta_true", beta_t),
                           ("beta_hat", beta_hat), ("adaptive", adaptive), ("cost", cost),
                           ("tests", tests)):
            columns[key].append(value)
    else:
        if sim.eradicated:
            eradicated_at = sim.t

    logger.debug("Closed loop stopped at t=%g with cost %.6g", sim.t, cost)
    return ClosedLoopRecord(n=n, eradicated_at=eradicated_at, **columns)


def constant_arm(x0, params, i_max, seed, *, horizon=365.0, epoch=1.0, theta=None,
                 beta=None):
    """Cost of the cheapest constant rate on the same population stream.

    The rate is solved on the deterministic model without background serology, then
    held until eradication. A precomputed ``theta`` skips the solve.

    Return value
    ------------
    ``(theta, eradication_time, cost)``.
    """
    untested = params.replace(theta_b=0.0)
    if theta is None:
        theta = solve_constant_rate(x0.fractions(), i_max, untested).theta
    path = gillespie_run(x0, theta, untested, horizon, seed, epoch=epoch, beta=beta)
    stop = min(path.eradicated_at, horizon)
    return theta, path.eradicated_at, theta * stop


class ClosedLoopSummary:
    """Closed-loop replicates next to the constant-rate arm on matched seeds.

    Attributes
    ----------
    records : list of :class:`ClosedLoopRecord`
    constant_theta : float
        Rate of the constant arm.
    constant_costs : ndarray
        Constant-arm cost of each replicate.
    violations : list of int
        Indices of replicates that exceeded the ceiling by more than two standard
        deviations of the population noise.
    """
    def __init__(self, records, constant_theta, constant_costs, i_max, master_seed):
        self.records        = list(records)
        self.constant_theta = constant_theta
        self.constant_costs = np.asarray(constant_costs, dtype=float)
        self.i_max          = i_max
        self.master_seed    = master_seed
        self.violations     = [k for k, rec in enumerate(self.records) if rec.violates(i_max)]

    @property
    def costs(self):
        return np.array([rec.total_cost for rec in self.records])

    @property
    def normalized_cost(self):
        """Mean closed-loop cost over mean constant-arm cost."""
        if not len(self.constant_costs):
            return math.nan
        reference = self.constant_costs.mean()
        if reference <= 0:
            return math.nan
        return float(self.costs.mean() / reference)


def _replicate(index, master_seed, x0, cfg, params, horizon, theta, options):
    record = closed_loop(x0, cfg, params, replicate_rng(master_seed, index), horizon=horizon,
                         **options)
    reference = None
    if theta is not None:
        reference = constant_arm(x0, params, cfg.i_max, replicate_rng(master_seed, index),
                                 horizon=horizon, epoch=cfg.epoch, theta=theta,
                                 beta=options.get("beta"))
    return record, reference


def closed_loop_ensemble(n_reps, x0, cfg, params, master_seed, *, horizon=365.0,
                         compare=True, jobs=1, **options):
    """Run closed-loop replicates and, when ``compare`` is set, the constant-rate arm
    on the same per-replicate seed.

    Replicate ``k`` draws from ``SeedSequence([master_seed, k])``. Remaining keyword
    arguments are passed to :func:`closed_loop`.
    """
    if n_reps < 1:
        raise ValueError("Replicate count must be at least 1, not {!r}".format(n_reps))
    theta = None
    if compare:
        theta = solve_constant_rate(x0.fractions(), cfg.i_max,
                                    params.replace(theta_b=0.0)).theta
    results = Parallel(n_jobs=jobs)(
        delayed(_replicate)(index, master_seed, x0, cfg, params, horizon, theta, options)
        for index in range(n_reps))
    records = [record for record, _ in results]
    costs   = [reference[2] for _, reference in results if reference is not None]
    summary = ClosedLoopSummary(records, math.nan if theta is None else theta, costs,
                                cfg.i_max, master_seed)
    for index in summary.violations:
        logger.warning("Replicate %d exceeded the ceiling by %.0f individuals", index,
                       records[index].max_excess(cfg.i_max))
    logger.info("Closed loop over %d replicates: mean cost %.6g, normalized %.4g",
                n_reps, summary.costs.mean(), summary.normalized_cost)
    return summary
