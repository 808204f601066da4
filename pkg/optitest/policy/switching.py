import logging
import math

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from ..errors import ConvergenceError, InfeasibleError, SolverError
from ..model import (S, IU, DEFAULT_STEP, detected_transfer, harko_dt, integrate, orbit_iu,
                     removal_rate)
from .base import Policy
from .newton import multistart
from .shooting import SEED_STEP, bisect, first_peak


__all__ = ["SwitchingPolicy", "solve_switching", "switching_cost_curve", "plateau_rate"]


logger = logging.getLogger(__name__)


MAX_TAIL           = 1000.0
REBOUND_DECAY      = 25.0
MIN_ARC            = 1e-8
TANGENCY_TOLERANCE = 1e-5
UNSOLVED_COST      = 1e6


def plateau_rate(s, i_u, params):
    """Testing rate that holds the infected fraction flat once it sits at the ceiling."""
    return (params.beta * (s - i_u) - params.baseline_removal) / params.eta


def _closed_form_cost(params, i_max, s_b, iu_b, tau2, tau3, tau4):
    # on the plateau s falls linearly and 1/i_u falls linearly
    plateau = (tau3 * (params.beta * s_b - params.baseline_removal
                       - 0.5 * params.gamma * params.beta * i_max * tau3)
               + math.log(1 - params.beta * iu_b * tau3)) / params.eta
    return (tau2 + tau4) * params.theta_max + plateau


class SwitchingPolicy(Policy):
    """Bang-bang switching policy.

    No testing until :attr:`t_a`, maximal testing until the infected fraction touches
    the ceiling at :attr:`t_b`, the plateau rate for :attr:`tau3` days, maximal
    testing again until :attr:`t_d`, then no testing. Without further testing the
    infected fraction touches the ceiling once more at :attr:`t_e` and declines.

    Attributes
    ----------
    t_a, t_b, t_c, t_d, t_e : float
        Switching times; all infinite for the zero policy.
    points : dict
        ``{"A": (s, i_u, i_d), ...}`` states at the switching times.
    tau3, tau3_min, tau3_bar : float
        Plateau duration and the range it was chosen from.
    residuals : dict
        Residuals of the defining conditions at the solution.
    """
    kind = "switching"

    def __init__(self, params, x0, i_max, times, points, tau3=0.0, tau3_bar=0.0,
                 tau3_min=0.0, residuals=None):
        super().__init__(params, x0, i_max)
        self.t_a, self.t_b, self.t_c, self.t_d, self.t_e = times
        self.points    = points
        self.tau3      = tau3
        self.tau3_bar  = tau3_bar
        self.tau3_min  = tau3_min
        self.residuals = residuals or {}

    @classmethod
    def zero(cls, params, x0, i_max):
        return cls(params, x0, i_max, (math.inf,) * 5, {})

    @property
    def is_zero(self):
        return not math.isfinite(self.t_a)

    @property
    def breakpoints(self):
        return tuple(sorted({t for t in (self.t_a, self.t_b, self.t_c, self.t_d)
                             if math.isfinite(t)}))

    def rate(self, t, x):
        theta_max = self.params.theta_max
        if t < self.t_a or t >= self.t_d:
            return 0.0
        if t < self.t_b or t >= self.t_c:
            return theta_max
        return min(theta_max, max(0.0, plateau_rate(x[S], x[IU], self.params)))

    def feedback_rate(self, state):
        """Rate as a function of the state alone, switching on susceptible thresholds."""
        if self.is_zero:
            return 0.0
        s, i_u = state[S], state[IU]
        theta_max = self.params.theta_max
        if s > self.points["A"][0] or s <= self.points["D"][0]:
            return 0.0
        if s > self.points["B"][0] or s <= self.points["C"][0]:
            return theta_max
        return min(theta_max, max(0.0, plateau_rate(s, i_u, self.params)))

    def cost(self, horizon=None):
        """Closed-form total testing effort."""
        if self.is_zero:
            return 0.0
        s_b, iu_b, _ = self.points["B"]
        return _closed_form_cost(self.params, self.i_max, s_b, iu_b, self.t_b - self.t_a,
                                 self.tau3, self.t_d - self.t_c)


class _SwitchingProblem:
    """Reduced equations of the switching policy for fixed inputs."""
    def __init__(self, x0, i_max, params):
        self.x0     = x0
        self.i_max  = i_max
        self.params = params

    # Phase A-B: untested epidemic, then maximal testing up to the first tangency.

    def _ab_residual(self, z):
        p, x0 = self.params, self.x0
        s_a, s_b = z
        if not 0 < s_b < s_a <= x0.s:
            raise ValueError("Outside the domain")
        iu_a = orbit_iu(0.0, s_a, x0.s, x0.i_u, p)
        id_a = detected_transfer(0.0, s_a, x0.s, x0.i_u, x0.i_d, p)
        iu_b = orbit_iu(p.theta_max, s_b, s_a, iu_a, p)
        if iu_b <= 0:
            raise ValueError("Orbit exhausted")
        id_b = detected_transfer(p.theta_max, s_b, s_a, iu_a, id_a, p)
        return [p.beta * s_b * iu_b / p.gamma - self.i_max, iu_b + id_b - self.i_max]

    def _ab_seed(self, t_hit):
        p, x0 = self.params, self.x0

        def excess(t_a):
            x_a = integrate(x0, p, 0.0, horizon=t_a, step=SEED_STEP).states[-1]
            return first_peak(x_a, p, p.theta_max, t0=t_a).value - self.i_max

        _, t_a = bisect(excess, t_hit, 0.0, tol=1e-6)
        x_a  = integrate(x0, p, 0.0, horizon=t_a, step=SEED_STEP).states[-1]
        peak = first_peak(x_a, p, p.theta_max, t0=t_a)
        return (min(x_a[S], x0.s), peak.x[S])

    def solve_ab(self, t_hit):
        p, x0 = self.params, self.x0
        seed = self._ab_seed(t_hit)

        def seeds():
            yield seed
            for frac in (0.98, 0.95, 0.9):
                yield (seed[0], seed[0] * frac)

        result = multistart(self._ab_residual, seeds())
        s_a, s_b = result.x
        iu_a = orbit_iu(0.0, s_a, x0.s, x0.i_u, p)
        id_a = detected_transfer(0.0, s_a, x0.s, x0.i_u, x0.i_d, p)
        iu_b = orbit_iu(p.theta_max, s_b, s_a, iu_a, p)
        id_b = detected_transfer(p.theta_max, s_b, s_a, iu_a, id_a, p)
        self.points = {"A": (s_a, iu_a, id_a), "B": (s_b, iu_b, id_b)}
        self.t_a    = harko_dt(0.0, s_a, x0.s, x0.i_u, p)
        self.t_b    = self.t_a + harko_dt(p.theta_max, s_b, s_a, iu_a, p)
        self.residuals = {"A1": float(result.residual[0]), "A2": float(result.residual[1])}
        self.tau3_bar  = self._tau3_bar()
        logger.info("First tangency at t=%.6g after testing from t=%.6g; plateau bound %.6g",
                    self.t_b, self.t_a, self.tau3_bar)
        if plateau_rate(s_b, iu_b, p) > p.theta_max:
            logger.warning("Plateau rate %.4g at the first tangency exceeds the maximal rate",
                           plateau_rate(s_b, iu_b, p))

    # Phase C: plateau of duration tau3, closed form.

    def plateau_end(self, tau3):
        p = self.params
        s_b, iu_b, _ = self.points["B"]
        s_c  = s_b - p.gamma * self.i_max * tau3
        iu_c = 1.0 / (1.0 / iu_b - p.beta * tau3)
        return s_c, iu_c, self.i_max - iu_c

    def _tau3_bar(self):
        p = self.params
        s_b, iu_b, _ = self.points["B"]
        singular = 1.0 / (p.beta * iu_b)

        def rate(tau3):
            s_c, iu_c, _ = self.plateau_end(tau3)
            return plateau_rate(s_c, iu_c, p)

        if rate(0.0) <= 0:
            return 0.0
        return brentq(rate, 0.0, singular * (1 - 1e-12), xtol=1e-12)

    # Phase C-D-E: maximal testing, then none until the second tangency.

    def _cde_residual(self, z, c_point):
        p = self.params
        s_c, iu_c, id_c = c_point
        s_d, s_e = z
        if not 0 < s_e < s_d < s_c:
            raise ValueError("Outside the domain")
        iu_d = orbit_iu(p.theta_max, s_d, s_c, iu_c, p)
        if iu_d <= 0:
            raise ValueError("Orbit exhausted")
        id_d = detected_transfer(p.theta_max, s_d, s_c, iu_c, id_c, p)
        iu_e = orbit_iu(0.0, s_e, s_d, iu_d, p)
        if iu_e <= 0:
            raise ValueError("Orbit exhausted")
        id_e = detected_transfer(0.0, s_e, s_d, iu_d, id_d, p)
        return [p.beta * s_e * iu_e / p.gamma - self.i_max, iu_e + id_e - self.i_max]

    def _rebound_excess(self, c_point):
        """Excess of the untested rebound over the ceiling after ``tau4`` days of
        maximal testing from ``c_point``, and the longest ``tau4`` worth trying."""
        p   = self.params
        x_c = np.array([*c_point, 0.0])
        # maximal testing shrinks i_u by about e^-25 within the cap
        decay = removal_rate(p.theta_max, p) - p.beta * c_point[0]
        cap   = min(MAX_TAIL, REBOUND_DECAY / decay) if decay > 0 else MAX_TAIL

        def excess(tau4):
            x_d = integrate(x_c, p, p.theta_max, horizon=tau4, step=SEED_STEP).states[-1]
            return first_peak(x_d, p, 0.0).value - self.i_max

        return excess, cap

    def feasible(self, tau3):
        """Whether some final burst of maximal testing keeps the rebound under the
        ceiling after a plateau of ``tau3`` days."""
        if self.tau3_bar - tau3 <= 1e-9 * max(1.0, self.tau3_bar):
            return True
        excess, cap = self._rebound_excess(self.plateau_end(tau3))
        try:
            return excess(cap) <= 0
        except SolverError:
            return False

    def _tau3_min(self):
        if self.tau3_bar == 0 or self.feasible(0.0):
            return 0.0
        _, hi = bisect(lambda tau3: 0.0 if self.feasible(tau3) else 1.0, 0.0, self.tau3_bar,
                       tol=1e-5)
        return hi

    def _cde_seed(self, c_point):
        excess, cap = self._rebound_excess(c_point)
        if excess(cap) > 0:
            raise ConvergenceError("No second tangency within {:.6g} days of maximal testing"
                                   .format(cap))
        _, tau4 = bisect(excess, 0.0, cap, tol=1e-5)
        x_c  = np.array([*c_point, 0.0])
        x_d  = integrate(x_c, self.params, self.params.theta_max, horizon=tau4,
                         step=SEED_STEP).states[-1]
        peak = first_peak(x_d, self.params, 0.0)
        return (x_d[S], peak.x[S])

    def _d_point(self, s_d, c_point):
        p = self.params
        s_c, iu_c, id_c = c_point
        return (s_d, orbit_iu(p.theta_max, s_d, s_c, iu_c, p),
                detected_transfer(p.theta_max, s_d, s_c, iu_c, id_c, p))

    def _is_rebound_tangency(self, z, c_point):
        # the untested arc from D must peak at E, on the ceiling
        if not c_point[0] - z[0] > MIN_ARC or not z[0] - z[1] > MIN_ARC:
            return False
        s_d, iu_d, id_d = self._d_point(z[0], c_point)
        peak = first_peak(np.array([s_d, iu_d, id_d, 0.0]), self.params, 0.0)
        return abs(peak.value - self.i_max) <= TANGENCY_TOLERANCE

    def solve_cde(self, tau3, warm=None):
        """Return ``(points, tau4, tau5, residual)`` for a plateau of ``tau3`` days.

        ``warm`` is an earlier ``(c_point, d_point, e_point)`` solution whose offsets
        seed the iteration.

        Exceptions
        ----------
        Raises :exn:`ConvergenceError` if no genuine second tangency is found.
        """
        p = self.params
        c_point = self.plateau_end(tau3)
        if self.tau3_bar - tau3 <= 1e-9 * max(1.0, self.tau3_bar):
            return {"C": c_point, "D": c_point, "E": c_point}, 0.0, 0.0, (0.0, 0.0)

        def seeds():
            if warm is not None:
                (s_c0, _, _), (s_d0, _, _), (s_e0, _, _) = warm
                if s_c0 - s_d0 > 0:
                    yield (c_point[0] - (s_c0 - s_d0), c_point[0] - (s_c0 - s_e0))
            yield self._cde_seed(c_point)

        result = multistart(lambda z: self._cde_residual(z, c_point), seeds(),
                            accept=lambda z: self._is_rebound_tangency(z, c_point))
        s_d, s_e = result.x
        s_c, iu_c, _ = c_point
        _, iu_d, id_d = d_point = self._d_point(s_d, c_point)
        iu_e = orbit_iu(0.0, s_e, s_d, iu_d, p)
        id_e = self.i_max - iu_e
        tau4 = harko_dt(p.theta_max, s_d, s_c, iu_c, p)
        tau5 = harko_dt(0.0, s_e, s_d, iu_d, p)
        points = {"C": c_point, "D": d_point, "E": (s_e, iu_e, id_e)}
        return points, tau4, tau5, tuple(float(r) for r in result.residual)

    def cost(self, tau3, tau4):
        s_b, iu_b, _ = self.points["B"]
        return _closed_form_cost(self.params, self.i_max, s_b, iu_b, self.t_b - self.t_a,
                                 tau3, tau4)


def _prepare(x0, i_max, params):
    Policy._check_inputs(x0, i_max)
    if params.theta_max <= 0:
        raise InfeasibleError("Maximal testing rate must be positive")
    if first_peak(x0, params, params.theta_max).value > i_max:
        raise InfeasibleError("Maximal testing from t=0 still exceeds the ceiling {!r}"
                              .format(i_max))
    peak = first_peak(x0, params, 0.0)
    if peak.value <= i_max:
        return None
    untested = integrate(x0, params, 0.0, horizon=peak.t, step=SEED_STEP)
    above    = np.flatnonzero(untested.infected >= i_max)
    t_hit    = float(untested.times[above[0]]) if len(above) else peak.t
    problem  = _SwitchingProblem(x0, i_max, params)
    problem.solve_ab(t_hit)
    problem.tau3_min = problem._tau3_min()
    logger.info("Plateau durations from %.6g to %.6g days admit a second tangency",
                problem.tau3_min, problem.tau3_bar)
    return problem


def _evaluator(problem):
    cache = {}
    last  = {}

    def evaluate(tau3):
        tau3 = float(tau3)
        if tau3 not in cache:
            try:
                points, tau4, tau5, residual = problem.solve_cde(tau3, last.get("warm"))
            except SolverError as e:
                logger.debug("tau3=%.9g: %s", tau3, e)
                cache[tau3] = None
            else:
                last["warm"] = (points["C"], points["D"], points["E"])
                cache[tau3]  = (problem.cost(tau3, tau4), points, tau4, tau5, residual)
                logger.debug("tau3=%.9g: cost=%.9g tau4=%.6g", tau3, cache[tau3][0], tau4)
        return cache[tau3]

    return evaluate


def _cost_of(evaluate, tau3):
    entry = evaluate(tau3)
    return math.inf if entry is None else entry[0]


def solve_switching(x0, i_max, params):
    """Solve for the cheapest bang-bang switching policy.

    Plateaus shorter than :attr:`SwitchingPolicy.tau3_min` leave too many
    susceptibles for any final burst of testing to hold the rebound under the
    ceiling. The plateau duration is chosen by bounded scalar minimization of the
    closed-form cost on ``[tau3_min, tau3_bar]``; endpoints are compared explicitly and
    ties go to the shorter plateau. The result is replayed through the integrator
    before it is returned.

    Exceptions
    ----------
    Raises :exn:`InfeasibleError` if maximal testing from the start cannot keep the
    infected fraction below the ceiling, :exn:`ConvergenceError` if a Newton stage
    fails from every seed or the replayed policy breaks the ceiling.
    """
    problem = _prepare(x0, i_max, params)
    if problem is None:
        logger.info("Untested epidemic stays below the ceiling; zero policy")
        return SwitchingPolicy.zero(params, x0, i_max)

    evaluate   = _evaluator(problem)
    lo, hi     = problem.tau3_min, problem.tau3_bar
    candidates = [lo]
    if hi > lo:
        found = minimize_scalar(lambda tau3: min(_cost_of(evaluate, tau3), UNSOLVED_COST),
                                bounds=(lo, hi), method="bounded", options={"xatol": 1e-6})
        candidates += [float(found.x), hi]
    solved = [tau3 for tau3 in candidates if evaluate(tau3) is not None]
    if not solved:
        raise ConvergenceError("No plateau duration in [{:.6g}, {:.6g}] admits a second "
                               "tangency".format(lo, hi))
    best = solved[0]
    for tau3 in solved[1:]:
        if evaluate(tau3)[0] < evaluate(best)[0] - 1e-12:
            best = tau3

    cost, points, tau4, tau5, residual = evaluate(best)
    t_c = problem.t_b + best
    t_d = t_c + tau4
    times  = (problem.t_a, problem.t_b, t_c, t_d, t_d + tau5)
    policy = SwitchingPolicy(params, x0, i_max, times, {**problem.points, **points},
                             tau3=best, tau3_bar=problem.tau3_bar, tau3_min=problem.tau3_min,
                             residuals={**problem.residuals, "A3": residual[0],
                                        "A4": residual[1]})
    violation = policy.max_violation(policy.replay(horizon=policy.t_e + 10.0,
                                                   step=DEFAULT_STEP))
    if violation > 1e-6:
        raise ConvergenceError("Switching policy exceeds the ceiling by {:.3g} on replay"
                               .format(violation))
    logger.info("Switching policy: times=%s cost=%.6g", ", ".join(
        "{:.6g}".format(t) for t in times), cost)
    return policy


def switching_cost_curve(x0, i_max, params, points=21):
    """Closed-form cost of the switching policy over a grid of plateau durations
    spanning ``[tau3_min, tau3_bar]``.

    Return value
    ------------
    ``(tau3, cost)`` arrays; both empty for the zero policy. Grid points where the
    final tangency cannot be solved cost ``nan``.
    """
    problem = _prepare(x0, i_max, params)
    if problem is None:
        return np.empty(0), np.empty(0)
    evaluate = _evaluator(problem)
    grid  = np.linspace(problem.tau3_min, problem.tau3_bar, points)
    costs = np.array([math.nan if evaluate(tau3) is None else evaluate(tau3)[0]
                      for tau3 in grid])
    return grid, costs
