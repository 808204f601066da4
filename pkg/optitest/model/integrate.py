import logging
import math

import numpy as np

from ..errors import IntegrationError
from .beta import ConstantBeta, as_beta_signal
from .dynamics import _rhs
from .params import FractionState
from .schedule import as_schedule
from .trajectory import Trajectory


__all__ = ["DEFAULT_STEP", "SIMPLEX_TOLERANCE", "rk4_step", "integrate", "locate_crossing"]


logger = logging.getLogger(__name__)


DEFAULT_STEP      = 0.01
SIMPLEX_TOLERANCE = 1e-10


def rk4_step(fun, t, x, h):
    """One classical fourth-order Runge-Kutta step of ``dx/dt = fun(t, x)``."""
    k1 = fun(t, x)
    k2 = fun(t + h / 2, x + h / 2 * k1)
    k3 = fun(t + h / 2, x + h / 2 * k2)
    k4 = fun(t + h, x + h * k3)
    return x + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)


def _segments(t0, t1, breakpoints):
    cuts  = sorted(b for b in breakpoints if t0 < b < t1 and math.isfinite(b))
    edges = [t0, *cuts, t1]
    return [(a, b) for a, b in zip(edges, edges[1:]) if b - a > 1e-12]


def _step_ends(a, b, step):
    # the last step of a segment is shortened to land on its end
    count = max(1, math.ceil((b - a) / step - 1e-9))
    return [a + k * step for k in range(1, count)] + [b]


def _as_vector(x0):
    if isinstance(x0, FractionState):
        return x0.as_array()
    x0 = np.asarray(x0, dtype=float)
    if x0.shape == (5,):
        x0 = x0[:4]
    if x0.shape != (4,):
        raise ValueError("Initial state must have 4 or 5 entries, not {!r}".format(x0.shape))
    return x0.copy()


def _check_simplex(x, t):
    if not np.all(np.isfinite(x)) or x.min() < -10 * SIMPLEX_TOLERANCE:
        raise IntegrationError("State {!r} left the simplex at t={:.6g}; "
                               "reduce the step".format(x.tolist(), t))
    return np.maximum(x, 0.0)


def _stage_function(params, schedule, beta, last):
    def fun(t, x):
        t = min(t, last)
        return _rhs(x, schedule.rate(t, x), beta(t), params)
    return fun


def integrate(x0, params, schedule=0.0, beta=None, horizon=365.0, step=DEFAULT_STEP,
              t0=0.0):
    """Integrate the deterministic model with fixed-step RK4.

    Steps are aligned to the breakpoints of ``schedule`` and ``beta``; a step that
    ends on a breakpoint is evaluated with the left limit of both.

    Parameters
    ----------
    x0 : :class:`FractionState` or array-like
        Initial fractions.
    params : :class:`Params`
        Model constants.
    schedule : :class:`Schedule`, float or callable
        Molecular testing rate. Numbers are constant rates, callables are functions
        of time.
    beta : :class:`BetaSignal`, float or None
        Contact rate signal; defaults to the constant ``params.beta``.
    horizon : float
        Length of the integration window, in days.
    step : float
        Nominal step.
    t0 : float
        Start time.

    Return value
    ------------
    A :class:`Trajectory` sampled at every step end.

    Exceptions
    ----------
    Raises :exn:`IntegrationError` if a compartment falls below
    ``-10 * SIMPLEX_TOLERANCE``.
    """
    if not step > 0:
        raise ValueError("Step must be positive, not {!r}".format(step))
    if not horizon >= 0:
        raise ValueError("Horizon must be non-negative, not {!r}".format(horizon))

    x        = _as_vector(x0)
    schedule = as_schedule(schedule)
    beta     = ConstantBeta(params.beta) if beta is None else as_beta_signal(beta)
    t_end    = t0 + horizon

    times  = [t0]
    states = [x]
    thetas = [float(schedule.rate(t0, x))]
    costs  = [0.0]
    cost   = 0.0
    for a, b in _segments(t0, t_end, (*schedule.breakpoints, *beta.breakpoints)):
        last = float(np.nextafter(b, -np.inf)) if b < t_end else b
        fun  = _stage_function(params, schedule, beta, last)
        t    = a
        thetas[-1] = theta_left = float(schedule.rate(a, x))
        for t_next in _step_ends(a, b, step):
            x = _check_simplex(rk4_step(fun, t, x, t_next - t), t_next)
            theta_right = float(schedule.rate(min(t_next, last), x))
            cost += 0.5 * (theta_left + theta_right) * (t_next - t)
            times.append(t_next)
            states.append(x)
            thetas.append(theta_right)
            costs.append(cost)
            t, theta_left = t_next, theta_right

    logger.debug("Integrated %d steps over [%g, %g]", len(times) - 1, t0, t_end)
    return Trajectory(times, states, thetas, costs)


def locate_crossing(trajectory, params, schedule, beta, indicator, tol=1e-6):
    """Refine the first time ``indicator(t, x) >= 0`` along a trajectory.

    The crossing step is bisected on its length, taking a single RK4 step of the
    trial length from the last sample before the crossing.

    Parameters
    ----------
    indicator : callable
        ``indicator(t, x)``, vectorized over sample arrays.

    Return value
    ------------
    ``(t, x)`` with ``t`` within ``tol`` after the crossing, or ``None`` if the
    indicator stays negative.
    """
    schedule = as_schedule(schedule)
    beta     = ConstantBeta(params.beta) if beta is None else as_beta_signal(beta)
    values   = np.broadcast_to(indicator(trajectory.times, trajectory.states),
                               trajectory.times.shape)
    hits     = np.flatnonzero(values >= 0)
    if not len(hits):
        return None
    k = int(hits[0])
    if k == 0:
        return float(trajectory.times[0]), trajectory.states[0].copy()

    a, xa  = float(trajectory.times[k - 1]), trajectory.states[k - 1]
    lo, hi = 0.0, float(trajectory.times[k]) - a
    fun    = _stage_function(params, schedule, beta, float(np.nextafter(a + hi, -np.inf)))
    x_hi   = trajectory.states[k]
    while hi - lo > tol:
        mid  = 0.5 * (lo + hi)
        x_mid = rk4_step(fun, a, xa, mid)
        if indicator(a + mid, x_mid) >= 0:
            hi, x_hi = mid, x_mid
        else:
            lo = mid
    return a + hi, np.maximum(x_hi, 0.0)
