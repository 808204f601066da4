import logging
import math

import numpy as np

from ..errors import ConvergenceError, InfeasibleError
from ..model import S, detected_transfer, harko_dt, harko_f, orbit_iu, r0_unity_rate
from .base import Policy
from .newton import multistart
from .shooting import bisect, first_peak


__all__ = ["ConstantRatePolicy", "solve_constant_rate"]


logger = logging.getLogger(__name__)


class ConstantRatePolicy(Policy):
    """Smallest constant testing rate whose epidemic peak touches the ceiling.

    Attributes
    ----------
    theta : float
        The constant rate.
    s_bar, iu_bar, id_bar : float
        State at the tangency with the ceiling; ``nan`` when the untested epidemic
        already stays below it.
    t_bar : float
        Time of the tangency.
    residuals : dict
        Residuals of the defining conditions at the solution.
    """
    kind = "constant"

    def __init__(self, params, x0, i_max, theta, s_bar=math.nan, iu_bar=math.nan,
                 id_bar=math.nan, t_bar=math.nan, residuals=None):
        super().__init__(params, x0, i_max)
        self.theta     = theta
        self.s_bar     = s_bar
        self.iu_bar    = iu_bar
        self.id_bar    = id_bar
        self.t_bar     = t_bar
        self.residuals = residuals or {}

    def rate(self, t, x):
        return self.theta

    def cost(self, horizon=None):
        if self.theta == 0:
            return 0.0
        if horizon is None:
            raise ValueError("Constant testing has no finite cost without a horizon")
        return self.theta * horizon


def _residual_report(theta, s_bar, x0, i_max, params):
    iu  = orbit_iu(theta, s_bar, x0.s, x0.i_u, params)
    i_d = detected_transfer(theta, s_bar, x0.s, x0.i_u, x0.i_d, params)
    return {
        "ceiling":  iu + i_d - i_max,
        "tangency": params.beta * s_bar * iu - params.gamma * i_max,
        "orbit":    harko_f(theta, x0.s, x0.i_u, s_bar, iu, params),
    }


def solve_constant_rate(x0, i_max, params):
    """Solve for the constant testing rate that just meets the ceiling.

    The unknowns are reduced to the tangency susceptible fraction and the rate: the
    undetected infected fraction follows from the orbit invariant, the detected
    fraction from its transfer quadrature. Newton's method is seeded by shooting on
    the rate, then by a grid.

    Exceptions
    ----------
    Raises :exn:`ConvergenceError` if no seed converges, :exn:`InfeasibleError` if
    no non-negative rate meets the ceiling.
    """
    Policy._check_inputs(x0, i_max)
    s0, i0, id0 = x0.s, x0.i_u, x0.i_d

    untested = first_peak(x0, params, 0.0)
    if untested.value <= i_max:
        logger.info("Untested peak %.4g stays below the ceiling", untested.value)
        return ConstantRatePolicy(params, x0, i_max, 0.0)

    def excess(theta):
        return first_peak(x0, params, theta).value - i_max

    hi = max(r0_unity_rate(params), 1e-3)
    while excess(hi) > 0:
        hi *= 2
        if hi > 1e3:
            raise InfeasibleError("No constant rate keeps the peak below {!r}".format(i_max))
    lo, hi = bisect(excess, 0.0, hi, tol=1e-5)
    shot   = first_peak(x0, params, hi)

    def residual(z):
        s_bar, theta = z
        if theta < 0 or not 0 < s_bar <= s0:
            raise ValueError("Outside the domain")
        iu = orbit_iu(theta, s_bar, s0, i0, params)
        if iu <= 0:
            raise ValueError("Orbit exhausted")
        i_d = detected_transfer(theta, s_bar, s0, i0, id0, params)
        return [params.beta * s_bar * iu / params.gamma - i_max, i_d + iu - i_max]

    def seeds():
        yield (shot.x[S], hi)
        for frac in (0.25, 0.5, 0.75):
            for s_bar in (0.3 * s0, 0.5 * s0, 0.7 * s0, 0.9 * s0):
                yield (s_bar, frac * r0_unity_rate(params))

    try:
        result = multistart(residual, seeds())
    except ConvergenceError as e:
        for seed, reason in e.diagnostics:
            logger.debug("Seed %r: %s", seed, reason)
        raise
    s_bar, theta = result.x

    iu_bar = orbit_iu(theta, s_bar, s0, i0, params)
    policy = ConstantRatePolicy(
        params, x0, i_max, float(theta),
        s_bar=float(s_bar), iu_bar=float(iu_bar), id_bar=float(i_max - iu_bar),
        t_bar=harko_dt(theta, s_bar, s0, i0, params),
        residuals=_residual_report(theta, s_bar, x0, i_max, params))
    logger.info("Constant rate %.6g touches the ceiling at t=%.4g (s=%.4g)",
                policy.theta, policy.t_bar, policy.s_bar)
    return policy
