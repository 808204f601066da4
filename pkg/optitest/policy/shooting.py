import logging

import numpy as np

from ..errors import SolverError
from ..model import FractionState, ID, IU, S, integrate, removal_rate


__all__ = ["Peak", "first_peak", "bisect"]


logger = logging.getLogger(__name__)


SEED_STEP = 0.1


class Peak:
    def __init__(self, t, x, value):
        self.t     = t
        self.x     = x
        self.value = value

    def __repr__(self):
        return "Peak(t={!r}, value={!r})".format(self.t, self.value)


def first_peak(x0, params, theta, *, t0=0.0, step=SEED_STEP, chunk=50.0, t_max=5000.0):
    """Largest infected fraction reached from ``x0`` under a constant testing rate.

    Integrates in chunks until the undetected infected fraction declines for good
    and the infected fraction is falling.
    """
    if isinstance(x0, FractionState):
        x0 = x0.as_array()
    x    = np.asarray(x0, dtype=float)[:4]
    best = Peak(t0, x, float(x[IU] + x[ID]))
    t    = t0
    a    = removal_rate(theta, params)
    while t - t0 < t_max:
        traj  = integrate(x, params, theta, horizon=chunk, step=step, t0=t)
        index = int(np.argmax(traj.infected))
        if traj.infected[index] > best.value:
            best = Peak(float(traj.times[index]), traj.states[index].copy(),
                        float(traj.infected[index]))
        x, t  = traj.states[-1], float(traj.times[-1])
        declining = params.beta * x[S] < a
        falling   = params.beta * x[S] * x[IU] < params.gamma * (x[IU] + x[ID])
        if (declining and falling) or x[IU] + x[ID] == 0:
            return best
    raise SolverError("Infected fraction still rising after {} days".format(t_max))


def bisect(fun, lo, hi, *, tol=1e-9, max_iter=200):
    """Bisection for the sign change of ``fun`` on ``[lo, hi]``; returns ``(lo, hi)``.

    ``fun(lo) > 0 >= fun(hi)``; ``lo`` may exceed ``hi``.
    """
    for _ in range(max_iter):
        if abs(hi - lo) <= tol * max(1.0, abs(hi)):
            break
        mid = 0.5 * (lo + hi)
        if fun(mid) > 0:
            lo = mid
        else:
            hi = mid
    return lo, hi
