"""Pairs of runs that produce the same detected series.

With molecular testing alone, a contact rate that varies in time can hide the
susceptible fraction: a shadow run started from another susceptible fraction and
driven by ``beta(t) * s(t) / s_shadow(t)`` has exactly the same undetected and
detected infected fractions as the primary run.
"""

import logging
import math

import numpy as np

from ..errors import IntegrationError
from ..model import S, ConstantBeta, Trajectory, as_beta_signal, as_schedule, rk4_step
from ..model.dynamics import _rhs


__all__ = ["TwinRun", "counterexample_pair"]


logger = logging.getLogger(__name__)


class TwinRun:
    """Primary and shadow trajectories under a shared testing schedule.

    Attributes
    ----------
    primary, shadow : :class:`Trajectory`
        The two runs, sampled on the same grid.
    shadow_beta : ndarray
        Contact rate of the shadow run at each sample.
    """
    def __init__(self, primary, shadow, shadow_beta):
        self.primary     = primary
        self.shadow      = shadow
        self.shadow_beta = np.asarray(shadow_beta, dtype=float)

    @property
    def detected_gap(self):
        """Largest difference of the detected infected fractions."""
        return float(np.max(np.abs(self.primary.i_d - self.shadow.i_d)))

    @property
    def undetected_gap(self):
        return float(np.max(np.abs(self.primary.i_u - self.shadow.i_u)))

    @property
    def susceptible_gap(self):
        """Largest difference of the susceptible fractions."""
        return float(np.max(np.abs(self.primary.s - self.shadow.s)))

    def __repr__(self):
        return "TwinRun(detected_gap={:.3g}, susceptible_gap={:.3g})".format(
            self.detected_gap, self.susceptible_gap)


def _initial(s0, i0):
    # whatever is not susceptible or infected starts as undetected recovered
    return np.array([s0, i0, 0.0, 1.0 - s0 - i0])


def counterexample_pair(s0, s0_shadow, i0, schedule, params, horizon, *, beta=None,
                        step=0.01):
    """Co-integrate a run and its shadow.

    Both runs start with undetected infected fraction ``i0`` and no detected
    individuals; they differ in the susceptible fraction. The shadow's contact rate is
    set at every stage to ``beta(t) * s / s_shadow``.

    Parameters
    ----------
    s0, s0_shadow : float
        Initial susceptible fractions.
    schedule : :class:`Schedule`, float or callable
        Testing rate shared by both runs. It is read at the start of each step from
        the primary state and held over the step.
    beta : :class:`BetaSignal`, float or None
        Contact rate of the primary run; defaults to ``params.beta``.

    Exceptions
    ----------
    Raises :exn:`IntegrationError` if the shadow's susceptible fraction vanishes.
    """
    for name, value in (("s0", s0), ("s0_shadow", s0_shadow), ("i0", i0)):
        if not 0 <= value <= 1:
            raise ValueError("{} must be within [0, 1], not {!r}".format(name, value))
    for name, value in (("s0", s0), ("s0_shadow", s0_shadow)):
        if value + i0 > 1:
            raise ValueError("{} + i0 must be at most 1, not {!r}".format(name, value + i0))
    if not step > 0:
        raise ValueError("Step must be positive, not {!r}".format(step))
    schedule = as_schedule(schedule)
    beta     = ConstantBeta(params.beta) if beta is None else as_beta_signal(beta)

    def shadow_beta(t, x):
        if x[4 + S] <= 0:
            raise IntegrationError("Shadow susceptible fraction vanished at t={:.6g}"
                                   .format(t))
        return float(beta(t)) * x[S] / x[4 + S]

    def joint(theta):
        def fun(t, x):
            return np.concatenate([
                _rhs(x[:4], theta, float(beta(t)), params),
                _rhs(x[4:], theta, shadow_beta(t, x), params),
            ])
        return fun

    count = max(1, math.ceil(horizon / step - 1e-9)) if horizon > 0 else 0
    times = [0.0]
    x     = np.concatenate([_initial(s0, i0), _initial(s0_shadow, i0)])
    xs    = [x]
    thetas, betas = [], [shadow_beta(0.0, x)]
    for k in range(count):
        t     = times[-1]
        h     = min(step, horizon - t)
        theta = float(schedule.rate(t, x[:4]))
        x     = rk4_step(joint(theta), t, x, h)
        thetas.append(theta)
        times.append(t + h if k + 1 < count else float(horizon))
        xs.append(x)
        betas.append(shadow_beta(times[-1], x))
    thetas.append(float(schedule.rate(times[-1], x[:4])))

    states  = np.array(xs)
    primary = Trajectory(times, states[:, :4], thetas)
    shadow  = Trajectory(times, states[:, 4:], thetas)
    twins   = TwinRun(primary, shadow, betas)
    logger.info("Twin runs over %g days: detected gap %.3g, susceptible gap %.3g",
                horizon, twins.detected_gap, twins.susceptible_gap)
    return twins
