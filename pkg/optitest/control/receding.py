import logging
import math
import numbers

import numpy as np

from ..errors import ConfigError
from ..estimate import EstimatorState
from ..estimate.ekf import PERMUTATION
from ..model import DEFAULT_STEP, FractionState, Trajectory, integrate


__all__ = ["ControllerConfig", "RecedingSolution", "receding_rate", "control_law",
           "receding_replay"]


logger = logging.getLogger(__name__)


class ControllerConfig:
    """Settings of the receding-horizon controller.

    Parameters
    ----------
    i_max : float
        Ceiling on the infected fraction.
    horizon : float
        Look-ahead, in days.
    t_a : float
        Time before which the controller does not test.
    epoch : float
        Interval between control updates, in days.
    always_on : bool
        Ignore ``t_a`` and control from the start.
    """
    def __init__(self, i_max, *, horizon=3.0, t_a=0.0, epoch=1.0, always_on=False):
        for name, value in (("i_max", i_max), ("horizon", horizon), ("t_a", t_a),
                            ("epoch", epoch)):
            if isinstance(value, bool) or not isinstance(value, numbers.Real):
                raise TypeError("{} must be a real number, not {!r}".format(name, value))
        if not 0 < i_max < 1:
            raise ConfigError("Infection ceiling must be within (0, 1), not {!r}".format(i_max))
        if not horizon > 0:
            raise ConfigError("Controller horizon must be positive, not {!r}".format(horizon))
        if not epoch > 0:
            raise ConfigError("Control epoch must be positive, not {!r}".format(epoch))
        if t_a < 0:
            raise ConfigError("Controller start must be non-negative, not {!r}".format(t_a))
        self.i_max     = float(i_max)
        self.horizon   = float(horizon)
        self.t_a       = float(t_a)
        self.epoch     = float(epoch)
        self.always_on = bool(always_on)


class RecedingSolution:
    """Unclamped testing rate that steers the estimate onto the ceiling at the horizon.

    Attributes
    ----------
    theta : float
        Rate; ``nan`` when unsolvable.
    s_h, iu_h : float
        Target susceptible and undetected infected fractions at the horizon.
    solvable : bool
    """
    def __init__(self, theta, s_h, iu_h, solvable):
        self.theta    = theta
        self.s_h      = s_h
        self.iu_h     = iu_h
        self.solvable = solvable

    def __repr__(self):
        return "RecedingSolution(theta={!r}, solvable={!r})".format(self.theta, self.solvable)


def receding_rate(s, i_u, cfg, params):
    """Solve the constant rate that reaches the ceiling tangency at the horizon.

    The susceptible fraction at the horizon is extrapolated with the average of the
    current infection flow and the flow at the tangency; the orbit invariant then
    gives the removal rate joining the two points.
    """
    beta = params.beta
    if not (s > 0 and beta > 0 and params.eta > 0):
        return RecedingSolution(math.nan, math.nan, math.nan, False)
    s_h = s - 0.5 * cfg.horizon * (params.gamma * cfg.i_max + beta * s * i_u)
    if not 0 < s_h < s:
        return RecedingSolution(math.nan, s_h, math.nan, False)
    iu_h    = params.gamma * cfg.i_max / (beta * s_h)
    removal = beta * (s_h + iu_h - s - i_u) / math.log(s_h / s)
    theta   = (removal - params.baseline_removal) / params.eta
    return RecedingSolution(theta, s_h, iu_h, math.isfinite(theta))


def control_law(t, est, cfg, params):
    """Testing rate to hold over the next epoch, clamped to ``[0, theta_max]``.

    Parameters
    ----------
    t : float
        Current time.
    est : :class:`EstimatorState`
        Current estimate.
    """
    if t < cfg.t_a and not cfg.always_on:
        return 0.0
    solution = receding_rate(est.s, est.i_u, cfg, params)
    if not solution.solvable:
        logger.warning("No receding-horizon solution at t=%g (s=%.4g); not testing", t, est.s)
        return 0.0
    return min(params.theta_max, max(0.0, solution.theta))


def receding_replay(x0, cfg, params, horizon, *, beta=None, step=DEFAULT_STEP):
    """Drive the deterministic model with the receding-horizon law and exact state.

    The law is re-evaluated at every epoch boundary and its rate held over the epoch;
    the contact rate seen by the law is ``params.beta``.
    """
    if not isinstance(x0, FractionState):
        x0 = FractionState.from_array(x0)
    x = x0.as_array()
    pieces, t = [], 0.0
    while t < horizon - 1e-12:
        span  = min(cfg.epoch, horizon - t)
        est   = EstimatorState(x[PERMUTATION], np.zeros((4, 4)), t)
        theta = control_law(t, est, cfg, params)
        piece = integrate(x, params, theta, beta=beta, horizon=span, step=step, t0=t)
        pieces.append(piece)
        x, t  = piece.states[-1], float(piece.times[-1])
    if not pieces:
        return integrate(x, params, 0.0, beta=beta, horizon=0.0, step=step)

    offsets = np.cumsum([0.0] + [piece.cost[-1] for piece in pieces[:-1]])
    return Trajectory(
        np.concatenate([pieces[0].times[:1]] + [piece.times[1:] for piece in pieces]),
        np.concatenate([pieces[0].states[:1]] + [piece.states[1:] for piece in pieces]),
        np.concatenate([piece.theta[:-1] for piece in pieces] + [pieces[-1].theta[-1:]]),
        np.concatenate([pieces[0].cost[:1]] + [offset + piece.cost[1:]
                                                for offset, piece in zip(offsets, pieces)]),
    )
