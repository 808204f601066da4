import logging
import math

import numpy as np
from scipy.integrate import trapezoid

from ..model import ConstantBeta, DEFAULT_STEP, IU, S, Schedule, as_beta_signal
from ..model import integrate, locate_crossing
from .base import Policy


__all__ = ["theorem1_rate", "Theorem1Policy", "solve_theorem1"]


logger = logging.getLogger(__name__)


def theorem1_rate(state, beta_now, params, phase):
    """Testing rate of the ceiling-tracking policy in a given phase.

    On the plateau the rate holds the undetected infected fraction constant;
    elsewhere it is zero.

    Parameters
    ----------
    state : array-like
        ``(s, i_u, i_d, r_u)``.
    beta_now : float
        Current contact rate.
    phase : str
        One of ``"free"``, ``"plateau"`` or ``"herd"``.
    """
    if phase not in ("free", "plateau", "herd"):
        raise ValueError("Invalid phase {!r}; must be one of free, plateau, herd"
                         .format(phase))
    if phase != "plateau":
        return 0.0
    return max(0.0, (beta_now * state[S] - params.baseline_removal) / params.eta)


class _PlateauLaw(Schedule):
    def __init__(self, params, beta):
        self.params = params
        self.beta   = beta

    def rate(self, t, x):
        return theorem1_rate(x, self.beta(t), self.params, "plateau")


class Theorem1Policy(Policy):
    """Ceiling-tracking policy.

    No testing until the undetected infected fraction reaches the ceiling at
    :attr:`t_hit`, then the rate that holds it there until the susceptible fraction
    reaches herd immunity at :attr:`t_herd`, then no testing.

    Attributes
    ----------
    t_hit : float
        Time the ceiling is reached; infinite if it never is.
    t_herd : float
        Time herd immunity is reached on the plateau; infinite if it never is.
    x_hit : ndarray or None
        State at :attr:`t_hit`.
    """
    kind = "theorem1"

    def __init__(self, params, x0, i_max, beta, t_hit, t_herd, x_hit):
        super().__init__(params, x0, i_max)
        self.beta   = beta
        self.t_hit  = t_hit
        self.t_herd = t_herd
        self.x_hit  = x_hit
        self._law   = _PlateauLaw(params, beta)

    @property
    def breakpoints(self):
        return tuple(t for t in (self.t_hit, self.t_herd) if math.isfinite(t))

    def phase(self, t):
        if t < self.t_hit:
            return "free"
        if t < self.t_herd:
            return "plateau"
        return "herd"

    def rate(self, t, x):
        return theorem1_rate(x, self.beta(t), self.params, self.phase(t))

    def cost(self, horizon=None):
        """Total testing effort.

        Exact for a constant contact rate, where the susceptible fraction decays
        exponentially on the plateau; otherwise read from a replay.
        """
        if not math.isfinite(self.t_hit):
            return 0.0
        if self.beta.is_constant and math.isfinite(self.t_herd):
            s_hit, iu_hit = self.x_hit[S], self.x_hit[IU]
            s_herd   = self.params.baseline_removal / self.beta(0.0)
            duration = self.t_herd - self.t_hit
            return ((s_hit - s_herd) / iu_hit
                    - self.params.baseline_removal * duration) / self.params.eta
        horizon = self.t_herd if math.isfinite(self.t_herd) else horizon
        return self.replay(horizon).total_cost

    def cost_identity(self, trajectory):
        """Testing effort recovered from the epidemic curve alone.

        Integrating the undetected infected equation from the start to herd immunity
        gives ``eta * cost = int (beta s - baseline) dt + ln(i_u(0) / i_u(t_herd))``.
        """
        mask   = trajectory.times <= self.t_herd
        times  = trajectory.times[mask]
        growth = self.beta(times) * trajectory.s[mask] - self.params.baseline_removal
        growth = np.broadcast_to(growth, times.shape)
        total  = trapezoid(growth, times)
        return (total + math.log(self.x0.i_u / trajectory.i_u[mask][-1])) / self.params.eta


def solve_theorem1(x0, i_max, params, beta=None, *, horizon=730.0, step=DEFAULT_STEP):
    """Compute the switching times of the ceiling-tracking policy.

    Parameters
    ----------
    x0 : :class:`FractionState`
        Initial state.
    i_max : float
        Ceiling on the undetected infected fraction.
    beta : :class:`BetaSignal`, float or None
        Contact rate; must be non-increasing. Defaults to ``params.beta``.
    horizon : float
        Search window for both switching times.
    """
    Policy._check_inputs(x0, i_max)
    beta = ConstantBeta(params.beta) if beta is None else as_beta_signal(beta)
    if not beta.is_non_increasing(horizon):
        raise ValueError("Contact rate must be non-increasing over the horizon")

    free = integrate(x0, params, 0.0, beta=beta, horizon=horizon, step=step)
    hit  = locate_crossing(free, params, 0.0, beta, lambda t, x: x[..., IU] - i_max)
    if hit is None:
        logger.info("Ceiling %.4g never reached within %g days; no testing needed",
                    i_max, horizon)
        return Theorem1Policy(params, x0, i_max, beta, math.inf, math.inf, None)
    t_hit, x_hit = hit

    base = params.baseline_removal
    if beta.is_constant:
        # s decays exponentially while i_u is held at its hitting value
        ratio  = beta(0.0) * x_hit[S] / base
        t_herd = t_hit + math.log(ratio) / (beta(0.0) * x_hit[IU]) if ratio > 1 else t_hit
    else:
        law     = _PlateauLaw(params, beta)
        plateau = integrate(x_hit, params, law, beta=beta, horizon=horizon - t_hit,
                            step=step, t0=t_hit)
        herd    = locate_crossing(plateau, params, law, beta,
                                  lambda t, x: base - beta(t) * x[..., S])
        t_herd  = math.inf if herd is None else herd[0]
    if t_herd > horizon:
        logger.warning("Herd immunity not reached within %g days", horizon)

    logger.info("Ceiling-tracking policy: t_hit=%.6g t_herd=%.6g", t_hit, t_herd)
    return Theorem1Policy(params, x0, i_max, beta, t_hit, t_herd, x_hit)
