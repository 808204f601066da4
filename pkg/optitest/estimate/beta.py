import logging

import numpy as np
from scipy.optimize import least_squares

from ..model import ID, IU, integrate


__all__ = ["BetaEstimate", "estimate_beta"]


logger = logging.getLogger(__name__)


class BetaEstimate:
    """Contact rate fitted to a window of filter estimates.

    Attributes
    ----------
    beta : float
        Estimate, non-negative.
    window : tuple of float
        ``(start, end)`` times of the window.
    residual_norm : float
        Euclidean norm of the fit residuals.
    identifiable : bool
        False when the window carries no information and ``beta`` is a carried-over
        value.
    """
    def __init__(self, beta, window, residual_norm, identifiable):
        self.beta          = beta
        self.window        = window
        self.residual_norm = residual_norm
        self.identifiable  = identifiable

    def __repr__(self):
        return "BetaEstimate(beta={!r}, identifiable={!r})".format(self.beta, self.identifiable)


def estimate_beta(history, params, *, window=7, previous=None, step=0.1, floor=1e-6):
    """Fit the contact rate to recent filter estimates.

    Minimizes the mismatch between each estimate's infected fractions and a one-step
    model forecast from the previous estimate, under the testing rate that was held
    in between.

    Parameters
    ----------
    history : sequence of ``(EstimatorState, theta)``
        Estimates in time order, each with the rate held after it.
    window : int
        Number of intervals used, counted from the most recent estimate.
    previous : float or None
        Carried-over estimate; also the starting point of the fit.
    floor : float
        Undetected infected fraction below which the window is uninformative.
    """
    start = params.beta if previous is None else previous
    if len(history) < 2:
        return BetaEstimate(start, (np.nan, np.nan), 0.0, False)
    records = list(history)[-(window + 1):]
    span    = (records[0][0].t, records[-1][0].t)
    if max(est.i_u for est, _ in records) < floor:
        logger.debug("Undetected infections below %g over [%g, %g]; keeping beta=%g",
                     floor, span[0], span[1], start)
        return BetaEstimate(start, span, 0.0, False)

    targets = np.array([est.model_state[[IU, ID]] for est, _ in records[1:]])

    def residuals(z):
        beta = max(float(z[0]), 0.0)
        forecasts = []
        for (est, theta), (following, _) in zip(records, records[1:]):
            traj = integrate(np.clip(est.model_state, 0.0, 1.0), params, theta, beta=beta,
                             horizon=following.t - est.t, step=step, t0=est.t)
            forecasts.append(traj.states[-1][[IU, ID]])
        return (np.array(forecasts) - targets).ravel()

    fit  = least_squares(residuals, [start], method="lm")
    beta = max(float(fit.x[0]), 0.0)
    logger.debug("Fitted beta=%.6g over [%g, %g]", beta, span[0], span[1])
    return BetaEstimate(beta, span, float(np.linalg.norm(fit.fun)), True)
