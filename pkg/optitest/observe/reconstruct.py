import logging

import numpy as np
from scipy.signal import savgol_filter

from ..errors import IllPosedError
from ..model import detection_rate


__all__ = ["SerologyReconstruction", "MolecularReconstruction", "reconstruct_from_serology",
           "reconstruct_from_molecular"]


logger = logging.getLogger(__name__)


class SerologyReconstruction:
    """Hidden fractions recovered from detected series under serology testing.

    Attributes
    ----------
    times : ndarray
    i_u, r_u, s : ndarray
        Undetected infected, undetected recovered and susceptible fractions.
    beta : ndarray
        Pointwise contact rate; ``nan`` where ``i_u`` is below the floor.
    """
    def __init__(self, times, i_u, r_u, s, beta):
        self.times = times
        self.i_u   = i_u
        self.r_u   = r_u
        self.s     = s
        self.beta  = beta


class MolecularReconstruction:
    """Hidden fractions recovered from the detected infected series alone, assuming a
    constant contact rate.

    Attributes
    ----------
    times : ndarray
    i_u : ndarray
        Undetected infected fraction.
    beta_s : ndarray
        Product of the contact rate and the susceptible fraction.
    beta_samples : ndarray
        Pointwise contact rate estimates; ``nan`` where ``i_u`` is below the floor.
    beta : float
        Median of ``beta_samples``.
    s : ndarray
        ``beta_s / beta``.
    """
    def __init__(self, times, i_u, beta_s, beta_samples, beta):
        self.times        = times
        self.i_u          = i_u
        self.beta_s       = beta_s
        self.beta_samples = beta_samples
        self.beta         = beta
        self.s            = beta_s / beta


def _uniform_step(times):
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or len(times) < 3:
        raise ValueError("At least 3 samples are needed, not {!r}".format(len(times)))
    steps = np.diff(times)
    if not np.allclose(steps, steps[0], rtol=1e-6, atol=0) or steps[0] <= 0:
        raise ValueError("Samples must lie on a uniform increasing grid")
    return times, float(steps[0])


def _differentiate(series, dt, smooth):
    if smooth is None:
        return np.gradient(series, dt, edge_order=2)
    window, order = smooth
    return savgol_filter(series, window, order, deriv=1, delta=dt, mode="interp")


def _series(values, like, name):
    values = np.broadcast_to(np.asarray(values, dtype=float), like.shape)
    if not np.all(np.isfinite(values)):
        raise ValueError("{} must be finite".format(name))
    return values


def _pointwise_beta(numerator, denominator, i_u, floor):
    beta = np.full_like(i_u, np.nan)
    mask = i_u >= floor
    beta[mask] = numerator[mask] / denominator[mask]
    return beta


def reconstruct_from_serology(times, i_d, r_d, theta, params, *, smooth=None, floor=1e-4):
    """Recover the hidden fractions when both testing kinds are running.

    The undetected infected fraction follows from the detected infected balance, the
    undetected recovered fraction from the detected recovered balance, and the
    susceptible fraction from conservation. The contact rate is read off the
    susceptible balance.

    Parameters
    ----------
    times : array-like
        Uniform sampling grid.
    i_d, r_d : array-like
        Detected infected and recovered fractions at each sample.
    theta : float or array-like
        Molecular testing rate at each sample.
    smooth : ``(window, polyorder)`` or None
        Differentiate with a Savitzky-Golay filter instead of central differences.
    floor : float
        Undetected infected fraction below which no contact rate is reported.

    Exceptions
    ----------
    Raises :exn:`IllPosedError` if detection of infected or recovered individuals
    stops anywhere on the grid.
    """
    times, dt = _uniform_step(times)
    i_d   = _series(i_d, times, "i_d")
    r_d   = _series(r_d, times, "r_d")
    theta = _series(theta, times, "theta")

    detection = params.eta * theta + params.theta_b * params.eta_bi
    recovered = params.theta_b * params.eta_br
    if np.any(detection <= 0):
        raise IllPosedError("Infected detection rate vanishes at t={:.6g}"
                            .format(times[np.argmax(detection <= 0)]))
    if recovered <= 0:
        raise IllPosedError("Serology testing of recovered individuals is off")

    gamma = params.gamma
    i_u = (_differentiate(i_d, dt, smooth) + gamma * i_d) / detection_rate(theta, params)
    r_u = (_differentiate(r_d, dt, smooth) - gamma * i_d) / recovered
    s   = 1.0 - i_u - r_u - i_d - r_d
    beta = _pointwise_beta(-_differentiate(s, dt, smooth), s * i_u, i_u, floor)
    logger.debug("Serology reconstruction over %d samples, step %g", len(times), dt)
    return SerologyReconstruction(times, i_u, r_u, s, beta)


def reconstruct_from_molecular(times, i_d, theta, params, *, smooth=None, floor=1e-4):
    """Recover the hidden fractions from the detected infected series, assuming the
    contact rate is constant.

    Three derivatives are taken in sequence: of ``i_d`` for ``i_u``, of ``log i_u``
    for the product ``beta * s``, and of that product for ``beta``. Error grows with
    each one, so the scalar contact rate is the median of its pointwise values.

    Exceptions
    ----------
    Raises :exn:`IllPosedError` if the molecular testing rate vanishes anywhere on the
    grid, or if no sample has enough undetected infections.
    """
    times, dt = _uniform_step(times)
    i_d   = _series(i_d, times, "i_d")
    theta = _series(theta, times, "theta")
    if np.any(params.eta * theta <= 0):
        raise IllPosedError("Molecular testing rate vanishes at t={:.6g}"
                            .format(times[np.argmax(params.eta * theta <= 0)]))

    detection = detection_rate(theta, params)
    i_u    = (_differentiate(i_d, dt, smooth) + params.gamma * i_d) / detection
    with np.errstate(divide="ignore", invalid="ignore"):
        beta_s = _differentiate(i_u, dt, smooth) / i_u + params.gamma + detection
    samples = _pointwise_beta(-_differentiate(beta_s, dt, smooth), beta_s * i_u, i_u, floor)
    if np.all(np.isnan(samples)):
        raise IllPosedError("Undetected infections stay below {!r}".format(floor))
    beta = float(np.nanmedian(samples))
    logger.debug("Molecular reconstruction over %d samples: beta=%.6g", len(times), beta)
    return MolecularReconstruction(times, i_u, beta_s, samples, beta)
