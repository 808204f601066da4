"""Closed-form orbit relations of the undetected compartments under a constant testing rate.

Along an orbit with constant testing rate ``theta`` and constant contact rate, the
undetected infected fraction is an explicit function of the susceptible fraction,
and the elapsed time and the detected fraction reduce to quadratures in ``s``.
"""
import math

import numpy as np
from scipy.integrate import quad

from ..errors import SingularIntegrandError
from .dynamics import detection_rate, removal_rate


__all__ = ["orbit_iu", "harko_f", "harko_dt", "detected_transfer"]


QUAD_OPTIONS = dict(epsabs=1e-13, epsrel=1e-11, limit=200)


def _check_positive(name, value):
    if not value > 0:
        raise ValueError("{} must be positive, not {!r}".format(name, value))


def orbit_iu(theta, s, s1, iu1, params):
    """Undetected infected fraction at susceptible fraction ``s`` on the orbit through
    ``(s1, iu1)``."""
    _check_positive("Contact rate", params.beta)
    a = removal_rate(theta, params)
    return s1 + iu1 - s + a / params.beta * np.log(s / s1)


def harko_f(theta, s1, iu1, s2, iu2, params):
    """Residual of the orbit invariant between ``(s1, iu1)`` and ``(s2, iu2)``.

    Zero exactly when both points lie on the same orbit. Written in the log form
    ``log(s2/s1) - beta/a (s2 + iu2 - s1 - iu1)``, so a shift of ``iu2`` moves it by
    ``-beta/a`` times the shift.
    """
    _check_positive("s1", s1)
    _check_positive("s2", s2)
    _check_positive("Contact rate", params.beta)
    a = removal_rate(theta, params)
    _check_positive("Removal rate", a)
    return math.log(s2 / s1) - params.beta / a * (s2 + iu2 - s1 - iu1)


def harko_dt(theta, s_target, s_start, iu_start, params):
    """Time to travel along an orbit from ``s_start`` down to ``s_target``.

    Exceptions
    ----------
    Raises :exn:`SingularIntegrandError` if the undetected infected fraction vanishes
    on ``[s_target, s_start]``.
    """
    _check_positive("s_target", s_target)
    if s_target > s_start:
        raise ValueError("Target susceptible fraction {!r} exceeds the start {!r}"
                         .format(s_target, s_start))
    if s_target == s_start:
        return 0.0
    iu_target = orbit_iu(theta, s_target, s_start, iu_start, params)
    # i_u(s) is concave, so its minimum on the interval is at an endpoint
    if iu_start <= 0 or iu_target <= 0:
        raise SingularIntegrandError("Orbit through (s={!r}, i_u={!r}) does not reach s={!r}"
                                     .format(s_start, iu_start, s_target))
    beta = params.beta

    def integrand(s):
        return 1.0 / (beta * s * orbit_iu(theta, s, s_start, iu_start, params))

    value, _ = quad(integrand, s_target, s_start, **QUAD_OPTIONS)
    return value


def detected_transfer(theta, s_target, s_start, iu_start, id_start, params):
    """Detected infected fraction on reaching ``s_target`` along an orbit.

    Solves ``di_d/dt = c i_u - gamma i_d`` with ``c`` the detection rate, written as a
    quadrature in ``s``.
    """
    if s_target == s_start:
        return id_start
    total = harko_dt(theta, s_target, s_start, iu_start, params)
    c     = detection_rate(theta, params)
    value = id_start * math.exp(-params.gamma * total)
    if c == 0:
        return value

    def integrand(s):
        iu_s      = orbit_iu(theta, s, s_start, iu_start, params)
        remaining = harko_dt(theta, s_target, s, iu_s, params)
        return math.exp(-params.gamma * remaining) / (params.beta * s)

    integral, _ = quad(integrand, s_target, s_start, **QUAD_OPTIONS)
    return value + c * integral
