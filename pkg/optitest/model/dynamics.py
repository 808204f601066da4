import numpy as np

from .params import FractionState


__all__ = ["removal_rate", "detection_rate", "derivative", "jacobian",
           "reproduction_number", "r0_unity_rate"]


def detection_rate(theta, params):
    """Rate at which undetected infected individuals become detected."""
    return params.eta * theta + params.kappa + params.theta_b * params.eta_bi


def removal_rate(theta, params):
    """Total exit rate of the undetected infected compartment."""
    return params.gamma + detection_rate(theta, params)


def _rhs(x, theta, beta_t, params):
    s, i_u, i_d, r_u = x.tolist()
    c  = detection_rate(theta, params)
    fi = beta_t * s * i_u
    return np.array([
        -fi,
        fi - (params.gamma + c) * i_u,
        c * i_u - params.gamma * i_d,
        params.gamma * i_u - params.theta_b * params.eta_br * r_u,
    ])


def derivative(state, params, theta, beta_t):
    """Time derivative of the five fractions.

    Parameters
    ----------
    state : :class:`FractionState` or array-like
        Current fractions; arrays are ordered ``(s, i_u, i_d, r_u[, r_d])``.
    params : :class:`Params`
        Model constants.
    theta : float
        Molecular testing rate.
    beta_t : float
        Contact rate at the current time.

    Return value
    ------------
    An array ``(ds, di_u, di_d, dr_u, dr_d)`` summing to zero.
    """
    if not isinstance(state, FractionState):
        state = FractionState.from_array(state)
    head = _rhs(state.as_array(), theta, beta_t, params)
    return np.append(head, -head.sum())


def jacobian(x, theta, beta_t, params):
    """Jacobian of the integrated right-hand side, in ``(s, i_u, i_d, r_u)`` order."""
    s, i_u = float(x[0]), float(x[1])
    c = detection_rate(theta, params)
    return np.array([
        [-beta_t * i_u, -beta_t * s,                      0.0,           0.0],
        [ beta_t * i_u,  beta_t * s - params.gamma - c,   0.0,           0.0],
        [ 0.0,           c,                              -params.gamma,  0.0],
        [ 0.0,           params.gamma,                    0.0,          -params.theta_b * params.eta_br],
    ])


def reproduction_number(params, theta=0.0):
    """Basic reproduction number under a constant testing rate."""
    return params.beta / removal_rate(theta, params)


def r0_unity_rate(params):
    """Constant testing rate at which the reproduction number equals one."""
    if params.eta == 0:
        raise ValueError("Testing sensitivity must be positive")
    return (params.beta - params.baseline_removal) / params.eta
