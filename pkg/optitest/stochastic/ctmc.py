import numbers

import numpy as np

from ..model import FractionState, detection_rate


__all__ = ["CountState", "EVENTS", "STOICHIOMETRY", "transition_rates", "diffusion_matrix"]


EVENTS = ("infection", "recovery_u", "detection_u", "recovery_d", "detection_r")

# Changes of (S, I_u, I_d, R_u) per event, in EVENTS order; R_d absorbs the rest.
STOICHIOMETRY = np.array([
    [-1,  1,  0,  0],
    [ 0, -1,  0,  1],
    [ 0, -1,  1,  0],
    [ 0,  0, -1,  0],
    [ 0,  0,  0, -1],
])


class CountState:
    """Integer compartment counts of a population of size ``n``.

    Parameters
    ----------
    s, i_u, i_d, r_u : int
        Susceptible, undetected infected, detected infected and undetected
        recovered counts.
    n : int
        Population size; detected recovered individuals make up the rest.
    """
    def __init__(self, s, i_u, i_d, r_u, n):
        for name, value in (("s", s), ("i_u", i_u), ("i_d", i_d), ("r_u", r_u), ("n", n)):
            if isinstance(value, bool) or not isinstance(value, numbers.Integral):
                raise TypeError("{} must be an integer, not {!r}".format(name, value))
            if value < 0:
                raise ValueError("{} must be non-negative, not {!r}".format(name, value))
        if s + i_u + i_d + r_u > n:
            raise ValueError("Counts must not exceed the population size {}".format(n))
        self.s, self.i_u, self.i_d, self.r_u, self.n = int(s), int(i_u), int(i_d), int(r_u), int(n)

    @classmethod
    def from_array(cls, counts, n):
        return cls(*(int(c) for c in counts), n)

    @property
    def r_d(self):
        return self.n - self.s - self.i_u - self.i_d - self.r_u

    @property
    def infected(self):
        return self.i_u + self.i_d

    @property
    def eradicated(self):
        return self.infected == 0

    def as_array(self):
        return np.array([self.s, self.i_u, self.i_d, self.r_u], dtype=np.int64)

    def fractions(self):
        return FractionState(self.s / self.n, self.i_u / self.n, self.i_d / self.n,
                             self.r_u / self.n)

    def __eq__(self, other):
        return (isinstance(other, CountState) and self.n == other.n
                and np.array_equal(self.as_array(), other.as_array()))

    def __repr__(self):
        return "CountState(s={}, i_u={}, i_d={}, r_u={}, n={})".format(
            self.s, self.i_u, self.i_d, self.r_u, self.n)


def transition_rates(counts, theta, params, beta_t=None, n=None):
    """Propensities of the five events, in :data:`EVENTS` order.

    Parameters
    ----------
    counts : :class:`CountState` or array-like
        State; arrays hold ``(S, I_u, I_d, R_u)`` along their first axis.
    theta : float
        Molecular testing rate.
    beta_t : float or None
        Contact rate; defaults to ``params.beta``.
    n : int or None
        Population size; required for arrays, taken from a :class:`CountState`.

    Return value
    ------------
    Array of shape ``(5,) + counts.shape[1:]``.
    """
    if isinstance(counts, CountState):
        n, counts = counts.n, counts.as_array()
    elif n is None:
        raise TypeError("Population size is required for counts given as an array")
    s, i_u, i_d, r_u = np.asarray(counts, dtype=float)[:4]
    beta = params.beta if beta_t is None else beta_t
    return np.array([
        beta * s * i_u / n,
        params.gamma * i_u,
        detection_rate(theta, params) * i_u,
        params.gamma * i_d,
        params.theta_b * params.eta_br * r_u,
    ])


def diffusion_matrix(x, theta, params, beta_t=None):
    """Diffusion matrix of the linear noise approximation, per unit population.

    Equals ``sum_k rate_k(x) v_k v_k^T`` over the events, with ``x`` the fractions
    ``(s, i_u, i_d, r_u)`` and the result in the same order.
    """
    s, i_u, i_d, r_u = (float(v) for v in np.asarray(x, dtype=float)[:4])
    beta = params.beta if beta_t is None else beta_t
    p    = params
    c    = detection_rate(theta, p)
    bsi  = beta * s * i_u
    return np.array([
        [ bsi,  -bsi,                           0.0,                  0.0],
        [-bsi,   bsi + (p.gamma + c) * i_u,    -c * i_u,             -p.gamma * i_u],
        [ 0.0,  -c * i_u,                       c * i_u + p.gamma * i_d, 0.0],
        [ 0.0,  -p.gamma * i_u,                 0.0,                  p.gamma * i_u + p.theta_b * p.eta_br * r_u],
    ])
