import math
import numbers

import numpy as np


__all__ = ["Params", "FractionState", "S", "IU", "ID", "RU"]


# Column order of the integrated state vector. The detected recovered fraction
# is never integrated: it is read out as one minus the other four.
S, IU, ID, RU = range(4)


def _check_real(name, value, *, upper=None):
    if isinstance(value, bool) or not isinstance(value, numbers.Real):
        raise TypeError("{} must be a real number, not {!r}".format(name, value))
    if not math.isfinite(value) or value < 0:
        raise ValueError("{} must be a finite non-negative number, not {!r}"
                         .format(name, value))
    if upper is not None and value > upper:
        raise ValueError("{} must be at most {}, not {!r}".format(name, upper, value))
    return float(value)


class Params:
    """Epidemiological and testing constants.

    Rates are per day. The defaults are the reference values used throughout the
    package, with no background serology.

    Parameters
    ----------
    beta : float
        Contact rate.
    gamma : float
        Recovery rate.
    kappa : float
        Symptomatic self-report rate.
    eta : float
        Molecular test sensitivity, in ``[0, 1]``.
    eta_bi : float
        Serology sensitivity on infected individuals, in ``[0, 1]``.
    eta_br : float
        Serology sensitivity on recovered individuals, in ``[0, 1]``.
    theta_b : float
        Background serology rate.
    theta_max : float
        Upper bound of the molecular testing rate.
    c_ser : float
        Cost of a serology test relative to a molecular test.
    """
    fields = ("beta", "gamma", "kappa", "eta", "eta_bi", "eta_br",
              "theta_b", "theta_max", "c_ser")

    def __init__(self, *, beta=0.3, gamma=1 / 14, kappa=0.04, eta=0.9, eta_bi=0.6,
                 eta_br=0.8, theta_b=0.0, theta_max=2 / 7, c_ser=0.4):
        self.beta      = _check_real("beta", beta)
        self.gamma     = _check_real("gamma", gamma)
        self.kappa     = _check_real("kappa", kappa)
        self.eta       = _check_real("eta", eta, upper=1)
        self.eta_bi    = _check_real("eta_bi", eta_bi, upper=1)
        self.eta_br    = _check_real("eta_br", eta_br, upper=1)
        self.theta_b   = _check_real("theta_b", theta_b)
        self.theta_max = _check_real("theta_max", theta_max)
        self.c_ser     = _check_real("c_ser", c_ser)

    def replace(self, **changes):
        """Return a copy with some fields changed."""
        unknown = set(changes) - set(self.fields)
        if unknown:
            raise TypeError("Unknown parameter(s) {}".format(", ".join(sorted(unknown))))
        return Params(**{**self.as_dict(), **changes})

    def as_dict(self):
        return {name: getattr(self, name) for name in self.fields}

    @property
    def baseline_removal(self):
        """Removal rate of undetected infected individuals when no molecular test runs."""
        return self.gamma + self.kappa + self.theta_b * self.eta_bi

    def __eq__(self, other):
        return isinstance(other, Params) and self.as_dict() == other.as_dict()

    def __hash__(self):
        return hash(tuple(self.as_dict().values()))

    def __repr__(self):
        return "Params({})".format(", ".join("{}={!r}".format(k, v)
                                             for k, v in self.as_dict().items()))


class FractionState:
    """Population fractions ``(s, i_u, i_d, r_u, r_d)``.

    ``r_d`` is derived so that the five fractions sum to one.

    Parameters
    ----------
    s, i_u, i_d, r_u : float
        Susceptible, undetected infected, detected infected and undetected
        recovered fractions, each in ``[0, 1]``.

    Exceptions
    ----------
    Raises :exn:`ValueError` if a fraction is out of range or if the four sum past one.
    """
    tolerance = 1e-9

    def __init__(self, s, i_u, i_d=0.0, r_u=0.0):
        values = []
        for name, value in zip(("s", "i_u", "i_d", "r_u"), (s, i_u, i_d, r_u)):
            if isinstance(value, bool) or not isinstance(value, numbers.Real):
                raise TypeError("{} must be a real number, not {!r}".format(name, value))
            if not -self.tolerance <= value <= 1 + self.tolerance:
                raise ValueError("{} must be within [0, 1], not {!r}".format(name, value))
            values.append(float(value))
        if sum(values) > 1 + self.tolerance:
            raise ValueError("Fractions must sum to at most 1, not {!r}".format(sum(values)))
        self.s, self.i_u, self.i_d, self.r_u = values

    @classmethod
    def from_array(cls, x):
        x = np.asarray(x, dtype=float)
        if x.shape not in ((4,), (5,)):
            raise ValueError("State vector must have 4 or 5 entries, not {!r}"
                             .format(x.shape))
        return cls(*x[:4])

    @property
    def r_d(self):
        return 1.0 - (self.s + self.i_u + self.i_d + self.r_u)

    @property
    def infected(self):
        return self.i_u + self.i_d

    def as_array(self):
        """Integrated state vector, ordered ``(s, i_u, i_d, r_u)``."""
        return np.array([self.s, self.i_u, self.i_d, self.r_u])

    def __iter__(self):
        yield from (self.s, self.i_u, self.i_d, self.r_u, self.r_d)

    def __eq__(self, other):
        return isinstance(other, FractionState) and tuple(self) == tuple(other)

    def __repr__(self):
        return ("FractionState(s={!r}, i_u={!r}, i_d={!r}, r_u={!r}, r_d={!r})"
                .format(*self))
