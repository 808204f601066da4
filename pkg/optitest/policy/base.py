from abc import ABCMeta, abstractproperty, abstractmethod

import numpy as np

from ..errors import InfeasibleError
from ..model import FractionState, Schedule, integrate, DEFAULT_STEP


__all__ = ["Policy"]


class Policy(Schedule, metaclass=ABCMeta):
    """Testing policy solved for a given initial state and infection ceiling.

    Attributes
    ----------
    kind : str
        Policy family name.
    params : :class:`Params`
        Model constants the policy was solved for.
    x0 : :class:`FractionState`
        Initial state.
    i_max : float
        Ceiling on the infected fraction.
    """
    kind = abstractproperty()
    beta = None

    def __init__(self, params, x0, i_max):
        self._check_inputs(x0, i_max)
        self.params = params
        self.x0     = x0
        self.i_max  = float(i_max)

    @abstractmethod
    def cost(self, horizon=None):
        """Closed-form total molecular testing effort."""
        raise NotImplementedError

    def replay(self, horizon=365.0, step=DEFAULT_STEP):
        """Integrate the deterministic model under this policy from :attr:`x0`."""
        return integrate(self.x0, self.params, self, beta=self.beta, horizon=horizon,
                         step=step)

    def max_violation(self, trajectory):
        """Largest excess of the infected fraction over :attr:`i_max`, or zero."""
        return max(0.0, float(np.max(trajectory.infected)) - self.i_max)

    @staticmethod
    def _check_inputs(x0, i_max):
        if not isinstance(x0, FractionState):
            raise TypeError("Initial state must be an instance of FractionState, not {!r}"
                            .format(x0))
        if not 0 < i_max < 1:
            raise ValueError("Infection ceiling must be within (0, 1), not {!r}"
                             .format(i_max))
        if x0.infected >= i_max:
            raise InfeasibleError("Initial infected fraction {!r} must be below the ceiling {!r}"
                                  .format(x0.infected, i_max))
        if x0.i_u <= 0:
            raise ValueError("Initial undetected infected fraction must be positive, not {!r}"
                             .format(x0.i_u))
