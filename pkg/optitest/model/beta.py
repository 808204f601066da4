from abc import ABCMeta, abstractmethod
import math
import numbers

import numpy as np


__all__ = ["BetaSignal", "ConstantBeta", "PiecewiseConstantBeta", "SinusoidalBeta",
           "as_beta_signal"]


class BetaSignal(metaclass=ABCMeta):
    """Contact rate as a function of time.

    Calls accept a scalar time or an array of times.
    """
    breakpoints = ()

    @abstractmethod
    def __call__(self, t):
        raise NotImplementedError

    @property
    def is_constant(self):
        return False

    def is_non_increasing(self, horizon, samples=1001):
        """Check monotonicity on a sample grid of ``[0, horizon]``."""
        values = np.array([self(t) for t in np.linspace(0.0, horizon, samples)])
        return bool(np.all(np.diff(values) <= 1e-15))


class ConstantBeta(BetaSignal):
    def __init__(self, value):
        if isinstance(value, bool) or not isinstance(value, numbers.Real):
            raise TypeError("Contact rate must be a real number, not {!r}".format(value))
        if not math.isfinite(value) or value < 0:
            raise ValueError("Contact rate must be non-negative, not {!r}".format(value))
        self.value = float(value)

    def __call__(self, t):
        if np.ndim(t):
            return np.full(np.shape(t), self.value)
        return self.value

    @property
    def is_constant(self):
        return True

    def __repr__(self):
        return "ConstantBeta({!r})".format(self.value)


class PiecewiseConstantBeta(BetaSignal):
    """Contact rate holding ``values[k]`` on ``[times[k], times[k + 1])``.

    Parameters
    ----------
    times : sequence of float
        Strictly increasing change points; ``times[0]`` is the start of the first piece.
    values : sequence of float
        Non-negative rates, one per change point.
    """
    def __init__(self, times, values):
        times  = np.asarray(times, dtype=float)
        values = np.asarray(values, dtype=float)
        if times.ndim != 1 or times.shape != values.shape or not len(times):
            raise ValueError("Change points and values must be non-empty 1-D sequences "
                             "of the same length")
        if np.any(np.diff(times) <= 0):
            raise ValueError("Change points must be strictly increasing")
        if np.any(values < 0) or not np.all(np.isfinite(values)):
            raise ValueError("Contact rates must be finite and non-negative")
        self.times  = times
        self.values = values

    def __call__(self, t):
        index = np.searchsorted(self.times, t, side="right") - 1
        return self.values[np.maximum(index, 0)]

    @property
    def breakpoints(self):
        return tuple(self.times[1:])

    @property
    def is_constant(self):
        return bool(np.all(self.values == self.values[0]))


class SinusoidalBeta(BetaSignal):
    """Seasonal contact rate ``center + amplitude * sin(2 pi t / period + phase)``."""
    def __init__(self, center, amplitude, period=365.0, phase=0.0):
        if amplitude < 0 or amplitude > center:
            raise ValueError("Amplitude must be within [0, center], not {!r}"
                             .format(amplitude))
        if period <= 0:
            raise ValueError("Period must be positive, not {!r}".format(period))
        self.center    = float(center)
        self.amplitude = float(amplitude)
        self.period    = float(period)
        self.phase     = float(phase)

    def __call__(self, t):
        return self.center + self.amplitude * np.sin(2 * np.pi * t / self.period + self.phase)

    @property
    def is_constant(self):
        return self.amplitude == 0


def as_beta_signal(beta):
    if isinstance(beta, BetaSignal):
        return beta
    return ConstantBeta(beta)
