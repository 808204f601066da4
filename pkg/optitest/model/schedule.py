from abc import ABCMeta, abstractmethod
import numbers

import numpy as np


__all__ = ["Schedule", "ConstantSchedule", "TimeSchedule", "HeldSchedule", "as_schedule"]


class Schedule(metaclass=ABCMeta):
    """Molecular testing rate as a function of time and state.

    The state argument is the integrated vector ``(s, i_u, i_d, r_u)``. Rates are
    right-continuous at :attr:`breakpoints`; integrators evaluate a step that ends
    on a breakpoint with the left limit.
    """
    breakpoints = ()

    @abstractmethod
    def rate(self, t, x):
        raise NotImplementedError

    def __call__(self, t, x=None):
        return self.rate(t, x)


class ConstantSchedule(Schedule):
    def __init__(self, value):
        if isinstance(value, bool) or not isinstance(value, numbers.Real):
            raise TypeError("Testing rate must be a real number, not {!r}".format(value))
        if value < 0:
            raise ValueError("Testing rate must be non-negative, not {!r}".format(value))
        self.value = float(value)

    def rate(self, t, x):
        return self.value

    def __repr__(self):
        return "ConstantSchedule({!r})".format(self.value)


class TimeSchedule(Schedule):
    """Open-loop schedule wrapping a function of time."""
    def __init__(self, fn, breakpoints=()):
        if not callable(fn):
            raise TypeError("Schedule function must be callable, not {!r}".format(fn))
        self.fn          = fn
        self.breakpoints = tuple(sorted(breakpoints))

    def rate(self, t, x):
        return self.fn(t)


class HeldSchedule(Schedule):
    """Rate ``rates[k]`` held on ``[times[k], times[k + 1])``; the last rate holds forever."""
    def __init__(self, times, rates):
        self.times = np.asarray(times, dtype=float)
        self.rates = np.asarray(rates, dtype=float)
        if self.times.ndim != 1 or self.times.shape != self.rates.shape or not len(self.times):
            raise ValueError("Hold times and rates must be non-empty 1-D sequences "
                             "of the same length")
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("Hold times must be strictly increasing")
        if np.any(self.rates < 0):
            raise ValueError("Testing rates must be non-negative")
        self.breakpoints = tuple(self.times[1:])

    def rate(self, t, x):
        index = np.searchsorted(self.times, t, side="right") - 1
        return float(self.rates[max(index, 0)])


def as_schedule(schedule):
    if isinstance(schedule, Schedule):
        return schedule
    if isinstance(schedule, numbers.Real):
        return ConstantSchedule(schedule)
    if callable(schedule):
        return TimeSchedule(schedule)
    raise TypeError("Schedule must be a Schedule, a number or a callable, not {!r}"
                    .format(schedule))
