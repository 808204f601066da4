import numpy as np

from .params import FractionState, S, IU, ID, RU


__all__ = ["Trajectory"]


class Trajectory:
    """Sampled solution of the deterministic model.

    Parameters
    ----------
    times : array-like
        Strictly increasing sample times.
    states : array-like
        ``(n, 4)`` samples of ``(s, i_u, i_d, r_u)``.
    theta : array-like
        Testing rate in force at each sample, right-continuous.
    cost : array-like or None
        Cumulative integral of the testing rate, by trapezoidal rule within each
        constant-law segment.

    Attributes
    ----------
    s, i_u, i_d, r_u, r_d : ndarray
        Compartment columns.
    infected : ndarray
        ``i_u + i_d``.
    """
    def __init__(self, times, states, theta, cost=None):
        times  = np.array(times, dtype=float)
        states = np.array(states, dtype=float).reshape(-1, 4)
        theta  = np.array(theta, dtype=float)
        cost   = np.zeros_like(times) if cost is None else np.array(cost, dtype=float)
        if not (len(times) == len(states) == len(theta) == len(cost)):
            raise ValueError("Trajectory columns must have the same length")
        if np.any(np.diff(times) <= 0):
            raise ValueError("Trajectory times must be strictly increasing")
        for array in (times, states, theta, cost):
            array.flags.writeable = False
        self.times  = times
        self.states = states
        self.theta  = theta
        self.cost   = cost

    def __len__(self):
        return len(self.times)

    @property
    def s(self):
        return self.states[:, S]

    @property
    def i_u(self):
        return self.states[:, IU]

    @property
    def i_d(self):
        return self.states[:, ID]

    @property
    def r_u(self):
        return self.states[:, RU]

    @property
    def r_d(self):
        return 1.0 - self.states.sum(axis=1)

    @property
    def infected(self):
        return self.states[:, IU] + self.states[:, ID]

    @property
    def total_cost(self):
        return float(self.cost[-1])

    def state(self, index):
        return FractionState.from_array(np.clip(self.states[index], 0.0, 1.0))

    @property
    def final(self):
        return self.state(-1)

    def peak(self):
        """Return ``(time, value)`` of the largest infected fraction."""
        index = int(np.argmax(self.infected))
        return float(self.times[index]), float(self.infected[index])

    def sample(self, times):
        """Linear interpolation of the state columns at ``times``."""
        times = np.asarray(times, dtype=float)
        return np.stack([np.interp(times, self.times, self.states[:, k])
                         for k in range(4)], axis=-1)

    def concat(self, other):
        """Append a trajectory that starts where this one ends."""
        if other.times[0] != self.times[-1]:
            raise ValueError("Trajectory must start at {}, not {}"
                             .format(self.times[-1], other.times[0]))
        return Trajectory(
            np.concatenate([self.times, other.times[1:]]),
            np.concatenate([self.states, other.states[1:]]),
            np.concatenate([self.theta[:-1], other.theta]),
            np.concatenate([self.cost, self.cost[-1] + other.cost[1:]]),
        )
