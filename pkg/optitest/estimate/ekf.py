"""Extended Kalman filter on the fractions, constrained by the exact detected counts.

The filter state is ordered ``(s, i_u, r_u, i_d)``. Observations are the detected
infected and detected recovered fractions, which the filter reproduces exactly after
every update.
"""
import itertools
import logging
import math

import numpy as np

from ..errors import ContractViolation
from ..model import FractionState, rk4_step
from ..model.dynamics import _rhs, jacobian
from ..stochastic import diffusion_matrix


__all__ = ["OBSERVATION_MATRIX", "OBSERVATION_OFFSET", "Observation", "EstimatorState",
           "initial_estimate", "predict", "update", "project_feasible"]


logger = logging.getLogger(__name__)


# estimator order <-> integrated model order (s, i_u, i_d, r_u); the swap is its own inverse
PERMUTATION = [0, 1, 3, 2]

OBSERVATION_MATRIX = np.array([[ 0.0,  0.0,  0.0,  1.0],
                               [-1.0, -1.0, -1.0, -1.0]])
OBSERVATION_OFFSET = np.array([0.0, 1.0])

# relative to the largest eigenvalue; anything smaller is RK4 and update roundoff
PSD_TOLERANCE = 1e-6


class Observation:
    """Detected infected and detected recovered fractions."""
    def __init__(self, i_d, r_d):
        for name, value in (("i_d", i_d), ("r_d", r_d)):
            if not 0 <= value <= 1:
                raise ValueError("{} must be within [0, 1], not {!r}".format(name, value))
        self.i_d = float(i_d)
        self.r_d = float(r_d)

    @classmethod
    def from_counts(cls, counts):
        return cls(counts.i_d / counts.n, counts.r_d / counts.n)

    def as_array(self):
        return np.array([self.i_d, self.r_d])

    def __repr__(self):
        return "Observation(i_d={!r}, r_d={!r})".format(self.i_d, self.r_d)


class EstimatorState:
    """Mean and covariance of the filter.

    Attributes
    ----------
    x : ndarray
        Mean, ordered ``(s, i_u, r_u, i_d)``.
    P : ndarray
        Covariance.
    t : float
        Time of the estimate.
    innovation : ndarray or None
        Innovation of the update that produced this estimate.
    """
    def __init__(self, x, P, t=0.0, innovation=None):
        self.x = np.asarray(x, dtype=float)
        self.P = np.asarray(P, dtype=float)
        if self.x.shape != (4,) or self.P.shape != (4, 4):
            raise ValueError("Estimator state must be a 4-vector and a 4x4 matrix")
        self.t = float(t)
        self.innovation = innovation

    @property
    def model_state(self):
        """Mean in the integrated model order ``(s, i_u, i_d, r_u)``."""
        return self.x[PERMUTATION]

    @property
    def s(self):
        return self.x[0]

    @property
    def i_u(self):
        return self.x[1]

    @property
    def r_u(self):
        return self.x[2]

    @property
    def i_d(self):
        return self.x[3]

    def fractions(self):
        return FractionState.from_array(np.clip(self.model_state, 0.0, 1.0))


def initial_estimate(n, i_max_count, t=0.0):
    """Prior with everyone susceptible and uniform uncertainty on ``[0, I_max]``."""
    spread = (i_max_count / n) ** 2 / 12
    return EstimatorState([1.0, 0.0, 0.0, 0.0], np.diag([spread, spread, 0.0, 0.0]), t)


def _permute(matrix):
    return matrix[PERMUTATION][:, PERMUTATION]


def _symmetrize(P):
    return 0.5 * (P + P.T)


def _nearest_psd(P, t):
    """Symmetric part of ``P`` with negative eigenvalues clipped to zero.

    Exceptions
    ----------
    Raises :exn:`ContractViolation` if ``P`` is not finite or has an eigenvalue below
    zero by more than roundoff relative to its largest one.
    """
    P = _symmetrize(P)
    if not np.all(np.isfinite(P)):
        raise ContractViolation("Covariance is not finite at t={:.6g}".format(t))
    eigenvalues, vectors = np.linalg.eigh(P)
    scale = max(np.abs(eigenvalues).max(), 1e-300)
    if eigenvalues.min() < -PSD_TOLERANCE * scale:
        raise ContractViolation("Covariance lost positive semidefiniteness at t={:.6g} "
                                "(smallest eigenvalue {:.3e})".format(t, eigenvalues.min()))
    if eigenvalues.min() >= 0:
        return P
    return _symmetrize((vectors * np.maximum(eigenvalues, 0.0)) @ vectors.T)


def predict(est, theta, dt, params, *, n=None, beta_t=None, step=0.01):
    """Propagate mean and covariance for ``dt`` under a held testing rate.

    The mean follows the deterministic model; the covariance follows
    ``dP/dt = G P + P G^T + Q`` with ``G`` the Jacobian at the mean and ``Q`` the
    diffusion matrix scaled by ``1/n``. Both are integrated jointly with RK4.

    Parameters
    ----------
    n : int or None
        Population size; ``None`` drops the process noise.
    beta_t : float or None
        Contact rate; defaults to ``params.beta``.
    """
    if not dt >= 0:
        raise ValueError("Prediction interval must be non-negative, not {!r}".format(dt))
    beta = params.beta if beta_t is None else beta_t

    def fun(t, z):
        x_model = z[:4][PERMUTATION]
        P       = z[4:].reshape(4, 4)
        G       = _permute(jacobian(x_model, theta, beta, params))
        dP      = G @ P + P @ G.T
        if n is not None:
            dP += _permute(diffusion_matrix(np.maximum(x_model, 0.0), theta, params, beta)) / n
        return np.concatenate([_rhs(x_model, theta, beta, params)[PERMUTATION], dP.ravel()])

    P = _nearest_psd(est.P, est.t)
    z = np.concatenate([est.x, P.ravel()])
    count = max(1, math.ceil(dt / step - 1e-9)) if dt > 0 else 0
    for k in range(count):
        t = est.t + (k + 1) * dt / count
        z = rk4_step(fun, t - dt / count, z, dt / count)
        P = _nearest_psd(z[4:].reshape(4, 4), t)
        z = np.concatenate([z[:4], P.ravel()])
    return EstimatorState(z[:4], P, est.t + dt)


def project_feasible(z, obs):
    """Euclidean projection of a mean onto the states consistent with ``obs``.

    ``i_d`` is pinned to the observation; ``(s, i_u, r_u)`` is projected onto the
    non-negative triples summing to ``1 - i_d - r_d``.

    Exceptions
    ----------
    Raises :exn:`ContractViolation` if the observation leaves no feasible state.
    """
    mass = 1.0 - obs.i_d - obs.r_d
    if mass < -1e-12:
        raise ContractViolation("Observed fractions {!r} sum past one".format(obs))
    mass = max(mass, 0.0)
    free = np.asarray(z, dtype=float)[:3]

    best, best_distance = None, math.inf
    for size in range(1, 4):
        for support in itertools.combinations(range(3), size):
            support   = list(support)
            candidate = np.zeros(3)
            candidate[support] = free[support] + (mass - free[support].sum()) / size
            if candidate.min() < 0:
                continue
            distance = float(np.sum((candidate - free) ** 2))
            if distance < best_distance:
                best, best_distance = candidate, distance
    return np.append(best, obs.i_d)


def update(est, obs):
    """Condition the estimate on exact detected fractions.

    Uses the Kalman gain with zero measurement noise, falling back to the
    pseudo-inverse of the innovation covariance when it is singular, then projects
    the mean onto the feasible set. The posterior covariance is kept positive
    semidefinite.
    """
    if not isinstance(obs, Observation):
        obs = Observation(*obs)
    C, P = OBSERVATION_MATRIX, est.P
    S    = C @ P @ C.T
    singular_values = np.linalg.svd(S, compute_uv=False)
    if singular_values[-1] > 1e-12 * singular_values[0]:
        gain = P @ C.T @ np.linalg.inv(S)
    else:
        logger.debug("Singular innovation covariance at t=%.6g; using pseudo-inverse", est.t)
        gain = P @ C.T @ np.linalg.pinv(S)

    innovation = obs.as_array() - (C @ est.x + OBSERVATION_OFFSET)
    x = project_feasible(est.x + gain @ innovation, obs)
    # Joseph form with zero measurement noise
    reduce = np.eye(4) - gain @ C
    P = _nearest_psd(reduce @ P @ reduce.T, est.t)
    return EstimatorState(x, P, est.t, innovation)
