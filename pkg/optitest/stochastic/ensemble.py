import logging

import numpy as np
from joblib import Parallel, delayed

from .gillespie import gillespie_run, replicate_rng


__all__ = ["EnsembleSummary", "summarize_paths", "ensemble_run"]


logger = logging.getLogger(__name__)


COLUMNS = ("s", "i_u", "i_d", "r_u", "r_d")


class EnsembleSummary:
    """Per-time statistics of replicate paths sharing one epoch grid.

    Attributes
    ----------
    times : ndarray
        Grid.
    mean, variance, lower, upper : ndarray
        ``(n_times, 5)`` statistics of the fractions in :data:`COLUMNS` order;
        ``lower`` and ``upper`` are the band quantiles.
    theta_mean : ndarray
        Mean testing rate held from each grid time.
    eradication_times : ndarray
        Per-replicate eradication times, infinite where it did not happen.
    n_reps : int
    master_seed : int or None
    """
    columns = COLUMNS

    def __init__(self, times, mean, variance, lower, upper, theta_mean, eradication_times,
                 n_reps, master_seed=None, quantiles=(0.025, 0.975)):
        self.times      = times
        self.mean       = mean
        self.variance   = variance
        self.lower      = lower
        self.upper      = upper
        self.theta_mean = theta_mean
        self.eradication_times = eradication_times
        self.n_reps      = n_reps
        self.master_seed = master_seed
        self.quantiles   = quantiles


def summarize_paths(paths, master_seed=None, quantiles=(0.025, 0.975)):
    """Reduce :class:`SSAPath` replicates to an :class:`EnsembleSummary`."""
    if not paths:
        raise ValueError("At least one path is required")
    times = paths[0].times
    for path in paths[1:]:
        if not np.array_equal(path.times, times):
            raise ValueError("Paths must share the same time grid")
    stack = np.stack([np.column_stack([path.fractions, path.r_d / path.n]) for path in paths])
    lower, upper = np.quantile(stack, quantiles, axis=0)
    return EnsembleSummary(
        times      = times,
        mean       = stack.mean(axis=0),
        variance   = stack.var(axis=0),
        lower      = lower,
        upper      = upper,
        theta_mean = np.mean([path.theta for path in paths], axis=0),
        eradication_times = np.array([path.eradicated_at for path in paths]),
        n_reps      = len(paths),
        master_seed = master_seed,
        quantiles   = tuple(quantiles),
    )


def ensemble_run(n_reps, x0, controller, params, horizon, master_seed, *, epoch=1.0,
                 beta=None, jobs=1, seeds=None, quantiles=(0.025, 0.975)):
    """Run independent replicates of :func:`gillespie_run` and summarize them.

    Replicate ``k`` draws from ``SeedSequence([master_seed, k])`` unless ``seeds``
    gives its seed explicitly, so results do not depend on ``jobs``.
    """
    if n_reps < 1:
        raise ValueError("Replicate count must be at least 1, not {!r}".format(n_reps))
    if seeds is not None and len(seeds) != n_reps:
        raise ValueError("Expected {} replicate seeds, not {}".format(n_reps, len(seeds)))

    def rng_for(index):
        if seeds is not None:
            return np.random.default_rng(seeds[index])
        return replicate_rng(master_seed, index)

    paths = Parallel(n_jobs=jobs)(
        delayed(gillespie_run)(x0, controller, params, horizon, rng_for(index),
                               epoch=epoch, beta=beta)
        for index in range(n_reps))
    logger.info("Ran %d replicates over %g days", n_reps, horizon)
    return summarize_paths(paths, master_seed, quantiles)
