import logging

import numpy as np

from ..errors import ConvergenceError, SolverError


__all__ = ["NewtonResult", "damped_newton", "multistart"]


logger = logging.getLogger(__name__)


# Residual functions signal points outside their domain by raising one of these.
DOMAIN_ERRORS = (ValueError, ArithmeticError, SolverError)


class NewtonResult:
    def __init__(self, x, residual, iterations, seed):
        self.x          = x
        self.residual   = residual
        self.iterations = iterations
        self.seed       = seed

    @property
    def norm(self):
        return float(np.max(np.abs(self.residual)))

    def __repr__(self):
        return "NewtonResult(x={!r}, norm={:.3g}, iterations={})".format(
            self.x.tolist(), self.norm, self.iterations)


def _evaluate(fun, x):
    r = np.asarray(fun(x), dtype=float)
    if not np.all(np.isfinite(r)):
        raise ValueError("Residual is not finite at {!r}".format(x.tolist()))
    return r


def _jacobian(fun, x, r, fd_step):
    jac = np.empty((len(r), len(x)))
    for j in range(len(x)):
        h = fd_step * max(1.0, abs(x[j]))
        for sign in (1.0, -1.0):
            e = np.zeros_like(x)
            e[j] = sign * h
            try:
                jac[:, j] = (_evaluate(fun, x + e) - r) / (sign * h)
                break
            except DOMAIN_ERRORS:
                continue
        else:
            raise ValueError("No finite difference fits the domain at {!r}".format(x.tolist()))
    return jac


def damped_newton(fun, x0, *, tol=1e-10, max_iter=50, fd_step=1e-7, max_halvings=30):
    """Solve ``fun(x) = 0`` by Newton's method with a finite-difference Jacobian.

    Each step is halved until the max-norm residual decreases; trial points where
    ``fun`` raises a domain error count as failures.

    Exceptions
    ----------
    Raises :exn:`ConvergenceError` when the line search or the iteration budget is
    exhausted.
    """
    x = np.array(x0, dtype=float)
    try:
        r = _evaluate(fun, x)
    except DOMAIN_ERRORS as e:
        raise ConvergenceError("Seed {!r} is outside the domain: {}".format(x.tolist(), e))

    for iteration in range(max_iter + 1):
        norm = float(np.max(np.abs(r)))
        logger.debug("Newton iteration %d: x=%r |r|=%.3e", iteration, x.tolist(), norm)
        if norm < tol:
            return NewtonResult(x, r, iteration, np.array(x0, dtype=float))
        if iteration == max_iter:
            break

        try:
            step = np.linalg.solve(_jacobian(fun, x, r, fd_step), -r)
        except (np.linalg.LinAlgError, ValueError) as e:
            raise ConvergenceError("Newton step failed at {!r}: {}".format(x.tolist(), e))

        scale = 1.0
        for _ in range(max_halvings):
            trial = x + scale * step
            try:
                r_trial = _evaluate(fun, trial)
            except DOMAIN_ERRORS:
                scale /= 2
                continue
            if np.max(np.abs(r_trial)) < norm:
                break
            scale /= 2
        else:
            raise ConvergenceError("Line search stalled at {!r} with |r|={:.3e}"
                                   .format(x.tolist(), norm))
        x, r = trial, r_trial

    raise ConvergenceError("No convergence after {} iterations; |r|={:.3e}"
                           .format(max_iter, norm))


def multistart(fun, seeds, *, accept=None, **options):
    """Run :func:`damped_newton` from each seed in order and return the first root.

    Parameters
    ----------
    seeds : iterable
        Seeds, consumed lazily. A seed generator that raises :exn:`SolverError` ends
        the search like an exhausted one.
    accept : callable or None
        Optional predicate rejecting spurious roots. A :exn:`SolverError` raised by
        it rejects the root.

    Exceptions
    ----------
    Raises :exn:`ConvergenceError` with one diagnostic per seed if no seed converges.
    """
    diagnostics = []
    seeds = iter(seeds)
    while True:
        try:
            seed = next(seeds)
        except StopIteration:
            break
        except SolverError as e:
            diagnostics.append((None, "seeding failed: {}".format(e)))
            break
        try:
            result = damped_newton(fun, seed, **options)
        except SolverError as e:
            diagnostics.append((np.asarray(seed, dtype=float).tolist(), str(e)))
            continue
        try:
            accepted = accept is None or accept(result.x)
        except SolverError as e:
            accepted = False
            logger.debug("Root %r rejected: %s", result.x.tolist(), e)
        if not accepted:
            diagnostics.append((np.asarray(seed, dtype=float).tolist(),
                                "root {!r} rejected".format(result.x.tolist())))
            continue
        return result
    raise ConvergenceError("Newton iteration failed from {} seed(s)".format(len(diagnostics)),
                           diagnostics)
