import logging
import math

import numpy as np

from ..model import ConstantBeta, as_beta_signal, as_schedule
from ..model.dynamics import detection_rate
from .ctmc import CountState, STOICHIOMETRY


__all__ = ["replicate_rng", "GillespieSimulator", "SSAPath", "gillespie_run"]


logger = logging.getLogger(__name__)


def replicate_rng(master_seed, index):
    """Independent generator of replicate ``index``, derived from the master seed."""
    return np.random.default_rng(np.random.SeedSequence([int(master_seed), int(index)]))


class GillespieSimulator:
    """Direct-method stochastic simulation of the counting process.

    Rates are held constant between calls to :meth:`advance`. Once no infected
    individual is left, the only remaining event removes undetected recovered
    individuals independently, and the simulator jumps to the end of each call by
    binomial thinning.

    Parameters
    ----------
    x0 : :class:`CountState`
        Initial counts.
    params : :class:`Params`
        Model constants.
    rng : :class:`numpy.random.Generator`
        Source of randomness.
    record : bool
        Keep every event in :attr:`events`.
    """
    block = 4096

    def __init__(self, x0, params, rng, *, t0=0.0, record=False):
        if not isinstance(x0, CountState):
            raise TypeError("Initial state must be an instance of CountState, not {!r}"
                            .format(x0))
        self.params = params
        self.rng    = rng
        self.n      = x0.n
        self.t      = float(t0)
        self.counts = x0.as_array()
        self.record = record
        self.events = []
        self._pairs = self._uniform_pairs()

    @property
    def state(self):
        return CountState.from_array(self.counts, self.n)

    @property
    def eradicated(self):
        return self.counts[1] + self.counts[2] == 0

    def _uniform_pairs(self):
        while True:
            waits  = self.rng.standard_exponential(self.block)
            picks  = self.rng.random(self.block)
            yield from zip(waits.tolist(), picks.tolist())

    def advance(self, until, theta, beta_t=None):
        """Simulate up to time ``until`` with testing rate ``theta`` held fixed.

        Return value
        ------------
        Number of events fired.
        """
        if until < self.t:
            raise ValueError("Cannot advance backwards from {} to {}".format(self.t, until))
        p     = self.params
        beta  = p.beta if beta_t is None else beta_t
        c     = detection_rate(theta, p)
        sero  = p.theta_b * p.eta_br
        fired = 0
        s, i_u, i_d, r_u = self.counts.tolist()
        while i_u + i_d > 0:
            rates = (beta * s * i_u / self.n, p.gamma * i_u, c * i_u, p.gamma * i_d,
                     sero * r_u)
            total = sum(rates)
            if total <= 0:
                break
            wait, pick = next(self._pairs)
            t_next = self.t + wait / total
            if t_next > until:
                break
            self.t = t_next
            target = pick * total
            for event, rate in enumerate(rates):
                target -= rate
                if target < 0:
                    break
            else:
                event = max(k for k, rate in enumerate(rates) if rate > 0)
            s, i_u, i_d, r_u = (v + d for v, d in zip((s, i_u, i_d, r_u),
                                                     STOICHIOMETRY[event].tolist()))
            fired += 1
            if self.record:
                self.events.append((self.t, event))
        else:
            if r_u > 0 and sero > 0 and until > self.t:
                r_u = int(self.rng.binomial(r_u, math.exp(-sero * (until - self.t))))

        self.counts = np.array([s, i_u, i_d, r_u], dtype=np.int64)
        self.t      = float(until)
        return fired


class SSAPath:
    """Stochastic path sampled at epoch boundaries.

    Attributes
    ----------
    times : ndarray
        Epoch boundaries.
    counts : ndarray
        ``(n, 4)`` counts ``(S, I_u, I_d, R_u)`` at each boundary.
    theta : ndarray
        Testing rate held on the epoch starting at each boundary.
    n : int
        Population size.
    eradicated_at : float
        First boundary with no infected individual; infinite if none.
    events : list
        ``(time, event index)`` pairs when recorded.
    """
    def __init__(self, times, counts, theta, n, eradicated_at=math.inf, events=()):
        self.times  = np.asarray(times, dtype=float)
        self.counts = np.asarray(counts, dtype=np.int64).reshape(-1, 4)
        self.theta  = np.asarray(theta, dtype=float)
        self.n      = n
        self.eradicated_at = eradicated_at
        self.events = list(events)

    @property
    def fractions(self):
        return self.counts / self.n

    @property
    def r_d(self):
        return self.n - self.counts.sum(axis=1)

    @property
    def infected(self):
        return self.counts[:, 1] + self.counts[:, 2]


def gillespie_run(x0, controller, params, horizon, seed, *, epoch=1.0, beta=None,
                  record=False):
    """Simulate one path under an open-loop or state-feedback controller.

    The controller rate is re-read at every epoch boundary from the current time and
    fractions, then held for the epoch.

    Parameters
    ----------
    x0 : :class:`CountState`
        Initial counts.
    controller : :class:`Schedule`, float or callable
        Testing rate. Plain callables are functions of time.
    seed : int, :class:`numpy.random.SeedSequence` or :class:`numpy.random.Generator`
        Randomness.
    beta : :class:`BetaSignal`, float or None
        Contact rate, held at its value at the start of each epoch.
    """
    if not epoch > 0:
        raise ValueError("Epoch must be positive, not {!r}".format(epoch))
    controller = as_schedule(controller)
    beta       = ConstantBeta(params.beta) if beta is None else as_beta_signal(beta)
    rng        = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    sim        = GillespieSimulator(x0, params, rng, record=record)

    count  = max(1, math.ceil(horizon / epoch - 1e-9))
    times  = [0.0]
    counts = [sim.counts.copy()]
    thetas = []
    eradicated_at = 0.0 if sim.eradicated else math.inf
    for k in range(count):
        t     = times[-1]
        theta = float(controller.rate(t, sim.counts / sim.n))
        sim.advance(min((k + 1) * epoch, horizon), theta, float(beta(t)))
        thetas.append(theta)
        times.append(sim.t)
        counts.append(sim.counts.copy())
        if sim.eradicated and math.isinf(eradicated_at):
            eradicated_at = sim.t
    thetas.append(float(controller.rate(times[-1], sim.counts / sim.n)))
    logger.debug("Path over %g days: eradicated at %g", horizon, eradicated_at)
    return SSAPath(times, counts, thetas, sim.n, eradicated_at, sim.events)
