from ..model import DEFAULT_STEP
from .base import Policy


__all__ = ["policy_cost", "realized_cost"]


def policy_cost(policy, params=None, horizon=None):
    """Closed-form molecular testing effort of a solved policy.

    Parameters
    ----------
    policy : :class:`Policy`
        Solved policy.
    params : :class:`Params` or None
        Must match the constants the policy was solved for, if given.
    horizon : float or None
        Accounting window; required for constant testing.
    """
    if not isinstance(policy, Policy):
        raise TypeError("Policy must be an instance of Policy, not {!r}".format(policy))
    if params is not None and params != policy.params:
        raise ValueError("Policy was solved for {!r}, not {!r}".format(policy.params, params))
    return policy.cost(horizon)


def realized_cost(policy, horizon, step=DEFAULT_STEP):
    """Testing effort of a policy read off its deterministic replay."""
    if not isinstance(policy, Policy):
        raise TypeError("Policy must be an instance of Policy, not {!r}".format(policy))
    return policy.replay(horizon, step).total_cost
