import math
import os
import unittest

import numpy as np

from ..errors import InfeasibleError
from ..model import *
from ..policy import *


class Theorem1RateTestCase(unittest.TestCase):
    def setUp(self):
        self.params = Params(kappa=0.0)

    def test_plateau(self):
        rate = theorem1_rate([1.0, 0.1, 0.0, 0.0], 0.3, self.params, "plateau")
        self.assertAlmostEqual(rate, (0.3 - 1 / 14) / 0.9, places=15)
        self.assertAlmostEqual(rate, 0.253968, places=6)

    def test_free(self):
        self.assertEqual(theorem1_rate([1.0, 0.1, 0.0, 0.0], 0.3, self.params, "free"), 0.0)
        self.assertEqual(theorem1_rate([1.0, 0.1, 0.0, 0.0], 0.3, self.params, "herd"), 0.0)

    def test_clamped(self):
        self.assertEqual(theorem1_rate([0.2, 0.1, 0.0, 0.0], 0.3, self.params, "plateau"), 0.0)

    def test_phase_wrong(self):
        with self.assertRaisesRegex(ValueError,
                r"Invalid phase 'foo'; must be one of free, plateau, herd"):
            theorem1_rate([1.0, 0.1, 0.0, 0.0], 0.3, self.params, "foo")


class Theorem1PolicyTestCase(unittest.TestCase):
    @classmethod
    def setUpClass(cls):
        cls.params = Params(kappa=0.0, eta=1.0)
        cls.x0     = FractionState(0.99, 0.01)
        cls.policy = solve_theorem1(cls.x0, 0.1, cls.params)
        cls.traj   = cls.policy.replay(horizon=cls.policy.t_herd + 50)

    def test_switching_times(self):
        self.assertGreater(self.policy.t_hit, 0)
        self.assertGreater(self.policy.t_herd, self.policy.t_hit)
        self.assertLess(self.policy.t_herd, 365)
        self.assertAlmostEqual(self.policy.x_hit[IU], 0.1, delta=1e-6)
        self.assertEqual(self.policy.breakpoints, (self.policy.t_hit, self.policy.t_herd))

    def test_ceiling(self):
        self.assertLessEqual(self.traj.i_u.max(), 0.1 + 1e-6)

    def test_plateau(self):
        mask = (self.traj.times >= self.policy.t_hit) & (self.traj.times <= self.policy.t_herd)
        self.assertTrue(np.all(np.abs(self.traj.i_u[mask] - 0.1) < 1e-4))
        self.assertTrue(np.all(self.traj.theta[mask][:-1] > 0))

    def test_herd_switch(self):
        crossed = np.flatnonzero(self.params.beta * self.traj.s <= self.params.gamma + 1e-12)
        self.assertLessEqual(abs(self.traj.times[crossed[0]] - self.policy.t_herd), 0.01 + 1e-9)
        after = self.traj.times >= self.policy.t_herd
        self.assertTrue(np.all(self.traj.theta[after] == 0))
        before = self.traj.times < self.policy.t_hit
        self.assertTrue(np.all(self.traj.theta[before] == 0))

    def test_cost(self):
        cost = policy_cost(self.policy, self.params)
        self.assertGreater(cost, 0)
        self.assertAlmostEqual(cost, self.traj.total_cost, delta=1e-4)
        self.assertAlmostEqual(cost, self.policy.cost_identity(self.traj), delta=1e-3)

    def test_cost_wrong_params(self):
        with self.assertRaisesRegex(ValueError, r"Policy was solved for"):
            policy_cost(self.policy, Params())


class Theorem1EdgeTestCase(unittest.TestCase):
    def test_never_reached(self):
        params = Params(kappa=0.0, eta=1.0)
        policy = solve_theorem1(FractionState(0.99, 0.01), 0.9, params, horizon=200)
        self.assertTrue(math.isinf(policy.t_hit))
        self.assertEqual(policy.cost(), 0.0)
        self.assertEqual(policy.rate(10.0, np.array([0.9, 0.1, 0.0, 0.0])), 0.0)

    def test_decreasing_beta(self):
        params = Params(kappa=0.0, eta=1.0)
        beta   = PiecewiseConstantBeta([0, 20], [0.3, 0.25])
        policy = solve_theorem1(FractionState(0.99, 0.01), 0.1, params, beta=beta)
        self.assertLess(policy.t_hit, policy.t_herd)
        traj   = policy.replay(horizon=min(policy.t_herd + 20, 365))
        self.assertLessEqual(traj.i_u.max(), 0.1 + 1e-6)
        self.assertAlmostEqual(policy.cost(), traj.total_cost, delta=1e-3)

    def test_increasing_beta(self):
        beta = PiecewiseConstantBeta([0, 20], [0.3, 0.35])
        with self.assertRaisesRegex(ValueError,
                r"Contact rate must be non-increasing over the horizon"):
            solve_theorem1(FractionState(0.99, 0.01), 0.1, Params(), beta=beta)

    def test_ceiling_wrong(self):
        with self.assertRaisesRegex(InfeasibleError,
                r"Initial infected fraction 0.01 must be below the ceiling 0.005"):
            solve_theorem1(FractionState(0.99, 0.01), 0.005, Params())


@unittest.skipUnless(os.environ.get("OPTITEST_SLOW"), "slow")
class Theorem1DominanceTestCase(unittest.TestCase):
    def test_fewest_susceptibles(self):
        params = Params(kappa=0.0, eta=1.0)
        x0     = FractionState(0.99, 0.01)
        policy = solve_theorem1(x0, 0.1, params)
        best   = policy.replay(horizon=policy.t_herd, step=0.01)
        late   = float(round(policy.t_hit / 2))
        alternatives = [
            solve_constant_rate(x0, 0.1, params).theta,
            params.theta_max,
            TimeSchedule(lambda t: 0.0 if t < late else params.theta_max, breakpoints=(late,)),
        ]
        checked = 0
        for schedule in alternatives:
            traj = integrate(x0, params, schedule, horizon=policy.t_herd, step=0.01)
            if traj.i_u.max() > 0.1 + 1e-6:
                continue
            checked += 1
            s_alt = np.interp(best.times, traj.times, traj.s)
            self.assertTrue(np.all(best.s <= s_alt + 1e-6))
        self.assertGreaterEqual(checked, 2)
