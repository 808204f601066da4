import math
import os
import unittest

import numpy as np

from ..errors import InfeasibleError
from ..model import *
from ..policy import *


class SwitchingPolicyTestCase(unittest.TestCase):
    @classmethod
    def setUpClass(cls):
        cls.params = Params()
        cls.x0     = FractionState(0.999, 0.001)
        cls.policy = solve_switching(cls.x0, 0.02, cls.params)
        cls.traj   = cls.policy.replay(horizon=cls.policy.t_e + 60)

    def test_ordering(self):
        p = self.policy
        self.assertFalse(p.is_zero)
        self.assertGreater(p.t_a, 0)
        self.assertLessEqual(p.t_a, p.t_b)
        self.assertLessEqual(p.t_b, p.t_c)
        self.assertLessEqual(p.t_c, p.t_d)
        self.assertLessEqual(p.t_d, p.t_e)
        self.assertAlmostEqual(p.t_c - p.t_b, p.tau3, places=12)
        self.assertGreaterEqual(p.tau3, p.tau3_min)
        self.assertGreaterEqual(p.tau3_min, 0)
        self.assertLessEqual(p.tau3, p.tau3_bar)

    def test_residuals(self):
        self.assertEqual(set(self.policy.residuals), {"A1", "A2", "A3", "A4"})
        for name, value in self.policy.residuals.items():
            self.assertLess(abs(value), 1e-8, name)

    def test_tangencies(self):
        for name in ("B", "E"):
            s, i_u, i_d = self.policy.points[name]
            self.assertAlmostEqual(i_u + i_d, 0.02, places=8)
            self.assertAlmostEqual(self.params.beta * s * i_u, self.params.gamma * 0.02,
                                   places=10)

    def test_replay_feasible(self):
        self.assertLessEqual(self.traj.infected.max(), 0.02 + 1e-6)
        self.assertEqual(self.policy.max_violation(self.traj), 0.0)

    def test_schedule_shape(self):
        theta = self.traj.theta
        times = self.traj.times
        p     = self.policy
        self.assertTrue(np.all(theta[times < p.t_a] == 0))
        self.assertTrue(np.all(theta[(times >= p.t_a) & (times < p.t_b)]
                               == self.params.theta_max))
        plateau = theta[(times >= p.t_b) & (times < p.t_c)]
        self.assertTrue(np.all((plateau >= 0) & (plateau <= self.params.theta_max)))
        self.assertTrue(np.all(theta[times >= p.t_d] == 0))

    def test_cost(self):
        cost = policy_cost(self.policy, self.params)
        self.assertGreater(cost, 0)
        self.assertAlmostEqual(cost, self.traj.total_cost, delta=1e-4)
        self.assertAlmostEqual(cost, realized_cost(self.policy, self.policy.t_e + 60),
                               delta=1e-4)

    def test_cheaper_than_constant(self):
        constant = solve_constant_rate(self.x0, 0.02, self.params)
        self.assertLess(policy_cost(self.policy), constant.cost(self.policy.t_e))

    def test_feedback_rate(self):
        p = self.policy
        s_a, s_b = p.points["A"][0], p.points["B"][0]
        self.assertEqual(p.feedback_rate([s_a + 0.01, 0.001, 0.0, 0.0]), 0.0)
        self.assertEqual(p.feedback_rate([0.5 * (s_a + s_b), 0.001, 0.0, 0.0]),
                         self.params.theta_max)
        self.assertEqual(p.feedback_rate([p.points["D"][0] - 0.01, 0.001, 0.0, 0.0]), 0.0)

    def test_plateau_bound(self):
        s_b, iu_b, _ = self.policy.points["B"]
        self.assertLess(self.policy.tau3_bar, 1 / (self.params.beta * iu_b))


class SwitchingEdgeTestCase(unittest.TestCase):
    def test_zero_policy(self):
        policy = solve_switching(FractionState(0.999, 0.001), 0.9, Params())
        self.assertTrue(policy.is_zero)
        self.assertEqual(policy.cost(), 0.0)
        self.assertEqual(policy.breakpoints, ())
        self.assertEqual(policy.rate(100.0, [0.5, 0.01, 0.0, 0.0]), 0.0)

    def test_infeasible(self):
        params = Params(theta_max=0.01)
        with self.assertRaisesRegex(InfeasibleError,
                r"Maximal testing from t=0 still exceeds the ceiling 0.02"):
            solve_switching(FractionState(0.999, 0.001), 0.02, params)

    def test_starts_above_ceiling(self):
        with self.assertRaisesRegex(InfeasibleError,
                r"Initial infected fraction 0.05 must be below the ceiling 0.02"):
            solve_switching(FractionState(0.95, 0.05), 0.02, Params())

    def test_short_plateau_unreachable(self):
        # the untested rebound after a short plateau overshoots whatever follows
        x0, params = FractionState(0.999, 0.001), Params(eta=1.0)
        policy = solve_switching(x0, 0.1, params)
        self.assertGreater(policy.tau3_min, 0)
        self.assertGreaterEqual(policy.tau3, policy.tau3_min)
        self.assertGreater(policy.t_d, policy.t_c)
        traj = policy.replay(horizon=policy.t_e + 60)
        self.assertLessEqual(traj.infected.max(), 0.1 + 1e-6)

    def test_plateau_rate(self):
        params = Params(kappa=0.0, eta=1.0)
        self.assertAlmostEqual(plateau_rate(0.5, 0.01, params), 0.3 * 0.49 - 1 / 14,
                               places=15)


@unittest.skipUnless(os.environ.get("OPTITEST_SLOW"), "slow")
class SwitchingCostCurveTestCase(unittest.TestCase):
    def test_curve(self):
        x0, params = FractionState(0.999, 0.001), Params()
        policy     = solve_switching(x0, 0.02, params)
        tau3, cost = switching_cost_curve(x0, 0.02, params, points=11)
        self.assertEqual(len(tau3), 11)
        self.assertAlmostEqual(tau3[0], policy.tau3_min, places=12)
        self.assertAlmostEqual(tau3[-1], policy.tau3_bar, places=12)
        self.assertTrue(np.all(np.isfinite(cost)))
        self.assertLessEqual(policy.cost(), cost.min() + 1e-6)
