import unittest

import numpy as np

from ..errors import IntegrationError
from ..model import *


class IntegrateTestCase(unittest.TestCase):
    def setUp(self):
        self.params = Params(kappa=0.0, eta=1.0)
        self.x0     = FractionState(0.99, 0.01)

    def test_disease_free(self):
        traj = integrate(FractionState(1.0, 0.0), self.params, schedule=0.1, horizon=30,
                         step=0.5)
        np.testing.assert_array_equal(traj.s, np.ones(len(traj)))
        np.testing.assert_array_equal(traj.infected, np.zeros(len(traj)))

    def test_zero_horizon(self):
        traj = integrate(self.x0, self.params, horizon=0)
        self.assertEqual(len(traj), 1)
        self.assertEqual(traj.final, self.x0)

    def test_rise_and_fall(self):
        traj = integrate(self.x0, self.params, horizon=300, step=0.05)
        t_peak, peak = traj.peak()
        self.assertGreater(peak, 0.01)
        self.assertGreater(t_peak, 0)
        self.assertLess(t_peak, 300)
        self.assertLess(traj.infected[-1], peak)
        self.assertTrue(np.all(np.diff(traj.s) <= 0))

    def test_stays_in_simplex(self):
        params = Params(theta_b=1 / 14)
        traj   = integrate(self.x0, params, schedule=2 / 7, horizon=200, step=0.1)
        self.assertTrue(np.all(traj.states >= 0))
        self.assertTrue(np.all(traj.r_d >= -1e-12))
        np.testing.assert_allclose(traj.states.sum(axis=1) + traj.r_d, 1.0, atol=1e-15)

    def test_testing_suppresses(self):
        params = Params()
        theta  = r0_unity_rate(params) + 0.05
        traj   = integrate(self.x0, params, schedule=theta, horizon=60, step=0.1)
        self.assertTrue(np.all(np.diff(traj.i_u) < 0))

    def test_fourth_order(self):
        ends = [integrate(self.x0, self.params, schedule=0.1, horizon=40, step=h).states[-1]
                for h in (0.4, 0.2, 0.1)]
        ratio = (np.abs(ends[0] - ends[1]).max()
                 / np.abs(ends[1] - ends[2]).max())
        self.assertGreater(ratio, 10)
        self.assertLess(ratio, 24)

    def test_breakpoint_alignment(self):
        schedule = HeldSchedule([0, 10.005], [0.0, 0.1])
        traj     = integrate(self.x0, self.params, schedule, horizon=20, step=0.01)
        index    = int(np.flatnonzero(traj.times == 10.005)[0])
        self.assertEqual(traj.theta[index - 1], 0.0)
        self.assertEqual(traj.theta[index], 0.1)
        self.assertAlmostEqual(traj.total_cost, 0.1 * (20 - 10.005), places=12)

    def test_cost_constant(self):
        traj = integrate(self.x0, self.params, schedule=0.2, horizon=50, step=0.1)
        self.assertAlmostEqual(traj.total_cost, 10.0, places=12)

    def test_step_alignment(self):
        traj = integrate(self.x0, self.params, horizon=1.05, step=0.1)
        self.assertEqual(len(traj), 12)
        self.assertAlmostEqual(traj.times[-2], 1.0, places=14)
        self.assertEqual(traj.times[-1], 1.05)

    def test_leaves_simplex(self):
        with self.assertRaisesRegex(IntegrationError,
                r"left the simplex at t=1"):
            integrate(FractionState(0.5, 0.5), Params(beta=10), horizon=1, step=1)

    def test_step_wrong(self):
        with self.assertRaisesRegex(ValueError,
                r"Step must be positive, not 0"):
            integrate(self.x0, self.params, step=0)

    def test_time_varying_beta(self):
        beta = PiecewiseConstantBeta([0, 30], [0.3, 0.0])
        traj = integrate(self.x0, self.params, beta=beta, horizon=60, step=0.1)
        after = traj.times >= 30
        self.assertTrue(np.all(np.diff(traj.s[after]) == 0))


class LocateCrossingTestCase(unittest.TestCase):
    def test_simple(self):
        params = Params(kappa=0.0, eta=1.0)
        traj   = integrate(FractionState(0.99, 0.01), params, horizon=100, step=0.1)
        found  = locate_crossing(traj, params, 0.0, None, lambda t, x: x[..., IU] - 0.05)
        self.assertIsNotNone(found)
        t, x = found
        self.assertGreaterEqual(x[IU], 0.05)
        self.assertLess(x[IU] - 0.05, 1e-7)
        self.assertGreater(t, traj.times[0])

    def test_never(self):
        params = Params(kappa=0.0, eta=1.0)
        traj   = integrate(FractionState(0.99, 0.01), params, horizon=10, step=0.1)
        found  = locate_crossing(traj, params, 0.0, None, lambda t, x: x[..., IU] - 0.9)
        self.assertIsNone(found)
