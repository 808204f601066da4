import os
import unittest

import numpy as np

from ..errors import IllPosedError
from ..model import *
from ..observe import *


class CounterexamplePairTestCase(unittest.TestCase):
    def setUp(self):
        self.params = Params()

    def test_hidden_susceptibles(self):
        twins = counterexample_pair(0.9, 0.8, 0.05, 0.1, self.params, 60.0)
        self.assertLess(twins.detected_gap, 1e-9)
        self.assertLess(twins.undetected_gap, 1e-8)
        self.assertGreater(twins.susceptible_gap, 0.05)
        np.testing.assert_allclose(twins.shadow_beta,
                                   self.params.beta * twins.primary.s / twins.shadow.s,
                                   rtol=1e-12)

    def test_same_start(self):
        twins = counterexample_pair(0.9, 0.9, 0.05, 0.1, self.params, 10.0)
        self.assertEqual(twins.detected_gap, 0.0)
        self.assertEqual(twins.susceptible_gap, 0.0)

    def test_grid(self):
        twins = counterexample_pair(0.9, 0.8, 0.05, 0.1, self.params, 1.005, step=0.01)
        self.assertEqual(len(twins.primary.times), 102)
        self.assertEqual(twins.primary.times[-1], 1.005)
        np.testing.assert_array_equal(twins.primary.times, twins.shadow.times)

    def test_wrong_fraction(self):
        with self.assertRaisesRegex(ValueError,
                r"s0_shadow must be within \[0, 1\], not 1.2"):
            counterexample_pair(0.9, 1.2, 0.05, 0.1, self.params, 10.0)

    def test_wrong_total(self):
        with self.assertRaisesRegex(ValueError,
                r"s0 \+ i0 must be at most 1"):
            counterexample_pair(0.99, 0.8, 0.05, 0.1, self.params, 10.0)


class SerologyReconstructionTestCase(unittest.TestCase):
    def setUp(self):
        self.params = Params(theta_b=1 / 14)
        self.x0     = FractionState(0.9, 0.05, 0.0, 0.05)

    def _relative_error(self, estimate, truth):
        return np.max(np.abs(estimate - truth)) / np.max(np.abs(truth))

    def test_recovers_state(self):
        traj = integrate(self.x0, self.params, 0.1, horizon=60.0, step=0.01)
        rec  = reconstruct_from_serology(traj.times, traj.i_d, traj.r_d, 0.1, self.params)
        self.assertLess(self._relative_error(rec.i_u, traj.i_u), 1e-3)
        self.assertLess(self._relative_error(rec.r_u, traj.r_u), 1e-3)
        self.assertLess(self._relative_error(rec.s, traj.s), 1e-3)

    def test_smoothed(self):
        traj = integrate(self.x0, self.params, 0.1, horizon=60.0, step=0.01)
        rec  = reconstruct_from_serology(traj.times, traj.i_d, traj.r_d, 0.1, self.params,
                                         smooth=(21, 3))
        self.assertLess(self._relative_error(rec.i_u, traj.i_u), 1e-3)

    def test_time_varying_beta(self):
        beta = SinusoidalBeta(0.3, 0.1, period=30.0)
        traj = integrate(self.x0, self.params, 0.1, beta=beta, horizon=60.0, step=0.01)
        rec  = reconstruct_from_serology(traj.times, traj.i_d, traj.r_d, 0.1, self.params)
        mask = ~np.isnan(rec.beta)
        self.assertTrue(mask.any())
        np.testing.assert_allclose(rec.beta[mask], beta(traj.times[mask]), rtol=0.01)

    def test_no_detections(self):
        times = np.linspace(0.0, 1.0, 101)
        rec   = reconstruct_from_serology(times, np.zeros(101), np.zeros(101), 0.1,
                                          self.params)
        np.testing.assert_array_equal(rec.i_u, np.zeros(101))
        np.testing.assert_array_equal(rec.r_u, np.zeros(101))
        self.assertTrue(np.all(np.isnan(rec.beta)))

    def test_no_serology(self):
        times = np.linspace(0.0, 1.0, 101)
        with self.assertRaisesRegex(IllPosedError,
                r"Serology testing of recovered individuals is off"):
            reconstruct_from_serology(times, np.zeros(101), np.zeros(101), 0.1, Params())

    def test_no_detection(self):
        times = np.linspace(0.0, 1.0, 101)
        with self.assertRaisesRegex(IllPosedError,
                r"Infected detection rate vanishes at t=0"):
            reconstruct_from_serology(times, np.zeros(101), np.zeros(101), 0.0,
                                      self.params.replace(theta_b=0.0))

    def test_non_uniform(self):
        times = np.array([0.0, 0.1, 0.3, 0.4])
        with self.assertRaisesRegex(ValueError,
                r"Samples must lie on a uniform increasing grid"):
            reconstruct_from_serology(times, np.zeros(4), np.zeros(4), 0.1, self.params)


class MolecularReconstructionTestCase(unittest.TestCase):
    def setUp(self):
        self.params = Params()
        self.x0     = FractionState(0.9, 0.05)

    def test_recovers_beta(self):
        traj = integrate(self.x0, self.params, 0.1, horizon=60.0, step=0.01)
        rec  = reconstruct_from_molecular(traj.times, traj.i_d, 0.1, self.params)
        self.assertLess(abs(rec.beta - self.params.beta), 0.01 * self.params.beta)
        middle = slice(100, -100)
        np.testing.assert_allclose(rec.s[middle], traj.s[middle], rtol=0.01)

    def test_testing_pause(self):
        times = np.linspace(0.0, 40.0, 4001)
        theta = np.where((times >= 20.0) & (times < 25.0), 0.0, 0.1)
        with self.assertRaisesRegex(IllPosedError,
                r"Molecular testing rate vanishes at t=20"):
            reconstruct_from_molecular(times, np.full(4001, 0.01), theta, self.params)

    def test_twins_indistinguishable(self):
        twins   = counterexample_pair(0.9, 0.8, 0.05, 0.1, self.params, 60.0)
        primary = reconstruct_from_molecular(twins.primary.times, twins.primary.i_d, 0.1,
                                             self.params)
        shadow  = reconstruct_from_molecular(twins.shadow.times, twins.shadow.i_d, 0.1,
                                             self.params)
        self.assertAlmostEqual(primary.beta, shadow.beta, delta=1e-6)
        middle = slice(100, -100)
        np.testing.assert_allclose(primary.s[middle], twins.primary.s[middle], rtol=0.01)
        self.assertGreater(np.min(np.abs(shadow.s[middle] - twins.shadow.s[middle])), 0.05)


@unittest.skipUnless(os.environ.get("OPTITEST_SLOW"), "slow")
class RefinementTestCase(unittest.TestCase):
    def setUp(self):
        self.params = Params(theta_b=1 / 14)

    def test_twin_detected_gap(self):
        for step in (0.04, 0.02, 0.01):
            twins = counterexample_pair(0.9, 0.8, 0.05, 0.1, self.params, 60.0, step=step)
            self.assertLess(twins.detected_gap, 1e-6 * (step / 0.04) ** 4)
            self.assertGreater(twins.susceptible_gap, 0.05)

    def test_serology_second_order(self):
        x0     = FractionState(0.9, 0.05, 0.0, 0.05)
        errors = []
        for step in (0.04, 0.02, 0.01):
            traj = integrate(x0, self.params, 0.1, horizon=60.0, step=step)
            rec  = reconstruct_from_serology(traj.times, traj.i_d, traj.r_d, 0.1, self.params)
            errors.append(np.max(np.abs(rec.i_u - traj.i_u)))
        self.assertGreater(errors[0] / errors[1], 3.0)
        self.assertGreater(errors[1] / errors[2], 3.0)
