import unittest

import numpy as np

from ..errors import ContractViolation
from ..estimate import *
from ..estimate.ekf import PERMUTATION
from ..model import *


class ProjectFeasibleTestCase(unittest.TestCase):
    def test_already_feasible(self):
        x = project_feasible([0.5, 0.3, 0.1, 0.0], Observation(0.05, 0.05))
        np.testing.assert_allclose(x, [0.5, 0.3, 0.1, 0.05], atol=1e-15)

    def test_shift(self):
        x = project_feasible([0.7, 0.3, 0.1, 0.0], Observation(0.05, 0.05))
        np.testing.assert_allclose(x[:3], [0.7 - 0.2 / 3, 0.3 - 0.2 / 3, 0.1 - 0.2 / 3],
                                   atol=1e-15)

    def test_clip(self):
        x = project_feasible([1.0, -0.1, 0.0, 0.3], Observation(0.05, 0.05))
        np.testing.assert_allclose(x, [0.9, 0.0, 0.0, 0.05], atol=1e-15)

    def test_infeasible(self):
        with self.assertRaisesRegex(ContractViolation,
                r"Observed fractions .* sum past one"):
            project_feasible([0.5, 0.3, 0.1, 0.0], Observation(0.6, 0.5))

    def test_observation_wrong(self):
        with self.assertRaisesRegex(ValueError,
                r"r_d must be within \[0, 1\], not -0.1"):
            Observation(0.1, -0.1)


class FilterTestCase(unittest.TestCase):
    def setUp(self):
        self.params = Params()

    def test_initial(self):
        est = initial_estimate(50000, 1000)
        np.testing.assert_array_equal(est.x, [1.0, 0.0, 0.0, 0.0])
        np.testing.assert_allclose(np.diag(est.P), [0.02 ** 2 / 12] * 2 + [0.0, 0.0])

    def test_update_matches_observation(self):
        est = EstimatorState([0.9, 0.05, 0.03, 0.01], np.diag([1e-4, 1e-4, 1e-5, 1e-5]))
        obs = Observation(0.02, 0.03)
        new = update(est, obs)
        self.assertAlmostEqual(new.i_d, 0.02, places=15)
        self.assertAlmostEqual(1.0 - new.x.sum(), 0.03, places=12)
        self.assertTrue(np.all(new.x >= 0))
        np.testing.assert_allclose(new.innovation,
                                   [0.02 - 0.01, 0.03 - (1 - 0.99)], atol=1e-15)
        np.testing.assert_array_equal(new.P, new.P.T)

    def test_update_singular(self):
        new = update(initial_estimate(50000, 1000), Observation(0.0, 0.0))
        np.testing.assert_allclose(new.x, [1.0, 0.0, 0.0, 0.0], atol=1e-15)

    def test_predict_noiseless(self):
        x_model = np.array([0.95, 0.03, 0.01, 0.01])
        est     = EstimatorState(x_model[PERMUTATION], np.zeros((4, 4)))
        new     = predict(est, 0.1, 1.0, self.params, step=0.01)
        traj    = integrate(x_model, self.params, 0.1, horizon=1.0, step=0.01)
        np.testing.assert_allclose(new.model_state, traj.states[-1], atol=1e-12)
        np.testing.assert_array_equal(new.P, np.zeros((4, 4)))
        self.assertEqual(new.t, 1.0)

    def test_predict_noise(self):
        est = EstimatorState([0.95, 0.03, 0.01, 0.01], np.zeros((4, 4)))
        new = predict(est, 0.1, 1.0, self.params, n=50000, step=0.1)
        np.testing.assert_array_equal(new.P, new.P.T)
        self.assertGreater(np.trace(new.P), 0)
        self.assertGreaterEqual(np.linalg.eigvalsh(new.P).min(), -1e-12 * np.trace(new.P))

    def test_predict_zero_interval(self):
        est = EstimatorState([0.95, 0.03, 0.01, 0.01], np.eye(4) * 1e-6, t=3.0)
        new = predict(est, 0.1, 0.0, self.params)
        np.testing.assert_array_equal(new.x, est.x)
        self.assertEqual(new.t, 3.0)

    def test_predict_after_update(self):
        est = update(initial_estimate(5000, 100), Observation(0.0, 0.0))
        for day in range(1, 6):
            est = predict(est, 0.1, 1.0, self.params, n=5000, step=0.1)
            self.assertGreaterEqual(np.linalg.eigvalsh(est.P).min(), -1e-15 * np.trace(est.P))
            est = update(est, Observation(0.0002 * day, 0.0))
            self.assertGreaterEqual(np.linalg.eigvalsh(est.P).min(), -1e-15 * np.trace(est.P))
            np.testing.assert_array_equal(est.P, est.P.T)
        self.assertEqual(est.t, 5.0)

    def test_roundoff_clipped(self):
        est = EstimatorState([0.95, 0.03, 0.01, 0.01], np.diag([3e-5, 3e-5, 0.0, -2e-14]))
        new = predict(est, 0.1, 0.0, self.params)
        self.assertAlmostEqual(new.P[3, 3], 0.0, places=18)
        self.assertAlmostEqual(new.P[0, 0], 3e-5, places=15)

    def test_covariance_violation(self):
        est = EstimatorState([0.95, 0.03, 0.01, 0.01], -1e-3 * np.eye(4))
        with self.assertRaisesRegex(ContractViolation,
                r"Covariance lost positive semidefiniteness"):
            predict(est, 0.1, 1.0, self.params, step=0.1)


class EstimateBetaTestCase(unittest.TestCase):
    def _history(self, beta, x0, days=8, theta=0.1):
        traj = integrate(x0, Params(), theta, beta=beta, horizon=days, step=0.1)
        history = []
        for day in range(days + 1):
            index = int(np.flatnonzero(np.isclose(traj.times, day))[0])
            est   = EstimatorState(traj.states[index][PERMUTATION], np.zeros((4, 4)), day)
            history.append((est, theta))
        return history

    def test_recovers_beta(self):
        history = self._history(0.25, FractionState(0.9, 0.05, 0.01, 0.02))
        result  = estimate_beta(history, Params(), step=0.1)
        self.assertTrue(result.identifiable)
        self.assertAlmostEqual(result.beta, 0.25, delta=1e-5)
        self.assertEqual(result.window, (1.0, 8.0))
        self.assertLess(result.residual_norm, 1e-8)

    def test_unidentifiable(self):
        history = self._history(0.25, FractionState(0.9, 0.0, 0.0, 0.1))
        result  = estimate_beta(history, Params(), previous=0.28)
        self.assertFalse(result.identifiable)
        self.assertEqual(result.beta, 0.28)

    def test_short_history(self):
        result = estimate_beta([], Params())
        self.assertFalse(result.identifiable)
        self.assertEqual(result.beta, 0.3)
