import unittest

import numpy as np

from ..model import *


class ParamsTestCase(unittest.TestCase):
    def test_defaults(self):
        params = Params()
        self.assertEqual(params.beta, 0.3)
        self.assertEqual(params.gamma, 1 / 14)
        self.assertEqual(params.kappa, 0.04)
        self.assertEqual(params.eta, 0.9)
        self.assertEqual(params.theta_b, 0.0)
        self.assertEqual(params.theta_max, 2 / 7)

    def test_wrong_type(self):
        with self.assertRaisesRegex(TypeError,
                r"beta must be a real number, not 'x'"):
            Params(beta="x")

    def test_negative(self):
        with self.assertRaisesRegex(ValueError,
                r"gamma must be a finite non-negative number, not -1"):
            Params(gamma=-1)

    def test_sensitivity_range(self):
        with self.assertRaisesRegex(ValueError,
                r"eta must be at most 1, not 1.5"):
            Params(eta=1.5)

    def test_replace(self):
        params = Params().replace(eta=1, kappa=0)
        self.assertEqual(params.eta, 1.0)
        self.assertEqual(params.kappa, 0.0)
        self.assertEqual(params.beta, 0.3)
        self.assertEqual(params, Params(eta=1, kappa=0))

    def test_replace_wrong(self):
        with self.assertRaisesRegex(TypeError,
                r"Unknown parameter\(s\) foo"):
            Params().replace(foo=1)

    def test_baseline_removal(self):
        params = Params(theta_b=1 / 14)
        self.assertAlmostEqual(params.baseline_removal, 1 / 14 + 0.04 + 0.6 / 14, places=15)


class FractionStateTestCase(unittest.TestCase):
    def test_simple(self):
        state = FractionState(0.5, 0.1, 0.1, 0.2)
        self.assertAlmostEqual(state.r_d, 0.1, places=15)
        self.assertAlmostEqual(state.infected, 0.2, places=15)
        self.assertAlmostEqual(sum(state), 1.0, places=15)
        np.testing.assert_array_equal(state.as_array(), [0.5, 0.1, 0.1, 0.2])

    def test_from_array(self):
        state = FractionState.from_array([0.9, 0.1, 0.0, 0.0, 0.0])
        self.assertEqual(state, FractionState(0.9, 0.1))

    def test_out_of_range(self):
        with self.assertRaisesRegex(ValueError,
                r"s must be within \[0, 1\], not 1.2"):
            FractionState(1.2, 0.0)

    def test_sum_wrong(self):
        with self.assertRaisesRegex(ValueError,
                r"Fractions must sum to at most 1"):
            FractionState(0.8, 0.3)

    def test_from_array_wrong(self):
        with self.assertRaisesRegex(ValueError,
                r"State vector must have 4 or 5 entries, not \(3,\)"):
            FractionState.from_array([1, 0, 0])


class DynamicsTestCase(unittest.TestCase):
    def test_derivative(self):
        params = Params()
        dx = derivative(FractionState(0.99, 0.01), params, theta=0.0, beta_t=0.3)
        self.assertAlmostEqual(dx[0], -0.00297, places=15)
        self.assertAlmostEqual(dx[1], 0.00297 - (1 / 14 + 0.04) * 0.01, places=15)
        self.assertAlmostEqual(dx[2], 0.04 * 0.01, places=15)
        self.assertAlmostEqual(dx[3], 0.01 / 14, places=15)
        self.assertAlmostEqual(dx.sum(), 0.0, places=15)

    def test_derivative_conserves(self):
        params = Params(theta_b=1 / 14)
        dx = derivative([0.4, 0.1, 0.05, 0.3], params, theta=0.2, beta_t=0.35)
        self.assertLess(abs(dx.sum()), 1e-16)

    def test_disease_free(self):
        for theta in (0.0, 0.1, 2 / 7):
            dx = derivative(FractionState(1.0, 0.0), Params(), theta, 0.3)
            np.testing.assert_array_equal(dx, np.zeros(5))

    def test_jacobian(self):
        params = Params(theta_b=0.05)
        x      = np.array([0.6, 0.05, 0.02, 0.2])
        jac    = jacobian(x, 0.15, 0.3, params)
        h      = 1e-7
        for k in range(4):
            e = np.zeros(4)
            e[k] = h
            column = (derivative(x + e, params, 0.15, 0.3)[:4]
                      - derivative(x - e, params, 0.15, 0.3)[:4]) / (2 * h)
            np.testing.assert_allclose(jac[:, k], column, atol=1e-8)

    def test_reproduction_number(self):
        self.assertAlmostEqual(reproduction_number(Params()), 2.6923076923, places=9)
        self.assertAlmostEqual(r0_unity_rate(Params()), (0.3 - 1 / 14 - 0.04) / 0.9,
                               places=15)
        params = Params()
        self.assertAlmostEqual(reproduction_number(params, r0_unity_rate(params)), 1.0,
                               places=12)

    def test_removal_rate(self):
        params = Params(theta_b=0.05)
        self.assertAlmostEqual(removal_rate(0.1, params),
                               1 / 14 + 0.9 * 0.1 + 0.04 + 0.05 * 0.6, places=15)
        plain = Params(eta=1.0, kappa=0.0)
        self.assertAlmostEqual(removal_rate(0.2, plain), 1 / 14 + 0.2, places=15)


class BetaSignalTestCase(unittest.TestCase):
    def test_constant(self):
        beta = as_beta_signal(0.3)
        self.assertIsInstance(beta, ConstantBeta)
        self.assertEqual(beta(12.5), 0.3)
        self.assertTrue(beta.is_constant)
        self.assertTrue(beta.is_non_increasing(100))
        np.testing.assert_array_equal(beta(np.array([0.0, 1.0, 2.0])), [0.3, 0.3, 0.3])

    def test_piecewise(self):
        beta = PiecewiseConstantBeta([0, 10, 20], [0.3, 0.2, 0.1])
        self.assertEqual(beta(5), 0.3)
        self.assertEqual(beta(10), 0.2)
        self.assertEqual(beta(25), 0.1)
        self.assertEqual(beta.breakpoints, (10.0, 20.0))
        self.assertTrue(beta.is_non_increasing(30))

    def test_sinusoidal(self):
        beta = SinusoidalBeta(0.3, 0.1, period=365)
        self.assertAlmostEqual(beta(0), 0.3, places=15)
        self.assertAlmostEqual(beta(365 / 4), 0.4, places=12)
        self.assertFalse(beta.is_non_increasing(365))

    def test_sinusoidal_wrong(self):
        with self.assertRaisesRegex(ValueError,
                r"Amplitude must be within \[0, center\], not 0.5"):
            SinusoidalBeta(0.3, 0.5)
