import unittest

import numpy as np

from kfoldpi.exceptions import DimensionMismatch, InvalidRho
from kfoldpi.inference import simulator
from kfoldpi.inference.rng import derive_stream
from kfoldpi.inference.simulator import ScenarioSpec


class TestSimulator(unittest.TestCase):
    """Tests the synthetic data generators in kfoldpi.inference.simulator"""

    def setUp(self):
        self.stream = derive_stream(42, [0, 1])

    def test_ar1_covariance(self):
        sigma = simulator.ar1_covariance(4, 0.6)
        self.assertEqual(sigma.shape, (4, 4))
        np.testing.assert_allclose(np.diag(sigma), np.ones(4))
        self.assertAlmostEqual(sigma[0, 3], 0.6**3)
        self.assertAlmostEqual(sigma[2, 1], 0.6)
        for rho in (1.0, -1.0, 1.5):
            with self.assertRaises(InvalidRho):
                simulator.ar1_covariance(4, rho)

    def test_mean_functions(self):
        x = np.array([[1.0, -2.0, 9.0], [0.0, 0.0, 9.0]])
        np.testing.assert_allclose(simulator.mean_values("linear", x), [-1.0, 0.0])
        np.testing.assert_allclose(
            simulator.mean_values("nonlinear", x), [2 * np.exp(-3.0), 2.0]
        )
        np.testing.assert_allclose(
            simulator.mean_values("nonlinear_interaction", x), [2 * np.exp(-3.0) - 2.0, 2.0]
        )
        self.assertEqual(simulator.mean_value("linear", [0.5, 0.25]), 0.75)
        with self.assertRaises(ValueError):
            simulator.mean_values("cubic", x)
        with self.assertRaises(DimensionMismatch):
            simulator.mean_value("linear", [1.0])

    def test_predictors_follow_ar1(self):
        x = simulator.sample_predictors(self.stream, 100000, 3, 0.6)
        np.testing.assert_allclose(
            np.cov(x, rowvar=False), simulator.ar1_covariance(3, 0.6), atol=0.02
        )

    def test_abs_mean_estimate(self):
        # x1 + x2 ~ N(0, 2 + 2 rho), so E|m(X)| = sqrt(3.2) sqrt(2 / pi)
        estimate = simulator.estimate_abs_mean("linear", 10, 0.6, self.stream, 200000)
        self.assertAlmostEqual(estimate, np.sqrt(3.2) * np.sqrt(2 / np.pi), delta=0.01)
        with self.assertRaises(ValueError):
            simulator.estimate_abs_mean("linear", 10, 0.6, self.stream, 100)

    def test_abs_mean_is_cached_per_scenario(self):
        first = simulator.scenario_abs_mean("nonlinear", 10, 0.6, 7)
        second = simulator.scenario_abs_mean("nonlinear", 10, 0.6, 7)
        self.assertEqual(first, second)
        self.assertIn(("nonlinear", 10, 0.6, 7), simulator._ABS_MEAN_CACHE)

    def test_heteroscedastic_scale(self):
        """The scale is a variance by default and a standard deviation with het_as_sd"""
        means = np.zeros(100000)
        as_variance = simulator.sample_errors("heteroscedastic", means, self.stream.child(0))
        as_sd = simulator.sample_errors(
            "heteroscedastic", means, self.stream.child(1), het_as_sd=True
        )
        self.assertAlmostEqual(float(np.var(as_variance)), 0.5, delta=0.01)
        self.assertAlmostEqual(float(np.var(as_sd)), 0.25, delta=0.01)

        large = np.full(100000, 3.0)
        errors = simulator.sample_errors("heteroscedastic", large, self.stream.child(2), 1.0)
        self.assertAlmostEqual(float(np.var(errors)), 2.0, delta=0.04)

    def test_generate_dataset_shapes_and_reproducibility(self):
        spec = ScenarioSpec("nonlinear", "heavy_tailed", 200, n_test=50, replicates=3)
        train, test = simulator.generate_dataset(spec, 0, self.stream)
        self.assertEqual((train.n, train.p), (200, 10))
        self.assertEqual((test.n, test.p), (50, 10))
        self.assertEqual(train.name, "nonlinear-heavy_tailed-200")

        again, _ = simulator.generate_dataset(spec, 0, derive_stream(42, [0, 1]))
        np.testing.assert_array_equal(train.x, again.x)
        np.testing.assert_array_equal(train.y, again.y)

        other, _ = simulator.generate_dataset(spec, 1, self.stream)
        self.assertFalse(np.array_equal(train.x, other.x))
        self.assertFalse(np.array_equal(train.x[:50], test.x))

    def test_heteroscedastic_dataset(self):
        spec = ScenarioSpec("linear", "heteroscedastic", 100, n_test=20)
        train, test = simulator.generate_dataset(spec, 0, self.stream, abs_mean=1.4)
        self.assertEqual(train.n, 100)
        self.assertTrue(np.all(np.isfinite(test.y)))

    def test_scenario_grid_and_names(self):
        grid = simulator.paper_scenario_grid()
        self.assertEqual(len(grid), 27)
        self.assertEqual(len({simulator.scenario_name(spec) for spec in grid}), 27)
        self.assertEqual({spec.n_train for spec in grid}, {500, 2500, 5000})
        self.assertTrue(all(spec.p == 10 and spec.rho == 0.6 for spec in grid))
        self.assertTrue(all(spec.replicates == 50 and spec.n_test == 500 for spec in grid))

    def test_parse_scenario(self):
        spec = simulator.parse_scenario("nonlinear_interaction:heavy_tailed:2500", replicates=5)
        self.assertEqual(spec.mean_fn, "nonlinear_interaction")
        self.assertEqual(spec.error_dist, "heavy_tailed")
        self.assertEqual(spec.n_train, 2500)
        self.assertEqual(spec.replicates, 5)
        self.assertEqual(simulator.parse_scenario("linear-homoscedastic-500").n_train, 500)
        for text in ("linear:homoscedastic", "linear:gamma:500", "linear:homoscedastic:many"):
            with self.assertRaises(ValueError):
                simulator.parse_scenario(text)

    def test_validate_scenario(self):
        with self.assertRaises(ValueError):
            simulator.validate_scenario(ScenarioSpec("linear", "homoscedastic", 0))
        with self.assertRaises(DimensionMismatch):
            simulator.validate_scenario(ScenarioSpec("linear", "homoscedastic", 10, p=1))
        with self.assertRaises(InvalidRho):
            simulator.validate_scenario(ScenarioSpec("linear", "homoscedastic", 10, rho=1.0))

    def test_error_variances(self):
        """Homoscedastic errors have unit variance and heteroscedastic ones average to one"""
        homoscedastic = simulator.sample_errors("homoscedastic", np.zeros(10**6), self.stream)
        self.assertAlmostEqual(float(np.var(homoscedastic)), 1.0, delta=0.01)

        spec = ScenarioSpec("nonlinear_interaction", "heteroscedastic", 100000, n_test=1)
        abs_mean = simulator.estimate_abs_mean(
            spec.mean_fn, spec.p, spec.rho, derive_stream(42, [2]), 200000
        )
        train, _ = simulator.generate_dataset(spec, 0, self.stream, abs_mean=abs_mean)
        errors = train.y - simulator.mean_values(spec.mean_fn, train.x)
        self.assertAlmostEqual(float(np.var(errors)), 1.0, delta=0.02)
