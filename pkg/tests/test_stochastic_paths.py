import unittest

import numpy as np

from core.errors import DimensionError, WordError
from core.stochastic_paths import (
    PathSample,
    chen_identity_residual,
    chen_strichartz,
    concatenate,
    descent_count,
    iterated_integral,
    iterated_integral_arrays,
    levy_area,
    log_signature_coefficient,
    permuted_word,
    sample_bridge,
    sample_bridge_batch,
    sample_brownian,
    sample_brownian_batch,
    signature,
)
from core.tensor_algebra import TensorSeries, ts_exp, ts_mul, word_degree, words_up_to, zero_count


class SamplingTestCase(unittest.TestCase):
    def test_time_coordinate_is_exact(self):
        path = sample_brownian(2, 0.75, 5, np.random.default_rng(1))
        np.testing.assert_array_equal(path.values[:, 0], np.arange(33) * (0.75 / 32))
        self.assertEqual(path.values[-1, 0], 0.75)
        np.testing.assert_array_equal(path.values[0], np.zeros(3))
        self.assertEqual(path.grid, 5)

    def test_single_segment_endpoint_variance(self):
        t = 2.0
        batch = sample_brownian_batch(1, t, 0, 100_000, np.random.default_rng(2))
        self.assertEqual(batch.segments, 1)
        endpoint = batch.values[:, -1, 1]
        stderr = t * np.sqrt(2.0 / endpoint.size)
        self.assertLess(abs(endpoint.var(ddof=1) - t), 4 * stderr)
        self.assertLess(abs(endpoint.mean()), 4 * np.sqrt(t / endpoint.size))

    def test_bridge_returns_to_zero(self):
        path = sample_bridge(3, 1.5, 6, np.random.default_rng(3))
        np.testing.assert_array_equal(path.values[-1, 1:], np.zeros(3))
        self.assertEqual(path.values[-1, 0], 1.5)

    def test_bridge_midpoint_variance(self):
        t = 1.0
        batch = sample_bridge_batch(2, t, 2, 20_000, np.random.default_rng(4))
        midpoint = batch.values[:, 2, 1:].ravel()
        stderr = 0.25 * np.sqrt(2.0 / midpoint.size)
        self.assertLess(abs(midpoint.var(ddof=1) - t / 4), 4 * stderr)

    def test_antithetic_half_mirrors_the_first(self):
        batch = sample_brownian_batch(2, 1.0, 3, 8, np.random.default_rng(5), antithetic=True)
        np.testing.assert_array_equal(batch.values[4:, :, 1:], -batch.values[:4, :, 1:])
        np.testing.assert_array_equal(batch.values[4:, :, 0], batch.values[:4, :, 0])

    def test_invalid_shapes(self):
        rng = np.random.default_rng(0)
        with self.assertRaises(DimensionError):
            sample_brownian(0, 1.0, 2, rng)
        with self.assertRaises(DimensionError):
            sample_brownian(1, 0.0, 2, rng)
        with self.assertRaises(DimensionError):
            sample_bridge(1, 1.0, -1, rng)


class SignatureTestCase(unittest.TestCase):
    def setUp(self):
        self.path = sample_brownian(2, 1.0, 4, np.random.default_rng(11))

    def test_single_segment_signature(self):
        path = PathSample.from_spatial([[0.0, 0.0], [0.3, -1.2]], horizon=0.5)
        sig = signature(path, 3)
        self.assertAlmostEqual(sig.coeff((0,)), 0.5)
        self.assertAlmostEqual(sig.coeff((1, 2)), 0.3 * -1.2 / 2)
        self.assertAlmostEqual(sig.coeff((1, 1)), 0.09 / 2)
        self.assertAlmostEqual(sig.coeff((2, 1, 1)), -1.2 * 0.09 / 6)

    def test_time_coefficient_is_horizon(self):
        self.assertAlmostEqual(signature(self.path, 2).coeff((0,)), 1.0, places=14)

    def test_matches_product_of_segment_exponentials(self):
        N = 4
        steps = np.diff(self.path.values, axis=0)
        product = TensorSeries.unit(2, N)
        for step in steps:
            generator = TensorSeries(2, N, {(k,): float(step[k]) for k in range(3)})
            product = ts_mul(product, ts_exp(generator))
        self.assertLess(product.max_abs_diff(signature(self.path, N)), 1e-12)

    def test_area_is_signature_difference(self):
        sig = signature(self.path, 2)
        difference = sig.coeff((1, 2)) - sig.coeff((2, 1))
        self.assertAlmostEqual(levy_area(self.path, 1, 2), difference, places=12)

    def test_iterated_integral_reads_signature(self):
        sig = signature(self.path, 4)
        for word in [(1,), (0, 2), (1, 2, 1), (2, 2, 1, 1)]:
            self.assertAlmostEqual(iterated_integral(self.path, word), sig.coeff(word), places=12)
        with self.assertRaises(WordError):
            iterated_integral(self.path, (1, 2, 1), degree_cap=2)
        with self.assertRaises(WordError):
            iterated_integral(self.path, (3,))

    def test_batch_levels_match_segment_products(self):
        batch = sample_brownian_batch(2, 1.0, 3, 4, np.random.default_rng(13))
        levels = batch.signature_levels(4)
        self.assertEqual([level.shape for level in levels], [(4, 3 ** k) for k in range(1, 5)])
        for n in range(batch.size):
            product = TensorSeries.unit(2, 4)
            for step in batch.increments()[n]:
                generator = TensorSeries(2, 4, {(k,): float(step[k]) for k in range(3)})
                product = ts_mul(product, ts_exp(generator))
            for word in words_up_to(2, 4):
                column = int(np.ravel_multi_index(word, (3,) * len(word)))
                self.assertAlmostEqual(levels[len(word) - 1][n, column], product.coeff(word), places=12)
        for depth in (1, 2):
            for shallow, deep in zip(batch.signature_levels(depth), levels):
                np.testing.assert_allclose(shallow, deep, rtol=1e-12, atol=1e-14)

    def test_iterated_integral_arrays(self):
        batch = sample_brownian_batch(2, 1.0, 3, 4, np.random.default_rng(14))
        words = [(0, 0, 0, 0), (1, 2, 1, 2), (2,), (0, 1)]
        values = iterated_integral_arrays(batch, words)
        self.assertEqual(values.shape, (4, 4))
        for n in range(4):
            for slot, word in enumerate(words):
                self.assertAlmostEqual(values[n, slot], iterated_integral(batch[n], word, degree_cap=8), places=12)
        np.testing.assert_allclose(values[:, 0], np.full(4, 1.0 / 24.0), rtol=1e-12)
        with self.assertRaises(WordError):
            iterated_integral_arrays(batch, [(1,), ()])
        with self.assertRaises(WordError):
            iterated_integral_arrays(batch, [(3,)])

    def test_concatenation_is_product(self):
        other = sample_brownian(2, 0.5, 3, np.random.default_rng(12))
        joined = concatenate(self.path, other)
        expected = ts_mul(signature(self.path, 4), signature(other, 4))
        self.assertLess(signature(joined, 4).max_abs_diff(expected), 1e-12)
        self.assertEqual(joined.horizon, 1.5)

    def test_spatial_and_parabolic_scaling(self):
        c = 1.7
        spatial = self.path.values.copy()
        spatial[:, 1:] *= c
        parabolic = spatial.copy()
        parabolic[:, 0] *= c * c
        base = signature(self.path, 5)
        scaled = signature(PathSample(spatial, 1.0), 5)
        rescaled = signature(PathSample(parabolic, c * c), 5)
        for word in words_up_to(2, 5):
            value = base.coeff(word)
            self.assertAlmostEqual(scaled.coeff(word), value * c ** (len(word) - zero_count(word)), places=10)
            self.assertAlmostEqual(rescaled.coeff(word), value * c ** word_degree(word), places=10)


class LevyAreaTestCase(unittest.TestCase):
    def test_straight_line_has_no_area(self):
        path = PathSample.from_spatial([[0.0, 0.0], [0.5, 1.0], [1.0, 2.0], [1.5, 3.0]])
        self.assertAlmostEqual(levy_area(path, 1, 2), 0.0, places=14)

    def test_unit_square_loop(self):
        path = PathSample.from_spatial([[0, 0], [1, 0], [1, 1], [0, 1], [0, 0]])
        self.assertAlmostEqual(levy_area(path, 1, 2), 2.0, places=14)
        self.assertAlmostEqual(levy_area(path, 2, 1), -2.0, places=14)

    def test_guards(self):
        line = sample_brownian(1, 1.0, 2, np.random.default_rng(0))
        with self.assertRaises(DimensionError):
            levy_area(line, 1, 1)
        plane = sample_brownian(2, 1.0, 2, np.random.default_rng(0))
        with self.assertRaises(DimensionError):
            levy_area(plane, 1, 1)
        with self.assertRaises(DimensionError):
            levy_area(plane, 1, 3)


class ChenStrichartzTestCase(unittest.TestCase):
    def test_descents_and_permuted_words(self):
        self.assertEqual(descent_count((0, 1, 2)), 0)
        self.assertEqual(descent_count((2, 1, 0)), 2)
        self.assertEqual(descent_count((1, 0, 2)), 1)
        self.assertEqual(permuted_word((1, 0), (1, 2)), (2, 1))
        self.assertEqual(permuted_word((1, 2, 0), (1, 2, 3)), (3, 1, 2))
        with self.assertRaises(WordError):
            permuted_word((0, 0), (1, 2))

    def test_first_and_second_order_coefficients(self):
        path = sample_brownian(2, 1.0, 5, np.random.default_rng(21))
        chen = chen_strichartz(path, 3)
        self.assertAlmostEqual(chen[(1,)], path.values[-1, 1], places=12)
        self.assertAlmostEqual(chen[(2,)], path.values[-1, 2], places=12)
        self.assertAlmostEqual(chen[(0,)], 1.0, places=12)
        self.assertAlmostEqual(chen[(1, 2)] - chen[(2, 1)], 0.5 * levy_area(path, 1, 2), places=12)
        self.assertAlmostEqual(chen[(1, 1)], 0.0, places=14)

    def test_exponential_of_chen_series_is_signature(self):
        for seed in range(5):
            path = sample_brownian(2, 1.0, 4, np.random.default_rng(seed))
            self.assertLess(chen_identity_residual(path, 4), 1e-10)
        path = sample_brownian(3, 0.6, 3, np.random.default_rng(99))
        self.assertLess(chen_identity_residual(path, 3), 1e-10)

    def test_coefficients_follow_the_log_signature(self):
        path = sample_brownian(2, 1.0, 4, np.random.default_rng(31))
        chen = chen_strichartz(path, 4)
        for word in words_up_to(2, 4):
            self.assertAlmostEqual(len(word) * chen[word], log_signature_coefficient(path, word), places=11)

    def test_long_permutation_sums_are_rejected(self):
        path = sample_brownian(1, 1.0, 1, np.random.default_rng(0))
        with self.assertRaises(WordError):
            chen_strichartz(path, 9)


if __name__ == "__main__":
    unittest.main()
