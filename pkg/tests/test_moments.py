import unittest

import numpy as np

from core.errors import DimensionError
from core.moments import (
    expected_word_sum,
    in_concat_set,
    moment_table,
    moment_words,
    monte_carlo_moments,
    stratonovich_moment,
)
from core.semigroup_approx import MatrixModel, taylor_reference
from core.tensor_algebra import zero_count


class ConcatSetTestCase(unittest.TestCase):
    def test_membership(self):
        self.assertTrue(in_concat_set((0, 1, 1)))
        self.assertTrue(in_concat_set(()))
        self.assertTrue(in_concat_set((1, 1, 0, 2, 2, 0)))
        self.assertFalse(in_concat_set((1, 2)))
        self.assertFalse(in_concat_set((1, 0, 1)))
        self.assertFalse(in_concat_set((1, 1, 1)))


class ClosedFormTestCase(unittest.TestCase):
    def test_closed_form_values(self):
        t = 1.3
        self.assertAlmostEqual(stratonovich_moment((0,), t), t)
        self.assertAlmostEqual(stratonovich_moment((1, 1), t), t / 2)
        self.assertAlmostEqual(stratonovich_moment((0, 1, 1), t), t * t / 4)
        self.assertAlmostEqual(stratonovich_moment((1, 1, 2, 2), t), t * t / 8)
        self.assertAlmostEqual(stratonovich_moment((0, 0), t), t * t / 2)
        self.assertEqual(stratonovich_moment((), t), 1.0)
        self.assertEqual(stratonovich_moment((1, 2), t), 0.0)

    def test_table_is_zero_exactly_off_the_concat_set(self):
        table = moment_table(2, 6, 1.0)
        for word, value in table.entries.items():
            if in_concat_set(word):
                self.assertGreater(value, 0.0)
                self.assertEqual((len(word) - zero_count(word)) % 2, 0)
            else:
                self.assertEqual(value, 0.0)

    def test_words_by_length(self):
        words = moment_words(2, max_length=4)
        self.assertEqual(len(words), 3 + 9 + 27 + 81)
        self.assertIn((0, 0, 0, 0), words)
        self.assertIn((1, 2, 1, 2), words)
        self.assertEqual(moment_words(2, N=4), moment_words(2, 4))
        self.assertNotIn((0, 0, 0, 0), moment_words(2, 4))
        table = moment_table(2, None, 1.0, max_length=4)
        self.assertEqual(table.entries[(0, 0, 0, 0)], 1.0 / 24.0)
        self.assertEqual(table.entries[(1, 2, 1, 2)], 0.0)
        with self.assertRaises(DimensionError):
            moment_words(2)
        with self.assertRaises(DimensionError):
            moment_words(2, max_length=0)

    def test_table_frame_columns(self):
        frame = moment_table(2, 4, 1.0).to_frame()
        self.assertEqual(list(frame.columns), ["word", "length", "zeros", "degree", "expectation"])
        self.assertIn("(0,1,1)", frame["word"].tolist())


class MonteCarloTestCase(unittest.TestCase):
    def test_empirical_means_match_closed_form(self):
        L = 7
        frame = monte_carlo_moments(2, 4, 1.0, 20_000, L, np.random.default_rng(2024), workers=1)
        allowance = 4.5 * frame["mc_stderr"] + 2.0 ** -L + 1e-12
        gaps = (frame["mc_mean"] - frame["expectation"]).abs()
        self.assertTrue((gaps <= allowance).all(), frame.loc[gaps > allowance, "word"].tolist())

    def test_every_word_up_to_four_letters(self):
        L = 7
        frame = monte_carlo_moments(2, None, 1.0, 20_000, L, np.random.default_rng(31), workers=2, max_length=4)
        self.assertEqual(len(frame), 120)
        self.assertEqual(frame["length"].max(), 4)
        self.assertEqual(frame["degree"].max(), 8)
        allowance = 4.5 * frame["mc_stderr"] + 2.0 ** -L + 1e-12
        gaps = (frame["mc_mean"] - frame["expectation"]).abs()
        self.assertTrue((gaps <= allowance).all(), frame.loc[gaps > allowance, "word"].tolist())

    def test_worker_count_does_not_change_results(self):
        one = monte_carlo_moments(2, 3, 1.0, 600, 3, np.random.default_rng(7), workers=1, batch_size=128)
        three = monte_carlo_moments(2, 3, 1.0, 600, 3, np.random.default_rng(7), workers=3, batch_size=128)
        np.testing.assert_array_equal(one["mc_mean"].to_numpy(), three["mc_mean"].to_numpy())
        np.testing.assert_array_equal(one["mc_stderr"].to_numpy(), three["mc_stderr"].to_numpy())


class WordSumTestCase(unittest.TestCase):
    def test_word_sum_is_heat_taylor_polynomial(self):
        model = MatrixModel.random(2, 3, np.random.default_rng(5))
        t = 0.4
        np.testing.assert_allclose(expected_word_sum(model, t, 4), taylor_reference(model, t, 4), atol=1e-13)
        np.testing.assert_allclose(expected_word_sum(model, t, 3), taylor_reference(model, t, 2), atol=1e-13)
        np.testing.assert_allclose(expected_word_sum(model, t, 1), np.eye(3), atol=0)


if __name__ == "__main__":
    unittest.main()
