import unittest

import numpy as np

from core.blades import blade_layout
from core.clifford import (
    CliffordElement,
    batch_mul,
    batch_power,
    cl_exp,
    cl_mul,
    commutator,
    d_map,
    represent,
    spinor_representation,
    spinor_supertrace,
    supertrace,
)
from core.errors import ConvergenceError, DimensionError, SkewnessError


def random_element(d, rng):
    size = 1 << d
    return CliffordElement(d, rng.standard_normal(size) + 1j * rng.standard_normal(size))


def random_skew(d, rng):
    raw = rng.standard_normal((d, d))
    return raw - raw.T


class RelationsTestCase(unittest.TestCase):
    def test_generators_square_to_minus_one(self):
        for i in range(1, 5):
            e = CliffordElement.generator(4, i)
            self.assertEqual((e * e).coeffs, {(): -1})

    def test_distinct_generators_anticommute(self):
        e1 = CliffordElement.generator(3, 1)
        e2 = CliffordElement.generator(3, 2)
        self.assertEqual((e1 * e2 + e2 * e1).coeffs, {})
        self.assertEqual((e2 * e1).coeffs, {(1, 2): -1})

    def test_bivector_squares_to_minus_one(self):
        e12 = CliffordElement.blade(3, (1, 2))
        self.assertEqual((e12 * e12).coeffs, {(): -1})

    def test_blade_order_sets_the_sign(self):
        self.assertEqual(CliffordElement.blade(4, (3, 1, 2)).coeffs, {(1, 2, 3): 1})
        self.assertEqual(CliffordElement.blade(4, (2, 1)).coeffs, {(1, 2): -1})

    def test_associativity(self):
        rng = np.random.default_rng(1)
        a, b, c = (random_element(5, rng) for _ in range(3))
        self.assertLess(((a * b) * c).max_abs_diff(a * (b * c)), 1e-11)

    def test_grading(self):
        a = CliffordElement.from_coeffs(3, {(): 2.0, (1,): 1.0, (1, 2): 3.0, (1, 2, 3): -1.0})
        self.assertEqual(a.grades(), [0, 1, 2, 3])
        self.assertEqual(a.grade(2).coeffs, {(1, 2): 3})
        self.assertEqual(a.even_part().coeffs, {(): 2, (1, 2): 3})
        self.assertEqual(a.odd_part().coeffs, {(1,): 1, (1, 2, 3): -1})
        self.assertEqual(a.scalar_part(), 2)
        self.assertEqual((a.even_part() + a.odd_part()).max_abs_diff(a), 0.0)
        e1 = CliffordElement.generator(3, 1)
        self.assertEqual((a.even_part() * a.even_part()).odd_part().coeffs, {})
        self.assertEqual((a.odd_part() * e1).odd_part().coeffs, {})

    def test_from_coeffs_needs_sorted_subsets(self):
        with self.assertRaises(DimensionError):
            CliffordElement.from_coeffs(3, {(2, 1): 1.0})
        with self.assertRaises(DimensionError):
            CliffordElement.generator(3, 4)

    def test_mixed_dimensions_are_rejected(self):
        with self.assertRaises(DimensionError):
            cl_mul(CliffordElement.scalar(2), CliffordElement.scalar(3))

    def test_batch_mul_matches_single_products(self):
        rng = np.random.default_rng(2)
        layout = blade_layout(4)
        left = [random_element(4, rng) for _ in range(3)]
        right = [random_element(4, rng) for _ in range(3)]
        stacked = batch_mul(layout, np.stack([a.values for a in left]), np.stack([b.values for b in right]))
        for row, a, b in zip(stacked, left, right):
            np.testing.assert_allclose(row, cl_mul(a, b).values, atol=1e-13)


class SpinorTestCase(unittest.TestCase):
    def test_representation_is_a_homomorphism(self):
        rng = np.random.default_rng(3)
        for d in (4, 6):
            generators, _ = spinor_representation(d)
            a, b = random_element(d, rng), random_element(d, rng)
            product = represent(cl_mul(a, b), generators)
            np.testing.assert_allclose(product, represent(a, generators) @ represent(b, generators), atol=1e-10)

    def test_supertrace_matches_the_spinor_trace(self):
        rng = np.random.default_rng(4)
        for d in (2, 4, 6):
            a = random_element(d, rng)
            self.assertAlmostEqual(supertrace(a), spinor_supertrace(a), places=9)

    def test_chirality_squares_to_identity(self):
        for d in (2, 4, 6):
            _, chirality = spinor_representation(d)
            np.testing.assert_allclose(chirality @ chirality, np.eye(2 ** (d // 2)), atol=1e-12)


class SupertraceTestCase(unittest.TestCase):
    def test_scalars_have_no_supertrace(self):
        self.assertEqual(supertrace(CliffordElement.scalar(4, 3.0)), 0)

    def test_volume_element(self):
        self.assertEqual(supertrace(CliffordElement.blade(4, (1, 2, 3, 4))), -4)
        self.assertEqual(supertrace(CliffordElement.blade(2, (1, 2))), -2j)

    def test_supertrace_vanishes_on_even_commutators(self):
        rng = np.random.default_rng(5)
        a, b = random_element(4, rng).even_part(), random_element(4, rng).even_part()
        self.assertAlmostEqual(abs(supertrace(commutator(a, b))), 0.0, places=10)

    def test_supertrace_vanishes_on_graded_commutators(self):
        rng = np.random.default_rng(15)
        a, b = random_element(4, rng), random_element(4, rng)
        for left in (a.even_part(), a.odd_part()):
            for right in (b.even_part(), b.odd_part()):
                sign = -1 if left.odd_part().coeffs and right.odd_part().coeffs else 1
                graded = left * right - sign * (right * left)
                self.assertAlmostEqual(abs(supertrace(graded)), 0.0, places=10)

    def test_plain_commutator_of_odd_elements_can_have_supertrace(self):
        e1 = CliffordElement.generator(4, 1)
        e234 = CliffordElement.blade(4, (2, 3, 4))
        self.assertEqual(supertrace(commutator(e1, e234)), -8)
        self.assertEqual(supertrace(e1 * e234 + e234 * e1), 0)

    def test_odd_dimension_is_rejected(self):
        with self.assertRaises(DimensionError):
            supertrace(CliffordElement.scalar(3))

    def test_powers_below_half_dimension_have_zero_supertrace(self):
        rng = np.random.default_rng(6)
        for d, k in ((4, 1), (6, 2), (8, 3)):
            psi = d_map(random_skew(d, rng))
            power = CliffordElement.scalar(d)
            for _ in range(k):
                power = power * psi
            self.assertEqual(supertrace(power), 0)
            self.assertLessEqual(max(power.grades()), 2 * k)


class DMapTestCase(unittest.TestCase):
    def test_zero_matrix(self):
        self.assertEqual(d_map(np.zeros((3, 3))).coeffs, {})

    def test_elementary_rotation(self):
        psi = np.zeros((2, 2))
        psi[1, 0], psi[0, 1] = 1.0, -1.0
        self.assertEqual(d_map(psi).coeffs, {(1, 2): 0.5})

    def test_lie_algebra_morphism(self):
        rng = np.random.default_rng(7)
        worst = 0.0
        for _ in range(100):
            a, b = random_skew(4, rng), random_skew(4, rng)
            left = commutator(d_map(a), d_map(b))
            worst = max(worst, left.max_abs_diff(d_map(a @ b - b @ a)))
        self.assertLess(worst, 1e-10)

    def test_image_is_bivectors_and_injective(self):
        d = 5
        basis = []
        for i in range(d):
            for j in range(i + 1, d):
                psi = np.zeros((d, d))
                psi[j, i], psi[i, j] = 1.0, -1.0
                image = d_map(psi)
                self.assertEqual(image.grades(), [2])
                basis.append(image.values.real)
        self.assertEqual(np.linalg.matrix_rank(np.stack(basis)), d * (d - 1) // 2)

    def test_rejects_non_skew_input(self):
        with self.assertRaises(SkewnessError):
            d_map(np.eye(3))
        with self.assertRaises(DimensionError):
            d_map(np.zeros((2, 3)))


class ExponentialTestCase(unittest.TestCase):
    def test_exp_of_zero(self):
        self.assertEqual(cl_exp(CliffordElement.zero(3)).coeffs, {(): 1})

    def test_rotor_formula(self):
        theta = 0.8
        rotor = cl_exp(CliffordElement.from_coeffs(3, {(1, 2): theta}))
        expected = CliffordElement.from_coeffs(3, {(): np.cos(theta), (1, 2): np.sin(theta)})
        self.assertLess(rotor.max_abs_diff(expected), 1e-13)

    def test_inverse(self):
        a = random_element(4, np.random.default_rng(8)) * 0.3
        self.assertLess(cl_mul(cl_exp(a), cl_exp(-a)).max_abs_diff(CliffordElement.scalar(4)), 1e-9)

    def test_too_few_terms_raise(self):
        with self.assertRaises(ConvergenceError):
            cl_exp(CliffordElement.from_coeffs(2, {(1, 2): 3.0}), terms=3)


class BatchPowerTestCase(unittest.TestCase):
    def test_power_matches_repeated_products(self):
        rng = np.random.default_rng(9)
        layout = blade_layout(4)
        a = random_element(4, rng)
        cubed = batch_power(layout, a.values[None, :], 3)[0]
        np.testing.assert_allclose(cubed, (a * a * a).values, atol=1e-12)
        np.testing.assert_array_equal(batch_power(layout, a.values[None, :], 0)[0], CliffordElement.scalar(4).values)
        with self.assertRaises(DimensionError):
            batch_power(layout, a.values[None, :], -1)


if __name__ == "__main__":
    unittest.main()
