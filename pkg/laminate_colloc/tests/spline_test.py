from unittest import TestCase

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from laminate_colloc.exceptions import DomainException
from laminate_colloc.spline import (
    KnotVector,
    TensorProductSpace,
    basis_table,
    eval_field,
    eval_field_line,
    eval_univariate,
    greville_points,
    make_open_uniform_knots,
)


def cox_de_boor(U, i, p, x):
    """
    Textbook recursion, half-open spans, for points strictly inside the domain
    """
    if p == 0:
        return 1.0 if U[i] <= x < U[i + 1] else 0.0
    out = 0.0
    if U[i + p] > U[i]:
        out += (x - U[i]) / (U[i + p] - U[i]) * cox_de_boor(U, i, p - 1, x)
    if U[i + p + 1] > U[i + 1]:
        out += (
            (U[i + p + 1] - x)
            / (U[i + p + 1] - U[i + 1])
            * cox_de_boor(U, i + 1, p - 1, x)
        )
    return out


def unit_box(degrees=(3, 3, 2), spans=(2, 2, 1), extents=(1.0, 1.0, 1.0), **kw):
    kvs = [make_open_uniform_knots(p, n) for p, n in zip(degrees, spans)]
    return TensorProductSpace(kvs, extents, **kw)


class TestKnotVector(TestCase):
    def test_open_uniform(self):
        kv = make_open_uniform_knots(2, 1)
        assert_allclose(kv.knots, [0, 0, 0, 1, 1, 1])
        assert_allclose(make_open_uniform_knots(1, 2).knots, [0, 0, 0.5, 1, 1])
        self.assertEqual(kv.degree, 2)
        self.assertEqual(kv.m, 3)
        self.assertEqual(len(kv), 6)

    def test_regularity(self):
        self.assertEqual(make_open_uniform_knots(6, 4).regularity(), 5)
        self.assertEqual(make_open_uniform_knots(4, 1).regularity(), 4)
        kv = KnotVector(3, [0, 0, 0, 0, 0.5, 0.5, 1, 1, 1, 1])
        self.assertEqual(kv.max_interior_multiplicity(), 2)
        self.assertEqual(kv.regularity(), 1)

    def test_span(self):
        kv = make_open_uniform_knots(2, 4)
        self.assertEqual(kv.span(0.0), 2)
        self.assertEqual(kv.span(0.3), 3)
        self.assertEqual(kv.span(0.5), 4)
        self.assertEqual(kv.span(1.0), kv.m - 1)

    def test_breakpoints(self):
        assert_allclose(make_open_uniform_knots(3, 4).breakpoints(), [0, 0.25, 0.5, 0.75, 1])

    def test_equality(self):
        self.assertEqual(make_open_uniform_knots(2, 2), KnotVector(2, [0, 0, 0, 0.5, 1, 1, 1]))
        self.assertNotEqual(make_open_uniform_knots(2, 2), make_open_uniform_knots(3, 2))
        self.assertEqual(
            hash(make_open_uniform_knots(2, 2)), hash(make_open_uniform_knots(2, 2))
        )

    def test_str(self):
        self.assertTrue(str(make_open_uniform_knots(1, 1)).startswith("KnotVector(p=1"))


class TestKnotVectorException(TestCase):
    def test_not_open(self):
        self.assertRaises(AssertionError, KnotVector, 2, [0, 0, 0.5, 1, 1, 1])

    def test_decreasing(self):
        self.assertRaises(AssertionError, KnotVector, 1, [0, 0, 0.6, 0.4, 1, 1])

    def test_end_multiplicity(self):
        self.assertRaises(AssertionError, KnotVector, 1, [0, 0, 0, 1, 1])

    def test_interior_multiplicity(self):
        self.assertRaises(AssertionError, KnotVector, 1, [0, 0, 0.5, 0.5, 0.5, 1, 1])

    def test_outside(self):
        kv = make_open_uniform_knots(2, 2)
        self.assertRaises(DomainException, kv.span, -0.1)
        self.assertRaises(DomainException, kv.span, 1.1)
        self.assertRaises(DomainException, eval_univariate, kv, 2.0)


class TestUnivariateBasis(TestCase):
    def collocation_matrix(self, kv, x):
        B = np.zeros((len(x), kv.m))
        for row, xi in enumerate(x):
            first, ders = eval_univariate(kv, xi)
            B[row, first : first + kv.degree + 1] = ders[0]
        return B

    def test_polynomial_reproduction(self):
        x = np.linspace(0.0, 1.0, 101)
        for p, n in ((2, 3), (4, 4), (6, 2), (8, 5)):
            kv = make_open_uniform_knots(p, n)
            B = self.collocation_matrix(kv, x)
            for degree in range(p + 1):
                coeffs = np.linalg.lstsq(B, x**degree, rcond=None)[0]
                self.assertLess(np.max(np.abs(B @ coeffs - x**degree)), 1e-10)

    def test_matches_recursion(self):
        kv = KnotVector(3, [0, 0, 0, 0, 0.2, 0.5, 0.5, 1, 1, 1, 1])
        for x in (0.05, 0.31, 0.5, 0.77, 0.999):
            first, ders = eval_univariate(kv, x)
            expected = [cox_de_boor(kv.knots, first + k, 3, x) for k in range(4)]
            assert_allclose(ders[0], expected, atol=1e-14)

    def test_derivatives_by_differences(self):
        kv = make_open_uniform_knots(4, 3)
        h = 1e-6
        for x in (0.1, 0.45, 0.9):
            first, ders = eval_univariate(kv, x, 3)
            for k in range(1, 4):
                _, up = eval_univariate(kv, x + h, k - 1)
                _, down = eval_univariate(kv, x - h, k - 1)
                fd = (up[k - 1] - down[k - 1]) / (2 * h)
                scale = np.max(np.abs(ders[k])) + 1.0
                assert_allclose(ders[k], fd, atol=1e-6 * scale)

    def test_orders_above_degree(self):
        _, ders = eval_univariate(make_open_uniform_knots(1, 2), 0.3, 3)
        assert_allclose(ders[2:], 0.0)
        assert_allclose(ders[1], [-2.0, 2.0])

    @given(st.floats(0.0, 1.0), st.integers(1, 6), st.integers(1, 5))
    @settings(max_examples=60, deadline=None)
    def test_partition_of_unity(self, x, p, n):
        _, ders = eval_univariate(make_open_uniform_knots(p, n), x, min(p, 3))
        self.assertAlmostEqual(ders[0].sum(), 1.0, delta=1e-12)
        self.assertTrue(np.all(ders[0] >= -1e-14))
        scale = np.max(np.abs(ders[1:])) + 1.0
        assert_allclose(ders[1:].sum(axis=1), 0.0, atol=1e-10 * scale)


class TestGreville(TestCase):
    def test_values(self):
        assert_allclose(greville_points(make_open_uniform_knots(2, 2)), [0, 0.25, 0.75, 1])
        assert_allclose(
            greville_points(make_open_uniform_knots(6, 1)), np.linspace(0, 1, 7)
        )

    def test_collocation_counts(self):
        self.assertEqual(len(greville_points(make_open_uniform_knots(6, 4))), 10)
        self.assertEqual(len(greville_points(make_open_uniform_knots(4, 1))), 5)

    @given(st.integers(1, 8), st.integers(1, 8))
    @settings(max_examples=40, deadline=None)
    def test_bounds(self, p, n):
        g = greville_points(make_open_uniform_knots(p, n))
        self.assertEqual(g[0], 0.0)
        self.assertEqual(g[-1], 1.0)
        self.assertTrue(np.all(np.diff(g) > 0))


class TestTensorProductSpace(TestCase):
    def test_shape(self):
        space = unit_box()
        self.assertEqual(space.shape, (5, 5, 3))
        self.assertEqual(space.size, 75)
        self.assertEqual(space.degrees, (3, 3, 2))
        self.assertFalse(space.rational)

    def test_affine_map(self):
        space = unit_box(extents=(4.0, 4.0, 2.0), origin=(0.0, 0.0, -1.0))
        assert_allclose(space.to_physical((0.5, 0.25, 0.5)), (2.0, 1.0, 0.0))
        assert_allclose(space.to_parametric((2.0, 1.0, 0.0)), (0.5, 0.25, 0.5))
        self.assertRaises(DomainException, space.to_parametric, (2.0, 1.0, 1.5))

    def test_partition_of_unity(self):
        space = unit_box(extents=(3.0, 2.0, 1.0))
        table = basis_table(space, (0.7, 1.3, 0.2), [(0, 0, 0), (1, 0, 0), (1, 1, 1)])
        self.assertEqual(len(table), 4 * 4 * 3)
        self.assertAlmostEqual(table[(0, 0, 0)].sum(), 1.0, delta=1e-12)
        self.assertAlmostEqual(table[(1, 0, 0)].sum(), 0.0, delta=1e-10)
        self.assertAlmostEqual(table[(1, 1, 1)].sum(), 0.0, delta=1e-10)

    def test_linear_precision(self):
        space = unit_box(extents=(3.0, 2.0, 1.0), origin=(0.0, 0.0, -0.5))
        grid = space.control_grid()
        pt = np.array([1.1, 0.4, 0.3])
        values = eval_field(space, grid, pt, [(0, 0, 0), (1, 0, 0), (0, 0, 1), (2, 0, 0)])
        assert_allclose(values[(0, 0, 0)], pt, atol=1e-12)
        assert_allclose(values[(1, 0, 0)], (1, 0, 0), atol=1e-12)
        assert_allclose(values[(0, 0, 1)], (0, 0, 1), atol=1e-12)
        assert_allclose(values[(2, 0, 0)], 0.0, atol=1e-10)

    def test_physical_derivatives(self):
        space = unit_box(degrees=(4, 3, 3), spans=(2, 1, 2), extents=(5.0, 2.0, 0.5))
        rng = np.random.default_rng(1)
        coeffs = rng.standard_normal(space.shape)
        pt = np.array([1.7, 0.9, 0.2])
        h = 1e-5
        values = eval_field(space, coeffs, pt, [(0, 0, 0), (1, 0, 0), (0, 1, 0), (0, 0, 1)])
        for d, order in enumerate([(1, 0, 0), (0, 1, 0), (0, 0, 1)]):
            e = np.zeros(3)
            e[d] = h
            up = eval_field(space, coeffs, pt + e)[(0, 0, 0)]
            down = eval_field(space, coeffs, pt - e)[(0, 0, 0)]
            self.assertAlmostEqual(values[order], (up - down) / (2 * h), delta=1e-6)

    def test_line_matches_pointwise(self):
        space = unit_box(extents=(4.0, 4.0, 1.0), origin=(0.0, 0.0, -0.5))
        rng = np.random.default_rng(2)
        coeffs = rng.standard_normal(space.shape + (3,))
        z = np.linspace(-0.5, 0.5, 7)
        orders = [(0, 0, 0), (2, 1, 0), (1, 0, 1), (3, 0, 0)]
        line = eval_field_line(space, coeffs, 1.3, 2.9, z, orders)
        for n, zz in enumerate(z):
            point = eval_field(space, coeffs, (1.3, 2.9, zz), orders)
            for o in orders:
                assert_allclose(line[o][n], point[o], rtol=1e-12, atol=1e-12)


class TestRationalSpace(TestCase):
    def test_uniform_weights(self):
        plain = unit_box()
        weighted = unit_box(weights=2.0 * np.ones(plain.shape))
        self.assertTrue(weighted.rational)
        pt = (0.3, 0.6, 0.8)
        orders = [(0, 0, 0), (1, 0, 0), (2, 1, 0), (1, 1, 1)]
        a = basis_table(plain, pt, orders)
        b = basis_table(weighted, pt, orders)
        for o in orders:
            assert_allclose(a[o], b[o], atol=1e-12)

    def test_rational_derivatives(self):
        space = unit_box(degrees=(2, 2, 2), spans=(1, 1, 1))
        rng = np.random.default_rng(3)
        space = unit_box(
            degrees=(2, 2, 2), spans=(1, 1, 1), weights=rng.uniform(0.5, 2.0, space.shape)
        )
        coeffs = rng.standard_normal(space.shape)
        pt = np.array([0.4, 0.55, 0.3])
        h = 1e-5
        values = eval_field(space, coeffs, pt, [(0, 0, 0), (1, 0, 0), (1, 1, 0)])
        self.assertAlmostEqual(basis_table(space, pt)[(0, 0, 0)].sum(), 1.0, delta=1e-12)

        def f(x):
            return eval_field(space, coeffs, x)[(0, 0, 0)]

        e1, e2 = np.array([h, 0, 0]), np.array([0, h, 0])
        self.assertAlmostEqual(values[(1, 0, 0)], (f(pt + e1) - f(pt - e1)) / (2 * h), delta=1e-6)
        mixed = (
            f(pt + e1 + e2) - f(pt + e1 - e2) - f(pt - e1 + e2) + f(pt - e1 - e2)
        ) / (4 * h * h)
        self.assertAlmostEqual(values[(1, 1, 0)], mixed, delta=1e-4)
