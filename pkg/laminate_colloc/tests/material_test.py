from unittest import TestCase

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from laminate_colloc.exceptions import (
    HomogenizationException,
    MaterialException,
    NonSymmetricLayupException,
    NumericalWarning,
)
from laminate_colloc.material import (
    GRAPHITE_EPOXY,
    ElasticityMatrix,
    EngineeringConstants,
    Layup,
    Ply,
    homogenize,
    rotate_ply_90,
    stiffness_from_engineering,
)


class TestEngineeringConstants(TestCase):
    def test_compliance(self):
        S = GRAPHITE_EPOXY.compliance()
        assert_allclose(S, S.T)
        self.assertAlmostEqual(S[0, 0], 1 / 25000)
        self.assertAlmostEqual(S[0, 1], -0.25 / 25000)
        self.assertAlmostEqual(S[3, 3], 1 / 200)

    def test_isotropic(self):
        ec = EngineeringConstants.isotropic(1000.0, 0.25)
        self.assertEqual(ec.G12, 400.0)
        self.assertEqual(ec.E1, ec.E3)

    def test_stiffness(self):
        C = stiffness_from_engineering(GRAPHITE_EPOXY)
        self.assertTrue(C.is_positive_definite())
        assert_allclose(C.matrix @ GRAPHITE_EPOXY.compliance(), np.eye(6), atol=1e-12)
        self.assertAlmostEqual(C[4, 4], 200.0)
        self.assertAlmostEqual(C[6, 6], 500.0)
        self.assertGreater(C[1, 1], C[2, 2])

    def test_isotropic_lame(self):
        E, nu = 1000.0, 0.3
        C = stiffness_from_engineering(EngineeringConstants.isotropic(E, nu))
        lam = E * nu / ((1 + nu) * (1 - 2 * nu))
        mu = E / (2 * (1 + nu))
        self.assertAlmostEqual(C[1, 1], lam + 2 * mu, places=8)
        self.assertAlmostEqual(C[1, 2], lam, places=8)
        self.assertAlmostEqual(C[4, 4], mu, places=8)


class TestMaterialException(TestCase):
    def test_non_positive_modulus(self):
        self.assertRaises(
            AssertionError, EngineeringConstants, 0, 1, 1, 1, 1, 1, 0.2, 0.2, 0.2
        )

    def test_inadmissible_poisson(self):
        ec = EngineeringConstants.isotropic(1000.0, 0.6, G=400.0)
        self.assertRaises(MaterialException, stiffness_from_engineering, ec)

    def test_not_orthotropic(self):
        M = np.eye(6)
        M[0, 3] = M[3, 0] = 0.1
        self.assertRaises(AssertionError, ElasticityMatrix, M)

    def test_not_symmetric(self):
        M = np.eye(6)
        M[0, 1] = 0.1
        self.assertRaises(AssertionError, ElasticityMatrix, M)

    def test_orientation(self):
        self.assertRaises(AssertionError, Ply, 1.0, 45, GRAPHITE_EPOXY)
        self.assertRaises(AssertionError, Ply, 0.0, 0, GRAPHITE_EPOXY)


class TestRotation(TestCase):
    def test_rotate_90(self):
        C = stiffness_from_engineering(GRAPHITE_EPOXY)
        R = rotate_ply_90(C)
        self.assertEqual(R[1, 1], C[2, 2])
        self.assertEqual(R[2, 2], C[1, 1])
        self.assertEqual(R[1, 3], C[2, 3])
        self.assertEqual(R[2, 3], C[1, 3])
        self.assertEqual(R[4, 4], C[5, 5])
        self.assertEqual(R[5, 5], C[4, 4])
        self.assertEqual(R[1, 2], C[1, 2])
        self.assertEqual(R[3, 3], C[3, 3])
        self.assertEqual(R[6, 6], C[6, 6])
        self.assertEqual(rotate_ply_90(R), C)

    def test_ply_stiffness(self):
        C = stiffness_from_engineering(GRAPHITE_EPOXY)
        self.assertEqual(Ply(1.0, 90, GRAPHITE_EPOXY).stiffness(), C)
        self.assertEqual(Ply(1.0, 0, GRAPHITE_EPOXY).stiffness(), rotate_ply_90(C))

    def test_zero_degree_fibres_along_x2(self):
        bottom = Layup.cross_ply(3).stiffnesses()[0]
        self.assertGreater(bottom[2, 2], 10 * bottom[1, 1])
        self.assertAlmostEqual(bottom[4, 4], GRAPHITE_EPOXY.G13)
        self.assertAlmostEqual(bottom[5, 5], GRAPHITE_EPOXY.G23)


class TestLayup(TestCase):
    def test_cross_ply(self):
        layup = Layup.cross_ply(5, 1.0)
        self.assertEqual([p.orientation for p in layup.plies], [0, 90, 0, 90, 0])
        self.assertEqual(len(layup), 5)
        self.assertEqual(layup.total_thickness, 5.0)
        self.assertTrue(layup.is_symmetric)
        assert_allclose(layup.volume_fractions, 0.2)

    def test_interfaces(self):
        layup = Layup.cross_ply(3, 2.0)
        assert_allclose(layup.interfaces(), [-3, -1, 1, 3])
        assert_allclose(layup.interfaces(bottom=0.0), [0, 2, 4, 6])

    def test_flipped(self):
        layup = Layup.cross_ply(2)
        self.assertFalse(layup.is_symmetric)
        self.assertEqual(
            [p.orientation for p in layup.flipped().plies], [90, 0]
        )
        self.assertTrue(Layup.cross_ply(3).flipped().is_symmetric)


class TestHomogenize(TestCase):
    def test_single_ply(self):
        C = Ply(1.0, 0, GRAPHITE_EPOXY).stiffness()
        self.assertEqual(homogenize(Layup([Ply(2.0, 0, GRAPHITE_EPOXY)])), C)
        self.assertEqual(homogenize(Layup([Ply(1.0, 0, GRAPHITE_EPOXY)] * 3)), C)

    def test_cross_ply(self):
        layup = Layup.cross_ply(11)
        Cbar = homogenize(layup)
        self.assertTrue(Cbar.is_positive_definite())
        plies = layup.stiffnesses()
        t = layup.volume_fractions
        c44 = np.array([C[4, 4] for C in plies])
        c55 = np.array([C[5, 5] for C in plies])
        c33 = np.array([C[3, 3] for C in plies])
        self.assertAlmostEqual(Cbar[4, 4], 1 / np.sum(t / c44), delta=1e-12 * Cbar[4, 4])
        self.assertAlmostEqual(Cbar[5, 5], 1 / np.sum(t / c55), delta=1e-12 * Cbar[5, 5])
        self.assertAlmostEqual(Cbar[3, 3], 1 / np.sum(t / c33), delta=1e-12 * Cbar[3, 3])
        self.assertAlmostEqual(Cbar[6, 6], np.sum(t * [C[6, 6] for C in plies]))
        # six plies stiff along x2 against five stiff along x1
        self.assertGreater(Cbar[2, 2], Cbar[1, 1])

    def test_flip_invariance(self):
        layup = Layup.cross_ply(3)
        self.assertEqual(homogenize(layup), homogenize(layup.flipped()))

    @given(
        st.floats(0.1, 5.0),
        st.floats(0.1, 5.0),
        st.sampled_from([0, 90]),
    )
    @settings(max_examples=30, deadline=None)
    def test_symmetric_stacks(self, outer, inner, orientation):
        other = 90 - orientation
        layup = Layup(
            [
                Ply(outer, orientation, GRAPHITE_EPOXY),
                Ply(inner, other, GRAPHITE_EPOXY),
                Ply(outer, orientation, GRAPHITE_EPOXY),
            ]
        )
        Cbar = homogenize(layup)
        self.assertTrue(Cbar.is_positive_definite())
        t = layup.volume_fractions
        c44 = np.array([C[4, 4] for C in layup.stiffnesses()])
        assert_allclose(Cbar[4, 4], 1 / np.sum(t / c44), rtol=1e-12)


class TestHomogenizeException(TestCase):
    def test_non_symmetric(self):
        self.assertRaises(NonSymmetricLayupException, homogenize, Layup.cross_ply(2))
        self.assertTrue(issubclass(NonSymmetricLayupException, HomogenizationException))

    def test_non_symmetric_allowed(self):
        with self.assertWarns(NumericalWarning):
            Cbar = homogenize(Layup.cross_ply(4), allow_unsymmetric=True)
        self.assertTrue(Cbar.is_positive_definite())
