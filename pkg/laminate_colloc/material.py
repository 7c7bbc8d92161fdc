#!/usr/bin/python3

import warnings
from dataclasses import dataclass

import numpy as np

from .exceptions import (
    HomogenizationException,
    MaterialException,
    NonSymmetricLayupException,
    NumericalWarning,
)

# nonzero entries of an orthotropic Voigt stiffness
ORTHOTROPIC_MASK = np.zeros((6, 6), dtype=bool)
ORTHOTROPIC_MASK[:3, :3] = True
ORTHOTROPIC_MASK[3, 3] = ORTHOTROPIC_MASK[4, 4] = ORTHOTROPIC_MASK[5, 5] = True

# 90 degree in-plane rotation swaps directions 1 and 2, hence 13 <-> 23
_ROTATE_90 = [1, 0, 2, 4, 3, 5]


@dataclass(frozen=True)
class EngineeringConstants:
    """
    Orthotropic engineering constants of a ply in its material axes

    Moduli in MPa, Poisson ratios dimensionless (nu_ij = -eps_j / eps_i).
    """

    E1: float
    E2: float
    E3: float
    G23: float
    G13: float
    G12: float
    nu23: float
    nu13: float
    nu12: float

    def __post_init__(self):
        for name in ("E1", "E2", "E3", "G23", "G13", "G12"):
            assert getattr(self, name) > 0, "{} must be positive".format(name)

    @classmethod
    def isotropic(cls, E, nu, G=None):
        if G is None:
            G = E / (2.0 * (1.0 + nu))
        return cls(E, E, E, G, G, G, nu, nu, nu)

    def compliance(self):
        """
        6x6 Voigt compliance matrix
        """
        S = np.zeros((6, 6))
        S[0, 0] = 1.0 / self.E1
        S[1, 1] = 1.0 / self.E2
        S[2, 2] = 1.0 / self.E3
        S[0, 1] = S[1, 0] = -self.nu12 / self.E1
        S[0, 2] = S[2, 0] = -self.nu13 / self.E1
        S[1, 2] = S[2, 1] = -self.nu23 / self.E2
        S[3, 3] = 1.0 / self.G23
        S[4, 4] = 1.0 / self.G13
        S[5, 5] = 1.0 / self.G12
        return S


# 0 degree ply of the cross-ply benchmark
GRAPHITE_EPOXY = EngineeringConstants(
    E1=25000.0,
    E2=1000.0,
    E3=1000.0,
    G23=200.0,
    G13=500.0,
    G12=500.0,
    nu23=0.25,
    nu13=0.25,
    nu12=0.25,
)


def _is_spd(A):
    try:
        np.linalg.cholesky(A)
    except np.linalg.LinAlgError:
        return False
    return True


class ElasticityMatrix:
    """
    Symmetric orthotropic 6x6 stiffness in Voigt notation (MPa)

    Voigt order is 11, 22, 33, 23, 13, 12. Entries are read with 1-based
    Voigt indices, like the printed tensor components.

    Attributes:
        matrix - read-only 6x6 numpy array

    Usage:
        C = ElasticityMatrix(np.diag([1, 1, 1, 0.5, 0.5, 0.5]))
        C[4, 4]
    """

    def __init__(self, matrix):
        matrix = np.array(matrix, dtype=float)
        assert matrix.shape == (6, 6), "stiffness must be 6x6"
        scale = np.max(np.abs(matrix))
        assert np.allclose(
            matrix, matrix.T, rtol=1e-10, atol=1e-14 * scale
        ), "stiffness must be symmetric"
        assert np.all(
            np.abs(matrix[~ORTHOTROPIC_MASK]) <= 1e-10 * scale
        ), "stiffness must have the orthotropic zero pattern"
        matrix = 0.5 * (matrix + matrix.T)
        matrix[~ORTHOTROPIC_MASK] = 0.0
        self.matrix = matrix
        self.matrix.flags.writeable = False

    def __getitem__(self, ij):
        i, j = ij
        return self.matrix[i - 1, j - 1]

    def is_positive_definite(self):
        return _is_spd(self.matrix)

    def __eq__(self, x):
        return isinstance(x, ElasticityMatrix) and np.array_equal(self.matrix, x.matrix)

    def __ne__(self, x):
        return not (self == x)

    def __str__(self):
        return "ElasticityMatrix(\n{}\n)".format(
            np.array2string(self.matrix, precision=6, suppress_small=True)
        )


def stiffness_from_engineering(ec):
    """
    Invert the engineering compliance of a ply

    Arguments:
        ec - EngineeringConstants

    Usage:
        stiffness_from_engineering(GRAPHITE_EPOXY)
    """
    S = ec.compliance()
    if not _is_spd(S):
        raise MaterialException(
            "Compliance of {} is not positive definite".format(ec)
        )
    C = np.linalg.inv(S)
    return ElasticityMatrix(0.5 * (C + C.T))


def rotate_ply_90(C):
    """
    Rotate an orthotropic stiffness by 90 degrees about the x3 axis

    C11 <-> C22, C13 <-> C23, C44 <-> C55; C12, C33, C66 are kept.
    """
    return ElasticityMatrix(C.matrix[np.ix_(_ROTATE_90, _ROTATE_90)])


@dataclass(frozen=True)
class Ply:
    """
    Attributes:
        thickness - ply thickness (mm)
        orientation - fibre angle measured from the x2 axis, 0 or 90 degrees
        material - EngineeringConstants with E1 along the fibres
    """

    thickness: float
    orientation: int
    material: EngineeringConstants

    def __post_init__(self):
        assert self.thickness > 0, "ply thickness must be positive"
        assert self.orientation in (0, 90), "only 0 and 90 degree plies are supported"

    def stiffness(self):
        C = stiffness_from_engineering(self.material)
        # material axis 1 lies along x2 for a 0 degree ply
        return C if self.orientation == 90 else rotate_ply_90(C)


class LayerStiffness:
    """
    Piecewise constant ply stiffness through the thickness

    Attributes:
        interfaces - N + 1 increasing x3 coordinates of the ply boundaries
        stiffnesses - ElasticityMatrix per ply, bottom to top

    Usage:
        Layup.cross_ply(3).layer_stiffness().matrices([-1.0, 0.0, 1.0])
    """

    def __init__(self, interfaces, stiffnesses):
        self.interfaces = np.asarray(interfaces, dtype=float)
        self.stiffnesses = tuple(stiffnesses)
        assert len(self.interfaces) == len(self.stiffnesses) + 1, (
            "one stiffness per pair of interfaces is needed"
        )
        assert np.all(np.diff(self.interfaces) > 0), "interfaces must increase"
        self._stack = np.array([C.matrix for C in self.stiffnesses])

    @classmethod
    def uniform(cls, C, bottom, top):
        return cls([bottom, top], [C])

    def __len__(self):
        return len(self.stiffnesses)

    def layer_index(self, z):
        """
        Ply containing z, an interface belongs to the ply above it
        """
        k = np.searchsorted(self.interfaces, z, side="right") - 1
        return np.clip(k, 0, len(self.stiffnesses) - 1)

    def matrices(self, z):
        """
        Voigt stiffness at every z, shape z.shape + (6, 6)
        """
        return self._stack[self.layer_index(z)]


class Layup:
    """
    Ordered stack of plies, bottom to top

    Attributes:
        plies - tuple of Ply

    Usage:
        Layup.cross_ply(3, 1.0, GRAPHITE_EPOXY)  # 0/90/0
    """

    def __init__(self, plies):
        self.plies = tuple(plies)
        assert self.plies, "a layup needs at least one ply"

    @classmethod
    def cross_ply(cls, n_layers, ply_thickness=1.0, material=GRAPHITE_EPOXY):
        """
        Alternating 0/90 stack starting with 0 degrees at the bottom
        """
        assert n_layers >= 1, "at least one layer is needed"
        return cls(
            Ply(ply_thickness, 0 if k % 2 == 0 else 90, material)
            for k in range(n_layers)
        )

    def __len__(self):
        return len(self.plies)

    @property
    def total_thickness(self):
        return float(sum(p.thickness for p in self.plies))

    @property
    def volume_fractions(self):
        t = np.array([p.thickness for p in self.plies])
        return t / t.sum()

    @property
    def is_symmetric(self):
        return self.plies == self.plies[::-1]

    def flipped(self):
        return Layup(self.plies[::-1])

    def interfaces(self, bottom=None):
        """
        z coordinates of ply boundaries, N + 1 values from bottom to top

        Arguments:
            bottom - z of the lower face (default: -h/2, mid-plane at 0)
        """
        if bottom is None:
            bottom = -0.5 * self.total_thickness
        t = np.array([p.thickness for p in self.plies])
        return bottom + np.concatenate([[0.0], np.cumsum(t)])

    def stiffnesses(self):
        return [p.stiffness() for p in self.plies]

    def layer_stiffness(self, bottom=None):
        return LayerStiffness(self.interfaces(bottom), self.stiffnesses())


def homogenize(layup, allow_unsymmetric=False):
    """
    Effective stiffness of the equivalent single layer

    Coupling terms are evaluated in dependency order: C33 first, then C13
    and C23, then C11, C12 and C22. Transverse shear terms use
    Delta_k = C44^k C55^k.

    Arguments:
        layup - Layup, mirror-symmetric about the mid-plane
        allow_unsymmetric - homogenize a non-symmetric stack with a warning
                            instead of rejecting it (default: False)

    Usage:
        homogenize(Layup.cross_ply(11))
    """
    if not layup.is_symmetric:
        if not allow_unsymmetric:
            raise NonSymmetricLayupException()
        warnings.warn(
            "homogenizing a non-symmetric layup, mid-plane is not balanced",
            NumericalWarning,
        )

    stiff = [C.matrix for C in layup.stiffnesses()]
    if all(np.array_equal(stiff[0], C) for C in stiff[1:]):
        # homogeneous stack, every correction term vanishes
        return ElasticityMatrix(stiff[0])
    tb = layup.volume_fractions

    def c(i, j):
        return np.array([C[i - 1, j - 1] for C in stiff])

    c11, c12, c13 = c(1, 1), c(1, 2), c(1, 3)
    c22, c23, c33 = c(2, 2), c(2, 3), c(3, 3)
    c44, c55, c66 = c(4, 4), c(5, 5), c(6, 6)

    def correction(a, abar, b):
        # sum over k >= 2 of (a_k - abar) t_k (b_1 - b_k) / C33_k
        return np.sum((a[1:] - abar) * tb[1:] * (b[0] - b[1:]) / c33[1:])

    C33 = 1.0 / np.sum(tb / c33)
    C13 = np.sum(tb * c13) + correction(c33, C33, c13)
    C23 = np.sum(tb * c23) + correction(c33, C33, c23)
    C11 = np.sum(tb * c11) + correction(c13, C13, c13)
    C12 = np.sum(tb * c12) + correction(c13, C13, c23)
    C22 = np.sum(tb * c22) + correction(c23, C23, c23)

    delta_k = c44 * c55
    s44 = np.sum(tb * c44 / delta_k)
    s55 = np.sum(tb * c55 / delta_k)
    delta = s44 * s55
    C44 = s44 / delta
    C55 = s55 / delta
    C66 = np.sum(tb * c66)

    M = np.zeros((6, 6))
    M[0, 0], M[1, 1], M[2, 2] = C11, C22, C33
    M[0, 1] = M[1, 0] = C12
    M[0, 2] = M[2, 0] = C13
    M[1, 2] = M[2, 1] = C23
    M[3, 3], M[4, 4], M[5, 5] = C44, C55, C66
    Cbar = ElasticityMatrix(M)
    if not Cbar.is_positive_definite():
        raise HomogenizationException(
            "Homogenized stiffness is not positive definite, check layup and materials"
        )
    return Cbar
