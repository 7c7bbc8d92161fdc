#!/usr/bin/python3

import enum
import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .exceptions import AssemblyException, NumericalWarning, SolverException
from .material import LayerStiffness
from .spline import (
    TensorProductSpace,
    basis_table,
    eval_field,
    make_open_uniform_knots,
)
from .util import sin_factor

VALUE = (0, 0, 0)
FIRST = ((1, 0, 0), (0, 1, 0), (0, 0, 1))
SECOND = ((2, 0, 0), (0, 2, 0), (0, 0, 2), (1, 1, 0), (1, 0, 1), (0, 1, 1))
ROW_ORDERS = (VALUE,) + FIRST + SECOND

PDE = "pde"
NEUMANN = "neumann"
DIRICHLET = "dirichlet"

RESIDUAL_TOLERANCE = 1e-10


class Face(enum.Enum):
    """
    Box faces as (direction, side), side 0 at the lower coordinate
    """

    X1_MIN = (0, 0)
    X1_MAX = (0, 1)
    X2_MIN = (1, 0)
    X2_MAX = (1, 1)
    X3_MIN = (2, 0)
    X3_MAX = (2, 1)

    @property
    def direction(self):
        return self.value[0]

    @property
    def normal(self):
        n = np.zeros(3)
        n[self.direction] = 1.0 if self.value[1] else -1.0
        return n


class PlateProblem:
    """
    Simply supported homogenized plate under the sinusoidal top load

    The plate occupies [0, L] x [0, L] x [-t/2, t/2] with L = S t. Lateral
    faces carry the simple-support conditions, the top face the normal load
    sigma0 sin(pi x1 / L) sin(pi x2 / L), the bottom face is traction free.

    Attributes:
        space - TensorProductSpace over the plate box
        Cbar - homogenized ElasticityMatrix
        sigma0 - load amplitude (MPa)
        slenderness - S = L / t
        thickness - t (mm)
        body_force - callable x3 -> (b1, b2, b3) or None for no body force
        layers - LayerStiffness of the plies, used for stresses only;
                 None means the homogenized stiffness at every x3

    Usage:
        PlateProblem.benchmark(Cbar, 11.0, 20, (6, 6, 4), 4)
    """

    def __init__(
        self,
        space,
        Cbar,
        sigma0=1.0,
        slenderness=20.0,
        thickness=1.0,
        body_force=None,
        layers=None,
    ):
        L = slenderness * thickness
        assert np.allclose(
            space.extents, (L, L, thickness), rtol=1e-12
        ), "space box must be L x L x t with L = S t"
        assert np.allclose(
            space.origin, (0.0, 0.0, -0.5 * thickness), rtol=0, atol=1e-12 * L
        ), "plate mid-plane must lie at x3 = 0"
        assert Cbar.is_positive_definite(), "stiffness must be positive definite"
        self.space = space
        self.Cbar = Cbar
        self.sigma0 = sigma0
        self.slenderness = slenderness
        self.thickness = thickness
        self.body_force = body_force
        if layers is not None:
            assert np.allclose(
                layers.interfaces[[0, -1]],
                (-0.5 * thickness, 0.5 * thickness),
                rtol=0,
                atol=1e-12 * thickness,
            ), "plies must fill the plate thickness"
        self.layers = layers

    @classmethod
    def benchmark(
        cls,
        Cbar,
        thickness,
        slenderness,
        degrees=(6, 6, 4),
        spans=4,
        thickness_spans=1,
        sigma0=1.0,
        body_force=None,
        layers=None,
    ):
        """
        Plate with open uniform knots, `spans` in-plane and `thickness_spans`
        through the thickness
        """
        p, q, r = degrees
        L = slenderness * thickness
        kvs = (
            make_open_uniform_knots(p, spans),
            make_open_uniform_knots(q, spans),
            make_open_uniform_knots(r, thickness_spans),
        )
        space = TensorProductSpace(kvs, (L, L, thickness), (0.0, 0.0, -0.5 * thickness))
        return cls(space, Cbar, sigma0, slenderness, thickness, body_force, layers)

    @property
    def edge_length(self):
        return self.slenderness * self.thickness

    def ply_stiffness(self):
        """
        LayerStiffness for stress evaluation, homogenized when no plies are set
        """
        if self.layers is not None:
            return self.layers
        t = self.thickness
        return LayerStiffness.uniform(self.Cbar, -0.5 * t, 0.5 * t)

    def body(self, x3):
        if self.body_force is None:
            return np.zeros(3)
        return np.asarray(self.body_force(x3), dtype=float)

    def load(self, x1, x2):
        L = self.edge_length
        return self.sigma0 * sin_factor(x1, L) * sin_factor(x2, L)

    def traction(self, face, pt):
        """
        Prescribed traction on the top or bottom face
        """
        assert face in (Face.X3_MIN, Face.X3_MAX), "tractions act on x3 faces"
        if face is Face.X3_MAX:
            return np.array([0.0, 0.0, self.load(pt[0], pt[1])])
        return np.zeros(3)

    @property
    def dofs(self):
        return 3 * self.space.size


@dataclass(frozen=True)
class CollocationPoint:
    index: int
    parametric: np.ndarray
    physical: np.ndarray
    faces: tuple

    @property
    def kind(self):
        return ("interior", "face", "edge", "corner")[len(self.faces)]


class CollocationGrid:
    """
    Tensor grid of Greville points with boundary classification

    Points are ordered lexicographically, the index of point (i1, i2, i3) is
    the flat index of the matching control point.
    """

    def __init__(self, points, shape):
        self.points = tuple(points)
        self.shape = shape

    def __len__(self):
        return len(self.points)

    def __iter__(self):
        return iter(self.points)

    def counts(self):
        out = {"interior": 0, "face": 0, "edge": 0, "corner": 0}
        for pt in self.points:
            out[pt.kind] += 1
        return out


def build_grid(space):
    """
    Collocation points at the images of the Greville abscissae

    Arguments:
        space - TensorProductSpace
    """
    greville = space.greville()
    points = []
    index = 0
    for i1, a in enumerate(greville[0]):
        for i2, b in enumerate(greville[1]):
            for i3, c in enumerate(greville[2]):
                xi = np.array([a, b, c])
                faces = []
                for d in range(3):
                    if xi[d] == 0.0:
                        faces.append(Face((d, 0)))
                    elif xi[d] == 1.0:
                        faces.append(Face((d, 1)))
                points.append(
                    CollocationPoint(index, xi, space.to_physical(xi), tuple(faces))
                )
                index += 1
    return CollocationGrid(points, space.shape)


@dataclass
class RowBlock:
    """
    Three collocation equations at one point

    Attributes:
        indices - flat indices of the basis functions involved
        coeffs - (3, 3, n) array: equation, displacement component, basis
        rhs - right-hand side of the three equations
        kinds - equation type per row (pde, neumann or dirichlet)
    """

    indices: np.ndarray
    coeffs: np.ndarray
    rhs: np.ndarray
    kinds: tuple


def strain_operator(grad):
    """
    Voigt strain of each basis function times a unit displacement component

    Arguments:
        grad - (3, n) physical gradient of the basis functions

    Returns:
        (6, 3, n) array B with eps = B[:, j, k] for u_j = N_k
    """
    g1, g2, g3 = grad
    z = np.zeros_like(g1)
    return np.array(
        [
            [g1, z, z],
            [z, g2, z],
            [z, z, g3],
            [z, g3, g2],
            [g3, z, g1],
            [g2, g1, z],
        ]
    )


def normal_operator(n):
    """
    (3, 6) matrix turning Voigt stress into the traction sigma . n
    """
    n1, n2, n3 = n
    return np.array(
        [
            [n1, 0.0, 0.0, 0.0, n3, n2],
            [0.0, n2, 0.0, n3, 0.0, n1],
            [0.0, 0.0, n3, n2, n1, 0.0],
        ]
    )


def voigt_strain(grad_u):
    """
    Voigt strain from a displacement gradient G[..., i, j] = du_i / dx_j
    """
    G = np.asarray(grad_u)
    return np.stack(
        [
            G[..., 0, 0],
            G[..., 1, 1],
            G[..., 2, 2],
            G[..., 1, 2] + G[..., 2, 1],
            G[..., 0, 2] + G[..., 2, 0],
            G[..., 0, 1] + G[..., 1, 0],
        ],
        axis=-1,
    )


def _table(space, pt, table):
    if table is None:
        table = basis_table(space, pt, ROW_ORDERS)
    return table


def interior_rows(pt, Cbar, space, body=None, table=None):
    """
    Navier equations div(C : eps(u)) = -b collocated at an interior point

    Arguments:
        pt - physical point
        Cbar - ElasticityMatrix
        space - TensorProductSpace
        body - body force vector at pt (default: zero)
        table - precomputed BasisTable with second derivatives (optional)
    """
    table = _table(space, pt, table)
    C = Cbar.matrix
    K = np.zeros((3, 3, len(table)))
    for d, e in enumerate(np.eye(3, dtype=int)):
        B = strain_operator(table.gradient(e))
        K += np.einsum("ia,ab,bjk->ijk", normal_operator(np.eye(3)[d]), C, B)
    rhs = np.zeros(3) if body is None else -np.asarray(body, dtype=float)
    return RowBlock(table.indices, K, rhs, (PDE, PDE, PDE))


def neumann_rows(pt, normal, traction, Cbar, space, table=None):
    """
    Traction equations sigma(u) . n = t collocated at a boundary point

    Arguments:
        pt - physical point on the face
        normal - outward unit normal
        traction - prescribed traction vector
        Cbar - ElasticityMatrix
        space - TensorProductSpace
        table - precomputed BasisTable (optional)
    """
    table = _table(space, pt, table)
    B = strain_operator(table.gradient())
    K = np.einsum("ia,ab,bjk->ijk", normal_operator(normal), Cbar.matrix, B)
    return RowBlock(
        table.indices,
        K,
        np.asarray(traction, dtype=float).copy(),
        (NEUMANN, NEUMANN, NEUMANN),
    )


def _value_row(table, component):
    row = np.zeros((3, len(table)))
    row[component] = table[VALUE]
    return row


def dirichlet_rows(pt, values, space, table=None):
    """
    Prescribed displacement u = values at a point, all three components
    """
    table = _table(space, pt, table)
    K = np.stack([_value_row(table, j) for j in range(3)])
    return RowBlock(
        table.indices,
        K,
        np.asarray(values, dtype=float).copy(),
        (DIRICHLET, DIRICHLET, DIRICHLET),
    )


def simple_support_rows(pt, face, Cbar, space, table=None):
    """
    Simple support on a lateral face

    On x1 faces sigma11 = 0, u2 = 0, u3 = 0; on x2 faces u1 = 0,
    sigma22 = 0, u3 = 0. Row i always belongs to displacement component i.

    Arguments:
        pt - physical point on the face
        face - Face.X1_MIN, X1_MAX, X2_MIN or X2_MAX
    """
    assert face.direction in (0, 1), "simple support acts on lateral faces"
    table = _table(space, pt, table)
    stress = np.einsum(
        "ab,bjk->ajk", Cbar.matrix, strain_operator(table.gradient())
    )
    d = face.direction
    K = np.zeros((3, 3, len(table)))
    kinds = []
    for i in range(3):
        if i == d:
            K[i] = stress[d]
            kinds.append(NEUMANN)
        else:
            K[i] = _value_row(table, i)
            kinds.append(DIRICHLET)
    return RowBlock(table.indices, K, np.zeros(3), tuple(kinds))


def resolve_boundary_rows(blocks, tol=1e-14):
    """
    Merge the equations of all faces meeting at an edge or corner point

    Per displacement component, a Dirichlet row from any face wins; when
    no face prescribes that component the Neumann/stress rows of the faces
    are averaged.

    Arguments:
        blocks - RowBlock per adjoining face, sharing the same basis indices
    """
    assert blocks, "at least one face block is needed"
    first = blocks[0]
    K = np.zeros_like(first.coeffs)
    rhs = np.zeros(3)
    kinds = []
    for i in range(3):
        fixed = [b for b in blocks if b.kinds[i] == DIRICHLET]
        if fixed:
            values = [b.rhs[i] for b in fixed]
            scale = max(1.0, max(abs(v) for v in values))
            if max(values) - min(values) > tol * scale:
                raise AssemblyException(
                    "Conflicting prescribed values {} for component {}".format(
                        values, i + 1
                    )
                )
            K[i] = fixed[0].coeffs[i]
            rhs[i] = values[0]
            kinds.append(DIRICHLET)
        else:
            K[i] = np.mean([b.coeffs[i] for b in blocks], axis=0)
            rhs[i] = np.mean([b.rhs[i] for b in blocks])
            kinds.append(NEUMANN)
    return RowBlock(first.indices, K, rhs, tuple(kinds))


class CollocationSystem:
    """
    Dense square strong-form system, 3 rows per collocation point

    Row 3 p + i is equation i at point p, column 3 g + j is displacement
    component j of control point g. Disjoint points own disjoint rows, so
    `fill` may be called concurrently for different points.
    """

    def __init__(self, space):
        self.space = space
        n = 3 * space.size
        self.matrix = np.zeros((n, n))
        self.rhs = np.zeros(n)

    @property
    def size(self):
        return len(self.rhs)

    def rows(self, point_index):
        return slice(3 * point_index, 3 * point_index + 3)

    def fill(self, point_index, block):
        r = self.rows(point_index)
        cols = 3 * block.indices[None, :] + np.arange(3)[:, None]
        for i in range(3):
            self.matrix[r.start + i, cols] = block.coeffs[i]
        self.rhs[r] = block.rhs


def point_rows(problem, point):
    """
    Collocation equations of the plate problem at one grid point
    """
    space, Cbar = problem.space, problem.Cbar
    x = point.physical
    table = basis_table(space, x, ROW_ORDERS)
    if not point.faces:
        return interior_rows(x, Cbar, space, problem.body(x[2]), table)
    blocks = []
    for face in point.faces:
        if face.direction == 2:
            blocks.append(
                neumann_rows(
                    x, face.normal, problem.traction(face, x), Cbar, space, table
                )
            )
        else:
            blocks.append(simple_support_rows(x, face, Cbar, space, table))
    if len(blocks) == 1:
        return blocks[0]
    return resolve_boundary_rows(blocks)


def _fill_points(system, rows_at, points):
    for pt in points:
        system.fill(pt.index, rows_at(pt))


def _assemble(space, rows_at, grid, executor, chunk):
    if grid is None:
        grid = build_grid(space)
    system = CollocationSystem(space)
    points = grid.points
    if executor is None:
        _fill_points(system, rows_at, points)
    else:
        futures = [
            executor.submit(_fill_points, system, rows_at, points[s : s + chunk])
            for s in range(0, len(points), chunk)
        ]
        for f in futures:
            f.result()
    return system


def assemble(problem, grid=None, executor=None, chunk=64):
    """
    Build the collocation system of a PlateProblem

    Arguments:
        problem - PlateProblem
        grid - CollocationGrid (default: Greville grid of the space)
        executor - thread pool executor to fill row ranges concurrently
        chunk - number of points per submitted task
    """
    return _assemble(
        problem.space, lambda pt: point_rows(problem, pt), grid, executor, chunk
    )


def assemble_dirichlet(space, Cbar, displacement, body=None, grid=None):
    """
    Collocation system with prescribed displacements on the whole boundary

    Arguments:
        displacement - callable x -> (u1, u2, u3) used on boundary points
        body - callable x -> (b1, b2, b3) used on interior points
    """

    def rows_at(pt):
        x = pt.physical
        if pt.faces:
            return dirichlet_rows(x, displacement(x), space)
        b = None if body is None else body(x)
        return interior_rows(x, Cbar, space, b)

    return _assemble(space, rows_at, grid, None, 64)


class DisplacementField:
    """
    Solved displacement control coefficients

    Attributes:
        space - TensorProductSpace
        coefficients - (m1, m2, m3, 3) array of (u, v, w) control values
        residual - relative residual ||A x - b|| / ||b|| of the solve
    """

    def __init__(self, space, coefficients, residual=0.0):
        self.space = space
        self.coefficients = np.asarray(coefficients, dtype=float).reshape(
            space.shape + (3,)
        )
        self.coefficients.flags.writeable = False
        self.residual = residual

    def evaluate(self, pt, orders=(VALUE,)):
        return eval_field(self.space, self.coefficients, pt, orders)

    def displacement(self, pt):
        return self.evaluate(pt)[VALUE]

    def gradient(self, pt):
        """
        G[i, j] = du_i / dx_j
        """
        values = self.evaluate(pt, FIRST)
        return np.stack([values[o] for o in FIRST], axis=1)


def _row_scales(A):
    # powers of two leave the scaled entries exact
    _, exponents = np.frexp(np.max(np.abs(A), axis=1))
    return np.ldexp(1.0, -exponents)


def solve(system):
    """
    Solve the dense system by LU with partial pivoting

    Rows are equilibrated first, so multiplying equations by positive
    factors does not change the solution.

    Arguments:
        system - CollocationSystem

    Returns:
        DisplacementField with the relative residual attached
    """
    A, b = system.matrix, system.rhs
    n = len(b)
    scales = _row_scales(A)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        lu, piv = scipy.linalg.lu_factor(scales[:, None] * A)
    pivots = np.abs(np.diag(lu))
    if pivots.min() <= np.finfo(float).eps * n * pivots.max():
        raise SolverException(
            "Collocation matrix is singular (smallest pivot {:.3e})".format(
                pivots.min()
            )
        )
    x = scipy.linalg.lu_solve((lu, piv), scales * b)
    if not np.all(np.isfinite(x)):
        raise SolverException("Collocation solve produced non-finite values")
    norm_b = np.linalg.norm(b)
    residual = np.linalg.norm(A @ x - b) / (norm_b if norm_b > 0 else 1.0)
    if residual > RESIDUAL_TOLERANCE:
        warnings.warn(
            "relative residual {:.3e} above {:.0e}".format(residual, RESIDUAL_TOLERANCE),
            NumericalWarning,
        )
    return DisplacementField(system.space, x.reshape(-1, 3), float(residual))


def stress_at(field, Cbar, pt):
    """
    Voigt stress sigma = Cbar eps(u) at a physical point (MPa)
    """
    return Cbar.matrix @ voigt_strain(field.gradient(pt))
