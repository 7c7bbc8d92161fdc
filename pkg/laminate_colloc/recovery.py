#!/usr/bin/python3

"""
Out-of-plane stresses from through-thickness integration of equilibrium

    s13(z) = -int_bottom^z (s11,1 + s12,2 + b1) + s13(bottom)
    s23(z) = -int_bottom^z (s12,1 + s22,2 + b2) + s23(bottom)
    s33(z) = -int_bottom^z (s13,1 + s23,2 + b3) + s33(bottom)

with s13,1 and s23,2 obtained by differentiating the first two integrals
under the integral sign, so third in-plane derivatives of the displacement
are needed. Stress derivatives use the stiffness of the ply containing
the node, s_ij,k = C^(k)_ijmn (u_m,nk + u_n,mk) / 2, and the integration
pieces are cut at the ply interfaces so every piece lies in one ply.
"""

from dataclasses import dataclass

import numpy as np

from .collocation import FIRST, voigt_strain
from .exceptions import RecoveryException
from .material import ElasticityMatrix, LayerStiffness
from .spline import eval_field, eval_field_line
from .util import gauss_legendre, integration_matrix, map_to_interval

# recovered components and their Voigt slots
RECOVERED_LABELS = ("s13", "s23", "s33")
RECOVERED_VOIGT = (4, 3, 2)

_E1 = np.array([1, 0, 0])
_E2 = np.array([0, 1, 0])


def _offset_orders(offset):
    a = np.asarray(offset)
    return [tuple(int(v) for v in a + e) for e in np.eye(3, dtype=int)]


def _stress_derivative(values, matrices, offset):
    """
    Voigt stress derivative d^offset sigma from evaluated displacement partials

    `matrices` holds one 6x6 stiffness per evaluation point.
    """
    G = np.stack([values[o] for o in _offset_orders(offset)], axis=-1)
    return np.einsum("...i,...ij->...j", voigt_strain(G), matrices)


def as_layers(stiffness, space):
    """
    LayerStiffness over the box thickness, a single ElasticityMatrix is
    used at every x3
    """
    if isinstance(stiffness, LayerStiffness):
        return stiffness
    assert isinstance(stiffness, ElasticityMatrix), "stiffness must be a matrix or plies"
    bottom = space.origin[2]
    return LayerStiffness.uniform(stiffness, bottom, bottom + space.extents[2])


SHEAR_OFFSETS = (tuple(_E1), tuple(_E2))
NORMAL_OFFSETS = (tuple(2 * _E1), tuple(_E1 + _E2), tuple(2 * _E2))


def _orders_for(offsets):
    orders = []
    for off in offsets:
        for o in _offset_orders(off):
            if o not in orders:
                orders.append(o)
    return orders


def _body(body_force, z):
    if body_force is None:
        return np.zeros(np.shape(z) + (3,))
    return np.array([body_force(v) for v in np.ravel(z)]).reshape(
        np.shape(z) + (3,)
    )


def check_regularity(space, required):
    """
    RecoveryException unless both in-plane directions are at least C^required
    """
    for d in (0, 1):
        available = space.regularity(d)
        if space.degrees[d] < required or available < required:
            raise RecoveryException(required, min(available, space.degrees[d]), d + 1)


class RecoveryPlan:
    """
    Cumulative through-thickness quadrature at one in-plane station

    The thickness is cut at every knot of the third direction, at every ply
    interface and at every requested sample. Each piece carries a
    Gauss-Legendre rule with `points_per_span` nodes (default r + 2, exact
    up to degree 2r + 3).

    Attributes:
        x1, x2 - in-plane station (mm)
        samples - requested x3 coordinates
        grid - sorted cut points, bottom surface first
        nodes - (n_pieces, n) quadrature nodes
        weights - (n_pieces, n) quadrature weights
        halves - half length of each piece
        bottom - lower integration limit
        body_force - callable x3 -> (b1, b2, b3) or None
        interfaces - ply boundaries the grid is cut at, or None

    Usage:
        RecoveryPlan(space, 0.25 * L, 0.25 * L, np.linspace(-t / 2, t / 2, 201))
    """

    def __init__(
        self,
        space,
        x1,
        x2,
        samples,
        points_per_span=None,
        body_force=None,
        interfaces=None,
    ):
        self.x1 = float(x1)
        self.x2 = float(x2)
        bottom = space.origin[2]
        top = bottom + space.extents[2]
        samples = np.clip(np.atleast_1d(np.asarray(samples, dtype=float)), bottom, top)
        breaks = bottom + space.extents[2] * space.knot_vectors[2].breakpoints()
        breaks[-1] = top
        self.interfaces = interfaces
        if interfaces is not None:
            inside = np.asarray(interfaces, dtype=float)
            breaks = np.concatenate([breaks, inside[(inside > bottom) & (inside < top)]])
        self.samples = samples
        self.grid = np.unique(np.concatenate([breaks, samples]))
        self.bottom = bottom
        self.body_force = body_force

        n = points_per_span or space.degrees[2] + 2
        ref, w = gauss_legendre(n)
        self.order = n
        self.nodes = np.zeros((len(self.grid) - 1, n))
        self.halves = np.zeros(len(self.grid) - 1)
        for j, (a, b) in enumerate(zip(self.grid[:-1], self.grid[1:])):
            self.nodes[j], self.halves[j] = map_to_interval(ref, a, b)
        self.weights = self.halves[:, None] * w[None, :]
        self.sample_index = np.searchsorted(self.grid, samples)

    def cumulative(self, values):
        """
        Running integral from the bottom to every grid point

        Arguments:
            values - integrand at the nodes, shape (n_pieces, n[, k])
        """
        pieces = np.einsum("jq,jq...->j...", self.weights, values)
        zero = np.zeros((1,) + pieces.shape[1:])
        return np.concatenate([zero, np.cumsum(pieces, axis=0)])

    def running(self, values):
        """
        Running integral from the bottom to every quadrature node
        """
        start = self.cumulative(values)[:-1]
        Q = integration_matrix(self.order)
        inside = np.einsum("ql,jl...->jq...", Q, values)
        inside = inside * self.halves.reshape((-1, 1) + (1,) * (values.ndim - 2))
        return start[:, None] + inside


def _integrands(field, layers, plan):
    """
    Equilibrium integrands at the plan nodes

    Returns (f, h): f[..., 0:2] the in-plane divergences s11,1 + s12,2 and
    s12,1 + s22,2, h[..., 0:2] their x1 resp. x2 derivatives.
    """
    shape = plan.nodes.shape
    z = plan.nodes.ravel()
    orders = _orders_for(SHEAR_OFFSETS + NORMAL_OFFSETS)
    values = eval_field_line(
        field.space, field.coefficients, plan.x1, plan.x2, z, orders
    )
    C = layers.matrices(z)
    d1, d2 = (_stress_derivative(values, C, off) for off in SHEAR_OFFSETS)
    d11, d12, d22 = (_stress_derivative(values, C, off) for off in NORMAL_OFFSETS)
    f = np.stack([d1[:, 0] + d2[:, 5], d1[:, 5] + d2[:, 1]], axis=-1)
    h = np.stack([d11[:, 0] + d12[:, 5], d12[:, 5] + d22[:, 1]], axis=-1)
    return f.reshape(shape + (2,)), h.reshape(shape + (2,))


def recover(
    field, stiffness, plan, bottom_traction=(0.0, 0.0, 0.0), need_normal=True
):
    """
    Recovered (s13, s23, s33) at the plan samples, shape (n_samples, 3)

    Arguments:
        field - DisplacementField
        stiffness - LayerStiffness of the plies, or one ElasticityMatrix
        plan - RecoveryPlan, cut at the ply interfaces
        bottom_traction - (s13, s23, s33) on the bottom surface
        need_normal - also recover s33 (needs C^3 in-plane)
    """
    space = field.space
    check_regularity(space, 3 if need_normal else 2)
    f, h = _integrands(field, as_layers(stiffness, space), plan)
    b = _body(plan.body_force, plan.nodes)
    s0 = np.asarray(bottom_traction, dtype=float)

    shear = s0[:2] - plan.cumulative(f + b[..., :2])
    out = np.zeros((len(plan.samples), 3))
    out[:, :2] = shear[plan.sample_index]
    if need_normal:
        # s13,1 and s23,2 on the nodes, body force constant in-plane
        inplane = -plan.running(h)
        g = inplane[..., 0] + inplane[..., 1] + b[..., 2]
        normal = s0[2] - plan.cumulative(g)
        out[:, 2] = normal[plan.sample_index]
    return out


def shear_integrand(field, stiffness, x1, x2, zeta, body_force=None):
    """
    (s11,1 + s12,2 + b1, s12,1 + s22,2 + b2) at (x1, x2, zeta)

    Arguments:
        field - DisplacementField
        stiffness - LayerStiffness of the plies, or one ElasticityMatrix
        x1, x2, zeta - physical point
        body_force - callable x3 -> (b1, b2, b3) (default: none)
    """
    orders = _orders_for(SHEAR_OFFSETS)
    values = eval_field(field.space, field.coefficients, (x1, x2, zeta), orders)
    C = as_layers(stiffness, field.space).matrices(zeta)
    d1, d2 = (_stress_derivative(values, C, off) for off in SHEAR_OFFSETS)
    b = _body(body_force, zeta)
    return np.array([d1[0] + d2[5] + b[0], d1[5] + d2[1] + b[1]])


def _point_plan(field, layers, x1, x2, x3, body_force, points_per_span):
    return RecoveryPlan(
        field.space, x1, x2, [x3], points_per_span, body_force, layers.interfaces
    )


def recover_shear(
    field, stiffness, x1, x2, x3, body_force=None, points_per_span=None
):
    """
    Recovered (s13, s23) at one point, zero shear on the bottom surface
    """
    layers = as_layers(stiffness, field.space)
    plan = _point_plan(field, layers, x1, x2, x3, body_force, points_per_span)
    return recover(field, layers, plan, need_normal=False)[0, :2]


def recover_sigma33(
    field, stiffness, x1, x2, x3, body_force=None, points_per_span=None
):
    """
    Recovered s33 at one point, zero normal stress on the bottom surface
    """
    layers = as_layers(stiffness, field.space)
    plan = _point_plan(field, layers, x1, x2, x3, body_force, points_per_span)
    return recover(field, layers, plan)[0, 2]


def raw_stresses(field, stiffness, x1, x2, x3_values):
    """
    Collocation stresses C^(k) eps(u) along a through-thickness line, (n, 6)

    C^(k) is the stiffness of the ply containing each sample, a sample on an
    interface takes the ply above.
    """
    values = eval_field_line(
        field.space, field.coefficients, x1, x2, x3_values, FIRST
    )
    G = np.stack([values[o] for o in FIRST], axis=-1)
    C = as_layers(stiffness, field.space).matrices(np.asarray(x3_values, dtype=float))
    return np.einsum("ni,nij->nj", voigt_strain(G), C)


def normalization(sigma0, slenderness):
    """
    Voigt divisors: in-plane sigma0 S^2, transverse shear sigma0 S, s33 sigma0
    """
    S = slenderness
    return sigma0 * np.array([S**2, S**2, 1.0, S, S, S**2])


@dataclass
class StressProfile:
    """
    Through-thickness stresses at an in-plane station

    Attributes:
        x1, x2 - station (mm)
        x3 - sample coordinates, bottom to top (mm)
        raw - (n, 6) Voigt stresses of the collocation solution
        recovered - (n, 3) recovered s13, s23, s33
        sigma0, slenderness - normalization data
        reference - (n, 6) reference Voigt stresses, when attached
    """

    x1: float
    x2: float
    x3: np.ndarray
    raw: np.ndarray
    recovered: np.ndarray
    sigma0: float
    slenderness: float
    reference: np.ndarray = None

    @property
    def scale(self):
        return normalization(self.sigma0, self.slenderness)

    def normalized_raw(self):
        return self.raw / self.scale

    def normalized_recovered(self):
        return self.recovered / self.scale[list(RECOVERED_VOIGT)]

    def normalized_reference(self):
        if self.reference is None:
            return None
        return self.reference / self.scale


def profile(
    field, problem, x1, x2, n_samples=201, points_per_span=None, need_normal=True
):
    """
    Raw and recovered stresses at `n_samples` uniform x3 samples

    Samples include both surfaces.

    Arguments:
        field - solved DisplacementField
        problem - PlateProblem (ply stiffness, load amplitude, slenderness)
        x1, x2 - station (mm)
        n_samples - number of samples (>= 2)
    """
    assert n_samples >= 2, "at least two samples are needed"
    t = problem.thickness
    x3 = np.linspace(-0.5 * t, 0.5 * t, n_samples)
    layers = problem.ply_stiffness()
    plan = RecoveryPlan(
        field.space,
        x1,
        x2,
        x3,
        points_per_span,
        problem.body_force,
        layers.interfaces,
    )
    recovered = recover(field, layers, plan, need_normal=need_normal)
    raw = raw_stresses(field, layers, x1, x2, x3)
    return StressProfile(
        float(x1),
        float(x2),
        x3,
        raw,
        recovered,
        problem.sigma0,
        problem.slenderness,
    )
