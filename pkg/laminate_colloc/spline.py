#!/usr/bin/python3

import itertools
from math import comb

import numpy as np

from .exceptions import DomainException

MAX_DERIVATIVE = 3

# slack allowed when mapping physical points back to the unit cube
_BOX_TOL = 1e-12


class KnotVector:
    """
    Open (clamped) knot vector of a univariate B-spline basis

    The first and the last knot are repeated exactly degree + 1 times and no
    interior knot is repeated more than degree times, so the basis is at
    least C^0 everywhere.

    Attributes:
        degree - polynomial degree p
        knots - read-only non-decreasing numpy array
        m - number of basis functions, len(knots) - degree - 1

    Usage:
        KnotVector(2, [0, 0, 0, 0.5, 1, 1, 1])
    """

    def __init__(self, degree, knots):
        knots = np.array(knots, dtype=float)
        assert degree >= 0, "degree must be non-negative"
        assert knots.ndim == 1, "knots must be a flat sequence"
        assert np.all(np.diff(knots) >= 0), "knots must be non-decreasing"
        m = len(knots) - degree - 1
        assert m >= degree + 1, "not enough knots for the degree"
        assert np.all(knots[: degree + 1] == knots[0]) and np.all(
            knots[-degree - 1 :] == knots[-1]
        ), "knot vector must be open"
        assert (
            knots[degree + 1] > knots[0] and knots[-degree - 2] < knots[-1]
        ), "end knots must be repeated exactly degree + 1 times"

        self.degree = degree
        self.m = m
        self.knots = knots
        self.knots.flags.writeable = False
        assert (
            self.max_interior_multiplicity() <= degree
        ), "interior knot multiplicity must not exceed the degree"

    @property
    def domain(self):
        return self.knots[0], self.knots[-1]

    def breakpoints(self):
        """
        Distinct knot values, i.e. the element boundaries
        """
        return np.unique(self.knots)

    def max_interior_multiplicity(self):
        _, counts = np.unique(self.knots, return_counts=True)
        interior = counts[1:-1]
        return int(interior.max()) if interior.size else 0

    def regularity(self):
        """
        Global continuity order k of the basis (C^k)

        Equals degree minus the largest interior knot multiplicity.
        """
        return self.degree - self.max_interior_multiplicity()

    def span(self, x):
        """
        Index i with knots[i] <= x < knots[i + 1], last span closed on the right
        """
        lo, hi = self.domain
        if x < lo or x > hi:
            raise DomainException(x, lo, hi)
        i = int(np.searchsorted(self.knots, x, side="right")) - 1
        return min(max(i, self.degree), self.m - 1)

    def __eq__(self, x):
        return (
            isinstance(x, KnotVector)
            and self.degree == x.degree
            and np.array_equal(self.knots, x.knots)
        )

    def __ne__(self, x):
        return not (self == x)

    def __hash__(self):
        return hash((self.degree, self.knots.tobytes()))

    def __len__(self):
        return len(self.knots)

    def __str__(self):
        return "KnotVector(p={}, {})".format(
            self.degree, np.array2string(self.knots, precision=4)
        )


def make_open_uniform_knots(degree, n_spans):
    """
    Open knot vector on [0, 1] with `n_spans` uniform spans

    Arguments:
        degree - polynomial degree (>= 1)
        n_spans - number of knot spans (>= 1)

    Usage:
        make_open_uniform_knots(2, 1)  # [0, 0, 0, 1, 1, 1]
    """
    assert degree >= 1, "degree must be at least 1"
    assert n_spans >= 1, "at least one knot span is needed"
    inner = np.linspace(0.0, 1.0, n_spans + 1)
    knots = np.concatenate([np.zeros(degree), inner, np.ones(degree)])
    return KnotVector(degree, knots)


def _ders_basis_funs(i, x, p, n, U):
    """
    Nonzero basis functions N_{i-p..i, p}(x) and their first n derivatives

    Cox-de Boor triangle plus the derivative recurrence, returns an array of
    shape (n + 1, p + 1).
    """
    ndu = np.zeros((p + 1, p + 1))
    left = np.zeros(p + 1)
    right = np.zeros(p + 1)
    ndu[0, 0] = 1.0
    for j in range(1, p + 1):
        left[j] = x - U[i + 1 - j]
        right[j] = U[i + j] - x
        saved = 0.0
        for r in range(j):
            # lower triangle keeps the knot differences
            ndu[j, r] = right[r + 1] + left[j - r]
            temp = ndu[r, j - 1] / ndu[j, r]
            ndu[r, j] = saved + right[r + 1] * temp
            saved = left[j - r] * temp
        ndu[j, j] = saved

    ders = np.zeros((n + 1, p + 1))
    ders[0] = ndu[:, p]

    a = np.zeros((2, p + 1))
    for r in range(p + 1):
        s1, s2 = 0, 1
        a[0, 0] = 1.0
        for k in range(1, n + 1):
            d = 0.0
            rk = r - k
            pk = p - k
            if r >= k:
                a[s2, 0] = a[s1, 0] / ndu[pk + 1, rk]
                d = a[s2, 0] * ndu[rk, pk]
            j1 = 1 if rk >= -1 else -rk
            j2 = k - 1 if r - 1 <= pk else p - r
            for j in range(j1, j2 + 1):
                a[s2, j] = (a[s1, j] - a[s1, j - 1]) / ndu[pk + 1, rk + j]
                d += a[s2, j] * ndu[rk + j, pk]
            if r <= pk:
                a[s2, k] = -a[s1, k - 1] / ndu[pk + 1, r]
                d += a[s2, k] * ndu[r, pk]
            ders[k, r] = d
            s1, s2 = s2, s1

    factor = p
    for k in range(1, n + 1):
        ders[k] *= factor
        factor *= p - k
    return ders


def eval_univariate(kv, x, max_der=0):
    """
    Evaluate the degree + 1 nonzero basis functions at x and their derivatives

    Orders above the degree are identically zero and returned as such.

    Arguments:
        kv - KnotVector
        x - parametric coordinate inside the knot range
        max_der - highest derivative order (0..3)

    Returns:
        (first, ders) - index of the first nonzero function and an array of
        shape (max_der + 1, degree + 1)

    Usage:
        eval_univariate(KnotVector(1, [0, 0, 1, 1]), 0.5)
    """
    assert 0 <= max_der <= MAX_DERIVATIVE, "derivative order must be within 0..3"
    i = kv.span(x)
    p = kv.degree
    n = min(max_der, p)
    ders = np.zeros((max_der + 1, p + 1))
    ders[: n + 1] = _ders_basis_funs(i, float(x), p, n, kv.knots)
    return i - p, ders


def greville_points(kv):
    """
    Greville abscissae, the knot averages (knots[i+1] + ... + knots[i+p]) / p

    Arguments:
        kv - KnotVector of degree >= 1
    """
    p = kv.degree
    assert p >= 1, "Greville points need degree >= 1"
    U = kv.knots
    return np.array([U[i + 1 : i + p + 1].sum() / p for i in range(kv.m)])


class TensorProductSpace:
    """
    Trivariate tensor-product B-spline/NURBS space on an axis-aligned box

    The geometry is the affine map from the unit cube to the box
    origin + extents * xi, realized by control points placed at the images of
    the Greville abscissae. The Jacobian is therefore constant and diagonal.

    Attributes:
        knot_vectors - tuple of three KnotVector
        extents - box edge lengths (L1, L2, L3)
        origin - lower corner of the box
        weights - positive NURBS weights, shape (m1, m2, m3)

    Usage:
        kv = make_open_uniform_knots(2, 2)
        TensorProductSpace((kv, kv, kv), (1.0, 1.0, 1.0))
    """

    def __init__(self, knot_vectors, extents, origin=(0.0, 0.0, 0.0), weights=None):
        assert len(knot_vectors) == 3, "three knot vectors are needed"
        for kv in knot_vectors:
            assert kv.domain == (0.0, 1.0), "parametric domain must be [0, 1]"
        self.knot_vectors = tuple(knot_vectors)
        self.extents = np.array(extents, dtype=float)
        self.origin = np.array(origin, dtype=float)
        assert self.extents.shape == (3,) and np.all(
            self.extents > 0
        ), "box extents must be three positive lengths"
        assert self.origin.shape == (3,), "origin must be a 3D point"
        self.shape = tuple(kv.m for kv in self.knot_vectors)
        if weights is None:
            weights = np.ones(self.shape)
        weights = np.array(weights, dtype=float).reshape(self.shape)
        assert np.all(weights > 0), "weights must be positive"
        self.weights = weights
        self.rational = not np.all(weights == 1.0)
        for a in (self.extents, self.origin, self.weights):
            a.flags.writeable = False

    @property
    def degrees(self):
        return tuple(kv.degree for kv in self.knot_vectors)

    @property
    def size(self):
        return int(np.prod(self.shape))

    @property
    def upper(self):
        return self.origin + self.extents

    def jacobian(self):
        return np.diag(self.extents)

    def regularity(self, direction):
        return self.knot_vectors[direction].regularity()

    def greville(self):
        return [greville_points(kv) for kv in self.knot_vectors]

    def control_grid(self):
        """
        Control points of the affine box map, shape (m1, m2, m3, 3)
        """
        g = np.meshgrid(*self.greville(), indexing="ij")
        return self.origin + self.extents * np.stack(g, axis=-1)

    def to_physical(self, xi):
        return self.origin + self.extents * np.asarray(xi, dtype=float)

    def to_parametric(self, pt):
        """
        Map a physical point into the unit cube, DomainException outside the box
        """
        xi = (np.asarray(pt, dtype=float) - self.origin) / self.extents
        for d in range(3):
            if xi[d] < -_BOX_TOL or xi[d] > 1.0 + _BOX_TOL:
                raise DomainException(pt[d], self.origin[d], self.upper[d])
        return np.clip(xi, 0.0, 1.0)

    def flat_index(self, i1, i2, i3):
        _, m2, m3 = self.shape
        return (i1 * m2 + i2) * m3 + i3

    def __str__(self):
        return "TensorProductSpace(degrees={}, shape={}, box={})".format(
            self.degrees, self.shape, tuple(self.extents)
        )


class BasisTable:
    """
    Nonzero basis functions of a space at one point

    Attributes:
        indices - flat indices of the (p+1)(q+1)(r+1) nonzero functions
        derivatives - dict multi-index -> values, physical coordinates
    """

    def __init__(self, indices, derivatives):
        self.indices = indices
        self.derivatives = derivatives

    def __getitem__(self, order):
        return self.derivatives[tuple(order)]

    def __len__(self):
        return len(self.indices)

    def gradient(self, offset=(0, 0, 0)):
        """
        Gradient of the derivative `offset` of the basis, shape (3, n)
        """
        a = np.asarray(offset)
        return np.stack(
            [self[tuple(int(v) for v in a + e)] for e in np.eye(3, dtype=int)]
        )


def _check_orders(orders):
    orders = [tuple(int(v) for v in o) for o in orders]
    for o in orders:
        assert len(o) == 3 and all(
            0 <= v <= MAX_DERIVATIVE for v in o
        ), "per-direction derivative order must be within 0..3"
    return orders


def _rational_derivatives(bspline, w_loc, orders):
    """
    Derivatives of R = w B / sum(w B) by the generalized quotient rule

    `bspline(beta)` returns the B-spline derivative beta at the point.
    """
    weighted = {}
    total = {}
    rational = {}

    def A(beta):
        if beta not in weighted:
            weighted[beta] = w_loc * bspline(beta)
        return weighted[beta]

    def W(beta):
        if beta not in total:
            total[beta] = A(beta).sum()
        return total[beta]

    def R(alpha):
        if alpha in rational:
            return rational[alpha]
        value = A(alpha).copy()
        for beta in itertools.product(*(range(a + 1) for a in alpha)):
            if beta == alpha:
                continue
            coef = 1
            for a, b in zip(alpha, beta):
                coef *= comb(a, b)
            rest = tuple(a - b for a, b in zip(alpha, beta))
            value -= coef * R(beta) * W(rest)
        value /= W((0, 0, 0))
        rational[alpha] = value
        return value

    return {o: R(o) for o in orders}


def basis_table(space, pt, orders=((0, 0, 0),)):
    """
    Evaluate the nonzero basis functions at a physical point

    Arguments:
        space - TensorProductSpace
        pt - physical point inside the box
        orders - derivative multi-indices, per-direction order <= 3

    Usage:
        basis_table(space, (0.5, 0.5, 0.0), [(0, 0, 0), (1, 0, 0)])
    """
    orders = _check_orders(orders)
    xi = space.to_parametric(pt)
    max_der = [max(o[d] for o in orders) for d in range(3)]
    firsts, ders = [], []
    for d, kv in enumerate(space.knot_vectors):
        first, table = eval_univariate(kv, xi[d], max_der[d])
        firsts.append(first + np.arange(kv.degree + 1))
        ders.append(table)

    i1, i2, i3 = np.meshgrid(*firsts, indexing="ij")
    indices = space.flat_index(i1, i2, i3).ravel()

    def bspline(beta):
        a, b, c = beta
        return np.einsum("i,j,k->ijk", ders[0][a], ders[1][b], ders[2][c]).ravel()

    if space.rational:
        w_loc = space.weights.ravel()[indices]
        parametric = _rational_derivatives(bspline, w_loc, orders)
    else:
        parametric = {o: bspline(o) for o in orders}

    derivatives = {
        o: v / np.prod(space.extents ** np.array(o)) for o, v in parametric.items()
    }
    return BasisTable(indices, derivatives)


def _flat_coefficients(space, coeffs):
    coeffs = np.asarray(coeffs, dtype=float)
    if coeffs.shape[:3] == space.shape:
        return coeffs.reshape((space.size,) + coeffs.shape[3:])
    assert coeffs.shape[0] == space.size, "one coefficient per control point needed"
    return coeffs


def eval_field(space, coeffs, pt, orders=((0, 0, 0),)):
    """
    Evaluate a spline field and its partial derivatives at a physical point

    Arguments:
        space - TensorProductSpace
        coeffs - control coefficients, shape (m1, m2, m3[, k]) or (M[, k])
        pt - physical point inside the box
        orders - derivative multi-indices, per-direction order <= 3

    Returns:
        dict multi-index -> value (scalar field) or array of k components

    Usage:
        eval_field(space, coeffs, (0.1, 0.2, 0.0), [(0, 0, 0), (2, 0, 1)])
    """
    flat = _flat_coefficients(space, coeffs)
    table = basis_table(space, pt, orders)
    local = flat[table.indices]
    return {o: v @ local for o, v in table.derivatives.items()}


def eval_field_line(space, coeffs, x1, x2, x3_values, orders=((0, 0, 0),)):
    """
    Evaluate a spline field along the through-thickness line (x1, x2, .)

    The in-plane factors are contracted once, so only the univariate basis in
    the third direction is evaluated per sample.

    Returns:
        dict multi-index -> array of shape (n_samples[, k])
    """
    orders = _check_orders(orders)
    x3_values = np.asarray(x3_values, dtype=float)
    if space.rational:
        values = [eval_field(space, coeffs, (x1, x2, z), orders) for z in x3_values]
        return {o: np.array([v[o] for v in values]) for o in orders}

    flat = _flat_coefficients(space, coeffs)
    full = flat.reshape(space.shape + flat.shape[1:])
    xi = space.to_parametric((x1, x2, space.origin[2]))
    max_der = [max(o[d] for o in orders) for d in range(3)]
    planar = []
    for d in range(2):
        kv = space.knot_vectors[d]
        first, table = eval_univariate(kv, xi[d], max_der[d])
        planar.append((first, table))

    (f1, t1), (f2, t2) = planar
    p1, p2 = space.degrees[:2]
    block = full[f1 : f1 + p1 + 1, f2 : f2 + p2 + 1]
    contracted = {}
    for a, b, _ in orders:
        if (a, b) not in contracted:
            contracted[(a, b)] = np.tensordot(
                np.outer(t1[a], t2[b]), block, axes=([0, 1], [0, 1])
            )

    kv3 = space.knot_vectors[2]
    L3, z0 = space.extents[2], space.origin[2]
    out = {o: [] for o in orders}
    for z in x3_values:
        zeta = (z - z0) / L3
        if zeta < -_BOX_TOL or zeta > 1.0 + _BOX_TOL:
            raise DomainException(z, z0, z0 + L3)
        first, t3 = eval_univariate(kv3, min(max(zeta, 0.0), 1.0), max_der[2])
        for o in orders:
            column = contracted[o[:2]][first : first + kv3.degree + 1]
            out[o].append(t3[o[2]] @ column)
    scale = {o: np.prod(space.extents ** np.array(o)) for o in orders}
    return {o: np.array(v) / scale[o] for o, v in out.items()}
