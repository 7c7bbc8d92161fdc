#!/usr/bin/python3

"""
Exact 3D elasticity reference for the simply supported cross-ply plate

With the single Fourier mode

    u1 = U(z) cos(a x1) sin(b x2)
    u2 = V(z) sin(a x1) cos(b x2)
    u3 = W(z) sin(a x1) sin(b x2)

the equilibrium equations of every orthotropic layer reduce to the
through-thickness system K2 y'' = K0 y + K1 y' for y = (U, V, W), and the
traction amplitudes on x3 planes are tau = G0 y + G1 y'. The system is
solved layer by layer in first-order form for s = (U, V, W, tau13, tau23,
tau33), which is continuous across perfectly bonded interfaces.
"""

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .exceptions import NumericalWarning, OracleException, SolverException
from .recovery import normalization
from .spline import eval_univariate, greville_points, make_open_uniform_knots

PROPAGATOR = "propagator"
SPLINE = "spline"
BACKENDS = (PROPAGATOR, SPLINE)

# equilibrated propagation systems above this condition number are not trusted
CONDITION_LIMIT = 1e12
AGREEMENT_TOLERANCE = 1e-8


def _equilibrate(A, b=None):
    """
    Row then column scaling by the largest magnitude entry
    """
    rows = np.max(np.abs(A), axis=1)
    rows[rows == 0] = 1.0
    A = A / rows[:, None]
    cols = np.max(np.abs(A), axis=0)
    cols[cols == 0] = 1.0
    A = A / cols[None, :]
    if b is not None:
        b = b / rows
    return A, b, cols


@dataclass
class ModalODE:
    """
    Coefficients of the through-thickness system of one layer

    K2 y'' = K0 y + K1 y', tau = G0 y + G1 y'
    """

    K2: np.ndarray
    K0: np.ndarray
    K1: np.ndarray
    G0: np.ndarray
    G1: np.ndarray

    def state_matrix(self):
        """
        M with s' = M s for the state s = (y, tau)
        """
        G1inv = np.diag(1.0 / np.diag(self.G1))
        coupling = self.G0 + self.K1
        M = np.zeros((6, 6))
        M[:3, :3] = -G1inv @ self.G0
        M[:3, 3:] = G1inv
        M[3:, :3] = self.K0 - coupling @ G1inv @ self.G0
        M[3:, 3:] = coupling @ G1inv
        return M

    def derivative(self, y, tau):
        """
        y' recovered from the state
        """
        return (tau - self.G0 @ y) / np.diag(self.G1)


def reduce_to_modal_ode(C, alpha, beta):
    """
    Separate the in-plane dependence of the Navier equations of one layer

    Arguments:
        C - orthotropic ElasticityMatrix of the layer (plate axes)
        alpha, beta - wave numbers in x1 and x2 (1/mm)

    Usage:
        reduce_to_modal_ode(C, np.pi / 220, np.pi / 220)
    """
    a, b = alpha, beta
    C11, C12, C13 = C[1, 1], C[1, 2], C[1, 3]
    C22, C23, C33 = C[2, 2], C[2, 3], C[3, 3]
    C44, C55, C66 = C[4, 4], C[5, 5], C[6, 6]

    K2 = np.diag([C55, C44, C33])
    K0 = np.array(
        [
            [a * a * C11 + b * b * C66, a * b * (C12 + C66), 0.0],
            [a * b * (C12 + C66), a * a * C66 + b * b * C22, 0.0],
            [0.0, 0.0, a * a * C55 + b * b * C44],
        ]
    )
    K1 = np.array(
        [
            [0.0, 0.0, -a * (C13 + C55)],
            [0.0, 0.0, -b * (C23 + C44)],
            [a * (C13 + C55), b * (C23 + C44), 0.0],
        ]
    )
    G0 = np.array(
        [
            [0.0, 0.0, a * C55],
            [0.0, 0.0, b * C44],
            [-a * C13, -b * C23, 0.0],
        ]
    )
    return ModalODE(K2, K0, K1, G0, K2.copy())


class ModalProblem:
    """
    Layered plate data for one Fourier mode

    Attributes:
        stiffnesses - ElasticityMatrix per layer, bottom to top
        interfaces - N + 1 layer boundaries (mm), mid-plane at 0
        alpha, beta - wave numbers pi / L
        sigma0 - load amplitude (MPa)
        slenderness - S = L / t
        odes - ModalODE per layer

    Usage:
        ModalProblem.from_layup(Layup.cross_ply(3), 20)
    """

    def __init__(self, stiffnesses, interfaces, slenderness, sigma0=1.0):
        self.stiffnesses = tuple(stiffnesses)
        self.interfaces = np.asarray(interfaces, dtype=float)
        assert len(self.interfaces) == len(self.stiffnesses) + 1, (
            "one interface more than layers is needed"
        )
        assert np.all(np.diff(self.interfaces) > 0), "layers must have positive thickness"
        assert slenderness > 0, "slenderness must be positive"
        self.slenderness = float(slenderness)
        self.sigma0 = float(sigma0)
        self.alpha = self.beta = np.pi / self.edge_length
        self.odes = tuple(
            reduce_to_modal_ode(C, self.alpha, self.beta) for C in self.stiffnesses
        )

    @classmethod
    def from_layup(cls, layup, slenderness, sigma0=1.0):
        return cls(layup.stiffnesses(), layup.interfaces(), slenderness, sigma0)

    @property
    def n_layers(self):
        return len(self.stiffnesses)

    @property
    def thickness(self):
        return float(self.interfaces[-1] - self.interfaces[0])

    @property
    def edge_length(self):
        return self.slenderness * self.thickness

    @property
    def top_traction(self):
        return np.array([0.0, 0.0, self.sigma0])

    def layer_index(self, z):
        """
        Layer containing z, an interface belongs to the layer above it
        """
        k = np.searchsorted(self.interfaces, z, side="right") - 1
        return np.clip(k, 0, self.n_layers - 1)


class ModalSolution:
    """
    Through-thickness amplitudes of a solved ModalProblem

    Subclasses provide `state_in_layer(k, z)`, the state of layer k at z,
    which is also valid at the end points of the layer.
    """

    backend = None

    def __init__(self, problem):
        self.problem = problem

    def state_in_layer(self, k, z):
        raise NotImplementedError

    def state(self, z):
        return self.state_in_layer(int(self.problem.layer_index(z)), z)

    def states(self, z_values):
        return np.array([self.state(z) for z in np.atleast_1d(z_values)])

    def displacement_amplitudes(self, z_values):
        """
        (U, V, W) at every z, shape (n, 3)
        """
        return self.states(z_values)[:, :3]

    def amplitudes(self, z_values):
        """
        Voigt stress amplitudes at every z, shape (n, 6)
        """
        p = self.problem
        a, b = p.alpha, p.beta
        z_values = np.atleast_1d(np.asarray(z_values, dtype=float))
        out = np.zeros((len(z_values), 6))
        for n, z in enumerate(z_values):
            k = int(p.layer_index(z))
            C, ode = p.stiffnesses[k], p.odes[k]
            s = self.state(z)
            y, tau = s[:3], s[3:]
            U, V, _ = y
            dW = ode.derivative(y, tau)[2]
            out[n, 0] = -a * C[1, 1] * U - b * C[1, 2] * V + C[1, 3] * dW
            out[n, 1] = -a * C[1, 2] * U - b * C[2, 2] * V + C[2, 3] * dW
            out[n, 2] = tau[2]
            out[n, 3] = tau[1]
            out[n, 4] = tau[0]
            out[n, 5] = C[6, 6] * (b * U + a * V)
        return out


class PropagatorSolution(ModalSolution):
    """
    Layer-bottom states propagated with the matrix exponential

    Attributes:
        matrices - state matrix M per layer
        bottoms - (N, 6) state at the bottom of every layer
        condition - condition number of the equilibrated interface system
    """

    backend = PROPAGATOR

    def __init__(self, problem, matrices, bottoms, condition):
        super().__init__(problem)
        self.matrices = matrices
        self.bottoms = bottoms
        self.condition = condition

    def state_in_layer(self, k, z):
        dz = z - self.problem.interfaces[k]
        return scipy.linalg.expm(self.matrices[k] * dz) @ self.bottoms[k]


def _propagator_system(problem):
    N = problem.n_layers
    matrices = [ode.state_matrix() for ode in problem.odes]
    h = np.diff(problem.interfaces)
    transfers = [scipy.linalg.expm(M * hk) for M, hk in zip(matrices, h)]

    A = np.zeros((6 * N, 6 * N))
    rhs = np.zeros(6 * N)
    # bottom surface traction free
    A[0:3, 3:6] = np.eye(3)
    for k in range(N - 1):
        r = 3 + 6 * k
        A[r : r + 6, 6 * k : 6 * k + 6] = transfers[k]
        A[r : r + 6, 6 * k + 6 : 6 * k + 12] = -np.eye(6)
    A[6 * N - 3 :, 6 * N - 6 :] = transfers[-1][3:]
    rhs[6 * N - 3 :] = problem.top_traction
    return matrices, A, rhs


def solve_propagator(problem):
    """
    Exact layerwise propagation, 6N unknowns (the state at each layer bottom)

    Raises:
        OracleException - equilibrated system is too ill-conditioned
    """
    matrices, A, rhs = _propagator_system(problem)
    scaled, b, cols = _equilibrate(A, rhs)
    condition = np.linalg.cond(scaled)
    if not np.isfinite(condition) or condition > CONDITION_LIMIT:
        raise OracleException(
            "Propagation system condition number {:.3e} above {:.0e}".format(
                condition, CONDITION_LIMIT
            )
        )
    x = scipy.linalg.solve(scaled, b) / cols
    return PropagatorSolution(problem, matrices, x.reshape(-1, 6), float(condition))


class SplineSolution(ModalSolution):
    """
    Per-layer high-order spline approximation of (U, V, W)

    Attributes:
        knots - KnotVector shared by all layers (on [0, 1])
        coefficients - (N, 3, m) control values per layer and component
    """

    backend = SPLINE

    def __init__(self, problem, knots, coefficients):
        super().__init__(problem)
        self.knots = knots
        self.coefficients = coefficients

    def state_in_layer(self, k, z):
        p = self.problem
        h = p.interfaces[k + 1] - p.interfaces[k]
        zeta = min(max((z - p.interfaces[k]) / h, 0.0), 1.0)
        first, ders = eval_univariate(self.knots, zeta, 1)
        c = self.coefficients[k][:, first : first + self.knots.degree + 1]
        y = c @ ders[0]
        dy = c @ ders[1] / h
        ode = self.problem.odes[k]
        return np.concatenate([y, ode.G0 @ y + ode.G1 @ dy])


def _local_basis(kv, zeta, h):
    first, ders = eval_univariate(kv, zeta, 2)
    scale = np.array([1.0, h, h * h])[:, None]
    return first, ders / scale


def solve_spline(problem, spans=8, degree=8):
    """
    Brute-force collocation of the modal system with one spline per layer

    ODE rows at the interior Greville points, interface continuity of the
    state and the surface conditions at the layer ends.

    Arguments:
        spans - knot spans per layer (>= 8)
        degree - spline degree (>= 3)
    """
    assert spans >= 1 and degree >= 3, "need at least one span and degree 3"
    N = problem.n_layers
    kv = make_open_uniform_knots(degree, spans)
    m = kv.m
    g = greville_points(kv)
    h = np.diff(problem.interfaces)
    n = 3 * m * N
    A = np.zeros((n, n))
    rhs = np.zeros(n)

    def cols(k, comp, first):
        start = 3 * m * k + comp * m + first
        return slice(start, start + degree + 1)

    row = 0
    for k, ode in enumerate(problem.odes):
        for zeta in g[1:-1]:
            first, (N0, N1, N2) = _local_basis(kv, zeta, h[k])
            for i in range(3):
                for j in range(3):
                    A[row, cols(k, j, first)] += (
                        ode.K2[i, j] * N2 - ode.K0[i, j] * N0 - ode.K1[i, j] * N1
                    )
                row += 1

    def traction_rows(k, zeta, sign):
        first, (N0, N1, _) = _local_basis(kv, zeta, h[k])
        ode = problem.odes[k]
        for i in range(3):
            for j in range(3):
                A[row + i, cols(k, j, first)] += sign * (
                    ode.G0[i, j] * N0 + ode.G1[i, j] * N1
                )

    def value_rows(k, zeta, sign):
        first, (N0, _, _) = _local_basis(kv, zeta, h[k])
        for i in range(3):
            A[row + i, cols(k, i, first)] += sign * N0

    traction_rows(0, 0.0, 1.0)
    row += 3
    for k in range(N - 1):
        value_rows(k, 1.0, 1.0)
        value_rows(k + 1, 0.0, -1.0)
        row += 3
        traction_rows(k, 1.0, 1.0)
        traction_rows(k + 1, 0.0, -1.0)
        row += 3
    traction_rows(N - 1, 1.0, 1.0)
    rhs[row : row + 3] = problem.top_traction
    row += 3
    assert row == n, "modal collocation system is not square"

    scaled, b, cscale = _equilibrate(A, rhs)
    try:
        x = scipy.linalg.solve(scaled, b) / cscale
    except np.linalg.LinAlgError as e:
        raise SolverException("Modal collocation system is singular: {}".format(e))
    return SplineSolution(problem, kv, x.reshape(N, 3, m))


def solve_modal(problem, backend=PROPAGATOR, spans=8, degree=8):
    """
    Solve the modal problem with the requested backend

    The propagator falls back to spline collocation, with a NumericalWarning,
    when its equilibrated system is too ill-conditioned.

    Arguments:
        problem - ModalProblem
        backend - "propagator" or "spline"
        spans, degree - spline backend resolution per layer

    Usage:
        solve_modal(ModalProblem.from_layup(Layup.cross_ply(11), 20))
    """
    assert backend in BACKENDS, "backend must be one of {}".format(BACKENDS)
    if backend == PROPAGATOR:
        try:
            return solve_propagator(problem)
        except OracleException as e:
            warnings.warn(
                "{}, falling back to spline collocation".format(e.message),
                NumericalWarning,
            )
    return solve_spline(problem, spans, degree)


def angular_factors(problem, x1, x2):
    """
    In-plane factors of the Voigt stress components and of (u1, u2, u3)
    """
    s1, c1 = np.sin(problem.alpha * x1), np.cos(problem.alpha * x1)
    s2, c2 = np.sin(problem.beta * x2), np.cos(problem.beta * x2)
    stress = np.array([s1 * s2, s1 * s2, s1 * s2, s1 * c2, c1 * s2, c1 * c2])
    displacement = np.array([c1 * s2, s1 * c2, s1 * s2])
    return stress, displacement


def reference_stress(solution, x1, x2, x3, normalized=False):
    """
    Voigt stresses of the reference solution, shape (n, 6) for n values of x3

    Arguments:
        solution - ModalSolution
        x1, x2 - in-plane point (mm)
        x3 - thickness coordinate(s) (mm)
        normalized - divide by sigma0 S^2, sigma0 S or sigma0 per component
    """
    p = solution.problem
    factors, _ = angular_factors(p, x1, x2)
    out = solution.amplitudes(x3) * factors
    if normalized:
        out = out / normalization(p.sigma0, p.slenderness)
    return out


def reference_displacement(solution, x1, x2, x3):
    """
    Displacements (u1, u2, u3) of the reference solution, shape (n, 3)
    """
    _, factors = angular_factors(solution.problem, x1, x2)
    return solution.displacement_amplitudes(x3) * factors


def _mode_field(alpha, beta, amplitudes):
    def u(x):
        y = amplitudes(x[2])[0]
        s1, c1 = np.sin(alpha * x[0]), np.cos(alpha * x[0])
        s2, c2 = np.sin(beta * x[1]), np.cos(beta * x[1])
        return y * np.array([c1 * s2, s1 * c2, s1 * s2])

    return u


def _hessian(u, x, step):
    """
    H[i, j, k] = d2 u_i / dx_j dx_k by central differences
    """
    H = np.zeros((3, 3, 3))
    E = np.eye(3) * step
    u0 = u(x)
    for j in range(3):
        H[:, j, j] = (u(x + E[j]) - 2.0 * u0 + u(x - E[j])) / step**2
        for k in range(j + 1, 3):
            H[:, j, k] = H[:, k, j] = (
                u(x + E[j] + E[k])
                - u(x + E[j] - E[k])
                - u(x - E[j] + E[k])
                + u(x - E[j] - E[k])
            ) / (4.0 * step**2)
    return H


def modal_residual_3d(C, alpha, beta, amplitudes, x, step=1e-3):
    """
    Check of the modal reduction against the full 3D equilibrium operator

    Arguments:
        C - ElasticityMatrix
        alpha, beta - wave numbers
        amplitudes - callable z -> (y, y', y'') with y = (U, V, W)
        x - physical point
        step - finite difference step

    Returns:
        (direct, modal) - div sigma of the mode field by finite differences
        and the modal residual K2 y'' - K0 y - K1 y' times its angular factors
    """
    x = np.asarray(x, dtype=float)
    H = _hessian(_mode_field(alpha, beta, amplitudes), x, step)
    D = C.matrix
    # d sigma / d x_k in Voigt form for every k, from the strain derivatives
    dstrain = np.stack(
        [
            H[0, 0],
            H[1, 1],
            H[2, 2],
            H[1, 2] + H[2, 1],
            H[0, 2] + H[2, 0],
            H[0, 1] + H[1, 0],
        ]
    )
    dstress = D @ dstrain
    direct = np.array(
        [
            dstress[0, 0] + dstress[5, 1] + dstress[4, 2],
            dstress[5, 0] + dstress[1, 1] + dstress[3, 2],
            dstress[4, 0] + dstress[3, 1] + dstress[2, 2],
        ]
    )

    ode = reduce_to_modal_ode(C, alpha, beta)
    y, dy, ddy = (np.asarray(v, dtype=float) for v in amplitudes(x[2]))
    r = ode.K2 @ ddy - ode.K0 @ y - ode.K1 @ dy
    s1, c1 = np.sin(alpha * x[0]), np.cos(alpha * x[0])
    s2, c2 = np.sin(beta * x[1]), np.cos(beta * x[1])
    modal = r * np.array([c1 * s2, s1 * c2, s1 * s2])
    return direct, modal


@dataclass
class SolutionCheck:
    """
    Consistency report of a ModalSolution

    Attributes:
        bottom - max |traction amplitude| on the bottom surface
        top - max deviation from the prescribed top traction
        traction_jump - max traction amplitude jump over interfaces
        displacement_jump - max displacement amplitude jump, relative
    """

    bottom: float
    top: float
    traction_jump: float
    displacement_jump: float


def check_solution(solution, tol=AGREEMENT_TOLERANCE):
    """
    Boundary residuals and interface jumps of a ModalSolution

    Raises OracleException when boundary residuals exceed tol sigma0, traction
    jumps exceed tol sigma0 S or displacement jumps exceed tol relative to the
    largest displacement amplitude.
    """
    p = solution.problem
    z = p.interfaces
    bottom = np.max(np.abs(solution.state(z[0])[3:]))
    top = np.max(np.abs(solution.state(z[-1])[3:] - p.top_traction))

    traction_jump = displacement_jump = 0.0
    scale = np.max(np.abs(solution.displacement_amplitudes(z)))
    for k in range(1, p.n_layers):
        below = solution.state_in_layer(k - 1, z[k])
        above = solution.state_in_layer(k, z[k])
        traction_jump = max(traction_jump, np.max(np.abs(below[3:] - above[3:])))
        displacement_jump = max(
            displacement_jump, np.max(np.abs(below[:3] - above[:3])) / scale
        )

    report = SolutionCheck(
        float(bottom), float(top), float(traction_jump), float(displacement_jump)
    )
    sigma0, S = p.sigma0, p.slenderness
    if (
        report.bottom > tol * sigma0
        or report.top > tol * sigma0
        or report.traction_jump > tol * sigma0 * S
        or report.displacement_jump > tol
    ):
        raise OracleException("Reference solution failed its checks: {}".format(report))
    return report


def compare_backends(problem, z_values=None, spans=8, degree=8):
    """
    Largest normalized stress amplitude discrepancy between the backends

    Each Voigt component is compared relative to its largest magnitude.
    """
    if z_values is None:
        z_values = np.linspace(problem.interfaces[0], problem.interfaces[-1], 201)
    exact = solve_propagator(problem).amplitudes(z_values)
    approx = solve_spline(problem, spans, degree).amplitudes(z_values)
    scale = np.max(np.abs(exact), axis=0)
    scale[scale == 0] = 1.0
    return float(np.max(np.abs(exact - approx) / scale))
