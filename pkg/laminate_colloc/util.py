#!/usr/bin/python3

import os
import functools

import numpy as np
from numpy.polynomial import legendre


# Voigt ordering used everywhere: 11, 22, 33, 23, 13, 12
VOIGT = ((0, 0), (1, 1), (2, 2), (1, 2), (0, 2), (0, 1))
VOIGT_LABELS = ("s11", "s22", "s33", "s23", "s13", "s12")


@functools.lru_cache(maxsize=None)
def _gauss_legendre(n):
    x, w = legendre.leggauss(n)
    x.flags.writeable = False
    w.flags.writeable = False
    return x, w


def gauss_legendre(n):
    """
    Gauss-Legendre nodes and weights on [-1, 1]

    Exact for polynomials up to degree 2n - 1

    Arguments:
        n - number of points (positive integer)
    """
    assert n > 0, "n must be positive"
    return _gauss_legendre(n)


@functools.lru_cache(maxsize=None)
def _integration_matrix(n):
    x, _ = _gauss_legendre(n)
    lagrange = np.linalg.inv(legendre.legvander(x, n - 1))
    antiderivative = legendre.legint(lagrange, lbnd=-1, axis=0)
    Q = legendre.legval(x, antiderivative).T
    Q.flags.writeable = False
    return Q


def integration_matrix(n):
    """
    Partial integrals of the Lagrange basis on Gauss-Legendre nodes

    Q[q, l] = integral from -1 to x_q of the l-th Lagrange polynomial
    built on the n nodes, so `Q @ f(x)` gives the running integral of f
    at every node, exact for polynomials up to degree n - 1.

    Arguments:
        n - number of Gauss-Legendre points
    """
    assert n > 0, "n must be positive"
    return _integration_matrix(n)


def map_to_interval(nodes, a, b):
    """
    Map reference nodes on [-1, 1] to [a, b], return nodes and half length
    """
    half = 0.5 * (b - a)
    return 0.5 * (a + b) + half * nodes, half


def relative_max_error(reference, approx):
    """
    max|reference - approx| / max|reference|

    Arguments:
        reference - array of reference values
        approx - array of approximated values (same shape)
    """
    reference = np.asarray(reference, dtype=float)
    approx = np.asarray(approx, dtype=float)
    scale = np.max(np.abs(reference))
    if scale == 0.0:
        return float(np.max(np.abs(approx)))
    return float(np.max(np.abs(reference - approx)) / scale)


def round_sig(x, digits=3):
    """
    Round x to `digits` significant figures
    """
    if x == 0 or not np.isfinite(x):
        return x
    return float("{:.{}g}".format(x, digits))


def atomic_write_text(path, text):
    """
    Write text next to `path` first, then move it into place
    """
    tmp = "{}.tmp".format(path)
    with open(tmp, "w", encoding="utf-8", newline="") as f:
        f.write(text)
        f.flush()
        os.fsync(f.fileno())
    os.replace(tmp, path)


def sin_factor(x, L):
    """
    sin(pi x / L), the in-plane shape of the benchmark load
    """
    return np.sin(np.pi * x / L)
