"""Dilogarithm, Bloch-Wigner function, and the projective cross-ratio.

These are the independent oracle for the Grassmannian-integral identities:
they are computed from series and functional equations only, never through
the quadrature machinery they are used to check.

li2 uses the direct power series for |z| <= 1/2, the inversion and
reflection equations to leave the annulus, and the Bernoulli series in
w = -log(1-z) on the remaining ring (|w| < 3.4 there, well inside its 2*pi
radius).  Branch cut on [1, oo): on-cut inputs take the upper-side limit.
"""
from __future__ import annotations

import cmath
import math
from enum import Enum
from fractions import Fraction

import numpy as np

from .linalg import as_cvector

_PI = math.pi


class DegenerateConfigurationError(ValueError):
    """Cross-ratio denominator vanished: the four points are not in general position."""


def _bernoulli_log_coeffs(kmax: int) -> list[float]:
    bern = [Fraction(1)]
    for n in range(1, kmax + 1):
        acc = Fraction(0)
        for j in range(n):
            acc += math.comb(n + 1, j) * bern[j]
        bern.append(-acc / (n + 1))
    return [float(b) / (math.factorial(k) * (k + 1)) for k, b in enumerate(bern)]


_LOG_COEF = _bernoulli_log_coeffs(64)


def _one_minus(z: complex) -> complex:
    # keeps the sign of the imaginary zero, so cut-side limits stay consistent
    return complex(1.0 - z.real, -z.imag)


def _li2_series(z: complex) -> complex:
    total = 0j
    term = z
    for k in range(1, 400):
        add = term / (k * k)
        total += add
        if abs(add) <= 1e-17 * abs(total):
            break
        term *= z
    return total


def _li2_log_series(w: complex) -> complex:
    total = 0j
    wp = w
    for c in _LOG_COEF:
        if c != 0.0:
            total += c * wp
        wp *= w
    return total


def li2(z) -> complex:
    """Principal-branch dilogarithm, cut along [1, oo), upper-side on the cut."""
    z = complex(z)
    if z.imag == 0.0:
        z = complex(z.real, 0.0)
    if z == 0:
        return 0j
    if z == 1:
        return complex(_PI * _PI / 6, 0.0)
    az = abs(z)
    if az <= 0.5:
        return _li2_series(z)
    if az >= 2.0:
        lz = cmath.log(-z)
        return -li2(1.0 / z) - _PI * _PI / 6 - 0.5 * lz * lz
    omz = _one_minus(z)
    if abs(omz) <= 0.5:
        return _PI * _PI / 6 - cmath.log(z) * cmath.log(omz) - _li2_series(omz)
    return _li2_log_series(-cmath.log(omz))


def bloch_wigner(z) -> float:
    """D(z) = Im li2(z) + arg(1-z) log|z|; vanishes identically on the real line."""
    z = complex(z)
    if z.imag == 0.0:
        return 0.0
    return li2(z).imag + cmath.phase(_one_minus(z)) * math.log(abs(z))


class CrossRatioConvention(Enum):
    """The six anharmonic-group readings of the cross-ratio."""
    IDENTITY = "identity"
    INVERSE = "inverse"
    ONE_MINUS = "one-minus"
    INV_ONE_MINUS = "inv-one-minus"
    RATIO = "ratio"
    RATIO_INVERSE = "ratio-inverse"

    def apply(self, rho: complex) -> complex:
        if self is CrossRatioConvention.IDENTITY:
            return rho
        if self is CrossRatioConvention.INVERSE:
            return 1.0 / rho
        if self is CrossRatioConvention.ONE_MINUS:
            return 1.0 - rho
        if self is CrossRatioConvention.INV_ONE_MINUS:
            return 1.0 / (1.0 - rho)
        if self is CrossRatioConvention.RATIO:
            return (rho - 1.0) / rho
        return rho / (rho - 1.0)


def _det2(a: np.ndarray, b: np.ndarray) -> complex:
    return complex(a[0] * b[1] - a[1] * b[0])


def cross_ratio(vectors, conv: CrossRatioConvention = CrossRatioConvention.IDENTITY) -> complex:
    """Cross-ratio of the four points of P^1 represented by vectors in C^2.

    The base value is det(v0,v2) det(v1,v3) / (det(v0,v3) det(v1,v2));
    ``conv`` composes with one of the six anharmonic substitutions.  The
    value is invariant under per-vector scaling and under a global GL_2
    change of basis.
    """
    vs = [as_cvector(v) for v in vectors]
    if len(vs) != 4 or any(v.shape[0] != 2 for v in vs):
        raise ValueError("cross_ratio needs four vectors in C^2")
    num = _det2(vs[0], vs[2]) * _det2(vs[1], vs[3])
    den = _det2(vs[0], vs[3]) * _det2(vs[1], vs[2])
    scale = max(np.linalg.norm(v) for v in vs) ** 4
    if abs(den) <= 1e-14 * scale:
        raise DegenerateConfigurationError(
            "cross_ratio: denominator determinant vanishes")
    rho = num / den
    if conv is not CrossRatioConvention.IDENTITY and (
            abs(num) <= 1e-14 * scale or abs(rho - 1.0) <= 1e-14):
        raise DegenerateConfigurationError(
            f"cross_ratio: value {rho} degenerate for convention {conv.value}")
    return conv.apply(rho)
