"""Dense complex linear algebra shared by the numeric modules.

Matrices and vectors are plain ``numpy`` arrays of complex128; helpers here
add the validation, the hermitian congruence, determinants of column minors,
and a Cholesky solve that reports the failing pivot on loss of positive
definiteness (the signal callers use to detect degenerate metrics).
"""
from __future__ import annotations

import itertools
import math

import numpy as np

HERMITIAN_RTOL = 1e-12
PIVOT_RTOL = 1e-14


class DimensionError(ValueError):
    """Shapes incompatible with the requested operation."""


class DefinitenessError(ArithmeticError):
    """Cholesky pivot failure; ``pivot`` is the index of the failing pivot."""

    def __init__(self, pivot: int, value: float):
        super().__init__(f"matrix not positive definite: pivot {pivot} = {value:.3e}")
        self.pivot = pivot
        self.value = value


def as_cmatrix(a) -> np.ndarray:
    """Coerce to a finite 2-d complex128 array."""
    m = np.asarray(a, dtype=complex)
    if m.ndim != 2 or m.shape[0] < 1 or m.shape[1] < 1:
        raise DimensionError(f"expected a matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m.view(float))):
        raise ValueError("matrix entries must be finite")
    return m


def as_cvector(v) -> np.ndarray:
    m = np.asarray(v, dtype=complex)
    if m.ndim != 1 or m.shape[0] < 1:
        raise DimensionError(f"expected a vector, got shape {m.shape}")
    if not np.all(np.isfinite(m.view(float))):
        raise ValueError("vector entries must be finite")
    return m


def is_hermitian(a: np.ndarray, rtol: float = HERMITIAN_RTOL) -> bool:
    scale = np.max(np.abs(a)) or 1.0
    return bool(np.max(np.abs(a - a.conj().T)) <= rtol * scale)


def det(m) -> complex:
    """Determinant by pivoted elimination (LAPACK LU under the hood)."""
    m = as_cmatrix(m)
    if m.shape[0] != m.shape[1]:
        raise DimensionError(f"det needs a square matrix, got {m.shape}")
    return complex(np.linalg.det(m))


def minor_det(vectors, subset, extra: int) -> complex:
    """det of the r x r matrix with columns (v_i for i in subset, v_extra).

    Subset members are taken in ascending order. A repeated column
    (``extra`` in ``subset``) gives exactly 0.
    """
    subset = tuple(subset)
    if extra in subset:
        return 0j
    r = len(subset) + 1
    cols = [as_cvector(vectors[i]) for i in subset] + [as_cvector(vectors[extra])]
    if any(c.shape[0] != r for c in cols):
        raise DimensionError(f"minor_det needs vectors of dim {r}")
    return det(np.column_stack(cols))


def congruence(g, h) -> np.ndarray:
    """g h gbar^t, the action of a basis change on a hermitian form."""
    g = as_cmatrix(g)
    h = as_cmatrix(h)
    if g.shape[0] != g.shape[1] or g.shape != h.shape:
        raise DimensionError(f"congruence needs square matrices of equal size, "
                             f"got {g.shape} and {h.shape}")
    if not is_hermitian(h):
        raise ValueError("congruence: h is not hermitian")
    return g @ h @ g.conj().T


def cholesky(h, pivot_rtol: float = PIVOT_RTOL) -> np.ndarray:
    """Lower Cholesky factor of a hermitian positive definite matrix.

    Raises DefinitenessError with the failing pivot index when a pivot drops
    below ``pivot_rtol * max|h|``; that threshold separates genuine rank
    deficiency from round-off.
    """
    h = as_cmatrix(h)
    n = h.shape[0]
    if h.shape[1] != n:
        raise DimensionError("cholesky needs a square matrix")
    scale = float(np.max(np.abs(h))) or 1.0
    L = np.zeros_like(h)
    for k in range(n):
        d = (h[k, k] - np.vdot(L[k, :k], L[k, :k])).real
        if d <= pivot_rtol * scale:
            raise DefinitenessError(k, d)
        L[k, k] = math.sqrt(d)
        if k + 1 < n:
            L[k + 1:, k] = (h[k + 1:, k] - L[k + 1:, :k] @ L[k, :k].conj()) / L[k, k]
    return L


def solve(h, b) -> np.ndarray:
    """Solve h x = b for hermitian positive definite h via Cholesky.

    Non-positive-definite input raises DefinitenessError carrying the pivot
    index; callers treat that as the degenerate-metric signal.
    """
    h = as_cmatrix(h)
    b = np.asarray(b, dtype=complex)
    if b.shape[0] != h.shape[0]:
        raise DimensionError(f"solve: rhs has {b.shape[0]} rows, h is {h.shape}")
    if not is_hermitian(h):
        raise ValueError("solve: h is not hermitian")
    L = cholesky(h)
    # forward then back substitution
    y = np.zeros_like(b)
    for k in range(h.shape[0]):
        y[k] = (b[k] - L[k, :k] @ y[:k]) / L[k, k]
    x = np.zeros_like(b)
    for k in range(h.shape[0] - 1, -1, -1):
        x[k] = (y[k] - L[k + 1:, k].conj() @ x[k + 1:]) / L[k, k]
    return x


def subsets(n: int, s: int) -> list[tuple[int, ...]]:
    """All C(n, s) sorted index subsets of {0..n-1}, lexicographic."""
    if s < 0 or s > n:
        raise ValueError(f"subsets: need 0 <= s <= n, got n={n} s={s}")
    return list(itertools.combinations(range(n), s))


def hadamard_bound(m: np.ndarray) -> float:
    """Product of column norms; scale reference for determinant thresholds."""
    return float(np.prod(np.linalg.norm(m, axis=0)))
