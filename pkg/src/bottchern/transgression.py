"""Group cochains from metric paths over the simplex.

A tuple (g_0..g_{2r-1}) of invertible matrices and a base hermitian form h
define the path h_t = sum_i t_i g_i h gbar_i^t.  The degree-r cochain is the
simplex integral of the odd trace form Tr(h_t^{-1} d_T h_t)^{2r-1} times
-(r-1)!/(2(2r-1)!); the Borel-style cochain is the same raw integral with
h = identity and no prefactor.

Free-coordinate convention (fixed here and mirrored by the Grassmannian
module): the simplex is parameterized by (t_1..t_{2r-1}) with t_0
eliminated, so the coefficient of dt_1^...^dt_m sums signed traces of
M_j = h_t^{-1}(A_j - A_0) over S_m.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .linalg import (as_cmatrix, cholesky, congruence, hadamard_bound,
                     is_hermitian)
from .simplex import QuadratureConfig, QuadratureResult, SimplexPoint, integrate

INVERTIBILITY_RTOL = 1e-12


@dataclass
class GroupTuple:
    """2r (or 2r+1 for cocycle tests) invertible matrices with a base metric.

    ``base_metric`` may be positive semidefinite (degenerate); then a
    regularization eps > 0 is added as eps * identity before the path is
    positive definite.
    """
    r: int
    N: int
    elements: list[np.ndarray]
    base_metric: np.ndarray | None = None
    regularization: float = 0.0

    def __post_init__(self):
        if len(self.elements) not in (2 * self.r, 2 * self.r + 1):
            raise ValueError(f"need 2r or 2r+1 elements, got {len(self.elements)}")
        self.elements = [as_cmatrix(g) for g in self.elements]
        for i, g in enumerate(self.elements):
            if g.shape != (self.N, self.N):
                raise ValueError(f"element {i} is {g.shape}, expected {(self.N,)*2}")
            if abs(np.linalg.det(g)) <= INVERTIBILITY_RTOL * hadamard_bound(g):
                raise ValueError(f"element {i} is numerically singular")
        if self.base_metric is None:
            self.base_metric = np.eye(self.N, dtype=complex)
        self.base_metric = as_cmatrix(self.base_metric)
        if not is_hermitian(self.base_metric):
            raise ValueError("base metric must be hermitian")
        if self.regularization < 0:
            raise ValueError("regularization must be >= 0")
        cholesky(self.effective_metric())  # raises DefinitenessError if unusable

    def effective_metric(self) -> np.ndarray:
        return self.base_metric + self.regularization * np.eye(self.N)


@dataclass
class MetricPath:
    """The path t -> sum t_i A_i with A_i = g_i (h + eps I) gbar_i^t."""
    r: int
    partials: np.ndarray  # (count, N, N), A_i per tuple element

    @classmethod
    def from_tuple(cls, tup: GroupTuple, elements: list[np.ndarray] | None = None):
        h = tup.effective_metric()
        gs = tup.elements if elements is None else elements
        return cls(tup.r, np.array([congruence(g, h) for g in gs]))

    def metric_at(self, t: SimplexPoint) -> np.ndarray:
        """h_t; raises DefinitenessError where the path degenerates."""
        if t.n + 1 != len(self.partials):
            raise ValueError(f"point has {t.n + 1} coordinates, path has "
                             f"{len(self.partials)} vertices")
        h = np.einsum("i,iab->ab", t.t, self.partials)
        cholesky(h)
        return h

    def free_partials(self) -> np.ndarray:
        """d h_t / d t_j in the free coordinates, j = 1..m: A_j - A_0."""
        return self.partials[1:] - self.partials[0]


class OddTraceIntegrand:
    """Batch evaluator of the odd trace coefficient along a metric path."""

    def __init__(self, path: MetricPath, impl=None):
        self.A = np.ascontiguousarray(path.partials)
        self.impl = impl

    def eval_many(self, pts: np.ndarray) -> np.ndarray:
        return kernels.odd_trace_many(self.A, pts, impl=self.impl)


def odd_trace_coeff(path: MetricPath, t: SimplexPoint, m: int) -> complex:
    """Coefficient of dt_1^...^dt_m of Tr(h_t^{-1} d_T h_t)^m at one point.

    Satisfies conj(value) = (-1)^(r-1) value: reversing each permutation in
    the S_m sum is itself a permutation of signature (-1)^(m(m-1)/2).
    """
    if m != len(path.partials) - 1:
        raise ValueError(f"m = {m} does not match the {len(path.partials)}-vertex path")
    if m % 2 != 1:
        raise ValueError("the odd trace form vanishes for even m")
    try:
        vals = kernels.odd_trace_many(path.partials, t.t[None, :])
    except kernels.KernelDefinitenessError:
        h = np.einsum("i,iab->ab", t.t, path.partials)
        cholesky(h)  # raises DefinitenessError carrying the failing pivot
        raise
    return complex(vals[0])


def chern_prefactor(r: int) -> float:
    return -math.factorial(r - 1) / (2.0 * math.factorial(2 * r - 1))


def _integrate_path(path: MetricPath, r: int,
                    config: QuadratureConfig | None) -> QuadratureResult:
    m = 2 * r - 1
    if len(path.partials) != m + 1:
        raise ValueError(f"need exactly {m + 1} path vertices for r = {r}")
    return integrate(OddTraceIntegrand(path), m, config)


def chern_cochain(tup: GroupTuple, config: QuadratureConfig | None = None) -> QuadratureResult:
    """The transgressed character cochain; lies in i^(r-1) R up to quadrature error."""
    if len(tup.elements) != 2 * tup.r:
        raise ValueError("chern_cochain needs exactly 2r elements")
    res = _integrate_path(MetricPath.from_tuple(tup), tup.r, config)
    pref = chern_prefactor(tup.r)
    return QuadratureResult(pref * res.value, abs(pref) * res.error_estimate,
                            res.evaluations, res.converged)


def borel_cochain(tup: GroupTuple, config: QuadratureConfig | None = None) -> QuadratureResult:
    """Raw integral of the odd trace form with base metric forced to identity.

    No normalizing constant is applied; this is the side-by-side companion of
    chern_cochain (on h = identity they differ by -2(2r-1)!/(r-1)! exactly).
    """
    if len(tup.elements) != 2 * tup.r:
        raise ValueError("borel_cochain needs exactly 2r elements")
    ident = GroupTuple(tup.r, tup.N, tup.elements)
    return _integrate_path(MetricPath.from_tuple(ident), tup.r, config)


@dataclass
class CocycleResult:
    value: complex
    error_sum: float
    converged: bool
    faces: list[QuadratureResult] = field(repr=False, default_factory=list)

    def __abs__(self) -> float:
        return abs(self.value)


def cocycle_defect(tup: GroupTuple, config: QuadratureConfig | None = None) -> CocycleResult:
    """Alternating sum of the cochain over the faces of a (2r+1)-tuple.

    Vanishes (up to quadrature error) because the cochain is a group cocycle;
    the accumulated per-face error estimates bound the expected magnitude.
    """
    if len(tup.elements) != 2 * tup.r + 1:
        raise ValueError("cocycle_defect needs exactly 2r+1 elements")
    total = 0j
    err = 0.0
    faces = []
    converged = True
    for k in range(2 * tup.r + 1):
        sub = GroupTuple(tup.r, tup.N,
                         [g for i, g in enumerate(tup.elements) if i != k],
                         tup.base_metric, tup.regularization)
        res = chern_cochain(sub, config)
        faces.append(res)
        total += (-1) ** k * res.value
        err += res.error_estimate
        converged = converged and res.converged
    return CocycleResult(total, err, converged, faces)
