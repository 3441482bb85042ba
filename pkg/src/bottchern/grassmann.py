"""The explicit minor-sum integrand attached to 2r vectors in C^r.

For a tuple (v_0 .. v_{2r-1}) the integrand is a ratio: the numerator sums,
over subsets I_j of size r-1 and indices i_j, products of paired minors
t_{I_j} conj(det(v_{I_j}, v_{i_j})) det(v_{I_j}, v_{i_{j+1}}) with the index
chain closed cyclically (i_{2r} = i_1), the denominator is
(sum_I t_I |det v_I|^2)^(2r-1).  This equals the odd trace coefficient of
the metric path built from the rank-one form v vbar^t (with v_i = g_i v),
which is what integrand_equivalence checks through an epsilon ladder.

Two numerator evaluators exist on purpose: `numerator_coeff` (tabulated
walks, kernel-backed) and `numerator_coeff_reference` (plain enumeration
with cofactor determinants and late wedge reduction).  The reference was
written first and the optimized path must reproduce it to 1e-12.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .dilog import CrossRatioConvention, cross_ratio
from .linalg import as_cvector, minor_det, subsets
from .simplex import QuadratureConfig, QuadratureResult, SimplexPoint, integrate
from .transgression import GroupTuple, MetricPath, chern_prefactor, odd_trace_coeff

GENERIC_DET_RTOL = 1e-10


@dataclass
class VectorTuple:
    """2r nonzero vectors in C^r."""
    r: int
    vectors: list[np.ndarray]

    def __post_init__(self):
        if len(self.vectors) != 2 * self.r:
            raise ValueError(f"need 2r = {2 * self.r} vectors")
        self.vectors = [as_cvector(v) for v in self.vectors]
        for i, v in enumerate(self.vectors):
            if v.shape[0] != self.r:
                raise ValueError(f"vector {i} has dim {v.shape[0]}, expected {self.r}")
            if np.linalg.norm(v) == 0.0:
                raise ValueError(f"vector {i} is zero")

    def min_det_ratio(self) -> float:
        """min over r-subsets of |det v_I| / (product of the norms in I)."""
        worst = math.inf
        for I in subsets(2 * self.r, self.r):
            cols = np.column_stack([self.vectors[i] for i in I])
            scale = float(np.prod(np.linalg.norm(cols, axis=0)))
            worst = min(worst, abs(np.linalg.det(cols)) / scale)
        return worst

    @property
    def generic(self) -> bool:
        return self.min_det_ratio() > GENERIC_DET_RTOL


def _eq600_tables(vt: VectorTuple):
    """Minor tables: (subs_num, cmats, subs_den, detsq) for the kernel."""
    r = vt.r
    twor = 2 * r
    subs_num = np.array(subsets(twor, r - 1), dtype=np.int64).reshape(-1, r - 1)
    cmats = np.empty((subs_num.shape[0], twor, twor), dtype=complex)
    for si, I in enumerate(subs_num):
        dets = np.array([minor_det(vt.vectors, tuple(I), a) for a in range(twor)])
        cmats[si] = np.outer(dets.conj(), dets)
    subs_den = np.array(subsets(twor, r), dtype=np.int64)
    detsq = np.array([abs(np.linalg.det(np.column_stack([vt.vectors[i] for i in I]))) ** 2
                      for I in subs_den])
    return subs_num, cmats, subs_den, detsq


def denominator(vt: VectorTuple, t: SimplexPoint) -> float:
    """sum_{|I|=r} t_I |det v_I|^2; nonnegative, zero at the vertices."""
    _, _, subs_den, detsq = _eq600_tables(vt)
    return float(np.prod(t.t[subs_den], axis=1) @ detsq)


def numerator_coeff(vt: VectorTuple, t: SimplexPoint) -> complex:
    """Coefficient of dt_1^...^dt_{2r-1} of the minor-sum numerator."""
    subs_num, cmats, subs_den, detsq = _eq600_tables(vt)
    walks, wcoef = kernels.walk_table(vt.r)
    num, _ = kernels.eq600_many(subs_num, cmats, subs_den, detsq, walks, wcoef,
                                t.t[None, :])
    return complex(num[0])


# ---------------------------------------------------------------------------
# Reference enumerator (independent path: cofactor dets, late wedge reduction)


def _det_cofactor(cols: list[list[complex]]) -> complex:
    n = len(cols)
    if n == 1:
        return cols[0][0]
    total = 0j
    for i in range(n):
        if cols[0][i] == 0:
            continue
        minor = [[c[j] for j in range(n) if j != i] for c in cols[1:]]
        total += (-1) ** i * cols[0][i] * _det_cofactor(minor)
    return total


def _wedge_reduce(iis, m: int) -> float:
    """dt_0-elimination and antisymmetrization of dt_{i_1}^...^dt_{i_m}."""
    total = 0.0
    choices = [[(-1.0, l) for l in range(1, m + 1)] if ij == 0 else [(1.0, ij)]
               for ij in iis]
    for combo in itertools.product(*choices):
        labels = [l for _, l in combo]
        if len(set(labels)) != m:
            continue
        sign = 1.0
        for s, _ in combo:
            sign *= s
        total += sign * kernels.perm_sign([l - 1 for l in labels])
    return total


def numerator_coeff_reference(vt: VectorTuple, t: SimplexPoint,
                              full_subset_loop: bool | None = None) -> complex:
    """Brute-force numerator evaluation, free of the walk-table machinery.

    For r = 2 the double loop over all (I_1..I_m) x (i_1..i_m) runs in full;
    for r = 3 that loop has ~6e9 terms, so the subset sums are distributed
    per slot (plain distributivity, no wedge precomputation) while keeping
    the full i-loop and the late wedge reduction.
    """
    r = vt.r
    m = 2 * r - 1
    twor = 2 * r
    if full_subset_loop is None:
        full_subset_loop = r <= 2
    vcols = [[complex(x) for x in v] for v in vt.vectors]
    subs = subsets(twor, r - 1)
    tvals = [float(x) for x in t.t]

    # minor values det(v_I, v_a), cached but evaluated by cofactor expansion
    dets = {}
    for I in subs:
        for a in range(twor):
            dets[(I, a)] = _det_cofactor([vcols[i] for i in I] + [vcols[a]])
    tI = {I: math.prod((tvals[i] for i in I), start=1.0) for I in subs}

    total = 0j
    if full_subset_loop:
        for Is in itertools.product(subs, repeat=m):
            for iis in itertools.product(range(twor), repeat=m):
                w = _wedge_reduce(iis, m)
                if w == 0.0:
                    continue
                coeff = complex(w)
                for j in range(m):
                    coeff *= (tI[Is[j]] * dets[(Is[j], iis[j])].conjugate()
                              * dets[(Is[j], iis[(j + 1) % m])])
                total += coeff
    else:
        pair = {(a, b): sum(tI[I] * dets[(I, a)].conjugate() * dets[(I, b)]
                            for I in subs)
                for a in range(twor) for b in range(twor)}
        for iis in itertools.product(range(twor), repeat=m):
            w = _wedge_reduce(iis, m)
            if w == 0.0:
                continue
            coeff = complex(w)
            for j in range(m):
                coeff *= pair[(iis[j], iis[(j + 1) % m])]
            total += coeff
    return total


# ---------------------------------------------------------------------------
# Integrals


class GrassmannIntegrand:
    """Batch evaluator of numerator/denominator^(2r-1)."""

    def __init__(self, vt: VectorTuple, impl=None):
        self.m = 2 * vt.r - 1
        self.tables = _eq600_tables(vt)
        self.walks, self.wcoef = kernels.walk_table(vt.r)
        self.impl = impl

    def eval_many(self, pts: np.ndarray) -> np.ndarray:
        subs_num, cmats, subs_den, detsq = self.tables
        num, den = kernels.eq600_many(subs_num, cmats, subs_den, detsq,
                                      self.walks, self.wcoef, pts, impl=self.impl)
        return num / den ** self.m


def grassmann_cochain(vt: VectorTuple, config: QuadratureConfig | None = None) -> QuadratureResult:
    """Simplex integral of the minor-sum integrand times -(r-1)!/(2(2r-1)!).

    The integrand blows up like distance^(2-2r) at the vertices but stays
    integrable; the adaptive vertex refinement of the quadrature handles it.
    """
    res = integrate(GrassmannIntegrand(vt), 2 * vt.r - 1, config)
    pref = chern_prefactor(vt.r)
    return QuadratureResult(pref * res.value, abs(pref) * res.error_estimate,
                            res.evaluations, res.converged)


def f_invariant(vectors) -> float:
    """Im(det(v0,v1) det(v2,v3) conj(det(v0,v3)) conj(det(v1,v2))).

    Antisymmetric under all 24 permutations of the four vectors.
    """
    vs = [as_cvector(v) for v in vectors]
    if len(vs) != 4 or any(v.shape[0] != 2 for v in vs):
        raise ValueError("f_invariant needs four vectors in C^2")

    def d2(a, b):
        return a[0] * b[1] - a[1] * b[0]

    return float((d2(vs[0], vs[1]) * d2(vs[2], vs[3])
                  * np.conj(d2(vs[0], vs[3])) * np.conj(d2(vs[1], vs[2]))).imag)


class PairQuadraticIntegrand:
    """Batch evaluator of 1 / (sum_{i != j} t_i t_j |det(v_i, v_j)|^2)^2."""

    def __init__(self, vectors, impl=None):
        vs = [as_cvector(v) for v in vectors]
        Q = np.zeros((4, 4))
        for i in range(4):
            for j in range(4):
                if i != j:
                    Q[i, j] = abs(vs[i][0] * vs[j][1] - vs[i][1] * vs[j][0]) ** 2
        self.Q = Q
        self.impl = impl

    def eval_many(self, pts: np.ndarray) -> np.ndarray:
        q = kernels.pair_quadratic_many(self.Q, pts, impl=self.impl)
        return (1.0 / q ** 2).astype(complex)


def dilog_presentation(vectors, config: QuadratureConfig | None = None) -> QuadratureResult:
    """12 i f(v) times the simplex-3 integral of the inverse pair form squared.

    The sum over i != j runs over ordered pairs exactly as the formula is
    stated; the empirically recorded constant of the acceptance campaign
    absorbs the normalization (see `thm46_constant` in the CLI campaigns).
    """
    f = f_invariant(vectors)
    res = integrate(PairQuadraticIntegrand(vectors), 3, config)
    return QuadratureResult(12j * f * res.value, 12 * abs(f) * res.error_estimate,
                            res.evaluations, res.converged)


# ---------------------------------------------------------------------------
# Pointwise equivalence with the metric-path integrand


def extrapolate_to_zero(xs, vals) -> complex:
    """Neville polynomial extrapolation of (xs, vals) to x = 0."""
    tab = [complex(v) for v in vals]
    xs = [float(x) for x in xs]
    n = len(tab)
    for k in range(1, n):
        for i in range(n - 1, k - 1, -1):
            tab[i] = tab[i] + (tab[i] - tab[i - 1]) * xs[i] / (xs[i - k] - xs[i])
    return tab[-1]


@dataclass
class EquivalenceRow:
    eps: float
    path_value: complex
    rel_difference: float


@dataclass
class EquivalenceReport:
    target: complex                  # numerator/denominator^(2r-1) at t
    rows: list[EquivalenceRow]
    extrapolated: complex
    extrapolated_rel_difference: float

    def to_json(self) -> dict:
        return {
            "target": [self.target.real, self.target.imag],
            "ladder": [{"eps": r.eps,
                        "value": [r.path_value.real, r.path_value.imag],
                        "rel_difference": r.rel_difference} for r in self.rows],
            "extrapolated": [self.extrapolated.real, self.extrapolated.imag],
            "extrapolated_rel_difference": self.extrapolated_rel_difference,
        }


def _completion_basis(v: np.ndarray) -> np.ndarray:
    """Unitary basis with first column parallel to v (deterministic)."""
    r = v.shape[0]
    cols = [v]
    for k in range(r):
        e = np.zeros(r, dtype=complex)
        e[k] = 1.0
        cols.append(e)
    q, _ = np.linalg.qr(np.column_stack(cols))
    return q[:, :r]


def group_elements_for(vt: VectorTuple, v: np.ndarray | None = None):
    """Invertible g_i with g_i v = v_i, built from deterministic completions."""
    r = vt.r
    if v is None:
        v = np.ones(r, dtype=complex) / math.sqrt(r)
    v = as_cvector(v)
    base = _completion_basis(v)
    base_inv = np.linalg.inv(base * np.linalg.norm(v))
    gs = []
    for vi in vt.vectors:
        target = _completion_basis(vi) * np.linalg.norm(vi)
        gs.append(target @ base_inv)
    return v, gs


def integrand_equivalence(vt: VectorTuple, t: SimplexPoint, eps_ladder,
                          v: np.ndarray | None = None,
                          gs: list[np.ndarray] | None = None) -> EquivalenceReport:
    """Compare the regularized odd trace coefficient against the minor ratio.

    The metric path uses h = v vbar^t + eps I with group elements satisfying
    g_i v = v_i (constructed here when not supplied); the ladder values
    Richardson-extrapolate to the minor-sum integrand value at t.
    """
    eps_ladder = sorted((float(e) for e in eps_ladder), reverse=True)
    if not eps_ladder or eps_ladder[-1] <= 0:
        raise ValueError("need a decreasing ladder of positive eps values")
    r = vt.r
    m = 2 * r - 1
    if gs is None:
        v, gs = group_elements_for(vt, v)
    elif v is None:
        raise ValueError("explicit group elements require the base vector v")
    num = numerator_coeff(vt, t)
    den = denominator(vt, t)
    target = num / den ** m

    rows = []
    vals = []
    scale = max(abs(target), 1e-300)
    for eps in eps_ladder:
        tup = GroupTuple(r, r, gs, np.outer(v, v.conj()), regularization=eps)
        val = odd_trace_coeff(MetricPath.from_tuple(tup), t, m)
        vals.append(val)
        rows.append(EquivalenceRow(eps, val, abs(val - target) / scale))
    extr = extrapolate_to_zero(eps_ladder, vals)
    return EquivalenceReport(target, rows, extr, abs(extr - target) / scale)
