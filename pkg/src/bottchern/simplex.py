"""Deterministic adaptive quadrature over the standard n-simplex.

The base rules are Grundmann-Moller cubatures written in barycentric
coordinates; the degree-(2s+1) rule contains the degree-(2s-1) rule's nodes,
so an embedded error estimate costs no extra evaluations.  Refinement is
edgewise (Freudenthal) subdivision into 2^n equal-volume children, driven by
a priority queue over leaf error contributions.  The integral is the
Lebesgue integral over the free coordinates {t_i >= 0, sum_{i>=1} t_i <= 1}
with t_0 eliminated; orientation dt_1 ^ ... ^ dt_n positive.

Everything is single-threaded and sequenced deterministically: identical
inputs give bit-identical results, and the leaf reduction is a compensated
sum in creation order.
"""
from __future__ import annotations

import heapq
import itertools
import math
from dataclasses import dataclass, field

import numpy as np

MAX_DIM = 5
MAX_RULE_DEGREE = 9
VERTEX_DEPTH_BONUS = 10


class QuadratureError(RuntimeError):
    """Non-finite integrand value or unusable configuration."""


@dataclass(frozen=True)
class SimplexPoint:
    """Barycentric point on the n-simplex; coordinates sum to 1."""
    n: int
    t: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.t, dtype=float)
        object.__setattr__(self, "t", t)
        if t.shape != (self.n + 1,):
            raise ValueError(f"expected {self.n + 1} barycentric coordinates")
        if np.any(t < 0) or abs(t.sum() - 1.0) > 1e-14:
            raise ValueError("barycentric coordinates must be >= 0 and sum to 1")


@dataclass(frozen=True)
class SubSimplex:
    """Sub-simplex given by its vertices (rows, barycentric in the root frame)."""
    vertices: np.ndarray
    depth: int = 0

    @property
    def n(self) -> int:
        return self.vertices.shape[0] - 1

    def volume_fraction(self) -> float:
        """n-volume relative to the root simplex."""
        free = self.vertices[:, 1:]
        return abs(float(np.linalg.det(free[1:] - free[0])))


@dataclass(frozen=True)
class QuadratureConfig:
    rel_tol: float = 1e-7
    abs_tol: float = 1e-13
    max_depth: int = 24
    rule_degree: int = 7
    max_evals: int = 30_000_000  # safety valve; hitting it means converged=False

    def __post_init__(self):
        if self.rel_tol <= 0 or self.abs_tol <= 0:
            raise ValueError("tolerances must be positive")
        if self.max_depth > 40:
            raise ValueError("max_depth must be <= 40")


@dataclass
class QuadratureResult:
    value: complex
    error_estimate: float
    evaluations: int
    converged: bool

    def to_json(self) -> dict:
        return {
            "value": [self.value.real, self.value.imag],
            "error": self.error_estimate,
            "evaluations": self.evaluations,
            "converged": self.converged,
        }


# ---------------------------------------------------------------------------
# Grundmann-Moller rules


def _compositions(total: int, parts: int):
    if parts == 1:
        yield (total,)
        return
    for head in range(total + 1):
        for rest in _compositions(total - head, parts - 1):
            yield (head,) + rest


def _gm_nodes_weights(n: int, s: int):
    """Nodes (barycentric), weights and layer index of the degree-(2s+1) rule."""
    d = 2 * s + 1
    nodes, weights, layers = [], [], []
    for i in range(s + 1):
        denom = d + n - 2 * i
        w = ((-1) ** i) * 2.0 ** (-2 * s) * denom ** d / (
            math.factorial(i) * math.factorial(d + n - i))
        for beta in _compositions(s - i, n + 1):
            nodes.append([(2 * b + 1) / denom for b in beta])
            weights.append(w)
            layers.append(i)
    return np.array(nodes), np.array(weights), np.array(layers)


def base_rule(n: int, degree: int) -> list[tuple[SimplexPoint, float]]:
    """Grundmann-Moller rule exact on polynomials of total degree <= degree."""
    _check_rule(n, degree)
    nodes, weights, _ = _gm_nodes_weights(n, (degree - 1) // 2)
    return [(SimplexPoint(n, t), float(w)) for t, w in zip(nodes, weights)]


def _check_rule(n: int, degree: int):
    if n < 1 or n > MAX_DIM:
        raise ValueError(f"dimension {n} unsupported (1 <= n <= {MAX_DIM})")
    if degree % 2 == 0 or degree < 3 or degree > MAX_RULE_DEGREE:
        raise ValueError(f"rule degree must be odd, 3 <= degree <= {MAX_RULE_DEGREE}")


_RULE_CACHE: dict = {}


def _rule_tables(n: int, degree: int):
    """(nodes, w_high, w_low): embedded pair sharing the high rule's nodes."""
    key = (n, degree)
    if key not in _RULE_CACHE:
        s = (degree - 1) // 2
        nodes, w_hi, layers = _gm_nodes_weights(n, s)
        _, w_lo_ref, _ = _gm_nodes_weights(n, s - 1)
        # layer i >= 1 of rule s is exactly rule s-1 (layer i-1), in the same
        # composition order, so the low weights align by position.
        w_lo = np.zeros_like(w_hi)
        w_lo[layers >= 1] = w_lo_ref
        _RULE_CACHE[key] = (nodes, w_hi, w_lo)
    return _RULE_CACHE[key]


# ---------------------------------------------------------------------------
# Edgewise (Freudenthal) subdivision


def _staircase_paths(a: int, b: int):
    for ups in itertools.combinations(range(a + b), a):
        seq = [(0, 0)]
        s = r = 0
        for step in range(a + b):
            if step in ups:
                s += 1
            else:
                r += 1
            seq.append((s, r))
        yield seq


_CHILD_CACHE: dict = {}


def _child_table(n: int) -> np.ndarray:
    """(2^n, n+1, n+1) tensor: child, child-vertex -> weights over parent vertices.

    Built once per dimension from the order-simplex picture: the doubled order
    simplex splits into integer-offset blocks, each a product of two order
    simplices, triangulated by staircase paths.  All children have volume
    2^-n of the parent and vertices at parent vertices or edge midpoints.
    """
    if n not in _CHILD_CACHE:
        children = []
        for j in range(n + 1):
            z = [1] * j + [0] * (n - j)
            for path in _staircase_paths(j, n - j):
                verts = []
                for (s, r) in path:
                    wv = [1] * s + [0] * (j - s) + [1] * r + [0] * (n - j - r)
                    u = [(zi + wi) / 2.0 for zi, wi in zip(z, wv)]
                    t = [1.0 - u[0]] + [u[i] - u[i + 1] for i in range(n - 1)] + [u[n - 1]]
                    verts.append(t)
                children.append(verts)
        _CHILD_CACHE[n] = np.array(children)
    return _CHILD_CACHE[n]


def subdivide(s: SubSimplex) -> list[SubSimplex]:
    """Edgewise subdivision into 2^n children partitioning the parent."""
    table = _child_table(s.n)
    return [SubSimplex(cw @ s.vertices, s.depth + 1) for cw in table]


# ---------------------------------------------------------------------------
# Adaptive driver


def _neumaier(values) -> float:
    total = 0.0
    comp = 0.0
    for v in values:
        t = total + v
        if abs(total) >= abs(v):
            comp += (total - t) + v
        else:
            comp += (v - t) + total
        total = t
    return total + comp


class _FuncAdapter:
    """Wraps a SimplexPoint -> complex callable into batch form."""

    def __init__(self, f, n):
        self.f = f
        self.n = n

    def eval_many(self, pts: np.ndarray) -> np.ndarray:
        return np.array([self.f(SimplexPoint(self.n, row)) for row in pts],
                        dtype=complex)


@dataclass(order=True)
class _Leaf:
    priority: float
    uid: int
    value: complex = field(compare=False)
    error: float = field(compare=False)
    verts: np.ndarray = field(compare=False)
    depth: int = field(compare=False)
    at_vertex: bool = field(compare=False)


def integrate(f, n: int, config: QuadratureConfig | None = None) -> QuadratureResult:
    """Adaptive integral of ``f`` over the standard n-simplex.

    ``f`` is either a callable on SimplexPoint or any object exposing
    ``eval_many(pts)`` mapping a (K, n+1) barycentric array to K complex
    values (the fast path; compiled integrands use it).  The integrand may
    blow up at the simplex vertices like distance^(1-n); leaves touching an
    original vertex are allowed ``VERTEX_DEPTH_BONUS`` extra levels.

    Non-convergence is reported through ``converged=False``, never silently.
    A non-finite integrand value raises QuadratureError naming the point.
    """
    config = config or QuadratureConfig()
    _check_rule(n, config.rule_degree)
    nodes, w_hi, w_lo = _rule_tables(n, config.rule_degree)
    evaluator = f if hasattr(f, "eval_many") else _FuncAdapter(f, n)

    evaluations = 0

    def eval_leaves(verts_list, depths):
        nonlocal evaluations
        pts = np.concatenate([nodes @ v for v in verts_list], axis=0)
        vals = evaluator.eval_many(pts)
        vals = np.asarray(vals, dtype=complex)
        evaluations += len(pts)
        if not np.all(np.isfinite(vals.view(float))):
            bad = int(np.flatnonzero(~np.isfinite(vals.view(float)))[0] // 2)
            raise QuadratureError(
                f"integrand returned a non-finite value at t = {pts[bad]}")
        k = len(nodes)
        out = []
        for i, depth in enumerate(depths):
            chunk = vals[i * k:(i + 1) * k]
            scale = 2.0 ** (-n * depth)
            hi = scale * complex(w_hi @ chunk)
            lo = scale * complex(w_lo @ chunk)
            out.append((hi, abs(hi - lo)))
        return out

    root = np.eye(n + 1)
    (hi, err), = eval_leaves([root], [0])
    uid = 0
    heap = [_Leaf(-err, uid, hi, err, root, 0, True)]
    frozen: list[_Leaf] = []
    total = hi
    total_err = err

    def done() -> bool:
        return total_err <= max(config.abs_tol, config.rel_tol * abs(total))

    while heap and not done() and evaluations < config.max_evals:
        # refine a deterministic batch of the worst leaves
        batch_size = max(1, min(256, len(heap) // 8))
        popped = []
        for _ in range(batch_size):
            if not heap:
                break
            leaf = heapq.heappop(heap)
            cap = config.max_depth + (VERTEX_DEPTH_BONUS if leaf.at_vertex else 0)
            if leaf.depth >= cap:
                frozen.append(leaf)
            else:
                popped.append(leaf)
        if not popped:
            continue  # the whole batch hit its depth cap; inspect the rest
        table = _child_table(n)
        children = []
        for leaf in popped:
            total -= leaf.value
            total_err -= leaf.error
            for cw in table:
                children.append((cw @ leaf.verts, leaf.depth + 1))
        results = eval_leaves([c[0] for c in children], [c[1] for c in children])
        for (verts, depth), (hi, err) in zip(children, results):
            uid += 1
            at_vertex = bool(np.any(verts == 1.0))
            heapq.heappush(heap, _Leaf(-err, uid, hi, err, verts, depth, at_vertex))
            total += hi
            total_err += err

    leaves = sorted(frozen + heap, key=lambda leaf: leaf.uid)
    value = complex(_neumaier(l.value.real for l in leaves),
                    _neumaier(l.value.imag for l in leaves))
    error = _neumaier(l.error for l in leaves)
    converged = error <= max(config.abs_tol, config.rel_tol * abs(value))
    return QuadratureResult(value, error, evaluations, converged)
