"""Kernel lane selection and the combinatorial tables both lanes share.

The compiled Cython lane is preferred when present; set BOTTCHERN_PURE=1 to
force the NumPy lane.  Both lanes implement identical contracts, and the
test suite cross-checks them; see benchmarks/bench_kernels.py for the
speed comparison.
"""
from __future__ import annotations

import functools
import itertools
import os

import numpy as np

from . import _kernels_py

if os.environ.get("BOTTCHERN_PURE"):
    _impl = _kernels_py
else:
    try:
        from . import _kernels as _impl  # type: ignore[no-redef]
    except ImportError:
        _impl = _kernels_py

KernelDefinitenessError = _kernels_py.KernelDefinitenessError


def backend() -> str:
    return _impl.BACKEND


def get_impl(name: str | None = None):
    """Kernel module by lane name ('cython', 'numpy' or None for the active one)."""
    if name is None:
        return _impl
    if name == "numpy":
        return _kernels_py
    if name == "cython":
        from . import _kernels  # raises ImportError if not built
        return _kernels
    raise ValueError(f"unknown kernel lane {name!r}")


def perm_sign(p) -> int:
    sign = 1
    seen = [False] * len(p)
    for i in range(len(p)):
        j = i
        while not seen[j]:
            seen[j] = True
            j = p[j]
            if j != i:
                sign = -sign
    return sign


@functools.lru_cache(maxsize=None)
def cyclic_class_table(m: int):
    """Representatives of the cyclic classes of S_m and their signatures.

    Traces of matrix products are invariant under cyclic rotation, and for odd
    m the rotation is even, so summing sgn(s) Tr(M_{s1}...M_{sm}) over S_m
    equals m times the sum over representatives with s(1) fixed.
    """
    perms, signs = [], []
    for rest in itertools.permutations(range(1, m)):
        p = (0,) + rest
        perms.append(p)
        signs.append(float(perm_sign(p)))
    return (np.array(perms, dtype=np.int64).reshape(len(perms), m),
            np.array(signs, dtype=np.float64))


def _wedge_coefficient(iis, m: int) -> float:
    """Coefficient of dt_1^...^dt_m in dt_{i_1}^...^dt_{i_m}, dt_0 = -sum dt_l."""
    total = 0.0
    choices = []
    for ij in iis:
        if ij == 0:
            choices.append([(-1.0, l) for l in range(1, m + 1)])
        else:
            choices.append([(1.0, ij)])
    for combo in itertools.product(*choices):
        labels = [l for _, l in combo]
        if len(set(labels)) != m:
            continue
        sign = 1.0
        for s, _ in combo:
            sign *= s
        total += sign * perm_sign([l - 1 for l in labels])
    return total


@functools.lru_cache(maxsize=None)
def walk_table(r: int):
    """Index walks (i_1..i_m) in {0..2r-1}^m with nonzero wedge coefficient.

    Only tuples that are permutations of {1..m} or carry a single 0 survive
    the dt_0 elimination; for r = 2 that is 24 of 64 tuples, for r = 3,
    720 of 7776.
    """
    m = 2 * r - 1
    walks, coefs = [], []
    for iis in itertools.product(range(2 * r), repeat=m):
        c = _wedge_coefficient(iis, m)
        if c != 0.0:
            walks.append(iis)
            coefs.append(c)
    return (np.array(walks, dtype=np.int64).reshape(len(walks), m),
            np.array(coefs, dtype=np.float64))


def odd_trace_many(A: np.ndarray, pts: np.ndarray, impl=None) -> np.ndarray:
    impl = impl or _impl
    m = A.shape[0] - 1
    perms, signs = cyclic_class_table(m)
    return impl.odd_trace_many(
        np.ascontiguousarray(A, dtype=complex), perms, signs,
        np.ascontiguousarray(pts, dtype=float))


def eq600_many(subs_num, cmats, subs_den, detsq, walks, wcoef, pts, impl=None):
    impl = impl or _impl
    return impl.eq600_many(
        np.ascontiguousarray(subs_num, dtype=np.int64),
        np.ascontiguousarray(cmats, dtype=complex),
        np.ascontiguousarray(subs_den, dtype=np.int64),
        np.ascontiguousarray(detsq, dtype=float),
        np.ascontiguousarray(walks, dtype=np.int64),
        np.ascontiguousarray(wcoef, dtype=float),
        np.ascontiguousarray(pts, dtype=float))


def pair_quadratic_many(Q, pts, impl=None) -> np.ndarray:
    impl = impl or _impl
    return impl.pair_quadratic_many(np.ascontiguousarray(Q, dtype=float),
                                    np.ascontiguousarray(pts, dtype=float))
