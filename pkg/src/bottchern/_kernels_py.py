"""NumPy implementations of the hot integrand kernels.

Same contracts as the compiled lane in ``_kernels.pyx``; vectorized over the
quadrature-node axis instead of per-node C loops.
"""
from __future__ import annotations

import numpy as np

BACKEND = "numpy"


class KernelDefinitenessError(ArithmeticError):
    """Metric not positive definite at an evaluation point."""

    def __init__(self, node_index: int):
        super().__init__(f"metric not positive definite at node {node_index}")
        self.node_index = node_index


def _which_not_pd(h: np.ndarray) -> int:
    for idx in range(h.shape[0]):
        try:
            np.linalg.cholesky(h[idx])
        except np.linalg.LinAlgError:
            return idx
    return 0


def odd_trace_many(A: np.ndarray, perms: np.ndarray, signs: np.ndarray,
                   pts: np.ndarray) -> np.ndarray:
    """Odd-trace coefficients at many barycentric points.

    A: (2r, N, N) constant coordinate partials of the metric path;
    perms/signs: cyclic-class representatives of S_m (first entry 0) and
    their signatures; pts: (K, 2r).  Returns (K,) complex values of
    m * sum_reps sign * Tr(M_0 M_{p1} ... ), with M_j = h_t^{-1}(A_{j+1}-A_0).
    """
    m = A.shape[0] - 1
    h = np.einsum("ki,iab->kab", pts, A)
    try:
        np.linalg.cholesky(h)
    except np.linalg.LinAlgError:
        raise KernelDefinitenessError(_which_not_pd(h)) from None
    B = A[1:] - A[0]
    M = np.linalg.solve(h[:, None], B[None, :, :, :])
    if m == 1:
        return np.trace(M[:, 0], axis1=1, axis2=2)
    total = np.zeros(pts.shape[0], dtype=complex)
    for p, s in zip(perms, signs):
        prod = M[:, p[0]]
        for idx in p[1:]:
            prod = prod @ M[:, idx]
        total += s * np.trace(prod, axis1=1, axis2=2)
    return m * total


def eq600_many(subs_num: np.ndarray, cmats: np.ndarray, subs_den: np.ndarray,
               detsq: np.ndarray, walks: np.ndarray, wcoef: np.ndarray,
               pts: np.ndarray):
    """Numerator coefficient and denominator of the minor-sum integrand.

    subs_num: (n1, r-1) index subsets with cmats (n1, 2r, 2r) pair-minor
    products; subs_den: (n2, r) with detsq (n2,); walks: (W, m) closed index
    walks with wedge coefficients wcoef.  Returns (num (K,), den (K,)).
    """
    k = pts.shape[0]
    m = walks.shape[1]
    if subs_num.shape[1] == 0:
        t_num = np.ones((k, cmats.shape[0]))
    else:
        t_num = np.prod(pts[:, subs_num], axis=2)
    S = np.einsum("kn,nab->kab", t_num, cmats)
    twor = S.shape[1]
    flat = S.reshape(k, twor * twor)
    acc = flat[:, walks[:, 0] * twor + walks[:, 1 % m]]
    for j in range(1, m):
        acc = acc * flat[:, walks[:, j] * twor + walks[:, (j + 1) % m]]
    num = acc @ wcoef
    den = np.prod(pts[:, subs_den], axis=2) @ detsq
    return num, den


def pair_quadratic_many(Q: np.ndarray, pts: np.ndarray) -> np.ndarray:
    """t^T Q t at many points; Q is the symmetric pair-minor magnitude matrix."""
    return np.einsum("ki,ij,kj->k", pts, Q, pts)
