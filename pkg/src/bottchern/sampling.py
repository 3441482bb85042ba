"""Seeded random inputs for campaigns and tests.

Entries are drawn uniformly on the unit disc and rejection-filtered by a
minor-determinant threshold, which keeps quadrature error from blowing up
on near-degenerate configurations.  The hard genericity floor of
VectorTuple is far looser (1e-10); the default here is a conditioning
choice, not a correctness one.
"""
from __future__ import annotations

import math

import numpy as np

from .grassmann import VectorTuple
from .linalg import hadamard_bound

DEFAULT_MIN_DET = 0.05


def disc_uniform(rng: np.random.Generator, shape) -> np.ndarray:
    """Complex entries uniform on the unit disc."""
    radius = np.sqrt(rng.uniform(0.0, 1.0, size=shape))
    angle = rng.uniform(0.0, 2.0 * math.pi, size=shape)
    return radius * np.exp(1j * angle)


def random_gl(N: int, rng: np.random.Generator,
              min_det: float = DEFAULT_MIN_DET) -> np.ndarray:
    """Invertible matrix with disc-uniform entries, well away from singular."""
    while True:
        g = disc_uniform(rng, (N, N))
        if abs(np.linalg.det(g)) > min_det * max(hadamard_bound(g), 1e-30):
            return g


def random_vector_tuple(r: int, rng: np.random.Generator,
                        min_det: float = DEFAULT_MIN_DET) -> VectorTuple:
    """Generic tuple of 2r disc-uniform vectors in C^r."""
    while True:
        vt = VectorTuple(r, [disc_uniform(rng, (r,)) for _ in range(2 * r)])
        if vt.min_det_ratio() > min_det:
            return vt


def random_quadruple_c2(rng: np.random.Generator,
                        min_det: float = DEFAULT_MIN_DET) -> list[np.ndarray]:
    return random_vector_tuple(2, rng, min_det).vectors


def interior_point(rng: np.random.Generator, n: int, margin: float = 0.08) -> np.ndarray:
    """Barycentric point bounded away from the simplex boundary."""
    t = margin + rng.dirichlet(np.ones(n + 1))
    return t / t.sum()


def tuple_for_cross_ratio(z: complex) -> list[np.ndarray]:
    """(e1, e2, e1+e2, e1 + z e2): evaluates to 1/z under the base convention."""
    return [np.array([1, 0], dtype=complex), np.array([0, 1], dtype=complex),
            np.array([1, 1], dtype=complex), np.array([1, z], dtype=complex)]
