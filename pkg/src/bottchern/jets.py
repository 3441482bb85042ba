"""Truncated multivariate jets for differentiating metric families exactly.

Variables are ordered z_0..z_{m-1}, zbar_0..zbar_{m-1}, tau_0..tau_{k-1};
z and zbar are treated as independent complex directions (Wirtinger
calculus), which is exact for the analytic metric families used here.
Coefficients are numpy arrays, shape () for scalars or (N, N) for matrix
jets; a jet built at a point stores the Taylor coefficients, so the mixed
partial for exponent alpha is coeffs[alpha] times alpha!.

A 4th-order central finite-difference oracle (`fd_metric_jet`) produces the
same structure numerically; the two must agree before any residual test is
trusted.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np


def zero_exp(nvars: int) -> tuple:
    return (0,) * nvars


class Jet:
    """Polynomial in the scene variables, truncated at total degree `order`."""

    __slots__ = ("nvars", "order", "coeffs")

    def __init__(self, nvars: int, order: int, coeffs: dict | None = None):
        self.nvars = nvars
        self.order = order
        self.coeffs = coeffs if coeffs is not None else {}

    @classmethod
    def constant(cls, value, nvars: int, order: int) -> "Jet":
        value = np.asarray(value, dtype=complex)
        return cls(nvars, order, {zero_exp(nvars): value})

    @classmethod
    def variable(cls, index: int, value: complex, nvars: int, order: int) -> "Jet":
        e = [0] * nvars
        e[index] = 1
        return cls(nvars, order, {
            zero_exp(nvars): np.asarray(value, dtype=complex),
            tuple(e): np.asarray(1.0, dtype=complex),
        })

    def copy(self) -> "Jet":
        return Jet(self.nvars, self.order, dict(self.coeffs))

    def _like(self, coeffs: dict) -> "Jet":
        return Jet(self.nvars, self.order, coeffs)

    def __add__(self, other: "Jet") -> "Jet":
        out = dict(self.coeffs)
        for e, c in other.coeffs.items():
            out[e] = out[e] + c if e in out else c
        return self._like(out)

    def __sub__(self, other: "Jet") -> "Jet":
        out = dict(self.coeffs)
        for e, c in other.coeffs.items():
            out[e] = out[e] - c if e in out else -c
        return self._like(out)

    def __neg__(self) -> "Jet":
        return self._like({e: -c for e, c in self.coeffs.items()})

    def scale(self, a) -> "Jet":
        return self._like({e: a * c for e, c in self.coeffs.items()})

    def mul(self, other: "Jet") -> "Jet":
        """Product truncated at the jet order; matmul on matrix coefficients."""
        out: dict = {}
        for e1, c1 in self.coeffs.items():
            d1 = sum(e1)
            for e2, c2 in other.coeffs.items():
                if d1 + sum(e2) > self.order:
                    continue
                e = tuple(a + b for a, b in zip(e1, e2))
                c = c1 @ c2 if (c1.ndim == 2 and c2.ndim == 2) else c1 * c2
                out[e] = out[e] + c if e in out else c
        return self._like(out)

    def dagger(self, m: int) -> "Jet":
        """Formal adjoint: swap the z and zbar blocks, conjugate-transpose."""
        out = {}
        for e, c in self.coeffs.items():
            e2 = e[m:2 * m] + e[:m] + e[2 * m:]
            cc = c.conj().T if c.ndim == 2 else c.conj()
            out[e2] = out[e2] + cc if e2 in out else cc
        return self._like(out)

    def diff(self, index: int) -> "Jet":
        out = {}
        for e, c in self.coeffs.items():
            if e[index] == 0:
                continue
            e2 = list(e)
            e2[index] -= 1
            out[tuple(e2)] = e[index] * c
        return self._like(out)

    def value(self) -> np.ndarray:
        z = zero_exp(self.nvars)
        if z in self.coeffs:
            return self.coeffs[z]
        for c in self.coeffs.values():
            return np.zeros_like(c)
        return np.asarray(0j)

    def partial(self, alpha: tuple) -> np.ndarray:
        """Mixed partial d^alpha at the base point (coefficient times alpha!)."""
        c = self.coeffs.get(tuple(alpha))
        if c is None:
            return np.asarray(0j) if not self.coeffs else \
                np.zeros_like(next(iter(self.coeffs.values())))
        fact = 1
        for a in alpha:
            fact *= math.factorial(a)
        return fact * c

    def trace(self) -> "Jet":
        return self._like({e: np.trace(c) if c.ndim == 2 else c
                           for e, c in self.coeffs.items()})

    def inverse(self) -> "Jet":
        """Neumann-series inverse; the constant term must be invertible."""
        c0 = self.value()
        if c0.ndim != 2:
            c0 = np.asarray(c0).reshape(1, 1)
        inv0 = np.linalg.inv(c0)
        eye = Jet.constant(np.eye(c0.shape[0]), self.nvars, self.order)
        rest = self - Jet.constant(c0, self.nvars, self.order)
        step = Jet.constant(inv0, self.nvars, self.order).mul(rest).scale(-1.0)
        acc = eye
        power = eye
        for _ in range(self.order):
            power = power.mul(step)
            acc = acc + power
        return acc.mul(Jet.constant(inv0, self.nvars, self.order))

    def exp(self) -> "Jet":
        """Scalar exponential: exp(c0) * series in the nilpotent part."""
        c0 = self.value()
        if c0.ndim != 0:
            raise ValueError("jet exp is implemented for scalar jets only")
        rest = self - Jet.constant(c0, self.nvars, self.order)
        one = Jet.constant(1.0, self.nvars, self.order)
        acc = one
        power = one
        for kk in range(1, self.order + 1):
            power = power.mul(rest).scale(1.0 / kk)
            acc = acc + power
        return acc.scale(np.exp(complex(c0)))

    def max_abs(self) -> float:
        return max((float(np.max(np.abs(c))) for c in self.coeffs.values()),
                   default=0.0)

    def prune(self, tol: float = 0.0) -> "Jet":
        return self._like({e: c for e, c in self.coeffs.items()
                           if float(np.max(np.abs(c))) > tol})


def jet_distance(a: Jet, b: Jet) -> float:
    """Max-norm distance between two jets' coefficient tables."""
    keys = set(a.coeffs) | set(b.coeffs)
    worst = 0.0
    for e in keys:
        ca = a.coeffs.get(e)
        cb = b.coeffs.get(e)
        if ca is None:
            worst = max(worst, float(np.max(np.abs(cb))))
        elif cb is None:
            worst = max(worst, float(np.max(np.abs(ca))))
        else:
            worst = max(worst, float(np.max(np.abs(ca - cb))))
    return worst


# ---------------------------------------------------------------------------
# Finite-difference oracle


def _fornberg_weights(grid: np.ndarray, order: int) -> np.ndarray:
    """Fornberg weights for the `order`-th derivative at 0 on the given grid."""
    n = len(grid)
    c = np.zeros((n, order + 1))
    c[0, 0] = 1.0
    c1 = 1.0
    for i in range(1, n):
        c2 = 1.0
        mn = min(i, order)
        for j in range(i):
            c3 = grid[i] - grid[j]
            c2 *= c3
            if j == i - 1:
                for k in range(mn, 0, -1):
                    c[i, k] = c1 * (k * c[i - 1, k - 1]
                                    - grid[i - 1] * c[i - 1, k]) / c2
                c[i, 0] = -c1 * grid[i - 1] * c[i - 1, 0] / c2
            for k in range(mn, 0, -1):
                c[j, k] = (grid[i] * c[j, k] - k * c[j, k - 1]) / c3
            c[j, 0] = grid[i] * c[j, 0] / c3
        c1 = c2
    return c[:, order]


_FD_GRID = np.arange(-3, 4, dtype=float)
_FD_WEIGHTS = {d: _fornberg_weights(_FD_GRID, d) for d in (1, 2, 3)}


def _fd_real_partial(func, x0: np.ndarray, orders: tuple, step: float):
    """Nested central differences for a mixed real partial of given orders."""
    for idx, d in enumerate(orders):
        if d > 0:
            break
    else:
        return func(x0)
    rest = orders[:idx] + (0,) + orders[idx + 1:]
    w = _FD_WEIGHTS[d]
    acc = None
    for offset, weight in zip(_FD_GRID, w):
        if weight == 0.0:
            continue
        x = x0.copy()
        x[idx] += offset * step
        term = weight * _fd_real_partial(func, x, rest, step)
        acc = term if acc is None else acc + term
    return acc / step ** orders[idx]


def fd_metric_jet(value_fn, point_z: np.ndarray, point_tau: np.ndarray,
                  m: int, k: int, order: int = 3, step: float = 1e-3,
                  step3: float | None = None) -> Jet:
    """Jet of a metric family from central finite differences.

    ``value_fn(z, tau)`` evaluates the family at honest points.  Wirtinger
    coefficients come from real mixed partials in (Re z, Im z, tau) combined
    with the binomial expansion of (d/dx -+ i d/dy)/2.  ``step3`` (default
    2 * step) is used on third-order partials, where round-off dominates at
    the base step.
    """
    if step3 is None:
        step3 = 2.0 * step
    nvars = 2 * m + k
    nreal = 2 * m + k

    def func(xr: np.ndarray):
        z = xr[:m] + 1j * xr[m:2 * m]
        return np.asarray(value_fn(z, xr[2 * m:]), dtype=complex)

    x0 = np.concatenate([point_z.real, point_z.imag, point_tau.astype(float)])

    real_partials: dict = {}

    def real_partial(orders: tuple):
        if orders not in real_partials:
            h = step3 if sum(orders) >= 3 else step
            real_partials[orders] = _fd_real_partial(func, x0, orders, h)
        return real_partials[orders]

    coeffs = {}
    for alpha in itertools.product(range(order + 1), repeat=nvars):
        if not 0 < sum(alpha) <= order:
            continue
        za, zb, te = alpha[:m], alpha[m:2 * m], alpha[2 * m:]
        # expand prod_a (dx_a - i dy_a)^za (dx_a + i dy_a)^zb / 2^(za+zb)
        total = None
        ranges = [range(a + 1) for a in za] + [range(b + 1) for b in zb]
        for ps in itertools.product(*ranges):
            pa, pb = ps[:m], ps[m:]
            orders = [0] * nreal
            coef = 1.0 + 0j
            for a in range(m):
                orders[a] += pa[a] + pb[a]
                orders[m + a] += (za[a] - pa[a]) + (zb[a] - pb[a])
                coef *= (math.comb(za[a], pa[a]) * math.comb(zb[a], pb[a])
                         * (-1j) ** (za[a] - pa[a]) * (1j) ** (zb[a] - pb[a]))
            for b in range(k):
                orders[2 * m + b] = te[b]
            term = coef * real_partial(tuple(orders))
            total = term if total is None else total + term
        total = total / 2.0 ** (sum(za) + sum(zb))
        fact = 1
        for a in alpha:
            fact *= math.factorial(a)
        coeffs[alpha] = np.asarray(total, dtype=complex) / fact
    coeffs[zero_exp(nvars)] = func(x0)
    return Jet(nvars, order, coeffs)


@dataclass
class JetMetric:
    """Metric value and derivatives to a fixed order at an evaluation point."""
    m: int
    k: int
    N: int
    point_z: np.ndarray
    point_tau: np.ndarray
    jet: Jet

    def partial(self, alpha: tuple) -> np.ndarray:
        return self.jet.partial(alpha)

    def value(self) -> np.ndarray:
        return np.asarray(self.jet.value())
