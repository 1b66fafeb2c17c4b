"""Shared numerical kernels.

Quadrature on finite and infinite intervals, symmetric eigendecomposition,
and polynomial interpolation / basis conversion.  Everything here is a pure
function on immutable inputs; integrands are expected to be vectorized
(accept an ndarray of abscissae and return an ndarray of values).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

from .errors import (
    DuplicateNodes,
    InvalidInterval,
    NonConvergence,
    NotSymmetric,
)

MAX_DEPTH = 40

__all__ = [
    "QuadratureRule",
    "PolyCoeffs",
    "integrate",
    "sym_eigen",
    "poly_from_samples",
    "chebyshev_nodes",
    "gauss_legendre_rule",
    "composite_gl_rule",
    "tan_transformed_rule",
]


@lru_cache(maxsize=64)
def _leggauss(order: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(order)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


@dataclass(frozen=True)
class QuadratureRule:
    """Nodes and positive weights integrating over ``interval``.

    Infinite endpoints are permitted; such rules are built through the
    substitution x = tan(u) with the Jacobian folded into the weights,
    so nodes are always finite reals.
    """

    nodes: np.ndarray
    weights: np.ndarray
    interval: tuple[float, float]

    def __post_init__(self) -> None:
        nodes = np.atleast_1d(np.asarray(self.nodes, dtype=float))
        weights = np.atleast_1d(np.asarray(self.weights, dtype=float))
        if nodes.shape != weights.shape or nodes.size < 1:
            raise InvalidInterval("nodes and weights must be equal-length, nonempty")
        lo, hi = self.interval
        if not lo < hi:
            raise InvalidInterval(f"empty interval ({lo}, {hi})")
        if np.any(weights <= 0):
            raise InvalidInterval("quadrature weights must be positive")
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", weights)

    def apply(self, f: Callable[[np.ndarray], np.ndarray]) -> float:
        return float(np.dot(self.weights, np.asarray(f(self.nodes), dtype=float)))


def gauss_legendre_rule(lo: float, hi: float, order: int) -> QuadratureRule:
    """Plain Gauss-Legendre rule on a finite interval."""
    if not (np.isfinite(lo) and np.isfinite(hi)):
        raise InvalidInterval("gauss_legendre_rule needs finite endpoints")
    if not lo < hi:
        raise InvalidInterval(f"empty interval ({lo}, {hi})")
    x, w = _leggauss(order)
    mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
    return QuadratureRule(mid + half * x, half * w, (lo, hi))


def composite_gl_rule(lo: float, hi: float, panels: int, order: int) -> QuadratureRule:
    """Composite Gauss-Legendre rule: ``panels`` equal panels of ``order`` nodes."""
    if not lo < hi:
        raise InvalidInterval(f"empty interval ({lo}, {hi})")
    edges = np.linspace(lo, hi, panels + 1)
    x, w = _leggauss(order)
    mids = 0.5 * (edges[:-1] + edges[1:])
    halfs = 0.5 * np.diff(edges)
    nodes = (mids[:, None] + halfs[:, None] * x[None, :]).ravel()
    weights = (halfs[:, None] * w[None, :]).ravel()
    return QuadratureRule(nodes, weights, (lo, hi))


def tan_transformed_rule(lo: float, hi: float, panels: int, order: int) -> QuadratureRule:
    """Composite rule on a possibly infinite interval via x = tan(u).

    The returned nodes live in x-space and the sec^2 Jacobian is folded into
    the weights, so ``rule.apply(f)`` approximates the integral of f over
    (lo, hi) directly.
    """
    ulo = math.atan(lo) if np.isfinite(lo) else -0.5 * math.pi
    uhi = math.atan(hi) if np.isfinite(hi) else 0.5 * math.pi
    if not ulo < uhi:
        raise InvalidInterval(f"empty interval ({lo}, {hi})")
    base = composite_gl_rule(ulo, uhi, panels, order)
    nodes = np.tan(base.nodes)
    weights = base.weights / np.cos(base.nodes) ** 2
    return QuadratureRule(nodes, weights, (lo, hi))


def _panel_values(
    f: Callable[[np.ndarray], np.ndarray],
    a: float,
    b: float,
    transform: bool,
) -> tuple[float, float]:
    """High- and low-order estimates of the integral of f over panel (a, b).

    When ``transform`` is set, (a, b) are tan-substitution coordinates and the
    Jacobian is applied here.
    """
    xh, wh = _leggauss(16)
    xl, wl = _leggauss(8)
    mid, half = 0.5 * (a + b), 0.5 * (b - a)
    uh = mid + half * xh
    ul = mid + half * xl
    u = np.concatenate([uh, ul])
    if transform:
        vals = np.asarray(f(np.tan(u)), dtype=float) / np.cos(u) ** 2
    else:
        vals = np.asarray(f(u), dtype=float)
    hi = half * float(np.dot(wh, vals[:16]))
    lo = half * float(np.dot(wl, vals[16:]))
    return hi, abs(hi - lo)


def integrate(
    f: Callable[[np.ndarray], np.ndarray],
    interval: tuple[float, float],
    tol: float = 1e-10,
) -> float:
    """Adaptive integral of a vectorized integrand over ``interval``.

    Infinite endpoints are mapped through x = tan(u).  Panels are bisected,
    worst error first, until the summed error estimate (high- minus embedded
    low-order Gauss-Legendre value per panel) meets the relative tolerance.

    Raises NonConvergence if a panel would need more than MAX_DEPTH splits,
    and InvalidInterval when lo >= hi or tol <= 0.
    """
    lo, hi = interval
    if not lo < hi:
        raise InvalidInterval(f"empty interval ({lo}, {hi})")
    if not tol > 0:
        raise InvalidInterval("tol must be positive")

    transform = not (np.isfinite(lo) and np.isfinite(hi))
    if transform:
        a = math.atan(lo) if np.isfinite(lo) else -0.5 * math.pi
        b = math.atan(hi) if np.isfinite(hi) else 0.5 * math.pi
    else:
        a, b = float(lo), float(hi)

    # panel: (a, b, value, error, depth)
    edges = np.linspace(a, b, 9)
    panels = []
    for pa, pb in zip(edges[:-1], edges[1:]):
        val, err = _panel_values(f, pa, pb, transform)
        panels.append((pa, pb, val, err, 0))

    for _ in range(200_000):
        total = math.fsum(p[2] for p in panels)
        err_total = math.fsum(p[3] for p in panels)
        abs_total = math.fsum(abs(p[2]) for p in panels)
        scale = max(abs(total), 1e-3 * abs_total, 1e-300)
        if err_total <= tol * scale:
            return total
        worst = max(range(len(panels)), key=lambda i: panels[i][3])
        pa, pb, _, _, depth = panels[worst]
        if depth >= MAX_DEPTH:
            raise NonConvergence(
                f"integrate: error {err_total:.3e} above tol at max depth over {interval}"
            )
        mid = 0.5 * (pa + pb)
        left = (*_panel_values(f, pa, mid, transform),)
        right = (*_panel_values(f, mid, pb, transform),)
        panels[worst] = (pa, mid, left[0], left[1], depth + 1)
        panels.append((mid, pb, right[0], right[1], depth + 1))
    raise NonConvergence(f"integrate: panel budget exhausted over {interval}")


def sym_eigen(m: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (ascending) and orthonormal eigenvectors of a symmetric matrix.

    Raises NotSymmetric when the relative asymmetry exceeds 1e-12.
    """
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise NotSymmetric("expected a square matrix")
    scale = max(float(np.linalg.norm(m)), 1.0)
    if float(np.linalg.norm(m - m.T)) > 1e-12 * scale:
        raise NotSymmetric("matrix is not symmetric within 1e-12 relative")
    vals, vecs = np.linalg.eigh(0.5 * (m + m.T))
    return vals, vecs


@lru_cache(maxsize=8)
def _binomial_flip(size: int) -> np.ndarray:
    """Matrix B with B[k, j] = (-1)^k C(j, k); maps monomial coeffs a_j of
    p(xi) to coeffs c_k of p in powers of (1 - xi).  B is an involution."""
    b = np.zeros((size, size))
    for k in range(size):
        for j in range(k, size):
            b[k, j] = (-1) ** k * math.comb(j, k)
    return b


@dataclass(frozen=True)
class PolyCoeffs:
    """Polynomial coefficients in either the monomial or the (1-xi)^k basis."""

    basis: str
    coeffs: np.ndarray

    def __post_init__(self) -> None:
        if self.basis not in ("monomial", "one-minus-xi"):
            raise ValueError(f"unknown basis {self.basis!r}")
        object.__setattr__(
            self, "coeffs", np.atleast_1d(np.asarray(self.coeffs, dtype=float))
        )

    @property
    def degree(self) -> int:
        return self.coeffs.size - 1

    def to_basis(self, basis: str) -> "PolyCoeffs":
        if basis == self.basis:
            return self
        flip = _binomial_flip(self.coeffs.size)
        return PolyCoeffs(basis, flip @ self.coeffs)

    def __call__(self, xi: float | np.ndarray) -> float | np.ndarray:
        x = np.asarray(xi, dtype=float)
        arg = x if self.basis == "monomial" else 1.0 - x
        out = np.zeros_like(arg)
        for c in self.coeffs[::-1]:
            out = out * arg + c
        return float(out) if np.isscalar(xi) else out


def poly_from_samples(
    nodes: Sequence[float],
    values: Sequence[float],
    basis: str = "monomial",
) -> PolyCoeffs:
    """Interpolating polynomial through (nodes, values), degree = len - 1.

    Newton divided differences expanded to monomial coefficients, then
    converted exactly to the requested basis.  Raises DuplicateNodes.
    """
    x = np.asarray(nodes, dtype=float)
    y = np.asarray(values, dtype=float)
    if x.ndim != 1 or x.shape != y.shape or x.size < 1:
        raise DuplicateNodes("need equal-length 1-d nodes and values")
    if np.unique(x).size != x.size:
        raise DuplicateNodes("interpolation nodes must be distinct")

    n = x.size
    dd = y.astype(float).copy()
    for level in range(1, n):
        dd[level:] = (dd[level:] - dd[level - 1 : -1]) / (x[level:] - x[: n - level])
    # Newton -> monomial by synthetic multiplication with (xi - x_k)
    coeffs = np.array([dd[n - 1]])
    for k in range(n - 2, -1, -1):
        # multiply by (xi - x_k) and add dd[k]
        coeffs = np.concatenate([[0.0], coeffs]) - x[k] * np.concatenate(
            [coeffs, [0.0]]
        )
        coeffs[0] += dd[k]
    return PolyCoeffs("monomial", coeffs).to_basis(basis)


def chebyshev_nodes(count: int, lo: float, hi: float) -> np.ndarray:
    """``count`` Chebyshev points of the first kind, mapped to (lo, hi), ascending."""
    k = np.arange(count)
    x = np.cos((2 * k + 1) * math.pi / (2 * count))
    return np.sort(0.5 * (lo + hi) + 0.5 * (hi - lo) * x)
