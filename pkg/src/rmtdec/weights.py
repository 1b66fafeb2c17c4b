"""Symmetric weight families with an antiderivative recurrence.

Three one-parameter families qualify: Gauss e^{-x^2/2} on R, Jacobi
(1-x^2)^a on (-1, 1) with a > -1, and Cauchy (1+x^2)^{-a-1} on R with
a > -1/2.  Each is even, equals 1 at the origin, and satisfies

    int_0^x t^k w1(t) dt = -alpha_k x^{k-1} phi(x) w1(x)
                           + beta_k int_0^x t^{k-2} w1(t) dt + const

with phi quadratic, which is what every downstream factorization rests on.
The Cauchy family only supports orders k strictly below 2a.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import BadParameter, OrderExceeded, OutOfSupport
from .numerics import _leggauss, integrate

__all__ = [
    "AdmissibleWeight",
    "WeightDerived",
    "gauss_weight",
    "jacobi_weight",
    "cauchy_weight",
    "make_weight",
    "eval_w1",
    "alpha",
    "beta",
    "big_A",
    "theta1",
    "check_recurrence",
    "from_table1",
    "derived",
]

_FAMILIES = ("gauss", "jacobi", "cauchy")


@dataclass(frozen=True)
class AdmissibleWeight:
    """One member of the Gauss / Jacobi / Cauchy weight families.

    ``omega`` is the support half-width and ``kappa`` the recurrence order
    bound: infinite except for Cauchy, where orders must satisfy k < 2a
    (kappa stores that open bound).
    """

    family: str
    a: float | None = None

    def __post_init__(self) -> None:
        fam = self.family.lower()
        if fam not in _FAMILIES:
            raise BadParameter(f"unknown weight family {self.family!r}")
        object.__setattr__(self, "family", fam)
        if fam == "gauss":
            if self.a is not None:
                raise BadParameter("Gauss weight takes no parameter")
        else:
            if self.a is None:
                raise BadParameter(f"{fam} weight needs parameter a")
            a = float(self.a)
            if fam == "jacobi" and not a > -1.0:
                raise BadParameter(f"Jacobi requires a > -1, got {a}")
            if fam == "cauchy" and not a > -0.5:
                raise BadParameter(f"Cauchy requires a > -1/2, got {a}")
            object.__setattr__(self, "a", a)

    # -- structural constants -------------------------------------------------

    @property
    def omega(self) -> float:
        return 1.0 if self.family == "jacobi" else math.inf

    @property
    def support(self) -> tuple[float, float]:
        return (-self.omega, self.omega)

    @property
    def kappa(self) -> float:
        """Largest usable recurrence order; open bound for Cauchy (k < kappa)."""
        return 2.0 * self.a if self.family == "cauchy" else math.inf

    @property
    def theta(self) -> float:
        """Half-mass (1/2) int w1 in closed Gamma form."""
        if self.family == "gauss":
            return math.sqrt(math.pi / 2.0)
        a = float(self.a)
        if self.family == "jacobi":
            return math.sqrt(math.pi) * math.gamma(a + 1.0) / (2.0 * math.gamma(a + 1.5))
        return math.sqrt(math.pi) * math.gamma(a + 0.5) / (2.0 * math.gamma(a + 1.0))

    @property
    def tau(self) -> float:
        """Quadratic coefficient of phi: phi(x) = 1 + tau x^2."""
        return {"gauss": 0.0, "jacobi": -1.0, "cauchy": 1.0}[self.family]

    def order_ok(self, k: int) -> bool:
        return self.family != "cauchy" or k < self.kappa

    def _require_order(self, k: int) -> None:
        if not self.order_ok(k):
            raise OrderExceeded(
                f"order {k} not below Cauchy bound kappa = 2a = {self.kappa}"
            )

    # -- pointwise evaluation --------------------------------------------------

    def _check_support(self, x: np.ndarray) -> None:
        if self.family == "jacobi" and np.any(np.abs(x) >= 1.0):
            raise OutOfSupport("Jacobi weight defined only for |x| < 1")

    def w1(self, x: float | np.ndarray) -> float | np.ndarray:
        arr = np.asarray(x, dtype=float)
        self._check_support(arr)
        if self.family == "gauss":
            out = np.exp(-0.5 * arr**2)
        elif self.family == "jacobi":
            out = (1.0 - arr**2) ** self.a
        else:
            out = (1.0 + arr**2) ** (-self.a - 1.0)
        return float(out) if arr.ndim == 0 else out

    def phi(self, x: float | np.ndarray) -> float | np.ndarray:
        arr = np.asarray(x, dtype=float)
        out = 1.0 + self.tau * arr**2
        return float(out) if arr.ndim == 0 else out

    def companion(self, x: float | np.ndarray) -> float | np.ndarray:
        """phi * w1: e^{-x^2/2}, (1-x^2)^{a+1}, (1+x^2)^{-a}."""
        arr = np.asarray(x, dtype=float)
        self._check_support(arr)
        if self.family == "gauss":
            out = np.exp(-0.5 * arr**2)
        elif self.family == "jacobi":
            out = (1.0 - arr**2) ** (self.a + 1.0)
        else:
            out = (1.0 + arr**2) ** (-self.a)
        return float(out) if arr.ndim == 0 else out

    def w2(self, x: float | np.ndarray) -> float | np.ndarray:
        """phi * w1^2: e^{-x^2}, (1-x^2)^{2a+1}, (1+x^2)^{-2a-1}."""
        arr = np.asarray(x, dtype=float)
        self._check_support(arr)
        if self.family == "gauss":
            out = np.exp(-(arr**2))
        elif self.family == "jacobi":
            out = (1.0 - arr**2) ** (2.0 * self.a + 1.0)
        else:
            out = (1.0 + arr**2) ** (-2.0 * self.a - 1.0)
        return float(out) if arr.ndim == 0 else out

    def psi(self, x: float | np.ndarray) -> float | np.ndarray:
        """-theta1(x)/companion(x), with psi(0) = 0 by continuity."""
        arr = np.asarray(x, dtype=float)
        out = -theta1(self, arr) / self.companion(arr)
        return float(out) if arr.ndim == 0 else out

    # -- log scale (out-of-support maps to -inf instead of raising) -----------

    def log_w1(self, x: np.ndarray) -> np.ndarray:
        arr = np.asarray(x, dtype=float)
        if self.family == "gauss":
            return -0.5 * arr**2
        if self.family == "jacobi":
            out = np.full(arr.shape, -np.inf)
            inside = np.abs(arr) < 1.0
            if self.a == 0.0:
                out[inside] = 0.0
            else:
                out[inside] = self.a * np.log1p(-(arr[inside] ** 2))
            return out
        return (-self.a - 1.0) * np.log1p(arr**2)

    def log_companion(self, x: np.ndarray) -> np.ndarray:
        arr = np.asarray(x, dtype=float)
        if self.family == "gauss":
            return -0.5 * arr**2
        if self.family == "jacobi":
            out = np.full(arr.shape, -np.inf)
            inside = np.abs(arr) < 1.0
            out[inside] = (self.a + 1.0) * np.log1p(-(arr[inside] ** 2))
            return out
        if self.a == 0.0:
            return np.zeros(arr.shape)
        return -self.a * np.log1p(arr**2)

    def log_w2(self, x: np.ndarray) -> np.ndarray:
        return self.log_w1(x) + self.log_companion(x)


def gauss_weight() -> AdmissibleWeight:
    return AdmissibleWeight("gauss")


def jacobi_weight(a: float) -> AdmissibleWeight:
    return AdmissibleWeight("jacobi", float(a))


def cauchy_weight(a: float) -> AdmissibleWeight:
    return AdmissibleWeight("cauchy", float(a))


def make_weight(family: str, a: float | None = None) -> AdmissibleWeight:
    fam = family.lower()
    if fam == "gauss":
        if a is not None:
            raise BadParameter("Gauss weight takes no parameter")
        return gauss_weight()
    return AdmissibleWeight(fam, a)


@dataclass(frozen=True)
class WeightDerived:
    """Callable bundle of the quantities derived from one weight."""

    phi: Callable[[float | np.ndarray], float | np.ndarray]
    psi: Callable[[float | np.ndarray], float | np.ndarray]
    companion: Callable[[float | np.ndarray], float | np.ndarray]
    w2: Callable[[float | np.ndarray], float | np.ndarray]
    theta1: Callable[[float | np.ndarray], float | np.ndarray]


def derived(w: AdmissibleWeight) -> WeightDerived:
    return WeightDerived(
        phi=w.phi,
        psi=w.psi,
        companion=w.companion,
        w2=w.w2,
        theta1=lambda x: theta1(w, x),
    )


# -- recurrence data -----------------------------------------------------------


def eval_w1(w: AdmissibleWeight, x: float | np.ndarray) -> float | np.ndarray:
    return w.w1(x)


def alpha(w: AdmissibleWeight, k: int) -> float:
    if k < 1 or k != int(k):
        raise BadParameter(f"recurrence order must be a positive integer, got {k}")
    w._require_order(k)
    if w.family == "gauss":
        return 1.0
    if w.family == "jacobi":
        return 1.0 / (2.0 * w.a + 1.0 + k)
    return 1.0 / (2.0 * w.a + 1.0 - k)


def beta(w: AdmissibleWeight, k: int) -> float:
    # beta_k = (k-1) * alpha_k * phi(0) and phi(0) = 1 for every family
    return (k - 1) * alpha(w, k)


def big_A(w: AdmissibleWeight, n: int, nu: int) -> float:
    """Product prod_{k=0}^{n-1} alpha_{2k+nu}, with alpha_0 = 1 by convention."""
    if n < 1 or nu not in (0, 1):
        raise BadParameter(f"need n >= 1 and nu in {{0,1}}, got n={n}, nu={nu}")
    w._require_order(2 * (n - 1) + nu)
    out = 1.0
    for k in range(n):
        order = 2 * k + nu
        if order > 0:
            out *= alpha(w, order)
    return out


# -- partial mass ----------------------------------------------------------------


def _cumulative_mass(
    integrand: Callable[[np.ndarray], np.ndarray],
    upts: np.ndarray,
    cap: float,
) -> np.ndarray:
    """Integral of ``integrand`` from 0 to each entry of the sorted array ``upts``.

    Consecutive gaps are tiled with Gauss-Legendre panels no wider than
    ``cap`` and the panel sums are accumulated, so the whole array costs one
    vectorized integrand call.
    """
    glx, glw = _leggauss(16)
    edges = np.concatenate([[0.0], upts])
    gaps = np.diff(edges)
    counts = np.maximum(1, np.ceil(gaps / cap).astype(int))
    total = int(counts.sum())
    rep_w = np.repeat(gaps / counts, counts)
    offsets = np.cumsum(counts) - counts
    within = np.arange(total) - np.repeat(offsets, counts)
    sub_left = np.repeat(edges[:-1], counts) + within * rep_w
    nodes = sub_left[:, None] + rep_w[:, None] * 0.5 * (glx[None, :] + 1.0)
    vals = np.asarray(integrand(nodes.ravel()), dtype=float).reshape(total, 16)
    panel = 0.5 * rep_w * (vals @ glw)
    return np.cumsum(np.add.reduceat(panel, offsets))


def theta1(w: AdmissibleWeight, x: float | np.ndarray) -> float | np.ndarray:
    """int_0^x w1, odd in x.  Vectorized; infinite supports go through x = tan(u)."""
    arr = np.asarray(x, dtype=float)
    w._check_support(arr)
    flat = np.atleast_1d(arr).ravel()
    if flat.size == 0:
        return np.zeros(arr.shape)
    mags = np.abs(flat)
    uniq, inverse = np.unique(mags, return_inverse=True)
    if w.family == "jacobi":
        masses = _cumulative_mass(w.w1, uniq, cap=0.01)
    else:
        u = np.arctan(uniq)
        masses = _cumulative_mass(
            lambda v: w.w1(np.tan(v)) / np.cos(v) ** 2, u, cap=0.02
        )
    signed = np.sign(flat) * masses[inverse]
    if arr.ndim == 0:
        return float(signed[0])
    return signed.reshape(arr.shape)


# -- consistency checks -----------------------------------------------------------


def check_recurrence(
    w: AdmissibleWeight, k: int, points: Sequence[float] | np.ndarray
) -> float:
    """Max relative residual of the differentiated recurrence at the points.

    Checks (x^2 - beta_k + (k-1) alpha_k phi(x)) w1(x) = -alpha_k x (phi w1)'(x)
    with the analytic companion derivative (phi w1)' = -(x/alpha_1) w1.
    """
    pts = np.asarray(points, dtype=float)
    w._check_support(pts)
    ak = alpha(w, k)
    bk = beta(w, k)
    w1v = w.w1(pts)
    lhs = (pts**2 - bk + (k - 1) * ak * w.phi(pts)) * w1v
    companion_prime = -pts * w1v / alpha(w, 1)
    rhs = -ak * pts * companion_prime
    scale = max(float(np.max(np.abs(lhs))), 1e-300)
    return float(np.max(np.abs(lhs - rhs))) / scale


def from_table1(family: str, n: int, a_table1: float | None = None) -> AdmissibleWeight:
    """Map the n-dependent matrix-ensemble parameterization onto the canonical one.

    Only the Cauchy family differs: (1+x^2)^{-(n+a+1)/2} corresponds to the
    canonical parameter a_c = (n + a - 1)/2.
    """
    fam = family.lower()
    if fam == "gauss":
        return gauss_weight()
    if fam == "jacobi":
        if a_table1 is None:
            raise BadParameter("jacobi needs a parameter")
        return jacobi_weight(a_table1)
    if fam != "cauchy":
        raise BadParameter(f"unknown weight family {family!r}")
    if a_table1 is None:
        a_table1 = 0.0
    a_c = 0.5 * (n + a_table1 - 1.0)
    if not a_c > -0.5:
        raise BadParameter(f"mapped Cauchy parameter {a_c} must exceed -1/2")
    return cauchy_weight(a_c)


def theta_by_quadrature(w: AdmissibleWeight, tol: float = 1e-12) -> float:
    """Half-mass by adaptive quadrature; cross-check for the closed form."""
    if w.family == "jacobi":
        # x = sin(t) removes the endpoint singularity for a in [-1/2, 0)
        return integrate(
            lambda t: np.cos(t) ** (2.0 * w.a + 1.0), (0.0, math.pi / 2.0), tol
        )
    return integrate(w.w1, (0.0, w.omega), tol)
