"""Joint and marginal spectral densities, all unnormalized and in log form.

Covers the beta = 1, 2 eigenvalue densities, the chiral positive-eigenvalue
density, the factorized singular-value density q(x; y), and its even- and
odd-location marginals.  Numeric normalization constants are available for
n <= 4 through nested ordered quadrature.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import (
    BadParameter,
    InterlacingViolated,
    NonConvergence,
    OutOfSupport,
)
from .numerics import _leggauss
from .weights import AdmissibleWeight, theta1

__all__ = [
    "OrderedSpectrum",
    "SingularSpectrum",
    "log_p_beta",
    "log_p_chiral",
    "log_q_xy",
    "log_q_even",
    "log_q_odd",
    "log_p_beta_batch",
    "log_chiral_batch",
    "log_q_odd_batch",
    "normalize",
]


@dataclass(frozen=True)
class OrderedSpectrum:
    """Ascending eigenvalue configuration."""

    values: np.ndarray

    def __post_init__(self) -> None:
        vals = np.atleast_1d(np.asarray(self.values, dtype=float))
        if vals.ndim != 1:
            raise BadParameter("spectrum must be one-dimensional")
        if np.any(np.diff(vals) < 0):
            raise BadParameter("spectrum must be ascending")
        object.__setattr__(self, "values", vals)

    @property
    def n(self) -> int:
        return self.values.size


@dataclass(frozen=True)
class SingularSpectrum:
    """Ascending nonnegative singular-value configuration."""

    values: np.ndarray

    def __post_init__(self) -> None:
        vals = np.atleast_1d(np.asarray(self.values, dtype=float))
        if vals.ndim != 1:
            raise BadParameter("spectrum must be one-dimensional")
        if np.any(np.diff(vals) < 0):
            raise BadParameter("singular values must be ascending")
        if vals.size and vals[0] < 0:
            raise BadParameter("singular values must be nonnegative")
        object.__setattr__(self, "values", vals)

    @property
    def n(self) -> int:
        return self.values.size


def _vals(spec) -> np.ndarray:
    if isinstance(spec, (OrderedSpectrum, SingularSpectrum)):
        return spec.values
    return np.atleast_1d(np.asarray(spec, dtype=float))


def _log_vandermonde(vals: np.ndarray, power: int = 1) -> float:
    """Sum of log of pairwise gaps of vals**power, -inf on any tie."""
    if vals.size < 2:
        return 0.0
    v = vals**power if power != 1 else vals
    diffs = v[None, :] - v[:, None]
    upper = diffs[np.triu_indices(vals.size, k=1)]
    gaps = np.abs(upper)
    if np.any(gaps == 0.0):
        return -math.inf
    return float(np.sum(np.log(gaps)))


def log_p_beta(w: AdmissibleWeight, beta: int, spec) -> float:
    """log of prod w_beta(x_k) * prod |x_k - x_j|^beta; -inf on coincidence."""
    if beta not in (1, 2):
        raise BadParameter(f"beta must be 1 or 2, got {beta}")
    vals = _vals(spec)
    if w.family == "jacobi" and np.any(np.abs(vals) >= 1.0):
        raise OutOfSupport("eigenvalues outside the weight support")
    logw = w.log_w1(vals) if beta == 1 else w.log_w2(vals)
    return float(np.sum(logw)) + beta * _log_vandermonde(vals)


def log_p_chiral(weight: Callable[[np.ndarray], np.ndarray], spec) -> float:
    """log of prod weight(x_k) * prod (x_k^2 - x_j^2)^2 for positive values."""
    vals = _vals(spec)
    if np.any(vals <= 0.0):
        raise OutOfSupport("chiral values must be strictly positive")
    wv = np.asarray(weight(vals), dtype=float)
    if np.any(wv < 0):
        raise BadParameter("weight must be nonnegative")
    with np.errstate(divide="ignore"):
        logw = np.log(wv)
    return float(np.sum(logw)) + 2.0 * _log_vandermonde(vals, power=2)


def split_xy(vals: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Ascending sigma -> (x, y) with x_j = sigma_{2j-1}, y_j = sigma_{2j}."""
    return vals[0::2], vals[1::2]


def log_q_xy(w1: AdmissibleWeight, sv) -> float:
    """Factorized singular-value density: x-block times y-block.

    log of  prod w1(x_k) * Vdm(x^2)  *  prod y_k w1(y_k) * Vdm(y^2),
    where the x are the odd-indexed and y the even-indexed entries of the
    ascending input.  Raises InterlacingViolated if the input is not an
    ascending nonnegative sequence.
    """
    vals = _vals(sv)
    if np.any(np.diff(vals) < 0) or (vals.size and vals[0] < 0):
        raise InterlacingViolated("need ascending nonnegative singular values")
    if w1.family == "jacobi" and np.any(vals >= 1.0):
        raise OutOfSupport("singular values outside the weight support")
    x, y = split_xy(vals)
    out = float(np.sum(w1.log_w1(x))) + _log_vandermonde(x, power=2)
    out += float(np.sum(w1.log_w1(y))) + _log_vandermonde(y, power=2)
    with np.errstate(divide="ignore"):
        out += float(np.sum(np.log(y))) if y.size else 0.0
    return out


def log_q_even(w1: AdmissibleWeight, s, mu: int) -> float:
    """Even-location marginal: prod s_k^(2mu) w2(s_k) * Vdm(s^2)^2."""
    if mu not in (0, 1):
        raise BadParameter(f"mu must be 0 or 1, got {mu}")
    vals = _vals(s)
    if np.any(vals < 0.0) or np.any(np.diff(vals) < 0):
        raise BadParameter("need ascending nonnegative values")
    if w1.family == "jacobi" and np.any(vals >= 1.0):
        raise OutOfSupport("values outside the weight support")
    out = float(np.sum(w1.log_w2(vals))) + 2.0 * _log_vandermonde(vals, power=2)
    if mu == 1:
        with np.errstate(divide="ignore"):
            out += 2.0 * float(np.sum(np.log(vals)))
    return out


def log_q_odd(w1: AdmissibleWeight, t, n: int) -> float:
    """Odd-location marginal for an ensemble of n singular values.

    Product of a positive Vandermonde-type block
        prod w1(t_k) t_k^(1-mu) * Vdm(t^2)
    and the determinant with companion-weight monomial rows
        companion(t_j) t_j^{(1-mu)+2(i-1)},  i = 1..mhat-1,
    closed by a last row of theta_{1-mu}(t_j) (the constant 1 when mu = 1,
    the partial mass theta1 when mu = 0).  The determinant must come out
    positive; a nonpositive value returns the -inf sentinel, as do ties.
    """
    vals = _vals(t)
    mu = n % 2
    mhat = (n + 1) // 2
    if vals.size != mhat:
        raise BadParameter(f"expected {mhat} odd-location values for n={n}")
    if np.any(vals < 0.0) or np.any(np.diff(vals) < 0):
        raise BadParameter("need ascending nonnegative values")
    if w1.family == "jacobi" and np.any(vals >= 1.0):
        raise OutOfSupport("values outside the weight support")
    nu = 1 - mu

    out = float(np.sum(w1.log_w1(vals))) + _log_vandermonde(vals, power=2)
    if nu == 1:
        with np.errstate(divide="ignore"):
            out += float(np.sum(np.log(vals)))
    if not np.isfinite(out):
        return -math.inf

    # determinant block: companion-monomial rows plus theta row
    m = np.empty((mhat, mhat))
    comp = w1.companion(vals)
    for i in range(mhat - 1):
        m[i] = comp * vals ** (nu + 2 * i)
    m[mhat - 1] = 1.0 if nu == 0 else theta1(w1, vals)
    sign, logdet = np.linalg.slogdet(m)
    if sign <= 0:
        return -math.inf
    return out + float(logdet)


# -- batched forms for samplers and Monte Carlo verification -------------------


def log_p_beta_batch(w: AdmissibleWeight, beta: int, x: np.ndarray) -> np.ndarray:
    """Row-wise log_p_beta on a (B, n) array; out-of-support rows give -inf."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 2:
        raise BadParameter("expected a (batch, n) array")
    logw = w.log_w1(x) if beta == 1 else w.log_w2(x)
    out = np.sum(logw, axis=1)
    n = x.shape[1]
    if n > 1:
        iu, ju = np.triu_indices(n, k=1)
        gaps = np.abs(x[:, ju] - x[:, iu])
        with np.errstate(divide="ignore"):
            out = out + beta * np.sum(np.log(gaps), axis=1)
    return out


def log_chiral_batch(
    log_weight: Callable[[np.ndarray], np.ndarray], x: np.ndarray
) -> np.ndarray:
    """Row-wise chiral log density; log_weight must send x <= 0 to -inf."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 2:
        raise BadParameter("expected a (batch, n) array")
    out = np.sum(log_weight(x), axis=1)
    n = x.shape[1]
    if n > 1:
        iu, ju = np.triu_indices(n, k=1)
        gaps = np.abs(x[:, ju] ** 2 - x[:, iu] ** 2)
        with np.errstate(divide="ignore"):
            out = out + 2.0 * np.sum(np.log(gaps), axis=1)
    return out


def log_q_odd_batch(w1: AdmissibleWeight, x: np.ndarray, n: int) -> np.ndarray:
    """Row-wise log_q_odd on a (B, mhat) array; invalid rows give -inf.

    Shares the closed theta1 evaluation across all rows, which is what makes
    binned goodness-of-fit tests at large sample counts affordable.
    """
    x = np.asarray(x, dtype=float)
    if x.ndim != 2:
        raise BadParameter("expected a (batch, mhat) array")
    mu = n % 2
    mhat = (n + 1) // 2
    if x.shape[1] != mhat:
        raise BadParameter(f"expected {mhat} odd-location values for n={n}")
    nu = 1 - mu

    bad = np.any(x < 0.0, axis=1) | np.any(np.diff(x, axis=1) < 0, axis=1)
    if w1.family == "jacobi":
        bad |= np.any(x >= 1.0, axis=1)
    safe = np.where(bad[:, None], 0.5, x)

    with np.errstate(divide="ignore"):
        out = np.sum(w1.log_w1(safe), axis=1)
        if nu == 1:
            out = out + np.sum(np.log(safe), axis=1)
        if mhat > 1:
            iu, ju = np.triu_indices(mhat, k=1)
            out = out + np.sum(np.log(np.abs(safe[:, ju] ** 2 - safe[:, iu] ** 2)), axis=1)

    mats = np.empty((x.shape[0], mhat, mhat))
    comp = w1.companion(safe)
    for i in range(mhat - 1):
        mats[:, i, :] = comp * safe ** (nu + 2 * i)
    mats[:, mhat - 1, :] = 1.0 if nu == 0 else theta1(w1, safe)
    sign, logdet = np.linalg.slogdet(mats)
    out = np.where(sign > 0, out + logdet, -np.inf)
    return np.where(bad, -np.inf, out)


# -- numeric normalization -------------------------------------------------------


def _ordered_tensor_value(
    log_density: Callable[[np.ndarray], np.ndarray],
    n: int,
    bounds: tuple[float, float],
    order: int,
    transform: bool,
) -> float:
    """Tensor Gauss-Legendre integral of exp(log_density) over the ordered box.

    Coordinates are generated by the iterated map u_i = u_{i-1} +
    (hi - u_{i-1}) t_i on t in (0,1)^n, whose Jacobian is prod (hi - u_{i-1});
    with ``transform`` the u are tan-substitution coordinates.
    """
    lo, hi = bounds
    g, gw = _leggauss(order)
    t = 0.5 * (g + 1.0)
    tw = 0.5 * gw

    grids = np.meshgrid(*([t] * n), indexing="ij")
    tmat = np.stack([gr.ravel() for gr in grids], axis=1)
    wgrids = np.meshgrid(*([tw] * n), indexing="ij")
    logwt = np.sum(np.log(np.stack([gr.ravel() for gr in wgrids], axis=1)), axis=1)

    u = np.empty_like(tmat)
    logjac = np.zeros(tmat.shape[0])
    prev = np.full(tmat.shape[0], lo)
    for i in range(n):
        span = hi - prev
        u[:, i] = prev + span * tmat[:, i]
        logjac += np.log(span)
        prev = u[:, i]

    if transform:
        xs = np.tan(u)
        logjac += -2.0 * np.sum(np.log(np.cos(u)), axis=1)
    else:
        xs = u

    logvals = np.asarray(log_density(xs), dtype=float) + logjac + logwt
    peak = float(np.max(logvals))
    if not np.isfinite(peak):
        return 0.0
    return float(np.exp(peak) * np.sum(np.exp(logvals - peak)))


_ORDER_LADDER = {
    1: [16, 24, 36, 54, 80],
    2: [8, 12, 18, 27, 40, 60],
    3: [8, 12, 18, 27, 40, 60],
    4: [8, 12, 18, 24, 32],
}


def normalize(
    log_density: Callable[[np.ndarray], np.ndarray],
    n: int,
    support: tuple[float, float],
    tol: float = 1e-7,
) -> float:
    """Integral of exp(log_density) over the ordered region lo < x_1 < ... < hi.

    ``log_density`` must accept a (batch, n) array of ascending rows.  The
    tensor order is escalated until two successive estimates agree to ``tol``
    relative; failing that raises NonConvergence.  Restricted to n <= 4.
    """
    if not 1 <= n <= 4:
        raise BadParameter("normalize supports 1 <= n <= 4")
    lo, hi = support
    if not lo < hi:
        raise BadParameter(f"empty support {support}")
    transform = not (np.isfinite(lo) and np.isfinite(hi))
    if transform:
        bounds = (
            math.atan(lo) if np.isfinite(lo) else -0.5 * math.pi,
            math.atan(hi) if np.isfinite(hi) else 0.5 * math.pi,
        )
    else:
        bounds = (float(lo), float(hi))

    prev = None
    for order in _ORDER_LADDER[n]:
        val = _ordered_tensor_value(log_density, n, bounds, order, transform)
        if prev is not None and abs(val - prev) <= tol * max(abs(val), 1e-300):
            return val
        prev = val
    raise NonConvergence(f"ordered integral did not settle at tol={tol}")
