"""Regularised incomplete beta function and Beta-CDF fits to relative-volume curves."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import TYPE_CHECKING

import numpy as np
from scipy.optimize import minimize
from scipy.special import gammaln

if TYPE_CHECKING:
    from .montecarlo import EmpiricalCurve

_CF_MAX_ITER = 400
_CF_EPS = 1e-15
_TINY = 1e-300


class FitError(ValueError):
    """The curve does not determine a Beta CDF fit."""


def _log_beta_prefactor(x, a, b):
    return gammaln(a + b) - gammaln(a) - gammaln(b) + a * np.log(x) + b * np.log1p(-x)


def _betacf(a, b, x):
    """Continued fraction for I_x(a, b) (modified Lentz). Returns (value, converged)."""
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = np.ones_like(x)
    d = 1.0 - qab * x / qap
    d = np.where(np.abs(d) < _TINY, _TINY, d)
    d = 1.0 / d
    h = d.copy()
    done = np.zeros(x.shape, dtype=bool)
    for m in range(1, _CF_MAX_ITER + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        d = np.where(np.abs(d) < _TINY, _TINY, d)
        c = 1.0 + aa / c
        c = np.where(np.abs(c) < _TINY, _TINY, c)
        d = 1.0 / d
        h = np.where(done, h, h * d * c)
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        d = np.where(np.abs(d) < _TINY, _TINY, d)
        c = 1.0 + aa / c
        c = np.where(np.abs(c) < _TINY, _TINY, c)
        d = 1.0 / d
        delta = d * c
        h = np.where(done, h, h * delta)
        done |= np.abs(delta - 1.0) < _CF_EPS
        if done.all():
            break
    return h, done


def _series(x, a, b, max_terms=20000):
    """Power series for I_x(a, b); slow near x = 1 but always convergent for x < 1."""
    term = 1.0
    total = 1.0 / a
    for n in range(1, max_terms):
        term *= (n - b) * x / n
        contrib = term / (a + n)
        total += contrib
        if abs(contrib) < 1e-17 * abs(total):
            break
    log_pre = math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b) + a * math.log(x)
    return math.exp(log_pre) * total


def regularized_incomplete_beta(x, alpha, beta):
    """Regularised incomplete beta ``I_x(alpha, beta)``, the Beta(alpha, beta) CDF.

    Continued fraction on whichever of ``x`` / ``1 - x`` converges faster,
    with a power-series fallback for points where it does not converge.
    Broadcasts over array inputs; returns a float for scalar input.
    """
    shape = np.broadcast(np.asarray(x), np.asarray(alpha), np.asarray(beta)).shape
    x_arr, a_arr, b_arr = np.broadcast_arrays(
        np.asarray(x, dtype=float), np.asarray(alpha, dtype=float), np.asarray(beta, dtype=float)
    )
    if np.any(~np.isfinite(x_arr)) or np.any((x_arr < 0) | (x_arr > 1)):
        raise ValueError("x must lie in [0, 1]")
    if np.any(~(a_arr > 0)) or np.any(~(b_arr > 0)):
        raise ValueError("alpha and beta must be positive")
    x_arr, a_arr, b_arr = (np.array(v, dtype=float).reshape(-1) for v in (x_arr, a_arr, b_arr))
    out = np.empty_like(x_arr)
    out[x_arr == 0] = 0.0
    out[x_arr == 1] = 1.0
    inner = (x_arr > 0) & (x_arr < 1)
    if inner.any():
        x_i, a_i, b_i = x_arr[inner], a_arr[inner], b_arr[inner]
        flip = x_i > (a_i + 1.0) / (a_i + b_i + 2.0)
        xs = np.where(flip, 1.0 - x_i, x_i)
        as_ = np.where(flip, b_i, a_i)
        bs = np.where(flip, a_i, b_i)
        cf, ok = _betacf(as_, bs, xs)
        front = np.exp(_log_beta_prefactor(xs, as_, bs))
        val = front * cf / as_
        if not ok.all():
            for j in np.flatnonzero(~ok):
                val[j] = _series(xs[j], as_[j], bs[j])
        out[inner] = np.where(flip, 1.0 - val, val)
    out = np.clip(out, 0.0, 1.0).reshape(shape)
    return float(out) if out.ndim == 0 else out


def small_eps_coefficient(alpha: float, beta: float) -> float:
    """Leading coefficient ``Gamma(a+b) / (a Gamma(a) Gamma(b))`` of the Beta CDF at 0."""
    if not (alpha > 0 and beta > 0):
        raise ValueError("alpha and beta must be positive")
    return math.exp(math.lgamma(alpha + beta) - math.log(alpha) - math.lgamma(alpha) - math.lgamma(beta))


def small_eps_approximant(epsilon, alpha: float, beta: float):
    """``c * epsilon**alpha``, the small-tolerance power law of the Beta CDF."""
    return small_eps_coefficient(alpha, beta) * np.asarray(epsilon, dtype=float) ** alpha


@dataclass(frozen=True)
class BetaFitResult:
    alpha: float
    beta: float
    rmse: float
    small_eps_coeff: float
    objective: float
    n_points: int
    loss: str = "inverse-CI-width weighted least squares on the CDF"

    def to_dict(self) -> dict:
        return asdict(self)


MULTISTART_GRID = (0.5, 1.0, 2.0, 4.0, 8.0)
_LOG_BOUNDS = (math.log(1e-3), math.log(1e3))


def _objective(params, eps, y, w):
    a, b = np.exp(params)
    r = regularized_incomplete_beta(eps, a, b) - y
    return float(np.sum(w * r * r))


def fit_beta_points(eps, y, weights=None, init: tuple[float, float] | None = None) -> BetaFitResult:
    """Fit ``I_eps(alpha, beta)`` to points ``(eps, y)`` by weighted least squares.

    Bounded Nelder-Mead in ``(log alpha, log beta)``, started from every point of
    :data:`MULTISTART_GRID` squared, or only from ``init`` when given.
    """
    eps = np.asarray(eps, dtype=float)
    y = np.asarray(y, dtype=float)
    if eps.shape != y.shape or eps.ndim != 1:
        raise FitError("eps and y must be equal-length vectors")
    if np.unique(eps).size < 5:
        raise FitError(f"need at least 5 distinct epsilon points, got {np.unique(eps).size}")
    if np.all(y == 0) or np.all(y == 1):
        raise FitError("curve is constant (all zero or all one); the fit is under-determined")
    w = np.ones_like(eps) if weights is None else np.asarray(weights, dtype=float)
    w = w / w.sum()

    starts = [init] if init is not None else [(a, b) for a in MULTISTART_GRID for b in MULTISTART_GRID]
    bounds = [_LOG_BOUNDS, _LOG_BOUNDS]
    candidates = []
    for a0, b0 in starts:
        res = minimize(
            _objective,
            x0=np.log([a0, b0]),
            args=(eps, y, w),
            method="Nelder-Mead",
            bounds=bounds,
            options={"xatol": 1e-10, "fatol": 1e-16, "maxiter": 4000, "maxfev": 8000},
        )
        a, b = (float(v) for v in np.exp(res.x))
        rmse = float(np.sqrt(np.mean((regularized_incomplete_beta(eps, a, b) - y) ** 2)))
        candidates.append((float(res.fun), rmse, a, b))
    obj, rmse, a, b = min(candidates)
    return BetaFitResult(a, b, rmse, small_eps_coefficient(a, b), obj, int(eps.size))


def fit_beta_cdf(curve: EmpiricalCurve, init: tuple[float, float] | None = None) -> BetaFitResult:
    """Fit a Beta CDF to the hit fractions of ``curve``, weighting by inverse CI width."""
    if curve.trials < 1:
        raise FitError("curve has no trials")
    width = np.asarray(curve.ci_high) - np.asarray(curve.ci_low)
    width = np.maximum(width, 1e-12)
    return fit_beta_points(curve.epsilons, curve.fractions, 1.0 / width, init=init)
