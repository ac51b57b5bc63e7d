"""Competing generalization indicators.

* tail index of gradient noise (block log-moment estimator of the stable
  index, which estimates the upper Blumenthal-Getoor index for stable noise);
* power-law index of the weight-matrix eigenvalue spectrum (Hill estimator);
* three norm-based capacity measures.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import DomainError, EstimationError, NumericalError

__all__ = [
    "IndicatorReport",
    "estimate_bg_index",
    "sgn_bg_index",
    "esd_eigenvalues",
    "power_law_index",
    "mean_power_law_index",
    "spectral_norm",
    "norm_measures",
]


@dataclass
class IndicatorReport:
    bg_index: Optional[float] = None
    power_law_index: Optional[float] = None
    spectral_product: Optional[float] = None
    frobenius_product: Optional[float] = None
    spectral_sum_log: Optional[float] = None
    frobenius_sum_log: Optional[float] = None
    overflow: bool = False


def estimate_bg_index(series: Sequence[float], k1: Optional[int] = None) -> float:
    """Stable-index estimate from block sums.

    With ``Y_i`` the sums of ``k2`` consecutive blocks of size ``k1``,
    ``1/alpha = (mean ln|Y| - mean ln|X|) / ln k1``.  Samples past ``k1 * k2``
    are ignored.  Zero-valued samples or block sums are skipped; more than 20%
    skipped is an error.  The result is clamped to (0, 2].
    """
    x = np.asarray(series, dtype=float).ravel()
    n = x.size
    if k1 is None:
        k1 = int(math.isqrt(n))
    k1 = int(k1)
    if k1 < 2:
        raise DomainError(f"block size k1 must be at least 2, got {k1}")
    k2 = n // k1
    if k2 < 20:
        raise DomainError(f"need at least 20 blocks of size {k1}, have {k2}")
    x = x[: k1 * k2]
    if not np.all(np.isfinite(x)):
        raise DomainError("series contains non-finite values")
    y = x.reshape(k2, k1).sum(axis=1)
    ax, ay = np.abs(x), np.abs(y)
    okx, oky = ax > 0, ay > 0
    if (~okx).sum() > 0.2 * x.size or (~oky).sum() > 0.2 * k2:
        raise EstimationError("more than 20% of samples or block sums are zero")
    inv_alpha = (np.mean(np.log(ay[oky])) - np.mean(np.log(ax[okx]))) / math.log(k1)
    if inv_alpha <= 0.5:
        return 2.0
    return float(1.0 / inv_alpha)


def sgn_bg_index(sgn: np.ndarray, k1: Optional[int] = None) -> float:
    """Tail index of a K x c gradient log: center each coordinate, then pool."""
    sgn = np.asarray(sgn, dtype=float)
    centered = sgn - sgn.mean(axis=0, keepdims=True)
    return estimate_bg_index(centered.T.ravel(), k1)


def esd_eigenvalues(w) -> np.ndarray:
    """Eigenvalues of W^T W (or W W^T, the smaller), descending."""
    w = np.asarray(w, dtype=float)
    if w.ndim != 2 or min(w.shape) < 1:
        raise DomainError(f"weight matrix must be 2-d and non-empty, got shape {w.shape}")
    sv = np.linalg.svd(w, compute_uv=False)
    ev = sv * sv
    if not np.all(np.isfinite(ev)):
        raise NumericalError("non-finite singular values")
    return ev


def power_law_index(eigenvalues: Sequence[float], tail_fraction: float = 0.1) -> float:
    """Hill estimate of the density exponent of the upper spectral tail.

    For a density ``p(x) ~ x^{-alpha}`` returns
    ``1 + k / sum_{i<=k} ln(x_(i) / x_(k+1))`` over the ``k`` largest values.
    """
    ev = np.asarray(eigenvalues, dtype=float)
    ev = np.sort(ev[ev > 0])[::-1]
    if ev.size < 20:
        raise DomainError(f"need at least 20 positive eigenvalues, got {ev.size}")
    if not (0 < tail_fraction < 1):
        raise DomainError(f"tail_fraction must lie in (0, 1), got {tail_fraction}")
    k = min(math.ceil(tail_fraction * ev.size), ev.size - 1)
    logs = np.log(ev[:k] / ev[k])
    s = float(logs.sum())
    if s <= 0:
        raise EstimationError("upper tail is flat; power-law index undefined")
    return 1.0 + k / s


def mean_power_law_index(layers: Sequence, tail_fraction: float = 0.1) -> Optional[float]:
    """Average power-law index over layers with at least 20 eigenvalues."""
    vals = []
    for w in layers:
        ev = esd_eigenvalues(w)
        if np.count_nonzero(ev > 0) < 20:
            continue
        try:
            vals.append(power_law_index(ev, tail_fraction))
        except EstimationError:
            continue
    return float(np.mean(vals)) if vals else None


def spectral_norm(w, tol: float = 1e-8, max_iter: int = 10_000) -> float:
    """Largest singular value by power iteration on W^T W.

    Starts from the normalized all-ones vector and stops when successive
    Rayleigh quotients agree to relative ``tol``.
    """
    w = np.asarray(w, dtype=float)
    if w.ndim != 2:
        raise DomainError("weight matrix must be 2-d")
    if not np.any(w):
        return 0.0
    # iterate on W / max|W| so W^T W neither underflows nor overflows
    scale = float(np.max(np.abs(w)))
    w = w / scale
    v = np.ones(w.shape[1]) / math.sqrt(w.shape[1])
    prev = None
    for attempt in range(2):
        for _ in range(max_iter):
            u = w.T @ (w @ v)
            norm = float(np.linalg.norm(u))
            if norm == 0.0:
                break
            rq = float(v @ u)
            v = u / norm
            if prev is not None and abs(rq - prev) <= tol * rq:
                return scale * math.sqrt(rq)
            prev = rq
        else:
            raise NumericalError(
                f"power iteration did not converge in {max_iter} steps", last_iterate=v
            )
        # start vector was in the null space; retry from a fixed random vector
        v = np.random.default_rng(0).standard_normal(w.shape[1])
        v /= np.linalg.norm(v)
        prev = None
    raise NumericalError("power iteration stuck in the null space", last_iterate=v)


def norm_measures(layers: Sequence) -> IndicatorReport:
    """Product of spectral norms, product of Frobenius norms, sum of log spectral norms."""
    if len(layers) < 1:
        raise DomainError("need at least one layer")
    spec = [spectral_norm(w) for w in layers]
    frob = [float(np.linalg.norm(np.asarray(w, dtype=float))) for w in layers]
    with np.errstate(divide="ignore"):
        spec_log = float(np.sum(np.log(spec)))
        frob_log = float(np.sum(np.log(frob)))
    sp = math.prod(spec)
    fp = math.prod(frob)
    overflow = not (math.isfinite(sp) and math.isfinite(fp))
    return IndicatorReport(
        spectral_product=None if overflow else sp,
        frobenius_product=None if overflow else fp,
        spectral_sum_log=spec_log,
        frobenius_sum_log=frob_log,
        overflow=overflow,
    )
