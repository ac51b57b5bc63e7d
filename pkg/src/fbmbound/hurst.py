"""Rescaled-range (R/S) estimation of the Hurst parameter.

Scalar series go through :func:`estimate_hurst_rs`.  Gradient-noise logs are
K x d matrices; :func:`estimate_hurst_from_vectors` estimates each coordinate
separately and averages.  All column work is vectorized through
:func:`_rs_columns` so the scalar and matrix paths share one implementation.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import DomainError, EstimationError

__all__ = [
    "SeriesMatrix",
    "HurstEstimate",
    "rescaled_range",
    "default_min_window",
    "window_schedule",
    "estimate_hurst_rs",
    "estimate_hurst_from_vectors",
]

KINDS = ("sgn", "loss_vectors", "generic")


@dataclass
class SeriesMatrix:
    """K x d matrix of per-iteration vectors (one row per iteration)."""

    data: np.ndarray
    kind: str = "generic"

    def __post_init__(self):
        data = np.asarray(self.data, dtype=float)
        if data.ndim == 1:
            data = data[:, None]
        if data.ndim != 2:
            raise DomainError("series matrix must be two-dimensional")
        if data.shape[0] < 2 or data.shape[1] < 1:
            raise DomainError(f"series matrix needs K >= 2 rows and d >= 1 columns, got {data.shape}")
        if not np.all(np.isfinite(data)):
            raise DomainError("series matrix contains non-finite entries")
        if self.kind not in KINDS:
            raise DomainError(f"unknown series kind {self.kind!r}")
        self.data = data

    @property
    def rows(self) -> int:
        return self.data.shape[0]

    @property
    def cols(self) -> int:
        return self.data.shape[1]


@dataclass
class HurstEstimate:
    h_hat: float
    stderr: float
    n_windows: int
    per_coordinate: Optional[np.ndarray] = None
    windows: Optional[np.ndarray] = None
    rs_values: Optional[np.ndarray] = None


def _rs_columns(x: np.ndarray, window: int) -> np.ndarray:
    """Mean R/S over disjoint blocks for every row of ``x`` (shape c x K).

    Returns NaN for rows whose blocks are all degenerate.
    """
    c, k = x.shape
    n_blocks = k // window
    blocks = x[:, : n_blocks * window].reshape(c, n_blocks, window)
    dev = blocks - blocks.mean(axis=2, keepdims=True)
    z = np.cumsum(dev, axis=2)
    r = z.max(axis=2) - z.min(axis=2)
    s = np.sqrt(np.mean(dev * dev, axis=2))
    # blocks with S == 0 are skipped
    ok = s > 0
    ratio = np.where(ok, r / np.where(ok, s, 1.0), 0.0)
    counts = ok.sum(axis=1)
    with np.errstate(invalid="ignore", divide="ignore"):
        return np.where(counts > 0, ratio.sum(axis=1) / counts, np.nan)


def rescaled_range(series: Sequence[float], window: int) -> float:
    """Mean rescaled range over the disjoint blocks of length ``window``."""
    x = np.asarray(series, dtype=float)
    window = int(window)
    if window < 8:
        raise DomainError(f"window must be at least 8, got {window}")
    if x.ndim != 1 or x.size < window:
        raise DomainError(f"series of length {x.size} is shorter than window {window}")
    value = _rs_columns(x[None, :], window)[0]
    if not np.isfinite(value):
        raise EstimationError("every block has zero standard deviation")
    return float(value)


def default_min_window(length: int) -> int:
    """Smallest window used when the caller does not choose one.

    The smallest windows carry most of the small-sample R/S bias, so long
    series start at ``length // 128`` (never below 8).
    """
    return max(8, int(length) // 128)


def window_schedule(length: int, min_window: Optional[int] = None, max_window: Optional[int] = None) -> np.ndarray:
    """Geometric window sizes from ``min_window`` to ``max_window`` with ratio 2."""
    if min_window is None:
        min_window = default_min_window(length)
    if max_window is None:
        max_window = length // 2
    max_window = min(int(max_window), length)
    windows = []
    w = int(min_window)
    while w <= max_window:
        windows.append(w)
        w *= 2
    return np.array(windows, dtype=int)


def _fit_loglog(windows: np.ndarray, rs: np.ndarray) -> tuple[float, float]:
    lx = np.log(windows.astype(float))
    ly = np.log(rs)
    n = lx.size
    mx = lx.mean()
    sxx = np.sum((lx - mx) ** 2)
    slope = np.sum((lx - mx) * (ly - ly.mean())) / sxx
    if n > 2:
        resid = ly - ly.mean() - slope * (lx - mx)
        stderr = float(np.sqrt(np.sum(resid**2) / (n - 2) / sxx))
    else:
        stderr = 0.0
    return float(slope), stderr


def _hurst_columns(x: np.ndarray, min_window: Optional[int], max_window: Optional[int]):
    """Per-row slope and stderr for ``x`` of shape c x K."""
    windows = window_schedule(x.shape[1], min_window, max_window)
    if windows.size < 3:
        raise EstimationError(
            f"only {windows.size} windows fit in a series of length {x.shape[1]}; need 3"
        )
    rs = np.column_stack([_rs_columns(x, w) for w in windows])
    return windows, rs


def estimate_hurst_rs(
    series: Sequence[float],
    min_window: Optional[int] = None,
    max_window: Optional[int] = None,
) -> HurstEstimate:
    """Hurst exponent as the log-log slope of R/S against window size.

    Windows double from ``min_window`` (default :func:`default_min_window`) up
    to ``max_window`` (default half the series length).  The slope is not clamped; trended input can give values
    above one.
    """
    x = np.asarray(series, dtype=float)
    if x.ndim != 1 or x.size < 32:
        raise DomainError(f"need a 1-d series of length >= 32, got shape {x.shape}")
    if min_window is not None and min_window < 8:
        raise DomainError(f"min_window must be at least 8, got {min_window}")
    windows, rs = _hurst_columns(x[None, :], min_window, max_window)
    usable = np.isfinite(rs[0]) & (rs[0] > 0)
    if usable.sum() < 3:
        raise EstimationError(f"only {int(usable.sum())} usable windows; need 3")
    slope, stderr = _fit_loglog(windows[usable], rs[0, usable])
    return HurstEstimate(
        h_hat=slope,
        stderr=stderr,
        n_windows=int(usable.sum()),
        windows=windows[usable],
        rs_values=rs[0, usable],
    )


def estimate_hurst_from_vectors(
    m: SeriesMatrix,
    strategy: str = "per_coordinate_mean",
    count: Optional[int] = None,
    seed: int = 0,
    min_window: Optional[int] = None,
    max_window: Optional[int] = None,
) -> HurstEstimate:
    """Average per-coordinate R/S Hurst estimates of a K x d series matrix.

    ``strategy="subsample"`` first draws ``count`` distinct columns with the
    given seed.  Coordinates whose estimate fails (constant series) are
    dropped; if more than half fail, the whole estimate fails.
    """
    if not isinstance(m, SeriesMatrix):
        m = SeriesMatrix(m)
    if m.kind not in ("sgn", "generic"):
        raise DomainError(f"cannot estimate H from a {m.kind!r} matrix")
    if m.rows < 32:
        raise DomainError(f"need at least 32 iterations, got {m.rows}")
    data = m.data
    if strategy == "subsample":
        if count is None or count < 1:
            raise DomainError("subsample strategy needs a positive count")
        if count > m.cols:
            raise DomainError(f"cannot draw {count} of {m.cols} coordinates")
        idx = np.sort(np.random.default_rng(seed).choice(m.cols, size=count, replace=False))
        data = data[:, idx]
    elif strategy != "per_coordinate_mean":
        raise DomainError(f"unknown strategy {strategy!r}")

    x = np.ascontiguousarray(data.T)
    windows, rs = _hurst_columns(x, min_window, max_window)
    per = np.full(x.shape[0], np.nan)
    errs = np.full(x.shape[0], np.nan)
    for i in range(x.shape[0]):
        usable = np.isfinite(rs[i]) & (rs[i] > 0)
        if usable.sum() >= 3:
            per[i], errs[i] = _fit_loglog(windows[usable], rs[i, usable])
    ok = np.isfinite(per)
    if ok.sum() * 2 < per.size:
        raise EstimationError(
            f"{per.size - int(ok.sum())} of {per.size} coordinate estimates failed"
        )
    vals = per[ok]
    if vals.size > 1:
        stderr = float(vals.std(ddof=1) / np.sqrt(vals.size))
    else:
        stderr = float(errs[ok][0])
    return HurstEstimate(
        h_hat=float(vals.mean()),
        stderr=stderr,
        n_windows=int(windows.size),
        per_coordinate=per,
        windows=windows,
        rs_values=np.nanmean(rs[ok], axis=0),
    )
