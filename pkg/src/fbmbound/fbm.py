"""Fractional Gaussian noise and fractional Brownian motion.

Three samplers are provided.  Davies-Harte (circulant embedding) is the
default and runs in O(n log n).  Hosking (Durbin-Levinson) and Cholesky are
O(n^2) and O(n^3) respectively and are kept as reference implementations:
given the same standard-normal innovations they produce the same sequence.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.linalg import toeplitz

from .errors import DomainError, InternalError

__all__ = [
    "METHODS",
    "FbmPath",
    "check_hurst",
    "derive_seed",
    "fbm_covariance",
    "fgn_autocovariance",
    "fgn_from_innovations",
    "sample_fgn",
    "fgn_to_fbm",
    "sample_fgn_multi",
    "sample_fbm_multi",
]

METHODS = ("davies_harte", "hosking", "cholesky")

# circulant eigenvalues below this are treated as a covariance bug
_EIG_TOL = -1e-10
_MASK64 = (1 << 64) - 1


def check_hurst(h) -> float:
    h = float(h)
    if not (0.0 < h < 1.0):
        raise DomainError(f"Hurst parameter must lie strictly inside (0, 1), got {h}")
    return h


def derive_seed(seed: int, index: int) -> int:
    """Mix a master seed and a component index into an independent 64-bit seed.

    Uses the splitmix64 finalizer so neighbouring (seed, index) pairs do not
    collide or correlate.
    """
    z = (int(seed) + (int(index) + 1) * 0x9E3779B97F4A7C15) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


@dataclass
class FbmPath:
    """A sampled trajectory on a uniform grid.

    ``values`` has shape ``(n + 1, d)`` and starts at the origin.
    """

    h: float
    dt: float
    values: np.ndarray
    seed: int = 0
    method: str = field(default="davies_harte")

    @property
    def n(self) -> int:
        return self.values.shape[0] - 1

    @property
    def d(self) -> int:
        return self.values.shape[1]

    @property
    def times(self) -> np.ndarray:
        return self.dt * np.arange(self.n + 1)


def fbm_covariance(t, s, h) -> float:
    """E[B_t B_s] = (t^{2H} + s^{2H} - |t - s|^{2H}) / 2."""
    h = check_hurst(h)
    t = float(t)
    s = float(s)
    if not (np.isfinite(t) and np.isfinite(s)):
        raise DomainError("times must be finite")
    if t < 0 or s < 0:
        raise DomainError(f"times must be non-negative, got t={t}, s={s}")
    two_h = 2.0 * h
    return 0.5 * (t**two_h + s**two_h - abs(t - s) ** two_h)


def fgn_autocovariance(lags, h) -> np.ndarray:
    """Autocovariance of unit-step fGn at integer lags."""
    k = np.abs(np.asarray(lags, dtype=float))
    two_h = 2.0 * check_hurst(h)
    return 0.5 * (np.abs(k + 1) ** two_h - 2.0 * k**two_h + np.abs(k - 1) ** two_h)


@lru_cache(maxsize=64)
def _circulant_sqrt_eigs(n: int, h: float) -> np.ndarray:
    gamma = fgn_autocovariance(np.arange(n + 1), h)
    row = np.concatenate([gamma, gamma[-2:0:-1]])
    eigs = np.fft.fft(row).real
    if eigs.min() < _EIG_TOL:
        raise InternalError(
            f"negative circulant eigenvalue {eigs.min():.3e} for n={n}, H={h}"
        )
    eigs = np.clip(eigs, 0.0, None)
    out = np.sqrt(eigs / (2 * n))
    out.setflags(write=False)
    return out


@lru_cache(maxsize=64)
def _cholesky_factor(n: int, h: float) -> np.ndarray:
    cov = toeplitz(fgn_autocovariance(np.arange(n), h))
    out = np.linalg.cholesky(cov)
    out.setflags(write=False)
    return out


def _hosking(z: np.ndarray, h: float) -> np.ndarray:
    # Durbin-Levinson: x_t = sum_j phi_{t,j} x_{t-j} + sqrt(v_t) z_t
    n = z.shape[0]
    gamma = fgn_autocovariance(np.arange(n), h)
    x = np.empty(n)
    x[0] = z[0] * np.sqrt(gamma[0])
    phi = np.zeros(n)
    v = gamma[0]
    for t in range(1, n):
        prev = phi[: t - 1].copy()
        kappa = (gamma[t] - prev @ gamma[t - 1 : 0 : -1]) / v
        phi[: t - 1] = prev - kappa * prev[::-1]
        phi[t - 1] = kappa
        v *= 1.0 - kappa * kappa
        x[t] = phi[:t] @ x[t - 1 :: -1] + np.sqrt(v) * z[t]
    return x


def fgn_from_innovations(z, h, method: str = "hosking") -> np.ndarray:
    """Map standard-normal innovations ``z`` to fGn by a triangular transform.

    Only the two triangular methods are accepted; both realise the unique
    lower-triangular square root of the fGn covariance, so they agree to
    rounding error on the same ``z``.
    """
    h = check_hurst(h)
    z = np.asarray(z, dtype=float)
    if z.ndim != 1 or z.size == 0:
        raise DomainError("innovations must be a non-empty 1-d sequence")
    if method == "hosking":
        return _hosking(z, h)
    if method == "cholesky":
        return _cholesky_factor(z.size, h) @ z
    raise DomainError(f"method {method!r} has no triangular innovation form")


def sample_fgn(n: int, h, method: str = "davies_harte", seed: int = 0) -> np.ndarray:
    """Draw ``n`` samples of unit-step fractional Gaussian noise.

    The output is a deterministic function of ``(n, h, method, seed)``.
    """
    h = check_hurst(h)
    n = int(n)
    if n < 1:
        raise DomainError(f"n must be at least 1, got {n}")
    rng = np.random.default_rng(seed)
    if method == "davies_harte":
        if n == 1:
            return rng.standard_normal(1)
        lam = _circulant_sqrt_eigs(n, h)
        w = lam * (rng.standard_normal(2 * n) + 1j * rng.standard_normal(2 * n))
        return np.fft.fft(w).real[:n]
    if method in ("hosking", "cholesky"):
        return fgn_from_innovations(rng.standard_normal(n), h, method)
    raise DomainError(f"unknown method {method!r}; expected one of {METHODS}")


def fgn_to_fbm(increments, dt: float, h, seed: int = 0, method: str = "davies_harte") -> FbmPath:
    """Cumulate unit-step fGn into an fBm path on a grid of step ``dt``.

    Increments are rescaled by ``dt**H`` (self-similarity) before summing.
    """
    h = check_hurst(h)
    inc = np.asarray(increments, dtype=float)
    if inc.ndim != 1 or inc.size == 0:
        raise DomainError("increments must be a non-empty 1-d sequence")
    if not dt > 0:
        raise DomainError(f"dt must be positive, got {dt}")
    values = np.zeros(inc.size + 1)
    np.cumsum(inc * dt**h, out=values[1:])
    return FbmPath(h=h, dt=float(dt), values=values[:, None], seed=seed, method=method)


def sample_fgn_multi(
    n: int,
    d: int,
    h,
    dt: float = 1.0,
    method: str = "davies_harte",
    seed: int = 0,
) -> np.ndarray:
    """``n x d`` matrix of fGn increments already scaled to step ``dt``.

    Column ``i`` is drawn with ``derive_seed(seed, i)``; these are exactly the
    increments cumulated by :func:`sample_fbm_multi`.
    """
    d = int(d)
    if d < 1:
        raise DomainError(f"dimension must be at least 1, got {d}")
    if not dt > 0:
        raise DomainError(f"dt must be positive, got {dt}")
    h = check_hurst(h)
    cols = [sample_fgn(n, h, method, derive_seed(seed, i)) * dt**h for i in range(d)]
    return np.column_stack(cols)


def sample_fbm_multi(
    n: int,
    d: int,
    h,
    dt: float = 1.0,
    method: str = "davies_harte",
    seed: int = 0,
) -> FbmPath:
    """Sample a ``d``-dimensional fBm with independent components.

    Component ``i`` is the scalar path drawn with ``derive_seed(seed, i)``.
    """
    inc = sample_fgn_multi(n, d, h, dt, method, seed)
    values = np.zeros((inc.shape[0] + 1, inc.shape[1]))
    np.cumsum(inc, axis=0, out=values[1:])
    return FbmPath(h=check_hurst(h), dt=float(dt), values=values, seed=seed, method=method)
