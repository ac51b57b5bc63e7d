"""Euler-Maruyama integration of dW = -mu(W) dt + sigma dB^H."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import DomainError, IntegrationError
from .fbm import FbmPath, check_hurst, sample_fgn_multi
from .fractal_dim import BoxDimEstimate, estimate_boxdim, trajectory_scaling_regime

__all__ = ["Drift", "SdeConfig", "integrate", "trajectory_dimension_experiment"]

DRIFT_LIMIT = 1e6


@dataclass(frozen=True)
class Drift:
    """Gradient field of a simple potential.

    ``zero``: mu = 0.  ``linear``: mu = rate * w.  ``double_well``: the
    coordinate-wise gradient of a * (w^2 - b)^2, i.e. 4 a w (w^2 - b).
    """

    kind: str = "zero"
    rate: float = 1.0
    a: float = 1.0
    b: float = 1.0

    def __post_init__(self):
        if self.kind not in ("zero", "linear", "double_well"):
            raise DomainError(f"unknown drift {self.kind!r}")

    def __call__(self, w: np.ndarray) -> np.ndarray:
        if self.kind == "zero":
            return np.zeros_like(w)
        if self.kind == "linear":
            return self.rate * w
        return 4.0 * self.a * w * (w * w - self.b)


@dataclass
class SdeConfig:
    drift: Drift = field(default_factory=Drift)
    sigma: float = 1.0
    h: float = 0.5
    dt: float = 1e-3
    steps: int = 1000
    w0: np.ndarray = field(default_factory=lambda: np.zeros(1))
    seed: int = 0
    method: str = "davies_harte"

    def __post_init__(self):
        check_hurst(self.h)
        self.w0 = np.atleast_1d(np.asarray(self.w0, dtype=float))
        if self.w0.ndim != 1:
            raise DomainError("w0 must be a vector")
        if self.sigma < 0:
            raise DomainError(f"sigma must be non-negative, got {self.sigma}")
        if not self.dt > 0:
            raise DomainError(f"dt must be positive, got {self.dt}")
        if self.steps < 1:
            raise DomainError(f"steps must be at least 1, got {self.steps}")


def integrate(config: SdeConfig) -> FbmPath:
    """Return the ``(steps + 1) x d`` Euler-Maruyama trajectory.

    The noise is the fBm path :func:`sample_fbm_multi` draws for the same
    ``(steps, d, h, dt, method, seed)``, so zero drift with unit diffusion
    reproduces ``w0 + path`` exactly.
    """
    c = config
    d = c.w0.size
    inc = sample_fgn_multi(c.steps, d, c.h, c.dt, c.method, c.seed)
    if c.drift.kind == "zero":
        # closed form: no drift means the recursion is a cumulative sum
        noise = np.zeros((c.steps + 1, d))
        np.cumsum(inc, axis=0, out=noise[1:])
        values = c.w0 + c.sigma * noise
    else:
        inc = c.sigma * inc
        values = np.empty((c.steps + 1, d))
        values[0] = c.w0
        w = c.w0.copy()
        for k in range(c.steps):
            mu = c.drift(w)
            if not np.all(np.isfinite(mu)) or np.max(np.abs(mu)) > DRIFT_LIMIT:
                raise IntegrationError(f"drift exceeded {DRIFT_LIMIT:g} at step {k}", step=k)
            w = w - mu * c.dt + inc[k]
            values[k + 1] = w
    return FbmPath(h=c.h, dt=c.dt, values=values, seed=c.seed, method=c.method)


def trajectory_dimension_experiment(
    h,
    d: int = 3,
    steps: int = 100_000,
    seed: int = 0,
    n_scales: int = 12,
    method: str = "davies_harte",
    regime: Optional[tuple] = None,
) -> BoxDimEstimate:
    """Box-counting dimension of a zero-drift, unit-diffusion trajectory on [0, 1].

    The image of fBm in R^d has dimension min(d, 1/H), so ``1/h < d`` is
    required.
    """
    h = check_hurst(h)
    if 1.0 / h >= d:
        raise DomainError(f"need 1/H < d; got H={h}, d={d}")
    cfg = SdeConfig(drift=Drift("zero"), sigma=1.0, h=h, dt=1.0 / steps, steps=steps,
                    w0=np.zeros(d), seed=seed, method=method)
    path = integrate(cfg).values
    lo, hi = regime if regime is not None else trajectory_scaling_regime(path)
    return estimate_boxdim(path, lo, hi, n_scales)
