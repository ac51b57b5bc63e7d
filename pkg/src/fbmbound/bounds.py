"""Trajectory-dependent generalization bound.

    rademacher_bound = 12 diam / m * sqrt(ln 4 / H)
    total = risk + 24 zeta diam / m * sqrt(ln 4 / H)
                 + (zeta + 2 beta m) * sqrt(ln(1 / tau) / (2 m))

All logarithms are natural.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

from .errors import DomainError
from .fbm import check_hurst

__all__ = [
    "H_CLAMP",
    "BoundInputs",
    "BoundReport",
    "clamp_hurst",
    "rademacher_bound",
    "concentration_term",
    "full_bound",
]

H_CLAMP = 0.999
LOG4 = math.log(4.0)


def clamp_hurst(h_hat: float) -> tuple[float, bool]:
    """Map a raw estimate into (0, 1); returns ``(h, clamped)``."""
    h_hat = float(h_hat)
    if not math.isfinite(h_hat):
        raise DomainError(f"Hurst estimate is not finite: {h_hat}")
    if h_hat >= 1.0:
        warnings.warn(f"Hurst estimate {h_hat:.4f} >= 1 clamped to {H_CLAMP}", stacklevel=2)
        return H_CLAMP, True
    if h_hat <= 0.0:
        warnings.warn(f"Hurst estimate {h_hat:.4f} <= 0 clamped to {1 - H_CLAMP:g}", stacklevel=2)
        return 1.0 - H_CLAMP, True
    return h_hat, False


@dataclass(frozen=True)
class BoundInputs:
    diam: float
    m: int
    h: float
    zeta: float = 1.0
    beta: float = 0.0
    tau: float = 0.05
    empirical_risk: float = 0.0

    def __post_init__(self):
        vals = (self.diam, self.zeta, self.beta, self.tau, self.empirical_risk)
        if not all(math.isfinite(float(v)) for v in vals):
            raise DomainError("bound inputs must be finite")
        if self.diam < 0:
            raise DomainError(f"diam must be non-negative, got {self.diam}")
        if int(self.m) != self.m or self.m < 1:
            raise DomainError(f"m must be a positive integer, got {self.m}")
        check_hurst(self.h)
        if not self.zeta > 0:
            raise DomainError(f"zeta must be positive, got {self.zeta}")
        if self.beta < 0:
            raise DomainError(f"beta must be non-negative, got {self.beta}")
        if not (0.0 < self.tau < 1.0):
            raise DomainError(f"tau must lie strictly inside (0, 1), got {self.tau}")
        if self.empirical_risk < 0:
            raise DomainError(f"empirical risk must be non-negative, got {self.empirical_risk}")


@dataclass(frozen=True)
class BoundReport:
    rademacher_complexity: float
    rademacher_term: float
    concentration_term: float
    total: float
    clamped: bool = False


def rademacher_bound(diam: float, m: int, h: float) -> float:
    """Upper bound on the Rademacher complexity of the loss trajectory."""
    h = check_hurst(h)
    if diam < 0 or not math.isfinite(diam):
        raise DomainError(f"diam must be finite and non-negative, got {diam}")
    if m < 1:
        raise DomainError(f"m must be at least 1, got {m}")
    return 12.0 * diam / m * math.sqrt(LOG4 / h)


def concentration_term(zeta: float, beta: float, m: int, tau: float) -> float:
    return (zeta + 2.0 * beta * m) * math.sqrt(math.log(1.0 / tau) / (2.0 * m))


def full_bound(inputs: BoundInputs, clamped: bool = False) -> BoundReport:
    rad = rademacher_bound(inputs.diam, inputs.m, inputs.h)
    rad_term = 2.0 * inputs.zeta * rad
    conc = concentration_term(inputs.zeta, inputs.beta, inputs.m, inputs.tau)
    return BoundReport(
        rademacher_complexity=rad,
        rademacher_term=rad_term,
        concentration_term=conc,
        total=inputs.empirical_risk + rad_term + conc,
        clamped=clamped,
    )
