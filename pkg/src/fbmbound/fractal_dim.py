"""Box-counting dimension of point clouds and sampled trajectories."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import DomainError, EstimationError

__all__ = [
    "BoxDimEstimate",
    "as_cloud",
    "box_count",
    "coordinate_extent",
    "random_projection",
    "estimate_boxdim",
    "trajectory_scaling_regime",
]

# clouds wider than this are projected before counting
MAX_COUNT_DIM = 64
DEFAULT_PROJECT_DIM = 16


@dataclass
class BoxDimEstimate:
    dim_hat: float
    r_squared: float
    deltas: np.ndarray
    counts: np.ndarray
    projection_seed: Optional[int] = None
    projected_dim: Optional[int] = None

    @property
    def scales(self):
        return list(zip(self.deltas.tolist(), self.counts.tolist()))


def as_cloud(points) -> np.ndarray:
    """Validate and return an ``(n, d)`` float array."""
    x = np.asarray(points, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    if x.ndim != 2 or x.shape[0] < 1 or x.shape[1] < 1:
        raise DomainError(f"point cloud must be a non-empty n x d array, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise DomainError("point cloud has non-finite coordinates")
    return x


def coordinate_extent(cloud) -> float:
    x = as_cloud(cloud)
    return float(np.max(x.max(axis=0) - x.min(axis=0)))


def _count_cells(x: np.ndarray, origin: np.ndarray, delta: float) -> int:
    cells = np.floor((x - origin) / delta).astype(np.int64)
    cells = np.ascontiguousarray(cells)
    rows = cells.view(np.dtype((np.void, cells.dtype.itemsize * cells.shape[1])))
    return int(np.unique(rows).size)


def box_count(cloud, delta: float) -> int:
    """Number of occupied cells of a grid with side ``delta``.

    The grid is anchored at the coordinate-wise minimum of the cloud.
    """
    if not delta > 0:
        raise DomainError(f"delta must be positive, got {delta}")
    x = as_cloud(cloud)
    return _count_cells(x, x.min(axis=0), float(delta))


def random_projection(x: np.ndarray, k: int, seed: int) -> np.ndarray:
    """Project rows of ``x`` onto ``k`` random orthonormal directions."""
    d = x.shape[1]
    g = np.random.default_rng(seed).standard_normal((d, k))
    q, _ = np.linalg.qr(g)
    return x @ q


def estimate_boxdim(
    cloud,
    delta_min: Optional[float] = None,
    delta_max: Optional[float] = None,
    n_scales: int = 12,
    project_dim: Optional[int] = None,
    seed: int = 0,
) -> BoxDimEstimate:
    """Regress log N(delta) on log(1/delta) over a geometric delta schedule.

    Without explicit bounds the schedule spans ``[0.001 D, 0.1 D]`` with ``D``
    the largest coordinate extent.  Clouds of more than 64 dimensions (or any
    cloud when ``project_dim`` is set) are first projected onto a random
    orthonormal basis of ``project_dim`` (default 16) directions.
    """
    x = as_cloud(cloud)
    if x.shape[0] < 2:
        raise DomainError("need at least two points")
    proj_seed = None
    if project_dim is None and x.shape[1] > MAX_COUNT_DIM:
        project_dim = DEFAULT_PROJECT_DIM
    if project_dim is not None and project_dim < x.shape[1]:
        x = random_projection(x, int(project_dim), seed)
        proj_seed = seed
    extent = coordinate_extent(x)
    if extent == 0:
        raise EstimationError("all points coincide; box counts are constant")
    if delta_min is None:
        delta_min = 1e-3 * extent
    if delta_max is None:
        delta_max = 0.1 * extent
    if not (0 < delta_min < delta_max):
        raise DomainError(f"need 0 < delta_min < delta_max, got {delta_min}, {delta_max}")
    if n_scales < 3:
        raise DomainError(f"need at least 3 scales, got {n_scales}")

    deltas = np.geomspace(delta_min, delta_max, int(n_scales))
    origin = x.min(axis=0)
    counts = np.array([_count_cells(x, origin, d) for d in deltas])
    lx = np.log(1.0 / deltas)
    ly = np.log(counts.astype(float))
    if np.all(counts == counts[0]):
        # scales all exceed the cloud: zero slope, perfect fit
        return BoxDimEstimate(0.0, 1.0, deltas, counts, proj_seed, project_dim)
    slope, intercept = np.polyfit(lx, ly, 1)
    resid = ly - (slope * lx + intercept)
    ss_tot = np.sum((ly - ly.mean()) ** 2)
    r2 = 1.0 - np.sum(resid**2) / ss_tot
    return BoxDimEstimate(
        dim_hat=float(max(slope, 0.0)),
        r_squared=float(np.clip(r2, 0.0, 1.0)),
        deltas=deltas,
        counts=counts,
        projection_seed=proj_seed,
        projected_dim=project_dim,
    )


def trajectory_scaling_regime(path, lower: float = 5.0, upper: float = 0.1) -> tuple[float, float]:
    """Scale window for a sampled curve.

    Below the typical step length a sampled path looks like isolated points,
    and near the path extent it looks like a single blob.  The window runs
    from ``lower`` times the median step length to ``upper`` times the
    coordinate extent.
    """
    x = as_cloud(path)
    steps = np.linalg.norm(np.diff(x, axis=0), axis=1)
    step = float(np.median(steps))
    extent = coordinate_extent(x)
    lo, hi = lower * step, upper * extent
    if not (0 < lo < hi):
        raise EstimationError(
            f"path has no scaling regime: step {step:.3g} vs extent {extent:.3g}"
        )
    return lo, hi
