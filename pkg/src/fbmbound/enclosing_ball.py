"""Minimum enclosing balls and diameter estimates for loss-vector clouds.

``miniball_core_set`` is the working estimator and has no dimension-dependent
data structure, so it handles clouds in R^50000 as readily as in R^3.
``exact_ball_welzl`` is an exact oracle for d <= 3.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, UnsupportedDimensionError
from .fractal_dim import as_cloud

__all__ = [
    "Ball",
    "miniball_core_set",
    "exact_ball_welzl",
    "diameter_lower_bound",
    "max_pairwise_distance",
]


@dataclass
class Ball:
    center: np.ndarray
    radius: float
    eps: float = 0.0
    iterations: int = 0

    @property
    def diameter(self) -> float:
        return 2.0 * self.radius

    def contains(self, points, slack: float = 1e-12) -> bool:
        x = as_cloud(points)
        dist = np.linalg.norm(x - self.center, axis=1)
        return bool(np.all(dist <= self.radius * (1.0 + self.eps) + slack * max(self.radius, 1.0)))


def miniball_core_set(cloud, eps: float = 1e-3) -> Ball:
    """(1 + eps)-approximate minimum enclosing ball by Badoiu-Clarkson.

    Each step moves the center toward the current farthest point by
    ``1 / (k + 1)``.  The center stays a convex combination of the input with
    weights ``lam``, which gives the dual lower bound
    ``R*^2 >= sum_i lam_i |p_i - c|^2``; iteration stops as soon as the
    farthest distance is within ``1 + eps`` of that bound, and in any case
    after ``ceil(1 / eps^2)`` steps.  Distances are updated through the Gram
    matrix so each step costs O(n) regardless of dimension.
    """
    if not eps > 0:
        raise DomainError(f"eps must be positive, got {eps}")
    x = np.asarray(cloud, dtype=float)
    if x.size == 0:
        raise DomainError("cannot enclose an empty cloud")
    x = as_cloud(x)
    n = x.shape[0]
    shift = x.mean(axis=0)
    y = x - shift
    gram = y @ y.T
    sq = np.diag(gram).copy()

    lam = np.zeros(n)
    lam[0] = 1.0
    g_lam = gram[:, 0].copy()  # gram @ lam
    c_sq = sq[0]  # |c|^2 = lam^T gram lam
    bound = (1.0 + eps) ** 2
    max_iter = math.ceil(1.0 / eps**2)
    k = 1
    while True:
        dist2 = np.maximum(sq - 2.0 * g_lam + c_sq, 0.0)
        far = int(np.argmax(dist2))  # lowest index wins ties
        lower = float(lam @ dist2)
        if dist2[far] <= bound * lower or k > max_iter:
            center = lam @ y
            d = np.sqrt(np.sum((y - center) ** 2, axis=1))
            lower_exact = float(lam @ (d * d))
            if d.max() ** 2 <= bound * lower_exact or k > max_iter or d.max() == 0:
                break
        t = 1.0 / (k + 1)
        # c <- c + t (p_far - c)
        c_sq = (1 - t) ** 2 * c_sq + 2 * t * (1 - t) * g_lam[far] + t * t * sq[far]
        g_lam = (1 - t) * g_lam + t * gram[:, far]
        lam *= 1 - t
        lam[far] += t
        k += 1
    return Ball(center=center + shift, radius=float(d.max()), eps=float(eps), iterations=k - 1)


def _circumball(boundary: list) -> tuple[np.ndarray, float]:
    """Smallest ball with every point of ``boundary`` on its surface."""
    if not boundary:
        return None, -1.0
    p0 = boundary[0]
    if len(boundary) == 1:
        return p0.copy(), 0.0
    a = np.array([p - p0 for p in boundary[1:]])
    m = a @ a.T
    rhs = 0.5 * np.diag(m)
    coef, *_ = np.linalg.lstsq(m, rhs, rcond=None)
    center = p0 + coef @ a
    return center, float(np.linalg.norm(center - p0))


def _inside(p, center, radius) -> bool:
    if center is None:
        return False
    return np.linalg.norm(p - center) <= radius + 1e-12 * max(1.0, radius)


def _mtf_ball(points: list, end: int, boundary: list, dim: int):
    center, radius = _circumball(boundary)
    if len(boundary) == dim + 1:
        return center, radius
    i = 0
    while i < end:
        p = points[i]
        if not _inside(p, center, radius):
            center, radius = _mtf_ball(points, i, boundary + [p], dim)
            # move-to-front keeps hard points early in later passes
            points.insert(0, points.pop(i))
        i += 1
    return center, radius


def exact_ball_welzl(cloud, seed: int = 0) -> Ball:
    """Exact minimum enclosing ball for d <= 3 (Welzl, move-to-front).

    The input order is randomized with ``seed``; the result does not depend on
    it beyond rounding.
    """
    x = as_cloud(cloud)
    n, dim = x.shape
    if dim > 3:
        raise UnsupportedDimensionError(f"exact ball supports d <= 3, got d={dim}")
    if n > 10_000:
        raise DomainError(f"exact ball supports n <= 10000, got n={n}")
    order = np.random.default_rng(seed).permutation(n)
    points = [x[i] for i in order]
    center, radius = _mtf_ball(points, n, [], dim)
    # the circumsphere solve can leave radius a hair short of the farthest point
    radius = float(np.max(np.linalg.norm(x - center, axis=1)))
    return Ball(center=np.asarray(center, dtype=float), radius=radius, eps=0.0)


def diameter_lower_bound(cloud) -> float:
    """Two-sweep farthest-point estimate; never exceeds the true diameter."""
    x = as_cloud(cloud)
    if x.shape[0] < 2:
        raise DomainError("need at least two points")
    p = int(np.argmax(np.sum((x - x[0]) ** 2, axis=1)))
    d2 = np.sum((x - x[p]) ** 2, axis=1)
    return float(np.sqrt(d2.max()))


def max_pairwise_distance(cloud) -> float:
    """Brute-force diameter, O(n^2 d)."""
    x = as_cloud(cloud)
    sq = np.sum(x * x, axis=1)
    d2 = sq[:, None] + sq[None, :] - 2.0 * (x @ x.T)
    i, j = np.unravel_index(np.argmax(d2), d2.shape)
    return float(np.linalg.norm(x[i] - x[j]))
