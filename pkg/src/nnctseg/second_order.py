"""Ripley's K and L functions on rectangles, with CSR Monte Carlo envelopes.

Edge effects are handled with Ripley's isotropic correction: a pair at
distance d centred on point u is weighted by the reciprocal of the
fraction of the circle of radius d about u that lies inside the region.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from ._rng import replicate_rng
from .pattern import MarkedPattern, Region

__all__ = [
    "LCurve",
    "GridError",
    "default_grid",
    "isotropic_weights",
    "k_function",
    "k_cross",
    "l_univariate",
    "l_bivariate",
    "envelope",
    "MIN_ENVELOPE_SIMS",
]

MIN_ENVELOPE_SIMS = 39
DEFAULT_GRID_POINTS = 64


class GridError(ValueError):
    """Distance grid outside [0, shorter side / 4]."""


@dataclass(frozen=True, eq=False)
class LCurve:
    t_grid: np.ndarray
    l_minus_t: np.ndarray
    lo_95: np.ndarray | None = None
    hi_95: np.ndarray | None = None

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t", "l_minus_t", "lo95", "hi95"])
        lo = self.lo_95 if self.lo_95 is not None else [math.nan] * len(self.t_grid)
        hi = self.hi_95 if self.hi_95 is not None else [math.nan] * len(self.t_grid)
        for row in zip(self.t_grid, self.l_minus_t, lo, hi):
            w.writerow([f"{v:.10g}" for v in row])
        return buf.getvalue()

    def outside_fraction(self) -> float:
        """Fraction of grid points where the estimate leaves the envelope."""
        if self.lo_95 is None or self.hi_95 is None:
            raise ValueError("curve has no envelope")
        out = (self.l_minus_t < self.lo_95) | (self.l_minus_t > self.hi_95)
        return float(np.mean(out))


def max_distance(region: Region) -> float:
    return region.short_side / 4.0


def default_grid(region: Region, n_points: int = DEFAULT_GRID_POINTS) -> np.ndarray:
    return np.linspace(0.0, max_distance(region), n_points)


def _check_grid(t_grid, region: Region) -> np.ndarray:
    t = np.asarray(t_grid, dtype=float)
    if t.ndim != 1 or t.size == 0:
        raise GridError("distance grid must be a non-empty 1-d sequence")
    if t[0] < 0 or np.any(np.diff(t) < 0):
        raise GridError("distance grid must be non-negative and ascending")
    limit = max_distance(region)
    if t[-1] > limit * (1 + 1e-12):
        raise GridError(
            f"largest distance {t[-1]:g} exceeds a quarter of the shorter side ({limit:g})"
        )
    return t


def isotropic_weights(centers, dists, region: Region) -> np.ndarray:
    """Ripley isotropic edge-correction weights for circles about ``centers``."""
    c = np.asarray(centers, dtype=float).reshape(-1, 2)
    d = np.asarray(dists, dtype=float)
    edges = np.stack([
        c[:, 0] - region.x_min, region.x_max - c[:, 0],   # left, right
        c[:, 1] - region.y_min, region.y_max - c[:, 1],   # down, up
    ], axis=1)
    edges = np.maximum(edges, 0.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(d[:, None] > 0, edges / d[:, None], np.inf)
    # Half-angle of the arc cut off beyond each edge.
    half = np.where(ratio < 1.0, np.arccos(np.clip(ratio, -1.0, 1.0)), 0.0)
    ext = 2.0 * half.sum(axis=1)
    # Arcs beyond two adjacent edges overlap once the corner is inside the circle.
    for a, b in ((0, 2), (0, 3), (1, 2), (1, 3)):
        ext -= np.maximum(0.0, half[:, a] + half[:, b] - np.pi / 2)
    inside = 2.0 * np.pi - ext
    return 2.0 * np.pi / inside


def _accumulate(dists, weights, t_grid) -> np.ndarray:
    order = np.argsort(dists, kind="stable")
    d = dists[order]
    csum = np.concatenate([[0.0], np.cumsum(weights[order])])
    return csum[np.searchsorted(d, t_grid, side="right")]


def k_function(points, region: Region, t_grid) -> np.ndarray:
    """Univariate K-hat(t) with isotropic correction."""
    xy = np.asarray(points, dtype=float)
    n = len(xy)
    t = np.asarray(t_grid, dtype=float)
    if n < 2:
        raise ValueError("K function needs at least two points")
    pairs = cKDTree(xy).query_pairs(float(t[-1]), output_type="ndarray")
    if len(pairs) == 0:
        return np.zeros_like(t)
    i, j = pairs[:, 0], pairs[:, 1]
    d = np.sqrt(((xy[i] - xy[j]) ** 2).sum(axis=1))
    # Each unordered pair contributes once per endpoint acting as centre.
    w = np.concatenate([isotropic_weights(xy[i], d, region), isotropic_weights(xy[j], d, region)])
    acc = _accumulate(np.concatenate([d, d]), w, t)
    return region.area * acc / (n * (n - 1))


def k_cross(points_a, points_b, region: Region, t_grid) -> np.ndarray:
    """Cross-K-hat(t) with circles centred on ``points_a``."""
    a = np.asarray(points_a, dtype=float)
    b = np.asarray(points_b, dtype=float)
    t = np.asarray(t_grid, dtype=float)
    if len(a) == 0 or len(b) == 0:
        raise ValueError("cross K needs points in both sets")
    near = cKDTree(a).query_ball_tree(cKDTree(b), float(t[-1]))
    i = np.fromiter((k for k, lst in enumerate(near) for _ in lst), dtype=np.int64)
    j = np.fromiter((m for lst in near for m in lst), dtype=np.int64)
    if len(i) == 0:
        return np.zeros_like(t)
    d = np.sqrt(((a[i] - b[j]) ** 2).sum(axis=1))
    acc = _accumulate(d, isotropic_weights(a[i], d, region), t)
    return region.area * acc / (len(a) * len(b))


def _l_minus_t(k, t):
    return np.sqrt(np.maximum(k, 0.0) / np.pi) - t


def _select(pattern: MarkedPattern, class_sel):
    if class_sel in ("all", 0, None):
        return pattern.points
    cls = int(class_sel)
    if cls not in (1, 2):
        raise ValueError(f"class selector must be 'all', 1 or 2, got {class_sel!r}")
    return pattern.points[pattern.labels == cls]


def l_univariate(pattern: MarkedPattern, class_sel="all", t_grid=None) -> LCurve:
    t = _check_grid(default_grid(pattern.region) if t_grid is None else t_grid, pattern.region)
    xy = _select(pattern, class_sel)
    if len(xy) < 2:
        raise ValueError(f"class {class_sel!r} has fewer than two points")
    k = k_function(xy, pattern.region, t)
    return LCurve(t, _l_minus_t(k, t))


def l_bivariate(pattern: MarkedPattern, t_grid=None) -> LCurve:
    """Cross L-hat(t) - t, averaging the K estimates centred on each class."""
    t = _check_grid(default_grid(pattern.region) if t_grid is None else t_grid, pattern.region)
    a = pattern.points[pattern.labels == 1]
    b = pattern.points[pattern.labels == 2]
    if len(a) == 0 or len(b) == 0:
        raise ValueError("bivariate L needs both classes present")
    k = 0.5 * (k_cross(a, b, pattern.region, t) + k_cross(b, a, pattern.region, t))
    return LCurve(t, _l_minus_t(k, t))


_WHICH = {"uni-all": "all", "uni-1": 1, "uni-2": 2, "bi": "bi"}


def _curve(pattern, which, t):
    sel = _WHICH[which]
    if sel == "bi":
        return l_bivariate(pattern, t).l_minus_t
    return l_univariate(pattern, sel, t).l_minus_t


def envelope(pattern: MarkedPattern, which: str = "bi", n_sim: int = 99,
             t_grid=None, seed: int = 0) -> LCurve:
    """Estimate plus pointwise 2.5% / 97.5% bounds from CSR-independence simulations.

    Bounds are order statistics: with k = floor(0.025 (n_sim + 1)) the k-th
    smallest and k-th largest simulated values, so ``n_sim = 39`` gives the
    simulation minimum and maximum.
    """
    if which not in _WHICH:
        raise ValueError(f"which must be one of {sorted(_WHICH)}, got {which!r}")
    if n_sim < MIN_ENVELOPE_SIMS:
        raise ValueError(f"n_sim must be at least {MIN_ENVELOPE_SIMS}, got {n_sim}")
    t = _check_grid(default_grid(pattern.region) if t_grid is None else t_grid, pattern.region)
    observed = _curve(pattern, which, t)
    reg = pattern.region
    labels = np.sort(pattern.labels)
    lo = np.array([reg.x_min, reg.y_min])
    span = np.array([reg.width, reg.height])
    sims = np.empty((n_sim, len(t)))
    for i in range(n_sim):
        pts = lo + span * replicate_rng(seed, i).random((pattern.n, 2))
        sims[i] = _curve(MarkedPattern(pts, labels, reg), which, t)
    sims.sort(axis=0)
    k = max(1, int(math.floor(0.025 * (n_sim + 1))))
    return LCurve(t, observed, sims[k - 1], sims[n_sim - k])
