"""Nearest-neighbor digraph of a planar point set and its Q/R statistics."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from .pattern import MarkedPattern

__all__ = [
    "GeometryError",
    "NnDigraph",
    "nearest_neighbors",
    "build_nn_digraph",
    "shared_nn_count",
    "reflexive_count",
    "q_decomposition",
]

_N_CANDIDATES = 8


class GeometryError(RuntimeError):
    """Internal inconsistency in the nearest-neighbor structure."""


def _brute_nn(xy: np.ndarray, i: int) -> int:
    d2 = (xy[:, 0] - xy[i, 0]) ** 2 + (xy[:, 1] - xy[i, 1]) ** 2
    d2[i] = np.inf
    return int(np.flatnonzero(d2 == d2.min())[0])


def nearest_neighbors(points) -> tuple[np.ndarray, np.ndarray]:
    """Exact Euclidean nearest neighbor of every point.

    Ties go to the lowest index; a point is never its own neighbor, though
    a coincident point may be (at distance 0). Returns ``(index, distance)``.
    """
    xy = np.ascontiguousarray(points, dtype=float)
    n = len(xy)
    if n < 2:
        raise ValueError("nearest neighbors need at least two points")
    k = min(n, _N_CANDIDATES)
    _, cand = cKDTree(xy).query(xy, k=k)
    rows = np.arange(n)[:, None]
    d2 = ((xy[cand] - xy[:, None, :]) ** 2).sum(axis=2)
    d2[cand == rows] = np.inf
    best = d2.min(axis=1)
    tied = d2 == best[:, None]
    # Among tied candidates take the lowest point index.
    masked = np.where(tied, cand, n)
    nn = masked.min(axis=1)

    if k < n:
        # If every returned candidate ties with the best, a further tied point
        # (or the point itself, for heavy duplication) may lie beyond the
        # candidate list; settle those rows exhaustively.
        unresolved = np.flatnonzero(tied.sum(axis=1) + (cand == rows).sum(axis=1) >= k)
        for i in unresolved:
            nn[i] = _brute_nn(xy, int(i))

    dist = np.sqrt(((xy[nn] - xy) ** 2).sum(axis=1))
    return nn.astype(np.int64), dist


def shared_nn_count(in_degree) -> int:
    d = np.asarray(in_degree, dtype=np.int64)
    return int((d * (d - 1)).sum())


def reflexive_count(nn_index) -> int:
    nn = np.asarray(nn_index)
    return int(np.count_nonzero(nn[nn] == np.arange(len(nn))))


@dataclass(frozen=True, eq=False)
class NnDigraph:
    """One out-edge per point to its nearest neighbor.

    ``q`` counts ordered pairs of points sharing a nearest neighbor and
    ``r`` is twice the number of mutual (reflexive) nearest-neighbor pairs.
    """

    nn_index: np.ndarray
    nn_distance: np.ndarray
    in_degree: np.ndarray
    q: int
    r: int

    @property
    def n(self) -> int:
        return len(self.nn_index)


def build_nn_digraph(pattern_or_points) -> NnDigraph:
    if isinstance(pattern_or_points, MarkedPattern):
        xy = pattern_or_points.points
    else:
        xy = np.asarray(pattern_or_points, dtype=float)
    if len(xy) < 2:
        raise ValueError(f"need n >= 2 points for a nearest-neighbor digraph, got {len(xy)}")
    nn, dist = nearest_neighbors(xy)
    deg = np.bincount(nn, minlength=len(nn)).astype(np.int64)
    for a in (nn, dist, deg):
        a.setflags(write=False)
    return NnDigraph(nn, dist, deg, shared_nn_count(deg), reflexive_count(nn))


def q_decomposition(g: NnDigraph) -> dict[int, int]:
    """Counts ``Q_k`` of points serving as nearest neighbor exactly k times, k = 2..6.

    Satisfies ``2 * (Q2 + 3 Q3 + 6 Q4 + 10 Q5 + 15 Q6) == g.q``.
    """
    deg = np.asarray(g.in_degree)
    if deg.size and deg.max() > 6:
        raise GeometryError(
            f"nearest-neighbor in-degree {int(deg.max())} exceeds 6; "
            "coincident points or a broken neighbor search"
        )
    counts = {k: int(np.count_nonzero(deg == k)) for k in range(2, 7)}
    check = 2 * sum(k * (k - 1) // 2 * v for k, v in counts.items())
    if check != g.q:
        raise GeometryError(f"Q decomposition {check} disagrees with q = {g.q}")
    return counts
