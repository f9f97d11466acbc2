"""Two-class marked point patterns: data model, CSV I/O and generators.

The generators cover the null model (CSR independence), random relabeling
of fixed locations, and the two parametric alternatives used for power
studies: a shifted-squares segregation model and a parent/offspring
association model.
"""

from __future__ import annotations

import csv
import io
import math
import os
from dataclasses import dataclass, field

import numpy as np

from ._rng import make_rng

__all__ = [
    "PatternError",
    "Region",
    "UNIT_SQUARE",
    "MarkedPattern",
    "SegParams",
    "AssocParams",
    "gen_csr",
    "gen_segregation",
    "gen_association",
    "relabel",
    "read_pattern",
    "write_pattern",
]


class PatternError(ValueError):
    """Invalid pattern data or generator parameters."""


@dataclass(frozen=True)
class Region:
    x_min: float
    y_min: float
    x_max: float
    y_max: float

    def __post_init__(self):
        vals = (self.x_min, self.y_min, self.x_max, self.y_max)
        if not all(math.isfinite(v) for v in vals):
            raise PatternError(f"region bounds must be finite, got {vals}")
        if not (self.x_min < self.x_max and self.y_min < self.y_max):
            raise PatternError(f"degenerate region {vals}")

    @property
    def width(self) -> float:
        return self.x_max - self.x_min

    @property
    def height(self) -> float:
        return self.y_max - self.y_min

    @property
    def area(self) -> float:
        return self.width * self.height

    @property
    def short_side(self) -> float:
        return min(self.width, self.height)

    def contains(self, xy) -> np.ndarray:
        xy = np.asarray(xy, dtype=float).reshape(-1, 2)
        return (
            (xy[:, 0] >= self.x_min)
            & (xy[:, 0] <= self.x_max)
            & (xy[:, 1] >= self.y_min)
            & (xy[:, 1] <= self.y_max)
        )

    @classmethod
    def bounding_box(cls, xy) -> "Region":
        xy = np.asarray(xy, dtype=float).reshape(-1, 2)
        if len(xy) == 0:
            raise PatternError("cannot take the bounding box of no points")
        lo = xy.min(axis=0)
        hi = xy.max(axis=0)
        # A collinear or single-point set still needs a proper rectangle.
        pad = np.where(hi > lo, 0.0, np.maximum(np.abs(lo), 1.0) * 1e-9)
        return cls(float(lo[0] - pad[0]), float(lo[1] - pad[1]),
                   float(hi[0] + pad[0]), float(hi[1] + pad[1]))

    @classmethod
    def parse(cls, text: str) -> "Region":
        parts = [p.strip() for p in text.split(",")]
        if len(parts) != 4:
            raise PatternError(f"region needs xmin,ymin,xmax,ymax, got {text!r}")
        try:
            return cls(*(float(p) for p in parts))
        except ValueError:
            raise PatternError(f"non-numeric region {text!r}") from None

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.x_min, self.y_min, self.x_max, self.y_max)


UNIT_SQUARE = Region(0.0, 0.0, 1.0, 1.0)


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class MarkedPattern:
    """Planar points with labels in {1, 2} inside a rectangular region.

    ``points`` is an ``(n, 2)`` float array and ``labels`` an ``(n,)`` int
    array; both are stored read-only. ``class_names`` keeps the original
    label strings when the pattern was read from a file.
    """

    points: np.ndarray
    labels: np.ndarray
    region: Region
    class_names: tuple[str, str] = field(default=("1", "2"))

    def __post_init__(self):
        pts = np.array(self.points, dtype=float, copy=True)
        if pts.ndim == 1 and pts.size == 0:
            pts = pts.reshape(0, 2)
        if pts.ndim != 2 or pts.shape[1] != 2:
            raise PatternError(f"points must have shape (n, 2), got {pts.shape}")
        lab = np.array(self.labels, copy=True)
        if lab.ndim != 1 or len(lab) != len(pts):
            raise PatternError("points and labels must have equal length")
        if len(pts) == 0:
            raise PatternError("pattern has no points")
        if not np.all(np.isfinite(pts)):
            raise PatternError("point coordinates must be finite")
        if not np.all(np.isin(lab, (1, 2))):
            raise PatternError("labels must be 1 or 2")
        if not np.all(self.region.contains(pts)):
            raise PatternError("some points lie outside the region")
        object.__setattr__(self, "points", _frozen(pts))
        object.__setattr__(self, "labels", _frozen(lab.astype(np.int64)))

    @property
    def n(self) -> int:
        return len(self.labels)

    @property
    def n1(self) -> int:
        return int(np.count_nonzero(self.labels == 1))

    @property
    def n2(self) -> int:
        return int(np.count_nonzero(self.labels == 2))

    def with_labels(self, labels) -> "MarkedPattern":
        return MarkedPattern(self.points, labels, self.region, self.class_names)

    def __eq__(self, other):
        if not isinstance(other, MarkedPattern):
            return NotImplemented
        return (
            self.region == other.region
            and np.array_equal(self.points, other.points)
            and np.array_equal(self.labels, other.labels)
        )

    __hash__ = None


@dataclass(frozen=True)
class SegParams:
    s: float

    def __post_init__(self):
        if not (0.0 < self.s < 1.0):
            raise PatternError(f"segregation parameter s must be in (0, 1), got {self.s}")


@dataclass(frozen=True)
class AssocParams:
    r: float

    def __post_init__(self):
        if not (0.0 < self.r < 1.0):
            raise PatternError(f"association radius r must be in (0, 1), got {self.r}")


def _check_sizes(n1: int, n2: int) -> None:
    if int(n1) != n1 or int(n2) != n2:
        raise PatternError("class sizes must be integers")
    if n1 < 1 or n2 < 1:
        raise PatternError(f"both classes need at least one point, got n1={n1}, n2={n2}")


def _labels(n1: int, n2: int) -> np.ndarray:
    return np.repeat(np.array([1, 2], dtype=np.int64), [n1, n2])


def _uniform(rng: np.random.Generator, n: int, x0, y0, x1, y1) -> np.ndarray:
    u = rng.random((n, 2))
    return np.column_stack([x0 + (x1 - x0) * u[:, 0], y0 + (y1 - y0) * u[:, 1]])


def gen_csr(n1: int, n2: int, region: Region = UNIT_SQUARE, seed=None) -> MarkedPattern:
    """CSR independence: both classes independently uniform over ``region``."""
    _check_sizes(n1, n2)
    rng = make_rng(seed)
    pts = _uniform(rng, n1 + n2, *region.as_tuple())
    return MarkedPattern(pts, _labels(n1, n2), region)


def gen_segregation(n1: int, n2: int, p: SegParams | float, seed=None) -> MarkedPattern:
    """Class 1 uniform on ``(0, 1-s)^2``, class 2 uniform on ``(s, 1)^2``."""
    if not isinstance(p, SegParams):
        p = SegParams(float(p))
    _check_sizes(n1, n2)
    rng = make_rng(seed)
    s = p.s
    x = _uniform(rng, n1, 0.0, 0.0, 1.0 - s, 1.0 - s)
    y = _uniform(rng, n2, s, s, 1.0, 1.0)
    return MarkedPattern(np.vstack([x, y]), _labels(n1, n2), UNIT_SQUARE)


def gen_association(n1: int, n2: int, p: AssocParams | float, seed=None,
                    return_parents: bool = False):
    """Class 1 uniform on the unit square; class 2 scattered around class 1.

    Each class-2 point picks a class-1 parent uniformly at random and is
    displaced by a radius drawn from ``U(0, r)`` at a uniform angle.
    Offspring are not clipped, so the recorded region is the smallest
    rectangle covering the unit square and every generated point.

    With ``return_parents=True`` the parent index of each class-2 point is
    returned alongside the pattern.
    """
    if not isinstance(p, AssocParams):
        p = AssocParams(float(p))
    _check_sizes(n1, n2)
    rng = make_rng(seed)
    x = rng.random((n1, 2))
    parents = rng.integers(0, n1, size=n2)
    radius = rng.uniform(0.0, p.r, size=n2)
    theta = rng.uniform(0.0, 2.0 * np.pi, size=n2)
    y = x[parents] + radius[:, None] * np.column_stack([np.cos(theta), np.sin(theta)])
    pts = np.vstack([x, y])
    lo = np.minimum(pts.min(axis=0), 0.0)
    hi = np.maximum(pts.max(axis=0), 1.0)
    region = Region(float(lo[0]), float(lo[1]), float(hi[0]), float(hi[1]))
    pattern = MarkedPattern(pts, _labels(n1, n2), region)
    if return_parents:
        return pattern, parents
    return pattern


def relabel(pattern: MarkedPattern, seed=None) -> MarkedPattern:
    """Random labeling: permute the labels over the fixed locations."""
    rng = make_rng(seed)
    return pattern.with_labels(rng.permutation(pattern.labels))


def _is_number(text: str) -> bool:
    try:
        float(text)
    except ValueError:
        return False
    return True


def read_pattern(path, region: Region | None = None) -> MarkedPattern:
    """Read ``x,y,label`` rows from a CSV file (header optional).

    Labels may be ``1``/``2`` or any two distinct strings; strings are
    mapped to classes 1 and 2 in order of first appearance. Without an
    explicit ``region`` the bounding box of the points is used.
    """
    if hasattr(path, "read"):
        text = path.read()
    else:
        with open(os.fspath(path), newline="", encoding="utf-8") as fh:
            text = fh.read()
    rows = [r for r in csv.reader(io.StringIO(text)) if r and any(c.strip() for c in r)]
    if rows and not (_is_number(rows[0][0]) and len(rows[0]) > 1 and _is_number(rows[0][1])):
        rows = rows[1:]
    if not rows:
        raise PatternError("no points in input")

    xy = []
    raw_labels = []
    for lineno, row in enumerate(rows, start=1):
        cells = [c.strip() for c in row]
        if len(cells) != 3:
            raise PatternError(f"row {lineno}: expected 3 columns x,y,label, got {len(cells)}")
        try:
            xy.append((float(cells[0]), float(cells[1])))
        except ValueError:
            raise PatternError(f"row {lineno}: non-numeric coordinate in {row!r}") from None
        if not cells[2]:
            raise PatternError(f"row {lineno}: empty label")
        raw_labels.append(cells[2])

    distinct = list(dict.fromkeys(raw_labels))
    numeric = all(_is_number(v) for v in distinct)
    if numeric:
        labels = []
        for lineno, v in enumerate(raw_labels, start=1):
            f = float(v)
            if f not in (1.0, 2.0):
                raise PatternError(f"row {lineno}: invalid label {v!r} (expected 1 or 2)")
            labels.append(int(f))
        names = ("1", "2")
    else:
        if len(distinct) > 2:
            raise PatternError(f"invalid label set: more than two classes {distinct[:5]}")
        mapping = {name: k + 1 for k, name in enumerate(distinct)}
        labels = [mapping[v] for v in raw_labels]
        names = (distinct[0], distinct[1] if len(distinct) > 1 else "2")

    xy = np.asarray(xy, dtype=float)
    if region is None:
        region = Region.bounding_box(xy)
    elif not np.all(region.contains(xy)):
        bad = int(np.flatnonzero(~region.contains(xy))[0]) + 1
        raise PatternError(f"row {bad}: point outside region {region.as_tuple()}")
    return MarkedPattern(xy, np.asarray(labels), region, names)


def write_pattern(pattern: MarkedPattern, path=None, header: bool = True) -> str:
    """Write a pattern as ``x,y,label`` CSV; returns the text."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    if header:
        w.writerow(["x", "y", "label"])
    for (x, y), lab in zip(pattern.points, pattern.labels):
        w.writerow([repr(float(x)), repr(float(y)), int(lab)])
    text = buf.getvalue()
    if path is not None:
        with open(os.fspath(path), "w", newline="", encoding="utf-8") as fh:
            fh.write(text)
    return text
