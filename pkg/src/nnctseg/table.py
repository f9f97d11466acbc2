"""The 2x2 nearest-neighbor contingency table (NNCT)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .nngraph import NnDigraph
from .pattern import MarkedPattern

__all__ = ["Nnct", "build_nnct", "nnct_percentages", "nnct_counts"]


@dataclass(frozen=True, eq=False)
class Nnct:
    """Counts ``N[i, j]`` of (base, NN) pairs with base class i+1, NN class j+1."""

    counts: np.ndarray
    row_sums: tuple[int, int]
    col_sums: tuple[int, int]
    n: int

    def __post_init__(self):
        c = np.asarray(self.counts)
        if c.shape != (2, 2) or np.any(c < 0):
            raise ValueError(f"NNCT counts must be a non-negative 2x2 array, got {c!r}")
        if tuple(int(v) for v in c.sum(axis=1)) != tuple(self.row_sums):
            raise ValueError("NNCT row sums disagree with counts")
        if tuple(int(v) for v in c.sum(axis=0)) != tuple(self.col_sums):
            raise ValueError("NNCT column sums disagree with counts")
        if int(c.sum()) != self.n:
            raise ValueError("NNCT total disagrees with counts")

    @classmethod
    def from_counts(cls, counts) -> "Nnct":
        c = np.array(counts, dtype=np.int64).reshape(2, 2)
        c.setflags(write=False)
        rows = tuple(int(v) for v in c.sum(axis=1))
        cols = tuple(int(v) for v in c.sum(axis=0))
        return cls(c, rows, cols, int(c.sum()))

    @property
    def n1(self) -> int:
        return self.row_sums[0]

    @property
    def n2(self) -> int:
        return self.row_sums[1]

    def cell(self, i: int, j: int) -> int:
        """Count for 1-based cell (i, j)."""
        return int(self.counts[i - 1, j - 1])

    def __eq__(self, other):
        if not isinstance(other, Nnct):
            return NotImplemented
        return np.array_equal(self.counts, other.counts)

    __hash__ = None

    def to_dict(self) -> dict:
        return {
            "counts": self.counts.tolist(),
            "row_sums": list(self.row_sums),
            "col_sums": list(self.col_sums),
            "n": self.n,
        }

    def render(self, names=("1", "2")) -> str:
        names = [str(x) for x in names]
        w = max(7, *(len(x) for x in names), len(str(self.n))) + 1
        rows = [["base/NN", *names, "sum"]]
        for i, nm in enumerate(names):
            rows.append([nm, *(int(v) for v in self.counts[i]), self.row_sums[i]])
        rows.append(["sum", *self.col_sums, self.n])
        return "\n".join(
            f"{r[0]:<{w}}" + "".join(f"{v:>{w}}" for v in r[1:]) for r in rows
        )


def nnct_counts(labels, nn_index) -> np.ndarray:
    """2x2 counts for a single labeling, or ``(m, 2, 2)`` for an ``(m, n)`` stack."""
    lab = np.asarray(labels)
    nn = np.asarray(nn_index)
    base = lab == 1
    nbr = lab[..., nn] == 1
    n11 = np.count_nonzero(base & nbr, axis=-1)
    n12 = np.count_nonzero(base & ~nbr, axis=-1)
    n21 = np.count_nonzero(~base & nbr, axis=-1)
    n22 = np.count_nonzero(~base & ~nbr, axis=-1)
    out = np.stack([np.stack([n11, n12], -1), np.stack([n21, n22], -1)], -2)
    return out.astype(np.int64)


def build_nnct(pattern: MarkedPattern, g: NnDigraph) -> Nnct:
    if g.n != pattern.n:
        raise ValueError("pattern and digraph come from different point sets")
    if pattern.n1 == 0 or pattern.n2 == 0:
        raise ValueError("both classes must be present to build an NNCT")
    return Nnct.from_counts(nnct_counts(pattern.labels, g.nn_index))


def nnct_percentages(t: Nnct) -> dict:
    """Row-conditional cell proportions and marginal proportions (as fractions)."""
    counts = np.asarray(t.counts, dtype=float)
    rows = np.asarray(t.row_sums, dtype=float)
    return {
        "cells": counts / rows[:, None],
        "rows": rows / t.n,
        "cols": np.asarray(t.col_sums, dtype=float) / t.n,
    }
