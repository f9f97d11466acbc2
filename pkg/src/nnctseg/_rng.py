"""Seed plumbing shared by the generators and the Monte Carlo engines."""

from __future__ import annotations

import os

import numpy as np

WORKERS_ENV = "NNCTSEG_WORKERS"


def make_rng(seed=None) -> np.random.Generator:
    """Return a Generator from an int, SeedSequence, Generator or None."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def replicate_seed(seed: int, index: int) -> np.random.SeedSequence:
    # Each replicate gets its own stream keyed by (master seed, replicate index),
    # so a replicate's draws do not depend on how work is split across workers.
    return np.random.SeedSequence(entropy=int(seed), spawn_key=(int(index),))


def replicate_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng(replicate_seed(seed, index))


def default_workers() -> int:
    raw = os.environ.get(WORKERS_ENV, "").strip()
    if not raw:
        return 1
    try:
        value = int(raw)
    except ValueError:
        raise ValueError(f"{WORKERS_ENV} must be an integer, got {raw!r}") from None
    return max(1, value)


def chunk_indices(n: int, n_chunks: int) -> list[range]:
    n_chunks = max(1, min(n_chunks, n)) if n else 1
    bounds = np.linspace(0, n, n_chunks + 1).astype(int)
    return [range(lo, hi) for lo, hi in zip(bounds[:-1], bounds[1:]) if hi > lo]
