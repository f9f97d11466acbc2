"""p-values for NNCT statistics: asymptotic, Monte Carlo CSR, and randomization.

Monte Carlo and randomization p-values use the add-one estimator
``(1 + #{replicates at least as extreme}) / (n_valid + 1)``, so they are
never zero. Each replicate draws from its own stream keyed by
``(seed, replicate index)``, which makes the result independent of the
number of worker processes.
"""

from __future__ import annotations

import enum
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np
from scipy import stats

from ._rng import chunk_indices, default_workers, replicate_rng
from .moments import UndefinedStatistic
from .nngraph import build_nn_digraph, nearest_neighbors, reflexive_count, shared_nn_count
from .pattern import MarkedPattern, Region, gen_association, gen_csr, gen_segregation
from .table import build_nnct, nnct_counts
from .teststat import StatName, statistic_arrays

__all__ = [
    "Alternative",
    "TestReport",
    "p_asymptotic",
    "count_extreme",
    "simulate_tables",
    "simulate_csr_tables",
    "permuted_tables",
    "p_montecarlo",
    "p_randomization",
    "run_tests",
]

_EPS = 1e-9
_PERM_BLOCK = 1000


class Alternative(str, enum.Enum):
    TwoSided = "two"
    RightSided = "seg"
    LeftSided = "assoc"

    @classmethod
    def parse(cls, text: str) -> "Alternative":
        key = text.strip().lower()
        aliases = {
            "two": cls.TwoSided, "two-sided": cls.TwoSided, "twosided": cls.TwoSided,
            "seg": cls.RightSided, "right": cls.RightSided, "segregation": cls.RightSided,
            "rightsided": cls.RightSided,
            "assoc": cls.LeftSided, "left": cls.LeftSided, "association": cls.LeftSided,
            "leftsided": cls.LeftSided,
        }
        if key not in aliases:
            raise ValueError(f"unknown alternative {text!r} (use two, seg or assoc)")
        return aliases[key]


@dataclass(frozen=True)
class TestReport:
    name: StatName
    value: float
    alternative: Alternative
    p_asy: float | None = None
    p_mc: float | None = None
    p_rand: float | None = None
    n_replicates: int = 0
    seed: int | None = None
    error: str | None = None

    __test__ = False  # not a pytest class

    def to_dict(self) -> dict:
        d = asdict(self)
        d["name"] = self.name.value
        d["alternative"] = self.alternative.value
        return d


def _check_alt(name: StatName, alt: Alternative) -> None:
    if not name.z_valued and alt is not Alternative.TwoSided:
        raise ValueError(f"{name.label} is chi-square valued; only the two-sided test exists")


def p_asymptotic(value: float, name: StatName | str, alt: Alternative | str) -> float:
    """Normal (chi-square with 1 df for Pielou's X^2) tail probability."""
    name = StatName(name)
    alt = Alternative(alt)
    _check_alt(name, alt)
    if not name.z_valued:
        return float(stats.chi2.sf(value, df=1))
    if alt is Alternative.TwoSided:
        return float(2.0 * stats.norm.sf(abs(value)))
    if alt is Alternative.RightSided:
        return float(stats.norm.sf(value))
    return float(stats.norm.cdf(value))


def count_extreme(observed: float, simulated, name: StatName, alt: Alternative):
    """(number at least as extreme as ``observed``, number of valid replicates)."""
    sims = np.asarray(simulated, dtype=float)
    sims = sims[~np.isnan(sims)]
    tol = _EPS * max(1.0, abs(observed))
    if not name.z_valued or alt is Alternative.RightSided:
        hits = sims >= observed - tol
    elif alt is Alternative.TwoSided:
        hits = np.abs(sims) >= abs(observed) - tol
    else:
        hits = sims <= observed + tol
    return int(np.count_nonzero(hits)), int(sims.size)


def _add_one(k: int, m: int) -> float:
    return (1.0 + k) / (m + 1.0)


def _draw(kind: str, n1: int, n2: int, param, rng) -> MarkedPattern:
    if kind == "csr":
        return gen_csr(n1, n2, param, rng)
    if kind == "seg":
        return gen_segregation(n1, n2, param, rng)
    if kind == "assoc":
        return gen_association(n1, n2, param, rng)
    raise ValueError(f"unknown pattern family {kind!r}")


def _sim_chunk(args):
    kind, n1, n2, param, seed, indices = args
    m = len(indices)
    counts = np.empty((m, 2, 2), dtype=np.int64)
    q = np.empty(m, dtype=np.int64)
    r = np.empty(m, dtype=np.int64)
    for k, i in enumerate(indices):
        pat = _draw(kind, n1, n2, param, replicate_rng(seed, i))
        nn, _ = nearest_neighbors(pat.points)
        counts[k] = nnct_counts(pat.labels, nn)
        q[k] = shared_nn_count(np.bincount(nn, minlength=len(nn)))
        r[k] = reflexive_count(nn)
    return counts, q, r


def _run_chunks(fn, make_args, n_mc: int, workers: int | None):
    workers = default_workers() if workers is None else max(1, int(workers))
    chunks = chunk_indices(n_mc, workers * 4 if workers > 1 else 1)
    jobs = [make_args(ch) for ch in chunks]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            parts = list(ex.map(fn, jobs))
    else:
        parts = [fn(j) for j in jobs]
    return parts


def simulate_tables(kind: str, n1: int, n2: int, param, n_mc: int, seed: int,
                    workers: int | None = None):
    """NNCT counts, Q and R for ``n_mc`` replicates of a pattern family.

    ``kind`` is ``"csr"`` (``param`` is the Region), ``"seg"`` (segregation
    parameter s) or ``"assoc"`` (association radius r).
    """
    parts = _run_chunks(
        _sim_chunk, lambda ch: (kind, n1, n2, param, seed, ch), n_mc, workers
    )
    counts = np.concatenate([p[0] for p in parts])
    q = np.concatenate([p[1] for p in parts])
    r = np.concatenate([p[2] for p in parts])
    return counts, q, r


def simulate_csr_tables(n1: int, n2: int, region: Region, n_mc: int, seed: int,
                        workers: int | None = None):
    """NNCT counts, Q and R for ``n_mc`` CSR-independence replicates."""
    return simulate_tables("csr", n1, n2, region, n_mc, seed, workers)


def _perm_chunk(args):
    labels, nn, seed, indices = args
    out = []
    idx = list(indices)
    for lo in range(0, len(idx), _PERM_BLOCK):
        block = idx[lo:lo + _PERM_BLOCK]
        perms = np.stack([replicate_rng(seed, i).permutation(labels) for i in block])
        out.append(nnct_counts(perms, nn))
    return np.concatenate(out) if out else np.empty((0, 2, 2), dtype=np.int64)


def permuted_tables(labels, nn_index, n_mc: int, seed: int, workers: int | None = None):
    """NNCT counts for ``n_mc`` random relabelings over fixed locations."""
    labels = np.asarray(labels, dtype=np.int8)
    nn = np.asarray(nn_index)
    parts = _run_chunks(_perm_chunk, lambda ch: (labels, nn, seed, ch), n_mc, workers)
    return np.concatenate(parts)


def _observed(pattern: MarkedPattern, names):
    g = build_nn_digraph(pattern)
    t = build_nnct(pattern, g)
    values = statistic_arrays(t.counts, g.q, g.r, names)
    return g, t, values


def _check_nmc(n_mc: int) -> None:
    if int(n_mc) != n_mc or n_mc < 1:
        raise ValueError(f"n_mc must be a positive integer, got {n_mc}")


def _p_from_sims(values, sim_values, name, alt):
    obs = values[name]
    if math.isnan(obs):
        raise UndefinedStatistic(f"{name.label} is undefined on the observed data")
    k, m = count_extreme(obs, sim_values[name], name, alt)
    return _add_one(k, m), m


def p_montecarlo(pattern: MarkedPattern, name, alt, n_mc: int, seed: int,
                 workers: int | None = None) -> float:
    """p-value against CSR independence simulated over ``pattern.region``.

    Q and R are recomputed for every replicate since they are random under
    CSR independence.
    """
    name, alt = StatName(name), Alternative(alt)
    _check_alt(name, alt)
    _check_nmc(n_mc)
    _, t, values = _observed(pattern, [name])
    counts, q, r = simulate_csr_tables(t.n1, t.n2, pattern.region, n_mc, seed, workers)
    return _p_from_sims(values, statistic_arrays(counts, q, r, [name]), name, alt)[0]


def p_randomization(pattern: MarkedPattern, name, alt, n_mc: int, seed: int,
                    workers: int | None = None) -> float:
    """p-value against random labeling; the NN digraph, Q and R stay fixed."""
    name, alt = StatName(name), Alternative(alt)
    _check_alt(name, alt)
    _check_nmc(n_mc)
    g, _, values = _observed(pattern, [name])
    counts = permuted_tables(pattern.labels, g.nn_index, n_mc, seed, workers)
    return _p_from_sims(values, statistic_arrays(counts, g.q, g.r, [name]), name, alt)[0]


def run_tests(pattern: MarkedPattern, names, alternatives, engines=("asy",),
              n_mc: int = 10000, seed: int = 0, workers: int | None = None,
              q=None, r=None) -> list[TestReport]:
    """Evaluate several statistics under several alternatives and engines.

    Simulations are shared across statistics and alternatives. ``q``/``r``
    override the observed values (e.g. QR-adjusted tests); they affect the
    asymptotic and randomization engines only.
    """
    names = [StatName(s) for s in names]
    alternatives = [Alternative(a) for a in alternatives]
    engines = set(engines)
    unknown = engines - {"asy", "mc", "rand"}
    if unknown or not engines:
        raise ValueError(f"engines must be a non-empty subset of asy, mc, rand; got {sorted(engines)}")
    if engines & {"mc", "rand"}:
        _check_nmc(n_mc)

    g = build_nn_digraph(pattern)
    t = build_nnct(pattern, g)
    q = g.q if q is None else q
    r = g.r if r is None else r
    values = statistic_arrays(t.counts, q, r, names)

    sim = {}
    if "mc" in engines:
        counts, sq, sr = simulate_csr_tables(t.n1, t.n2, pattern.region, n_mc, seed, workers)
        sim["mc"] = statistic_arrays(counts, sq, sr, names)
    if "rand" in engines:
        counts = permuted_tables(pattern.labels, g.nn_index, n_mc, seed, workers)
        sim["rand"] = statistic_arrays(counts, q, r, names)

    reports = []
    for alt in alternatives:
        for s in names:
            if not s.z_valued and alt is not Alternative.TwoSided:
                continue
            v = values[s]
            if math.isnan(v):
                reports.append(TestReport(s, v, alt, n_replicates=0, seed=seed,
                                          error="undefined on observed data"))
                continue
            p = {"asy": None, "mc": None, "rand": None}
            reps = 0
            if "asy" in engines:
                p["asy"] = p_asymptotic(v, s, alt)
            for eng, sv in sim.items():
                p[eng], m = _p_from_sims(values, sv, s, alt)
                reps = max(reps, m)
            reports.append(TestReport(s, v, alt, p["asy"], p["mc"], p["rand"],
                                      n_replicates=reps if sim else 0,
                                      seed=seed if sim else None))
    return reports
