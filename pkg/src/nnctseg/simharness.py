"""Empirical size and power of the NNCT tests, and the Z_P correction constants.

Each (pair, parameter) cell draws from its own seed, derived from the
master seed and the cell's identity rather than its position in the
config, so adding a pair to a run leaves the others unchanged.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .inference import Alternative, simulate_tables
from .pattern import UNIT_SQUARE
from .teststat import CorrectionConstants, StatName, statistic_arrays

__all__ = [
    "SizeConfig",
    "PowerConfig",
    "RateRow",
    "RateTable",
    "ConstantsEstimate",
    "CONSTANT_PAIRS",
    "SIZE_PAIRS",
    "SEG_PARAMS",
    "ASSOC_PARAMS",
    "default_statistics",
    "flag_band",
    "empirical_size",
    "empirical_power",
    "derive_correction_constants",
    "HALF_NORMAL_MEAN",
    "HALF_NORMAL_VAR",
]

SIZE_PAIRS = ((10, 10), (10, 30), (10, 50), (30, 30), (30, 50), (50, 50), (100, 100))
CONSTANT_PAIRS = ((10, 10), (10, 30), (10, 50), (30, 30), (30, 50), (50, 50),
                  (100, 100), (200, 200))
SEG_PARAMS = (1 / 6, 1 / 4, 1 / 3)
ASSOC_PARAMS = (1 / 4, 1 / 7, 1 / 10)

# Half-normal moments: E|Z| and Var|Z| for Z ~ N(0, 1).
HALF_NORMAL_MEAN = math.sqrt(2 / math.pi)
HALF_NORMAL_VAR = 1 - 2 / math.pi

_FAMILY_CODE = {"csr": 0, "seg": 1, "assoc": 2}
_BASE = (StatName.DixonZ11, StatName.DixonZ22, StatName.CeyhanZ11, StatName.CeyhanZ22)


def default_statistics(alt: Alternative, power: bool = False) -> tuple:
    """Column set of the size and power tables for one alternative."""
    alt = Alternative(alt)
    if power:
        return _BASE + (StatName.ZI, StatName.ZII)
    zmc = {
        Alternative.TwoSided: StatName.PielouZmc,
        Alternative.RightSided: StatName.PielouZmcSeg,
        Alternative.LeftSided: StatName.PielouZmcAssoc,
    }[alt]
    return _BASE + (StatName.PielouZ, zmc, StatName.ZI, StatName.ZII)


def _check_common(pairs, n_mc, alpha):
    if int(n_mc) != n_mc or n_mc < 1:
        raise ValueError(f"n_mc must be a positive integer, got {n_mc}")
    if not 0 < alpha < 1:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    if not pairs:
        raise ValueError("at least one sample-size pair is required")
    for n1, n2 in pairs:
        if n1 < 1 or n2 < 1 or n1 + n2 < 4:
            raise ValueError(f"invalid sample-size pair ({n1}, {n2})")


@dataclass(frozen=True)
class SizeConfig:
    pairs: tuple = SIZE_PAIRS
    n_mc: int = 1000
    alpha: float = 0.05
    alternatives: tuple = (Alternative.TwoSided, Alternative.RightSided, Alternative.LeftSided)
    statistics: tuple | None = None  # None: the per-alternative default columns
    master_seed: int = 0
    workers: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "pairs", tuple(tuple(int(v) for v in p) for p in self.pairs))
        object.__setattr__(self, "alternatives", tuple(Alternative(a) for a in self.alternatives))
        if self.statistics is not None:
            object.__setattr__(self, "statistics", tuple(StatName(s) for s in self.statistics))
        _check_common(self.pairs, self.n_mc, self.alpha)


@dataclass(frozen=True)
class PowerConfig(SizeConfig):
    family: str = "seg"
    params: tuple = SEG_PARAMS

    def __post_init__(self):
        if self.family not in ("seg", "assoc"):
            raise ValueError(f"family must be 'seg' or 'assoc', got {self.family!r}")
        object.__setattr__(self, "params", tuple(float(p) for p in self.params))
        if not self.params or any(not 0 < p < 1 for p in self.params):
            raise ValueError("power parameters must lie in (0, 1)")
        super().__post_init__()

    @classmethod
    def for_family(cls, family: str, **kw) -> "PowerConfig":
        """Config with the family's default parameters and matching alternatives."""
        side = Alternative.RightSided if family == "seg" else Alternative.LeftSided
        kw.setdefault("params", SEG_PARAMS if family == "seg" else ASSOC_PARAMS)
        kw.setdefault("alternatives", (side, Alternative.TwoSided))
        kw.setdefault("pairs", SIZE_PAIRS[:-1])
        return cls(family=family, **kw)


def flag_band(alpha: float, n: int) -> tuple[float, float]:
    """Rates outside this band differ from ``alpha`` by a one-sided 5% proportion test."""
    half = stats.norm.ppf(0.95) * math.sqrt(alpha * (1 - alpha) / n)
    return alpha - half, alpha + half


@dataclass(frozen=True)
class RateRow:
    pair: tuple
    param: float | None
    statistic: StatName
    alternative: Alternative
    rate: float
    n_valid: int
    n_degenerate: int
    flag: str | None = None  # "conservative", "liberal" or "ok"; size tables only

    def to_dict(self) -> dict:
        return {
            "n1": self.pair[0], "n2": self.pair[1], "param": self.param,
            "statistic": self.statistic.value, "alternative": self.alternative.value,
            "rate": self.rate, "n_valid": self.n_valid,
            "n_degenerate": self.n_degenerate, "flag": self.flag,
        }


@dataclass
class RateTable:
    kind: str  # "size" or "power"
    n_mc: int
    alpha: float
    master_seed: int
    family: str | None = None
    rows: list = field(default_factory=list)

    def get(self, pair, statistic, alternative, param=None) -> RateRow:
        pair = tuple(pair)
        statistic, alternative = StatName(statistic), Alternative(alternative)
        for row in self.rows:
            if (row.pair == pair and row.statistic is statistic
                    and row.alternative is alternative
                    and (param is None or math.isclose(row.param, param))):
                return row
        raise KeyError((pair, param, statistic, alternative))

    def rate(self, pair, statistic, alternative, param=None) -> float:
        return self.get(pair, statistic, alternative, param).rate

    def alternatives(self) -> list:
        return list(dict.fromkeys(r.alternative for r in self.rows))

    def to_csv(self, alternative) -> str:
        """One row per (pair, parameter), one column per statistic."""
        alternative = Alternative(alternative)
        rows = [r for r in self.rows if r.alternative is alternative]
        names = list(dict.fromkeys(r.statistic for r in rows))
        keys = list(dict.fromkeys((r.pair, r.param) for r in rows))
        cell = {(r.pair, r.param, r.statistic): r.rate for r in rows}
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        head = ["n1", "n2"] + (["param"] if self.kind == "power" else [])
        w.writerow(head + [s.label for s in names])
        for pair, param in keys:
            lead = list(pair) + ([f"{param:.4f}"] if self.kind == "power" else [])
            w.writerow(lead + [f"{cell[(pair, param, s)]:.4f}" for s in names])
        return buf.getvalue()

    def to_json(self) -> str:
        summary = {
            "kind": self.kind, "n_mc": self.n_mc, "alpha": self.alpha,
            "master_seed": self.master_seed, "family": self.family,
            "rows": [r.to_dict() for r in self.rows],
        }
        if self.kind == "size":
            lo, hi = flag_band(self.alpha, self.n_mc)
            summary["band"] = [lo, hi]
        return json.dumps(summary, indent=2)


def _cell_seed(master_seed: int, family: str, pair, param) -> int:
    key = [int(master_seed), _FAMILY_CODE[family], int(pair[0]), int(pair[1])]
    if param is not None:
        key.append(int(round(float(param) * 1e9)))
    return int(np.random.SeedSequence(key).generate_state(1, dtype=np.uint64)[0] >> 1)


def _p_values(z, name: StatName, alt: Alternative):
    if not name.z_valued:
        return stats.chi2.sf(z, df=1)
    if alt is Alternative.TwoSided:
        return 2.0 * stats.norm.sf(np.abs(z))
    if alt is Alternative.RightSided:
        return stats.norm.sf(z)
    return stats.norm.cdf(z)


def _flag(rate: float, alpha: float, n: int) -> str:
    lo, hi = flag_band(alpha, n)
    if rate < lo:
        return "conservative"
    if rate > hi:
        return "liberal"
    return "ok"


def _rows_for(values, pair, param, alternatives, statistics, alpha, size: bool):
    rows = []
    for alt in alternatives:
        names = statistics or default_statistics(alt, power=not size)
        for s in names:
            if not s.z_valued and alt is not Alternative.TwoSided:
                continue
            z = values[s]
            ok = ~np.isnan(z)
            n_valid = int(ok.sum())
            rate = float(np.mean(_p_values(z[ok], s, alt) <= alpha)) if n_valid else math.nan
            flag = _flag(rate, alpha, n_valid) if size and n_valid else None
            rows.append(RateRow(pair, param, s, alt, rate, n_valid, int(z.size - n_valid), flag))
    return rows


def _wanted(cfg: SizeConfig, power: bool):
    if cfg.statistics is not None:
        return list(cfg.statistics)
    out = []
    for alt in cfg.alternatives:
        out.extend(default_statistics(alt, power))
    return list(dict.fromkeys(out))


def empirical_size(cfg: SizeConfig) -> RateTable:
    """Rejection rates of the asymptotic tests under CSR independence on the unit square."""
    table = RateTable("size", cfg.n_mc, cfg.alpha, cfg.master_seed)
    wanted = _wanted(cfg, power=False)
    for pair in cfg.pairs:
        seed = _cell_seed(cfg.master_seed, "csr", pair, None)
        counts, q, r = simulate_tables("csr", pair[0], pair[1], UNIT_SQUARE, cfg.n_mc, seed,
                                       cfg.workers)
        values = statistic_arrays(counts, q, r, wanted)
        table.rows.extend(_rows_for(values, pair, None, cfg.alternatives, cfg.statistics,
                                    cfg.alpha, size=True))
    return table


def empirical_power(cfg: PowerConfig) -> RateTable:
    """Rejection rates under the segregation or association family."""
    table = RateTable("power", cfg.n_mc, cfg.alpha, cfg.master_seed, cfg.family)
    wanted = _wanted(cfg, power=True)
    for param in cfg.params:
        for pair in cfg.pairs:
            seed = _cell_seed(cfg.master_seed, cfg.family, pair, param)
            counts, q, r = simulate_tables(cfg.family, pair[0], pair[1], param, cfg.n_mc,
                                           seed, cfg.workers)
            values = statistic_arrays(counts, q, r, wanted)
            table.rows.extend(_rows_for(values, pair, param, cfg.alternatives,
                                        cfg.statistics, cfg.alpha, size=False))
    return table


@dataclass(frozen=True)
class ConstantsEstimate:
    constants: CorrectionConstants
    per_pair: dict  # pair -> {"M", "V", "M_a", "V_a", "M_s", "V_s"}
    summary: dict  # the moments the constants were solved from
    n_degenerate: int


def _summary(z):
    neg = z[z <= 0]
    pos = z[z >= 0]
    return {
        "M": float(np.mean(z)), "V": float(np.var(z, ddof=1)),
        "M_a": float(np.mean(neg)) if neg.size else math.nan,
        "V_a": float(np.var(neg, ddof=1)) if neg.size > 1 else math.nan,
        "M_s": float(np.mean(pos)) if pos.size else math.nan,
        "V_s": float(np.var(pos, ddof=1)) if pos.size > 1 else math.nan,
    }


def derive_correction_constants(pairs=CONSTANT_PAIRS, n_mc: int = 10000, seed: int = 0,
                                workers: int | None = None, pooling: str = "median",
                                half_mean: float = HALF_NORMAL_MEAN,
                                half_var: float = HALF_NORMAL_VAR) -> ConstantsEstimate:
    """Re-estimate the Z_P location/scale corrections from CSR simulations.

    For each pair the sample moments of Z_P are recorded, plus those of
    the replicates with Z_P <= 0 (association side) and Z_P >= 0
    (segregation side). ``pooling="median"`` summarizes each moment by its
    median across pairs; ``pooling="pooled"`` computes it once over all
    replicates of all pairs. The median keeps the very unbalanced pairs,
    whose one-sided variances are far from the rest (about 0.34 at
    (10, 50)), from dragging the summary.

    Then beta_n = sqrt(V), and the one-sided maps match the half-normal
    moments: beta = sqrt(V_side / 0.363), alpha = M_side -/+ beta * 0.798.
    """
    if int(n_mc) != n_mc or n_mc < 100:
        raise ValueError(f"n_mc must be at least 100 for a stable estimate, got {n_mc}")
    if pooling not in ("median", "pooled"):
        raise ValueError(f"pooling must be 'median' or 'pooled', got {pooling!r}")
    pairs = tuple(tuple(int(v) for v in p) for p in pairs)
    _check_common(pairs, n_mc, 0.05)
    per_pair, pooled_z, degenerate = {}, [], 0
    for pair in pairs:
        s = _cell_seed(seed, "csr", pair, None)
        counts, q, r = simulate_tables("csr", pair[0], pair[1], UNIT_SQUARE, n_mc, s, workers)
        z = statistic_arrays(counts, q, r, [StatName.PielouZ])[StatName.PielouZ]
        degenerate += int(np.isnan(z).sum())
        z = z[~np.isnan(z)]
        per_pair[pair] = _summary(z)
        pooled_z.append(z)
    pooled = _summary(np.concatenate(pooled_z))
    if pooling == "median":
        m = {k: float(np.nanmedian([d[k] for d in per_pair.values()])) for k in pooled}
    else:
        m = pooled
    if any(math.isnan(v) for v in m.values()):
        raise ValueError("too few valid replicates on one side of zero")
    beta_a = math.sqrt(m["V_a"] / half_var)
    beta_s = math.sqrt(m["V_s"] / half_var)
    const = CorrectionConstants(
        beta_n=math.sqrt(m["V"]),
        alpha_a=m["M_a"] + beta_a * half_mean, beta_a=beta_a,
        alpha_s=m["M_s"] - beta_s * half_mean, beta_s=beta_s,
    )
    return ConstantsEstimate(const, per_pair, m, degenerate)
