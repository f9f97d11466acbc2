"""NNCT test statistics for two-class segregation and association.

Positive values point toward segregation and negative values toward
association for every z-valued statistic here. All statistics are
computed by one vectorized routine, :func:`statistic_arrays`, so a
statistic on observed data and on Monte Carlo replicates goes through the
same floating-point path.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from . import moments
from .moments import DegenerateVarianceError, UndefinedStatistic
from .table import Nnct

__all__ = [
    "StatName",
    "CorrectionConstants",
    "CORRECTION",
    "StatisticSet",
    "statistic_arrays",
    "dixon_z",
    "ceyhan_z",
    "pielou_chi2",
    "pielou_z",
    "pielou_z_corrected",
    "z_one",
    "z_two",
    "run_all",
]


class StatName(str, enum.Enum):
    DixonZ11 = "DixonZ11"
    DixonZ12 = "DixonZ12"
    DixonZ21 = "DixonZ21"
    DixonZ22 = "DixonZ22"
    CeyhanZ11 = "CeyhanZ11"
    CeyhanZ12 = "CeyhanZ12"
    CeyhanZ21 = "CeyhanZ21"
    CeyhanZ22 = "CeyhanZ22"
    PielouChi2 = "PielouChi2"
    PielouZ = "PielouZ"
    PielouZmc = "PielouZmc"
    PielouZmcAssoc = "PielouZmcAssoc"
    PielouZmcSeg = "PielouZmcSeg"
    ZI = "ZI"
    ZII = "ZII"

    @property
    def z_valued(self) -> bool:
        return self is not StatName.PielouChi2

    @property
    def needs_moments(self) -> bool:
        return self.value.startswith(("Dixon", "Ceyhan")) or self in (StatName.ZI, StatName.ZII)

    @property
    def label(self) -> str:
        return _LABELS[self]

    @classmethod
    def parse(cls, text: str) -> "StatName":
        key = text.strip()
        for member in cls:
            if key.lower() in (member.value.lower(), member.label.lower()):
                return member
        raise ValueError(f"unknown statistic {text!r}")


_LABELS = {
    StatName.DixonZ11: "Z^D_11", StatName.DixonZ12: "Z^D_12",
    StatName.DixonZ21: "Z^D_21", StatName.DixonZ22: "Z^D_22",
    StatName.CeyhanZ11: "Z^C_11", StatName.CeyhanZ12: "Z^C_12",
    StatName.CeyhanZ21: "Z^C_21", StatName.CeyhanZ22: "Z^C_22",
    StatName.PielouChi2: "X^2_P", StatName.PielouZ: "Z_P",
    StatName.PielouZmc: "Z_mc", StatName.PielouZmcAssoc: "Z^a_mc",
    StatName.PielouZmcSeg: "Z^s_mc", StatName.ZI: "Z_I", StatName.ZII: "Z_II",
}

_CELLS = {(1, 1): 0, (1, 2): 1, (2, 1): 2, (2, 2): 3}
_DIXON = (StatName.DixonZ11, StatName.DixonZ12, StatName.DixonZ21, StatName.DixonZ22)
_CEYHAN = (StatName.CeyhanZ11, StatName.CeyhanZ12, StatName.CeyhanZ21, StatName.CeyhanZ22)


@dataclass(frozen=True)
class CorrectionConstants:
    """Location/scale maps that bring Pielou's Z_P near N(0, 1) under CSR."""

    beta_n: float = 1.277
    alpha_a: float = 0.043
    beta_a: float = 1.307
    alpha_s: float = -0.057
    beta_s: float = 1.275


CORRECTION = CorrectionConstants()


def _safe_div(num, den):
    num, den = np.broadcast_arrays(np.asarray(num, float), np.asarray(den, float))
    out = np.full(num.shape, np.nan)
    ok = den > 0
    np.divide(num, den, out=out, where=ok)
    return out


def statistic_arrays(counts, q, r, names=None,
                     constants: CorrectionConstants = CORRECTION) -> dict:
    """Evaluate statistics on one table or a stack of tables.

    ``counts`` is ``(2, 2)`` or ``(m, 2, 2)``; every table must share the
    same row sums (class sizes). ``q`` and ``r`` are scalars or length-m
    arrays. Undefined values come back as NaN.
    """
    c = np.asarray(counts, dtype=float)
    single = c.ndim == 2
    c = c.reshape(-1, 2, 2)
    rows = c.sum(axis=2)
    n1, n2 = int(rows[0, 0]), int(rows[0, 1])
    if not (np.all(rows[:, 0] == n1) and np.all(rows[:, 1] == n2)):
        raise ValueError("all tables in a stack must share their row sums")
    if n1 < 1 or n2 < 1:
        raise ValueError("both classes must be present")
    n = n1 + n2
    wanted = set(StatName) if names is None else {StatName(x) for x in names}
    q = np.broadcast_to(np.asarray(q, dtype=float), c.shape[:1])
    r = np.broadcast_to(np.asarray(r, dtype=float), c.shape[:1])

    cells = c.reshape(-1, 4)
    col = c.sum(axis=1)  # (m, 2): C1, C2
    out = {}

    if any(s.needs_moments for s in wanted):
        if n >= 4:
            ms = moments.moment_set(n1, n2, q, r)
            e = ms.e_counts.reshape(4)
            v = ms.var_counts.reshape(-1, 4)
            vt = ms.var_t.reshape(-1, 4)
            dixon = _safe_div(cells - e, np.sqrt(v))
            kc = np.array([n1 - 1, n1, n2, n2 - 1], dtype=float) / (n - 1)
            tij = cells - kc * col[:, [0, 1, 0, 1]]
            ceyhan = _safe_div(tij, np.sqrt(vt))
            tn = cells[:, 0] / n1 - cells[:, 2] / n2
            z2 = _safe_div(tn - ms.e_tn, np.sqrt(ms.var_tn))
        else:
            nan4 = np.full((len(c), 4), np.nan)
            dixon = ceyhan = nan4
            z2 = np.full(len(c), np.nan)
        for k, s in enumerate(_DIXON):
            out[s] = dixon[:, k]
        for k, s in enumerate(_CEYHAN):
            out[s] = ceyhan[:, k]
        out[StatName.ZII] = z2
        un = np.sqrt(_safe_div(n1 * n2, col[:, 0] * col[:, 1]))
        out[StatName.ZI] = un * z2

    expected = np.stack([n1 * col, n2 * col], axis=1) / n  # (m, 2, 2)
    chi = _safe_div((c - expected) ** 2, expected)
    chi = np.where(np.all(expected > 0, axis=(1, 2)), chi.sum(axis=(1, 2)), np.nan)
    out[StatName.PielouChi2] = chi
    zp = (cells[:, 0] / n1 - cells[:, 2] / n2) * np.sqrt(
        _safe_div(n1 * n2 * n, col[:, 0] * col[:, 1])
    )
    out[StatName.PielouZ] = zp
    out[StatName.PielouZmc] = zp / constants.beta_n
    out[StatName.PielouZmcAssoc] = (zp - constants.alpha_a) / constants.beta_a
    out[StatName.PielouZmcSeg] = (zp - constants.alpha_s) / constants.beta_s

    result = {s: out[s] for s in StatName if s in wanted}
    if single:
        result = {s: float(v[0]) for s, v in result.items()}
    return result


def _why_undefined(t: Nnct, name: StatName) -> str:
    if name.needs_moments and t.n < 4:
        return f"needs n >= 4, got n = {t.n}"
    if name in (StatName.ZI, *(_DIXON + _CEYHAN), StatName.ZII):
        if name is StatName.ZI and min(t.col_sums) == 0:
            return "empty NNCT column"
        return "zero null variance"
    if name is StatName.PielouChi2:
        return "zero expected cell count"
    return "empty NNCT column"


def _scalar(t: Nnct, q, r, name: StatName, constants=CORRECTION) -> float:
    value = statistic_arrays(t.counts, q, r, [name], constants)[name]
    if math.isnan(value):
        reason = _why_undefined(t, name)
        exc = DegenerateVarianceError if reason == "zero null variance" else UndefinedStatistic
        raise exc(f"{name.label} undefined: {reason}")
    return value


def dixon_z(t: Nnct, q, r, cell=(1, 1)) -> float:
    """(N_ij - E[N_ij]) / sqrt(Var[N_ij])."""
    return _scalar(t, q, r, _DIXON[_CELLS[tuple(cell)]])


def ceyhan_z(t: Nnct, q, r, cell=(1, 1)) -> float:
    """T_ij / sqrt(Var[T_ij]) with column-adjusted T_ij."""
    return _scalar(t, q, r, _CEYHAN[_CELLS[tuple(cell)]])


def pielou_chi2(t: Nnct) -> float:
    return _scalar(t, 0, 0, StatName.PielouChi2)


def pielou_z(t: Nnct) -> float:
    """Signed square root of Pielou's chi-square."""
    return _scalar(t, 0, 0, StatName.PielouZ)


def pielou_z_corrected(t: Nnct, constants: CorrectionConstants = CORRECTION):
    """(Z_mc, Z^a_mc, Z^s_mc): scale-corrected, association- and segregation-side maps."""
    z = pielou_z(t)
    return (
        z / constants.beta_n,
        (z - constants.alpha_a) / constants.beta_a,
        (z - constants.alpha_s) / constants.beta_s,
    )


def z_one(t: Nnct, q, r) -> float:
    """Z_I: Z_II scaled by U_n = sqrt(n1 n2 / (C1 C2))."""
    return _scalar(t, q, r, StatName.ZI)


def z_two(t: Nnct, q, r) -> float:
    """Z_II: standardized T_n = N11/n1 - N21/n2."""
    return _scalar(t, q, r, StatName.ZII)


class StatisticSet(dict):
    """Mapping StatName -> value; undefined entries are NaN and listed in ``errors``."""

    def __init__(self, values, errors):
        super().__init__(values)
        self.errors = dict(errors)


def run_all(t: Nnct, q, r, constants: CorrectionConstants = CORRECTION) -> StatisticSet:
    values = statistic_arrays(t.counts, q, r, None, constants)
    errors = {s: _why_undefined(t, s) for s, v in values.items() if math.isnan(v)}
    return StatisticSet(values, errors)
