"""Null moments of NNCT cell counts conditional on (n1, n2, Q, R).

All functions accept scalar class sizes and scalar or array-valued ``q``
and ``r`` (arrays broadcast), which lets the Monte Carlo engines evaluate
thousands of replicates at once.

Only the two-class case is covered. Every quantity needed by the tests
follows from Var[N11], Var[N12], Var[N21], Var[N22] and Cov[N11, N21]
through the complement identities N12 = n1 - N11, N22 = n2 - N21 and
C2 = n - C1.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "VAR_TOL",
    "UndefinedStatistic",
    "DegenerateVarianceError",
    "InvalidMomentInput",
    "PairProbs",
    "MomentSet",
    "label_probability",
    "pair_probs",
    "expected_counts",
    "var_counts",
    "cov_n11_n21",
    "column_moments",
    "var_t",
    "tn_moments",
    "qr_adjust",
    "moment_set",
]

VAR_TOL = 1e-9


class UndefinedStatistic(ArithmeticError):
    """A statistic cannot be evaluated on this table (empty column, tiny n, ...)."""


class DegenerateVarianceError(UndefinedStatistic):
    """A statistic's null variance is zero, so the statistic is undefined."""


class InvalidMomentInput(ValueError):
    """Inputs produce a clearly negative variance (impossible q/r for this n)."""


def _guard(v, what: str):
    a = np.asarray(v, dtype=float)
    if np.any(a < -VAR_TOL):
        raise InvalidMomentInput(f"{what} is negative ({a.min():.3g}); check q and r")
    a = np.where(a <= 0.0, 0.0, a)
    return float(a) if a.ndim == 0 else a


def _check_n(n1, n2, minimum=4):
    if n1 < 0 or n2 < 0:
        raise ValueError("class sizes must be non-negative")
    if n1 + n2 < minimum:
        raise ValueError(f"need n = n1 + n2 >= {minimum}, got {n1 + n2}")


def label_probability(n1: int, n2: int, labels) -> float:
    """Probability that an ordered tuple of distinct points carries ``labels``.

    Points are drawn without replacement from n1 class-1 and n2 class-2
    points, e.g. ``labels=(1, 1, 2)`` gives n1 (n1-1) n2 / (n (n-1) (n-2)).
    """
    n = n1 + n2
    if len(labels) > n:
        raise ValueError("more labels than points")
    avail = {1: n1, 2: n2}
    num = 1.0
    den = 1.0
    for k, lab in enumerate(labels):
        num *= avail[lab]
        avail[lab] -= 1
        den *= n - k
    return num / den


@dataclass(frozen=True)
class PairProbs:
    p11: float
    p22: float
    p12: float
    p21: float
    p111: float
    p222: float
    p112: float
    p221: float
    p1111: float
    p2222: float
    p1122: float
    p1112: float


def pair_probs(n1: int, n2: int) -> PairProbs:
    _check_n(n1, n2)
    lp = lambda *labs: label_probability(n1, n2, labs)  # noqa: E731
    return PairProbs(
        p11=lp(1, 1), p22=lp(2, 2), p12=lp(1, 2), p21=lp(2, 1),
        p111=lp(1, 1, 1), p222=lp(2, 2, 2), p112=lp(1, 1, 2), p221=lp(2, 2, 1),
        p1111=lp(1, 1, 1, 1), p2222=lp(2, 2, 2, 2), p1122=lp(1, 1, 2, 2),
        p1112=lp(1, 1, 1, 2),
    )


def expected_counts(n1: int, n2: int) -> np.ndarray:
    """E[N_ij] under RL / CSR independence; depends only on class sizes."""
    _check_n(n1, n2, minimum=2)
    n = n1 + n2
    return np.array(
        [[n1 * (n1 - 1), n1 * n2], [n1 * n2, n2 * (n2 - 1)]], dtype=float
    ) / (n - 1)


def var_counts(n1: int, n2: int, q, r) -> np.ndarray:
    """Var[N_ij] as a 2x2 array (trailing axes if q, r are arrays)."""
    pp = pair_probs(n1, n2)
    n = n1 + n2
    q = np.asarray(q, dtype=float)
    r = np.asarray(r, dtype=float)
    rest = n * n - 3 * n - q + r

    def diag(p2, p3, p4):
        return (n + r) * p2 + (2 * n - 2 * r + q) * p3 + rest * p4 - (n * p2) ** 2

    def off(p2, p3, p4):
        return n * p2 + q * p3 + rest * p4 - (n * p2) ** 2

    v11 = diag(pp.p11, pp.p111, pp.p1111)
    v22 = diag(pp.p22, pp.p222, pp.p2222)
    v12 = off(pp.p12, pp.p112, pp.p1122)
    v21 = off(pp.p21, pp.p221, pp.p1122)
    out = np.stack(np.broadcast_arrays(v11, v12, v21, v22), axis=-1)
    out = out.reshape(out.shape[:-1] + (2, 2))
    return _guard(out, "Var[N_ij]")


def cov_n11_n21(n1: int, n2: int, q, r):
    pp = pair_probs(n1, n2)
    n = n1 + n2
    q = np.asarray(q, dtype=float)
    r = np.asarray(r, dtype=float)
    cov = (n - r + q) * pp.p112 + (n * n - 3 * n - q + r) * pp.p1112 - n * n * pp.p11 * pp.p12
    return float(cov) if cov.ndim == 0 else cov


@dataclass(frozen=True)
class ColumnMoments:
    var_c1: object
    var_c2: object
    cov_count_col: np.ndarray  # Cov[N_ij, C_j], 2x2 (trailing axes)


def _column_from(v, cov) -> ColumnMoments:
    v11, v21 = v[..., 0, 0], v[..., 1, 0]
    var_c = _guard(v11 + v21 + 2 * cov, "Var[C_1]")
    a = v11 + cov  # Cov[N11, C1] = Cov[N12, C2]
    b = v21 + cov  # Cov[N21, C1] = Cov[N22, C2]
    cc = np.stack(np.broadcast_arrays(a, a, b, b), axis=-1)
    cc = cc.reshape(cc.shape[:-1] + (2, 2))
    return ColumnMoments(var_c, var_c, cc)


def column_moments(n1: int, n2: int, q, r) -> ColumnMoments:
    return _column_from(var_counts(n1, n2, q, r), np.asarray(cov_n11_n21(n1, n2, q, r)))


def _var_t_from(n1, n2, v, col: ColumnMoments) -> np.ndarray:
    n = n1 + n2
    # Coefficient of C_j in T_ij: (n_i - 1)/(n - 1) on the diagonal, n_i/(n - 1) off it.
    k = np.array([[n1 - 1, n1], [n2, n2 - 1]], dtype=float) / (n - 1)
    var_c = np.asarray(col.var_c1)[..., None, None]
    out = v + k ** 2 * var_c - 2 * k * col.cov_count_col
    return _guard(out, "Var[T_ij]")


def var_t(n1: int, n2: int, q, r) -> np.ndarray:
    """Var[T_ij] for the column-adjusted cell statistics."""
    v = var_counts(n1, n2, q, r)
    col = _column_from(v, np.asarray(cov_n11_n21(n1, n2, q, r)))
    return _var_t_from(n1, n2, v, col)


def _tn_from(n1, n2, v, cov):
    var = v[..., 0, 0] / n1 ** 2 + v[..., 1, 0] / n2 ** 2 - 2 * cov / (n1 * n2)
    return -1.0 / (n1 + n2 - 1), _guard(var, "Var[T_n]")


def tn_moments(n1: int, n2: int, q, r):
    """(E[T_n], Var[T_n]) for T_n = N11/n1 - N21/n2."""
    _check_n(n1, n2)
    if n1 == 0 or n2 == 0:
        raise ValueError("T_n needs both classes present")
    v = var_counts(n1, n2, q, r)
    return _tn_from(n1, n2, v, np.asarray(cov_n11_n21(n1, n2, q, r)))


def qr_adjust(n) -> tuple[float, float]:
    """Replacement (Q, R) = (0.63 n, 0.62 n) for the QR-adjusted tests."""
    if n < 0:
        raise ValueError("n must be non-negative")
    return 0.63 * n, 0.62 * n


@dataclass(frozen=True)
class MomentSet:
    e_counts: np.ndarray
    var_counts: np.ndarray
    cov_n11_n21: object
    var_col: tuple
    cov_count_col: np.ndarray
    var_t: np.ndarray
    e_tn: float
    var_tn: object


def moment_set(n1: int, n2: int, q, r) -> MomentSet:
    """Every null moment the NNCT statistics use, computed once."""
    v = var_counts(n1, n2, q, r)
    cov = np.asarray(cov_n11_n21(n1, n2, q, r))
    col = _column_from(v, cov)
    vt = _var_t_from(n1, n2, v, col)
    if n1 > 0 and n2 > 0:
        e_tn, var_tn = _tn_from(n1, n2, v, cov)
    else:
        e_tn, var_tn = -1.0 / (n1 + n2 - 1), float("nan")
    cov_out = float(cov) if cov.ndim == 0 else cov
    return MomentSet(
        e_counts=expected_counts(n1, n2),
        var_counts=v,
        cov_n11_n21=cov_out,
        var_col=(col.var_c1, col.var_c2),
        cov_count_col=col.cov_count_col,
        var_t=vt,
        e_tn=e_tn,
        var_tn=var_tn,
    )
