"""Exact null moments by enumerating every labeling of a fixed point set."""

from itertools import combinations

import numpy as np

from nnctseg.table import nnct_counts


def all_labelings(n, n1):
    out = np.full((0, n), 2, dtype=np.int64)
    rows = []
    for ones in combinations(range(n), n1):
        lab = np.full(n, 2, dtype=np.int64)
        lab[list(ones)] = 1
        rows.append(lab)
    return np.array(rows) if rows else out


def exact_moments(nn_index, n1):
    """Moments of NNCT quantities over all C(n, n1) equally likely labelings."""
    n = len(nn_index)
    n2 = n - n1
    c = nnct_counts(all_labelings(n, n1), nn_index).astype(float)
    cells = c.reshape(-1, 4)
    col1 = c[:, 0, 0] + c[:, 1, 0]
    k = np.array([n1 - 1, n1, n2, n2 - 1], dtype=float) / (n - 1)
    t = cells - k * np.column_stack([col1, n - col1, col1, n - col1])
    tn = c[:, 0, 0] / n1 - c[:, 1, 0] / n2
    cov = np.mean((cells[:, 0] - cells[:, 0].mean()) * (cells[:, 2] - cells[:, 2].mean()))
    cols = np.column_stack([col1, n - col1, col1, n - col1])
    cov_col = np.mean((cells - cells.mean(axis=0)) * (cols - cols.mean(axis=0)), axis=0)
    return {
        "e_counts": cells.mean(axis=0).reshape(2, 2),
        "var_counts": cells.var(axis=0).reshape(2, 2),
        "cov_n11_n21": cov,
        "var_c1": col1.var(),
        "cov_count_col": cov_col.reshape(2, 2),
        "e_t": t.mean(axis=0).reshape(2, 2),
        "var_t": t.var(axis=0).reshape(2, 2),
        "e_tn": tn.mean(),
        "var_tn": tn.var(),
    }
