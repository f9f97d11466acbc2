"""Nearest-neighbor contingency table (NNCT) tests of spatial segregation and association.

Typical use::

    from nnctseg import read_pattern, build_nn_digraph, build_nnct, run_all

    p = read_pattern("points.csv")
    g = build_nn_digraph(p)
    stats = run_all(build_nnct(p, g), g.q, g.r)
"""

from .inference import (
    Alternative,
    TestReport,
    p_asymptotic,
    p_montecarlo,
    p_randomization,
    run_tests,
)
from .moments import (
    DegenerateVarianceError,
    InvalidMomentInput,
    UndefinedStatistic,
    moment_set,
    qr_adjust,
)
from .nngraph import GeometryError, NnDigraph, build_nn_digraph, nearest_neighbors
from .pattern import (
    UNIT_SQUARE,
    AssocParams,
    MarkedPattern,
    PatternError,
    Region,
    SegParams,
    gen_association,
    gen_csr,
    gen_segregation,
    read_pattern,
    relabel,
    write_pattern,
)
from .second_order import LCurve, envelope, l_bivariate, l_univariate
from .simharness import (
    PowerConfig,
    RateTable,
    SizeConfig,
    derive_correction_constants,
    empirical_power,
    empirical_size,
)
from .table import Nnct, build_nnct, nnct_percentages
from .teststat import (
    CORRECTION,
    CorrectionConstants,
    StatName,
    StatisticSet,
    ceyhan_z,
    dixon_z,
    pielou_chi2,
    pielou_z,
    pielou_z_corrected,
    run_all,
    statistic_arrays,
    z_one,
    z_two,
)

__version__ = "0.1.0"
