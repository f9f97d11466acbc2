"""Command-line interface: ``nnctseg test | simulate | envelope | generate``.

Exit codes: 0 success, 1 usage error, 2 I/O or parse error, 3 numeric error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from fractions import Fraction
from pathlib import Path

from . import moments, pattern as pat
from .inference import Alternative, TestReport, p_asymptotic, run_tests
from .moments import InvalidMomentInput, UndefinedStatistic
from .nngraph import GeometryError, build_nn_digraph
from .second_order import GridError, default_grid, envelope, max_distance
from .simharness import (
    CONSTANT_PAIRS,
    SIZE_PAIRS,
    PowerConfig,
    SizeConfig,
    derive_correction_constants,
    empirical_power,
    empirical_size,
)
from .table import Nnct, build_nnct, nnct_percentages
from .teststat import StatName, statistic_arrays

EXIT_OK, EXIT_USAGE, EXIT_IO, EXIT_NUMERIC = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


# ---------------------------------------------------------------- parsing helpers

def _number(text: str) -> float:
    """Accept decimals and fractions such as ``1/6``."""
    try:
        return float(Fraction(text.strip()))
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None


def _numbers(text: str) -> list[float]:
    return [_number(t) for t in text.split(",") if t.strip()]


def _pair(text: str) -> tuple[int, int]:
    parts = text.split(",")
    try:
        n1, n2 = (int(p) for p in parts)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected n1,n2 got {text!r}") from None
    return n1, n2


def _region(text: str) -> pat.Region:
    try:
        return pat.Region.parse(text)
    except (ValueError, pat.PatternError) as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _alts(text: str) -> list[Alternative]:
    try:
        return [Alternative.parse(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _stats(text: str) -> list[StatName] | None:
    if text.strip().lower() == "all":
        return None
    try:
        return [StatName.parse(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _engines(text: str) -> list[str]:
    eng = [t.strip().lower() for t in text.split(",") if t.strip()]
    bad = set(eng) - {"asy", "mc", "rand"}
    if not eng or bad:
        raise argparse.ArgumentTypeError("engines must be a comma list of asy, mc, rand")
    return eng


def _positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be positive, got {v}")
    return v


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float) and math.isnan(v):
        return "nan"
    return f"{v:.4f}"


def _json_num(v):
    if v is None or (isinstance(v, float) and math.isnan(v)):
        return None
    return v


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text, encoding="utf-8")


# ---------------------------------------------------------------- test

def _table_from_args(args):
    try:
        counts = [int(v) for v in args.table.split(",")]
    except ValueError:
        raise UsageError(f"--table expects four integers, got {args.table!r}") from None
    if len(counts) != 4:
        raise UsageError("--table expects four integers N11,N12,N21,N22")
    try:
        t = Nnct.from_counts(counts)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if not args.qr_adjust and (args.q is None or args.r is None):
        raise UsageError("--table needs --q and --r (or --qr-adjust)")
    return t


def _report_rows(reports):
    return [
        {
            "statistic": rep.name.value, "label": rep.name.label,
            "alternative": rep.alternative.value, "value": _json_num(rep.value),
            "p_asy": _json_num(rep.p_asy), "p_mc": _json_num(rep.p_mc),
            "p_rand": _json_num(rep.p_rand), "error": rep.error,
        }
        for rep in reports
    ]


def _render_test(t: Nnct, q, r, names, rows, engines, fmt, n_reps):
    cols = [f"p_{e}" for e in ("asy", "mc", "rand") if e in engines]
    if fmt == "json":
        doc = {"nnct": t.to_dict(), "q": q, "r": r, "engines": list(engines),
               "n_replicates": n_reps, "results": rows}
        return json.dumps(doc, indent=2) + "\n"
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["statistic", "alternative", "value", *cols, "error"])
        for row in rows:
            w.writerow([row["statistic"], row["alternative"], repr(row["value"]),
                        *(repr(row[c]) if row[c] is not None else "" for c in cols),
                        row["error"] or ""])
        return buf.getvalue()
    pct = nnct_percentages(t)
    lines = [t.render(names), ""]
    lines.append("row percentages: " + "  ".join(
        f"{names[i]}->{names[j]} {100 * pct['cells'][i, j]:.1f}%"
        for i in range(2) for j in range(2)))
    lines.append(f"class shares: {100 * pct['rows'][0]:.1f}% / {100 * pct['rows'][1]:.1f}%   "
                 f"NN shares: {100 * pct['cols'][0]:.1f}% / {100 * pct['cols'][1]:.1f}%")
    lines.append(f"Q = {q:g}   R = {r:g}")
    lines.append("")
    head = ["statistic", "alt", "value", *cols]
    lines.append(f"{head[0]:<10}{head[1]:<7}" + "".join(f"{h:>10}" for h in head[2:]))
    for row in rows:
        if row["error"]:
            lines.append(f"{row['label']:<10}{row['alternative']:<7}{'undefined':>10}  "
                         f"({row['error']})")
            continue
        vals = [_fmt(row["value"])] + [_fmt(row[c]) for c in cols]
        lines.append(f"{row['label']:<10}{row['alternative']:<7}"
                     + "".join(f"{v:>10}" for v in vals))
    if n_reps:
        lines.append(f"\nsimulation replicates: {n_reps}")
    return "\n".join(lines) + "\n"


def cmd_test(args) -> int:
    names = args.stats if args.stats is not None else list(StatName)
    if args.table:
        if args.input:
            raise UsageError("use either --input or --table, not both")
        if set(args.engines) != {"asy"}:
            raise UsageError("--table supports only the asy engine")
        t = _table_from_args(args)
        q, r = args.q, args.r
        if args.qr_adjust:
            q, r = moments.qr_adjust(t.n)
        values = statistic_arrays(t.counts, q, r, names)
        reports = []
        for alt in args.alt:
            for s in names:
                if not s.z_valued and alt is not Alternative.TwoSided:
                    continue
                v = values[s]
                if math.isnan(v):
                    reports.append(TestReport(s, v, alt, error="undefined for this table"))
                else:
                    reports.append(TestReport(s, v, alt, p_asymptotic(v, s, alt)))
        rows = _report_rows(reports)
        _emit(_render_test(t, q, r, ("1", "2"), rows, args.engines, args.format, 0), args.out)
        return EXIT_OK

    if not args.input:
        raise UsageError("test needs --input FILE or --table N11,N12,N21,N22")
    if "mc" in args.engines and args.region is None:
        print("warning: no --region given; Monte Carlo uses the bounding box of the data",
              file=sys.stderr)
    p = pat.read_pattern(args.input, args.region)
    g = build_nn_digraph(p)
    t = build_nnct(p, g)
    q, r = (g.q, g.r)
    if args.qr_adjust:
        q, r = moments.qr_adjust(p.n)
    reports = run_tests(p, names, args.alt, engines=args.engines, n_mc=args.nmc,
                        seed=args.seed, workers=args.workers, q=q, r=r)
    n_reps = max((rep.n_replicates for rep in reports), default=0)
    rows = _report_rows(reports)
    _emit(_render_test(t, q, r, p.class_names, rows, args.engines, args.format, n_reps),
          args.out)
    return EXIT_OK


# ---------------------------------------------------------------- simulate

def _write_rate_table(table, args) -> None:
    alts = table.alternatives()
    if args.format == "json":
        _emit(table.to_json() + "\n", args.out)
        return
    if args.out is None:
        parts = []
        for alt in alts:
            text = table.to_csv(alt)
            parts.append(text if len(alts) == 1 else f"# alternative: {alt.value}\n{text}")
        sys.stdout.write("\n".join(parts))
        return
    # One CSV per alternative plus a JSON summary next to them.
    base = Path(args.out)
    stem = base.with_suffix("") if base.suffix else base
    for alt in alts:
        Path(f"{stem}_{alt.value}.csv").write_text(table.to_csv(alt), encoding="utf-8")
    Path(f"{stem}.json").write_text(table.to_json() + "\n", encoding="utf-8")


def cmd_simulate(args) -> int:
    n_mc = 10000 if args.full else args.nmc
    common = dict(n_mc=n_mc, master_seed=args.seed, workers=args.workers)
    if args.stats is not None:
        common["statistics"] = tuple(args.stats)
    try:
        if args.mode == "constants":
            pairs = tuple(args.pairs) if args.pairs else CONSTANT_PAIRS
            est = derive_correction_constants(pairs, n_mc, args.seed, args.workers,
                                              pooling=args.pooling)
            c = est.constants
            doc = {"beta_n": c.beta_n, "alpha_a": c.alpha_a, "beta_a": c.beta_a,
                   "alpha_s": c.alpha_s, "beta_s": c.beta_s, "pooling": args.pooling,
                   "n_mc": n_mc, "seed": args.seed, "n_degenerate": est.n_degenerate,
                   "per_pair": {f"{a},{b}": v for (a, b), v in est.per_pair.items()}}
            if args.format == "json":
                text = json.dumps(doc, indent=2) + "\n"
            else:
                text = "".join(f"{k} = {doc[k]:.4f}\n"
                               for k in ("beta_n", "alpha_a", "beta_a", "alpha_s", "beta_s"))
            _emit(text, args.out)
            return EXIT_OK
        if args.mode == "size":
            alts = args.alt or [Alternative.TwoSided, Alternative.RightSided,
                                Alternative.LeftSided]
            cfg = SizeConfig(pairs=tuple(args.pairs or SIZE_PAIRS), alpha=args.alpha,
                             alternatives=tuple(alts), **common)
            table = empirical_size(cfg)
        else:
            kw = dict(alpha=args.alpha, **common)
            if args.pairs:
                kw["pairs"] = tuple(args.pairs)
            if args.params:
                kw["params"] = tuple(args.params)
            if args.alt:
                kw["alternatives"] = tuple(args.alt)
            table = empirical_power(PowerConfig.for_family(args.family, **kw))
    except (TypeError, ValueError) as exc:
        raise UsageError(str(exc)) from None
    _write_rate_table(table, args)
    return EXIT_OK


# ---------------------------------------------------------------- envelope / generate

def cmd_envelope(args) -> int:
    p = pat.read_pattern(args.input, args.region)
    limit = max_distance(p.region)
    t_max = limit if args.tmax is None else args.tmax
    if t_max > limit * (1 + 1e-12):
        raise UsageError(f"--tmax {t_max:g} exceeds the limit of a quarter of the shorter "
                         f"side, {limit:g}")
    grid = default_grid(p.region, args.grid) * (t_max / limit)
    try:
        curve = envelope(p, args.which, n_sim=args.nsim, t_grid=grid, seed=args.seed)
    except GridError as exc:
        raise UsageError(f"{exc} (limit {limit:g})") from None
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if args.format == "json":
        doc = {"t": curve.t_grid.tolist(), "l_minus_t": curve.l_minus_t.tolist(),
               "lo95": curve.lo_95.tolist(), "hi95": curve.hi_95.tolist(),
               "which": args.which, "n_sim": args.nsim, "seed": args.seed}
        _emit(json.dumps(doc, indent=2) + "\n", args.out)
    else:
        _emit(curve.to_csv(), args.out)
    return EXIT_OK


def cmd_generate(args) -> int:
    try:
        if args.model == "csr":
            p = pat.gen_csr(args.n1, args.n2, args.region or pat.UNIT_SQUARE, args.seed)
        elif args.param is None:
            raise UsageError(f"--param is required for model {args.model}")
        elif args.model == "seg":
            p = pat.gen_segregation(args.n1, args.n2, args.param, args.seed)
        else:
            p = pat.gen_association(args.n1, args.n2, args.param, args.seed)
    except pat.PatternError:
        raise
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    text = pat.write_pattern(p)
    _emit(text, args.out)
    return EXIT_OK


# ---------------------------------------------------------------- main

def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="nnctseg", description="Nearest-neighbor contingency table tests "
                 "of spatial segregation and association.")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def shared(p, seed_default=0):
        p.add_argument("--seed", type=int, default=seed_default)
        p.add_argument("--format", choices=("text", "csv", "json"), default="text")
        p.add_argument("--out", help="output file (default: stdout)")
        p.add_argument("--workers", type=_positive_int, default=None,
                       help="worker processes (default: $NNCTSEG_WORKERS or 1)")

    t = sub.add_parser("test", help="NNCT tests on a marked pattern or a bare table")
    t.add_argument("--input", help="CSV with x,y,label rows")
    t.add_argument("--region", type=_region, help="xmin,ymin,xmax,ymax")
    t.add_argument("--table", help="N11,N12,N21,N22 (asymptotic tests only)")
    t.add_argument("--q", type=float, help="Q for --table")
    t.add_argument("--r", type=float, help="R for --table")
    t.add_argument("--qr-adjust", action="store_true", help="use Q = 0.63 n, R = 0.62 n")
    t.add_argument("--stats", type=_stats, default=None, help="comma list or 'all'")
    t.add_argument("--alt", type=_alts, default=[Alternative.TwoSided],
                   help="comma list of two, seg, assoc")
    t.add_argument("--engines", type=_engines, default=["asy"], help="comma list of asy, mc, rand")
    t.add_argument("--nmc", type=_positive_int, default=10000)
    shared(t)
    t.set_defaults(func=cmd_test)

    s = sub.add_parser("simulate", help="empirical size, power or correction constants")
    s.add_argument("mode", choices=("size", "power", "constants"))
    s.add_argument("--pairs", type=_pair, action="append", help="n1,n2 (repeatable)")
    s.add_argument("--nmc", type=_positive_int, default=1000)
    s.add_argument("--full", action="store_true", help="use 10000 replicates")
    s.add_argument("--alpha", type=_number, default=0.05)
    s.add_argument("--alt", type=_alts, default=None)
    s.add_argument("--stats", type=_stats, default=None)
    s.add_argument("--family", choices=("seg", "assoc"), default="seg")
    s.add_argument("--params", "--s", "--r", dest="params", type=_numbers, default=None,
                   help="comma list of s (seg) or r (assoc) values, fractions allowed")
    s.add_argument("--pooling", choices=("median", "pooled"), default="median")
    shared(s)
    s.set_defaults(func=cmd_simulate)

    e = sub.add_parser("envelope", help="L-function estimate with CSR envelope")
    e.add_argument("--input", required=True)
    e.add_argument("--region", type=_region)
    e.add_argument("--which", choices=("bi", "uni-all", "uni-1", "uni-2"), default="bi")
    e.add_argument("--nsim", type=int, default=99)
    e.add_argument("--grid", type=_positive_int, default=64, help="number of distances")
    e.add_argument("--tmax", type=_number, default=None,
                   help="largest distance (default and maximum: shorter side / 4)")
    shared(e)
    e.set_defaults(func=cmd_envelope)

    g = sub.add_parser("generate", help="emit a pattern from a generator")
    g.add_argument("--model", choices=("csr", "seg", "assoc"), default="csr")
    g.add_argument("--n1", type=_positive_int, required=True)
    g.add_argument("--n2", type=_positive_int, required=True)
    g.add_argument("--param", type=_number, help="s for seg, r for assoc")
    g.add_argument("--region", type=_region, help="region for csr")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out")
    g.set_defaults(func=cmd_generate)
    return ap


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"nnctseg: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, pat.PatternError) as exc:
        print(f"nnctseg: {exc}", file=sys.stderr)
        return EXIT_IO
    except (UndefinedStatistic, InvalidMomentInput, GeometryError, FloatingPointError) as exc:
        print(f"nnctseg: numeric error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"nnctseg: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
