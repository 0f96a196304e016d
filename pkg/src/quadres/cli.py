"""Command-line front end.

Subcommands: constants, charsum, lvalue, resonate, search, proportion.
Global flags: --cache-dir, --format, --output, --threads (0 = auto),
--seed (reserved; everything is deterministic), --config.

Flag precedence: command line over config-file keys over built-in defaults.
Exit codes: 0 success, 1 validation error, 2 runtime error, 3 acceptance
check failure.

Output documents separate the deterministic payload from volatile metadata
(runtime), so identical configs produce byte-identical payload sections at
any thread count.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time

from . import consts
from .cache import LValueCache, params_hash
from .experiments import (
    charsum_empirical,
    extreme_search,
    proportion_phi,
    resonance_ratio,
    residual_scaling,
)
from .lfunc import (
    CSV_HEADER,
    DEFAULT_L_BUDGET,
    LValueRecord,
    l_half,
    l_one_oracle,
    l_one_truncated,
    prime_sum_sigma,
)
from .resonator import BsParams, EulerParams, WindowOverride
from .specfn import BudgetError, NonConvergenceError, PrecisionBudget

SCHEMA_VERSION = 1

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_RUNTIME = 2
EXIT_CHECK_FAILED = 3


def _auto_threads(threads: int) -> int:
    if threads < 0:
        raise ValueError("--threads must be >= 0")
    return threads if threads > 0 else min(4, os.cpu_count() or 1)


def _emit(args, command: str, payload: dict, runtime_ms: int, csv_lines=None, tsv_series=None):
    fmt = args.format
    if fmt == "json":
        doc = {
            "schema": SCHEMA_VERSION,
            "command": command,
            "payload": payload,
            "meta": {"runtime_ms": runtime_ms},
        }
        text = json.dumps(doc, sort_keys=True, indent=2) + "\n"
    elif fmt == "csv":
        if csv_lines is None:
            raise ValueError(f"command {command} has no CSV form; use --format json")
        text = "\n".join(csv_lines) + "\n"
    elif fmt == "tsv":
        if tsv_series is None:
            raise ValueError(f"command {command} has no TSV plot form; use --format json")
        lines = []
        for name, points in tsv_series:
            lines.append(f"# series: {name}")
            lines.extend(
                f"{x if isinstance(x, str) else repr(x)}\t{y!r}" for x, y in points
            )
        text = "\n".join(lines) + "\n"
    else:
        raise ValueError(f"unknown format {fmt!r}")
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _records_csv(records) -> list[str]:
    return [CSV_HEADER] + [r.csv_row() for r in records]


# ---------------------------------------------------------------------------
# constants
# ---------------------------------------------------------------------------

def cmd_constants(args) -> int:
    t0 = time.perf_counter()
    reports = consts.all_constant_reports()
    max_disc = args.max_discrepancy
    failures = [r.name for r in reports if r.method == "both" and r.discrepancy > max_disc]
    c2 = consts.const_C2()
    if c2.discrepancy > 1e-12:
        failures.append("C2-two-forms")
    payload = {
        "reports": [
            {
                "name": r.name,
                "value": r.value,
                "method": r.method,
                "discrepancy": r.discrepancy,
            }
            for r in reports
        ],
        "max_discrepancy": max_disc,
        "failures": failures,
    }
    runtime = int(1000 * (time.perf_counter() - t0))
    if args.format == "table":
        width = max(len(r.name) for r in reports)
        out = []
        for r in reports:
            line = f"{r.name:<{width}}  {r.value!r}"
            if r.method == "both":
                line += f"   (closed form vs quadrature: {r.discrepancy:.3e})"
            out.append(line)
        if failures:
            out.append(f"FAILED discrepancy checks: {', '.join(failures)}")
        text = "\n".join(out) + "\n"
        if args.output:
            with open(args.output, "w") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
    else:
        csv_lines = ["name,value,method,discrepancy"] + [
            f"{r.name},{r.value!r},{r.method},{r.discrepancy!r}" for r in reports
        ]
        tsv = [("constants", [(r.name, r.value) for r in reports])]
        _emit(args, "constants", payload, runtime, csv_lines, tsv)
    return EXIT_CHECK_FAILED if failures else EXIT_OK


# ---------------------------------------------------------------------------
# charsum
# ---------------------------------------------------------------------------

def cmd_charsum(args) -> int:
    t0 = time.perf_counter()
    threads = _auto_threads(args.threads)
    if args.x_grid:
        grid = [int(x) for x in args.x_grid.split(",")]
        fit = residual_scaling(args.n, grid, args.sign, threads)
        payload = fit.to_payload()
        tsv = [("abs_residual", list(zip(fit.X_grid, [abs(r) for r in fit.residuals])))]
        csv_lines = ["X,residual"] + [
            f"{x},{r!r}" for x, r in zip(fit.X_grid, fit.residuals)
        ]
    else:
        if args.X is None:
            raise ValueError("charsum needs --X (or --x-grid)")
        rep = charsum_empirical(args.X, args.n, args.sign, threads)
        payload = rep.to_payload()
        tsv = [("residual", [(rep.X, rep.residual)])]
        csv_lines = [
            "X,n,empirical_sum,main_term,residual,is_square,d_count",
            f"{rep.X},{rep.n},{rep.empirical_sum},{rep.main_term!r},"
            f"{rep.residual!r},{int(rep.is_square)},{rep.d_count}",
        ]
    _emit(args, "charsum", payload, int(1000 * (time.perf_counter() - t0)), csv_lines, tsv)
    return EXIT_OK


# ---------------------------------------------------------------------------
# lvalue
# ---------------------------------------------------------------------------

def _budget_from(args) -> PrecisionBudget:
    return PrecisionBudget(abs_tol=args.abs_tol, rel_tol=0.0, max_subdivisions=2000)


def cmd_lvalue(args) -> int:
    t0 = time.perf_counter()
    budget = _budget_from(args)
    sigma = args.sigma
    cache = LValueCache(args.cache_dir) if args.cache_dir else None
    if sigma == 0.5:
        method = "oracle" if args.method == "oracle" else "afe"
        ph = params_hash({"abs_tol": budget.abs_tol, "method": method})
        rec = cache.get(args.d, sigma, method, ph) if cache else None
        if rec is None:
            rec = l_half_oracle_or_afe(args.d, method, budget)
            if cache:
                cache.put(rec, ph)
    elif sigma == 1.0:
        if args.method == "oracle":
            ph = params_hash({"method": "oracle"})
            rec = cache.get(args.d, sigma, "oracle", ph) if cache else None
            if rec is None:
                rec = l_one_oracle(args.d, budget)
                if cache:
                    cache.put(rec, ph)
        else:
            y = args.y if args.y is not None else 1000.0
            ph = params_hash({"y": y})
            rec = cache.get(args.d, sigma, "euler_trunc", ph) if cache else None
            if rec is None:
                rec = l_one_truncated(args.d, y)
                if cache:
                    cache.put(rec, ph)
    elif 0.5 < sigma < 1.0:
        y = args.y if args.y is not None else 1000.0
        ph = params_hash({"y": y, "sigma": sigma})
        rec = cache.get(args.d, sigma, "prime_sum", ph) if cache else None
        if rec is None:
            rec = prime_sum_sigma(args.d, sigma, y)
            if cache:
                cache.put(rec, ph)
    else:
        raise ValueError("sigma must lie in [1/2, 1]")
    payload = {
        "d": rec.d,
        "sigma": rec.sigma,
        "value": rec.value,
        "method": rec.method,
        "err_estimate": rec.err_estimate,
    }
    _emit(
        args,
        "lvalue",
        payload,
        int(1000 * (time.perf_counter() - t0)),
        _records_csv([rec]),
        [("lvalue", [(rec.d, rec.value)])],
    )
    return EXIT_OK


def l_half_oracle_or_afe(d: int, method: str, budget: PrecisionBudget) -> LValueRecord:
    from .lfunc import l_half_series_oracle

    return l_half_series_oracle(d) if method == "oracle" else l_half(d, budget)


# ---------------------------------------------------------------------------
# resonator flags shared by resonate/search
# ---------------------------------------------------------------------------

def _parse_windows(text: str) -> WindowOverride:
    windows = []
    thresholds = []
    for part in text.split(","):
        bits = part.split(":")
        if len(bits) not in (2, 3):
            raise ValueError("window format is lo:hi[:threshold],...")
        windows.append((float(bits[0]), float(bits[1])))
        thresholds.append(int(bits[2]) if len(bits) == 3 else None)
    return WindowOverride(tuple(windows), tuple(thresholds))


def _spec_from_args(args):
    fam = args.family
    if fam == "central_one":
        if args.z is None:
            raise ValueError("central_one needs --z")
        return EulerParams("central_one", z=args.z)
    if fam == "sigma_band":
        if args.Y is None or args.b is None:
            raise ValueError("sigma_band needs --Y and --b")
        return EulerParams("sigma_band", Y=args.Y, b=args.b)
    if fam == "bs":
        override = _parse_windows(args.window) if args.window else None
        return BsParams(
            N=args.N, a=args.bs_a, delta=args.delta, window_override=override
        )
    raise ValueError(f"unknown family {fam!r}")


def _add_family_flags(p):
    p.add_argument("--family", choices=["bs", "central_one", "sigma_band"])
    p.add_argument("--z", type=float, help="central_one cutoff")
    p.add_argument("--Y", type=float, help="sigma_band prime bound")
    p.add_argument("--b", type=float, help="sigma_band coefficient")
    p.add_argument("--N", type=float, default=20.0, help="bs size parameter")
    p.add_argument("--bs-a", type=float, default=1.2, help="bs threshold constant")
    p.add_argument("--delta", type=float, default=0.5, help="bs window exponent")
    p.add_argument("--window", help="bs override, lo:hi[:threshold],...")


# ---------------------------------------------------------------------------
# resonate / search / proportion
# ---------------------------------------------------------------------------

def cmd_resonate(args) -> int:
    t0 = time.perf_counter()
    spec = _spec_from_args(args)
    cache = LValueCache(args.cache_dir) if args.cache_dir else None
    rep = resonance_ratio(
        args.X,
        spec,
        args.target,
        sigma=args.sigma,
        y=args.y,
        sign_filter=args.sign,
        top_k=args.top_k,
        threads=_auto_threads(args.threads),
        value_cache=cache,
    )
    _emit(
        args,
        "resonate",
        rep.to_payload(),
        int(1000 * (time.perf_counter() - t0)),
        _records_csv(rep.top_k),
        [("top_k", [(r.d, r.value) for r in rep.top_k])],
    )
    return EXIT_OK


def cmd_search(args) -> int:
    t0 = time.perf_counter()
    spec = _spec_from_args(args) if args.family else None
    cache = LValueCache(args.cache_dir) if args.cache_dir else None
    rep = extreme_search(
        args.X,
        args.target,
        args.k,
        strategy=args.strategy,
        spec=spec,
        quantile=args.quantile,
        sigma=args.sigma,
        y=args.y,
        sign_filter=args.sign,
        compare=args.compare,
        threads=_auto_threads(args.threads),
        value_cache=cache,
    )
    _emit(
        args,
        "search",
        rep.to_payload(),
        int(1000 * (time.perf_counter() - t0)),
        _records_csv(rep.records),
        [("records", [(r.d, r.value) for r in rep.records])],
    )
    return EXIT_OK


def cmd_proportion(args) -> int:
    t0 = time.perf_counter()
    rep = proportion_phi(
        args.X,
        args.target,
        args.eta,
        sigma=args.sigma,
        b=args.b,
        y=args.y,
        sign_filter=args.sign,
        threads=_auto_threads(args.threads),
    )
    payload = rep.to_payload()
    csv_lines = [
        "X,target,eta,tau,empirical_count,total_count,empirical_exponent,theoretical_exponent",
        f"{rep.X},{rep.target},{rep.eta!r},{rep.tau!r},{rep.empirical_count},"
        f"{rep.total_count},{rep.empirical_exponent!r},{rep.theoretical_exponent!r}",
    ]
    _emit(
        args,
        "proportion",
        payload,
        int(1000 * (time.perf_counter() - t0)),
        csv_lines,
        [("exponents", [(rep.eta, rep.theoretical_exponent)])],
    )
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="quadres",
        description="Resonance-method experiments for quadratic Dirichlet L-functions",
    )
    p.add_argument("--cache-dir", help="cache directory for L-value records")
    p.add_argument(
        "--format",
        choices=["table", "csv", "json", "tsv"],
        help="output format (default: json; constants default: table)",
    )
    p.add_argument("--output", help="write to this path instead of stdout")
    p.add_argument("--threads", type=int, default=0, help="0 = auto")
    p.add_argument("--seed", type=int, default=0, help="reserved; runs are deterministic")
    p.add_argument("--config", help="JSON file with per-command default flags")
    sub = p.add_subparsers(dest="command", required=True)

    pc = sub.add_parser("constants", help="print every constant report")
    pc.add_argument("--max-discrepancy", type=float, default=1e-9)
    pc.set_defaults(fn=cmd_constants, default_format="table")

    pch = sub.add_parser("charsum", help="character-sum main-term experiment")
    pch.add_argument("--X", type=int, help="range bound (not used with --x-grid)")
    pch.add_argument("--n", type=int, required=True)
    pch.add_argument("--sign", choices=["both", "positive", "negative"], default="both")
    pch.add_argument("--x-grid", help="comma list of X values for the scaling fit")
    pch.set_defaults(fn=cmd_charsum, default_format="json")

    pl = sub.add_parser("lvalue", help="evaluate one L-quantity")
    pl.add_argument("--d", type=int, required=True)
    pl.add_argument("--sigma", type=float, required=True)
    pl.add_argument("--y", type=float)
    pl.add_argument("--method", choices=["auto", "oracle"], default="auto")
    pl.add_argument("--abs-tol", type=float, default=DEFAULT_L_BUDGET.abs_tol)
    pl.set_defaults(fn=cmd_lvalue, default_format="csv")

    pr = sub.add_parser("resonate", help="resonance ratio S1/S2")
    pr.add_argument("--X", type=int, required=True)
    pr.add_argument("--target", choices=["half", "one", "sigma"], required=True)
    pr.add_argument("--sigma", type=float)
    pr.add_argument("--y", type=float)
    pr.add_argument("--sign", choices=["both", "positive", "negative"], default="both")
    pr.add_argument("--top-k", type=int, default=10)
    _add_family_flags(pr)
    pr.set_defaults(fn=cmd_resonate, default_format="json")

    ps = sub.add_parser("search", help="extreme-value search")
    ps.add_argument("--X", type=int, required=True)
    ps.add_argument("--target", choices=["half", "one", "sigma"], required=True)
    ps.add_argument("--k", type=int, default=10)
    ps.add_argument(
        "--strategy", choices=["exhaustive", "resonator_guided"], default="exhaustive"
    )
    ps.add_argument("--quantile", type=float, default=0.99)
    ps.add_argument("--compare", action="store_true")
    ps.add_argument("--sigma", type=float)
    ps.add_argument("--y", type=float)
    ps.add_argument("--sign", choices=["both", "positive", "negative"], default="both")
    _add_family_flags(ps)
    ps.set_defaults(fn=cmd_search, default_format="json")

    pp = sub.add_parser("proportion", help="exceedance proportion with comparator")
    pp.add_argument("--X", type=int, required=True)
    pp.add_argument("--target", choices=["one", "sigma"], required=True)
    pp.add_argument("--eta", type=float, required=True)
    pp.add_argument("--sigma", type=float)
    pp.add_argument("--b", type=float)
    pp.add_argument("--y", type=float)
    pp.add_argument("--sign", choices=["both", "positive", "negative"], default="both")
    pp.set_defaults(fn=cmd_proportion, default_format="json")

    return p


def _apply_config(args, argv):
    """Config-file keys fill flags the command line left at their defaults.
    Precedence: explicit flags, then config, then built-ins."""
    if not args.config:
        return args
    with open(args.config) as fh:
        cfg = json.load(fh)
    section = cfg.get(args.command, {})
    given = {a.split("=")[0].lstrip("-").replace("-", "_") for a in argv if a.startswith("--")}
    for key, value in section.items():
        attr = key.replace("-", "_")
        if attr not in given and hasattr(args, attr):
            setattr(args, attr, value)
    return args


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        args = _apply_config(args, argv)
        if args.format is None:
            args.format = getattr(args, "default_format", "json")
        return args.fn(args)
    except (ValueError, BudgetError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION if isinstance(exc, ValueError) else EXIT_RUNTIME
    except NonConvergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
