"""Command-line entry point: ``rwalk <subcommand> ...``.

Exit codes: 0 success, 1 input error, 2 numeric degeneracy.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import __version__, fractal, noise, spectral, stats, synthetic
from .ingest import IngestError, Schema, clean_bundle, load_csv, write_corrections, write_series_csv
from .pipeline import AnalysisConfig, _clean, derive_series, describe, emit_plot_data, run_pipeline, smirnov_matrix

log = logging.getLogger("rwalk")

EXIT_INPUT = 1
EXIT_DEGENERATE = 2


def _schema(args) -> Schema:
    if getattr(args, "schema", None):
        mapping = json.loads(Path(args.schema).read_text())
    else:
        mapping = {}
    if getattr(args, "mdy", False):
        mapping["date_format"] = "mdy"
    if getattr(args, "delimiter", None):
        mapping["delimiter"] = args.delimiter
    return Schema.from_mapping(mapping)


def _config(args) -> AnalysisConfig:
    return AnalysisConfig(
        seed=args.seed,
        m=args.m,
        alpha=args.alpha,
        window=args.window,
        gap_mode=args.gap_intervals,
        new_year_threshold=args.threshold,
        bed_capacity=args.beds,
        schema=_schema(args),
        stream_base=args.stream_base,
        workers=args.workers,
    )


def _dump(obj, path: str | None) -> None:
    text = json.dumps(_clean(obj), sort_keys=True, indent=2) + "\n"
    if path:
        Path(path).write_text(text)
    else:
        sys.stdout.write(text)


def cmd_ingest(args) -> int:
    bundle = load_csv(args.input, _schema(args), args.beds)
    cleaned, fixes = clean_bundle(bundle, args.threshold, args.gap_intervals)
    series = list(derive_series(cleaned).values())
    write_series_csv(series, args.output)
    if args.log:
        write_corrections(fixes, args.log)
    for g in bundle.gaps:
        log.info("filled %s", g)
    log.info("%d corrections, %d days written to %s", len(fixes), len(cleaned), args.output)
    return 0


def cmd_analyze(args) -> int:
    bundle = load_csv(args.input, _schema(args), args.beds)
    if bundle.gaps or args.clean:
        bundle, _ = clean_bundle(bundle, args.threshold, args.gap_intervals)
    series = derive_series(bundle)
    out = {name: {**describe(s, args.window), "fractal": fractal.estimate(s.values).to_dict()} for name, s in series.items()}
    if args.format == "csv":
        rows = ["series,n,median,ci_low,ci_high,n_runs,p_rrd,jb_p,d_s,sd_ds"]
        for name, b in out.items():
            loc, runs = b["location"], b["runs"]
            rows.append(
                ",".join(
                    str(x)
                    for x in (
                        name,
                        b["n"],
                        loc.get("median", ""),
                        loc.get("ci_low", ""),
                        loc.get("ci_high", ""),
                        runs.get("n_runs", ""),
                        runs.get("p_rrd", ""),
                        b["jarque_bera"].get("p", ""),
                        b["fractal"]["d_s"],
                        b["fractal"]["sd"],
                    )
                )
            )
        text = "\n".join(rows) + "\n"
        if args.output:
            Path(args.output).write_text(text)
        else:
            sys.stdout.write(text)
    else:
        _dump({"series": out, "smirnov": smirnov_matrix(series)}, args.output)
    return 0


def cmd_calibrate(args) -> int:
    ens = fractal.calibrate(
        args.kind,
        args.m,
        args.n,
        args.seed,
        args.stream_base,
        innovation=args.innovation,
        workers=args.workers,
    )
    _dump(ens.to_dict(), args.output)
    return 0


def _load_member(path: str):
    d = json.loads(Path(path).read_text())
    if "d_s" in d and isinstance(d["d_s"], list):
        return fractal.CalibrationEnsemble.from_dict(d)
    if "d_s" in d and "var_ds" in d:
        return fractal.FractalEstimate(float(d["d_s"]), float(d["var_ds"]), int(d.get("n", 0)), float(d.get("length", 0.0)))
    raise IngestError(f"{path}: neither an ensemble nor an estimate")


def cmd_compare(args) -> int:
    a, b = _load_member(args.a), _load_member(args.b)
    if getattr(a, "n", None) and getattr(b, "n", None) and a.n != b.n:
        log.warning("comparing D_s at different lengths (%d vs %d)", a.n, b.n)
    _dump(fractal.compare_ds(a, b, args.alpha).to_dict(), args.output)
    return 0


def cmd_simulate(args) -> int:
    traces = []
    for k in range(args.m):
        spec = noise.NoiseSpec(
            kind=args.kind,
            n=args.n,
            seed=args.seed,
            stream=args.stream_base + k,
            innovation=args.innovation,
            sigma=args.sigma,
        )
        traces.append(noise.generate(spec))
    out = args.output or "-"
    header = "index," + ",".join(t.label for t in traces)
    lines = [header]
    for i in range(args.n):
        lines.append(f"{i}," + ",".join(repr(float(t.values[i])) for t in traces))
    text = "\n".join(lines) + "\n"
    if out == "-":
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)
    log.info("seed=%d streams %d..%d", args.seed, args.stream_base, args.stream_base + args.m - 1)
    return 0


def _read_column(path: str, column: str | None) -> np.ndarray:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        names = reader.fieldnames or []
        if column is None:
            candidates = [c for c in names if c not in ("date", "index")]
            if not candidates:
                raise IngestError(f"{path}: no value column")
            column = candidates[0]
        if column not in names:
            raise IngestError(f"{path}: no column {column!r}")
        vals = []
        for lineno, row in enumerate(reader, start=2):
            try:
                vals.append(float(row[column]))
            except (TypeError, ValueError):
                raise IngestError(f"{path}: malformed row {lineno}") from None
    return np.array(vals)


def cmd_spectrum(args) -> int:
    v = _read_column(args.input, args.column)
    spec = spectral.spectrum(v, args.window)
    fit = spectral.loglog_slope(spec)
    lines = ["f,amplitude,power"]
    for f, a, p in zip(spec.frequencies, spec.amplitude, spec.power):
        lines.append(f"{f!r},{float(a)!r},{float(p)!r}")
    Path(args.output).write_text("\n".join(lines) + "\n")
    summary = {
        **fit.to_dict(),
        "window": args.window,
        "n": int(v.size),
        "n_padded": spec.n_padded,
        "peak_ratio": spectral.peak_ratio(spec, fit),
        "has_peak": spectral.has_peak(spec, fit),
    }
    _dump(summary, args.summary)
    return 0


def cmd_report(args) -> int:
    config = _config(args)
    report = run_pipeline(config, args.input)
    names = [n for n in (args.series.split(",") if args.series else []) if n]
    if args.series is None:
        names = list(report.series)
    written = emit_plot_data(report, names, args.outdir)
    for p in written:
        log.info("wrote %s", p)
    return 0


def cmd_demo(args) -> int:
    synthetic.write_hospital_csv(args.output, seed=args.seed, artefacts=not args.clean)
    return 0


def _add_ingest_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("--schema", help="JSON column mapping (date, adm, dis, inp, units, ...)")
    p.add_argument("--mdy", action="store_true", help="dates are mm/dd/yyyy")
    p.add_argument("--delimiter", default=None)
    p.add_argument("--beds", type=int, default=192, help="bed capacity (default 192)")
    p.add_argument("--threshold", type=float, default=None, help="January 1 plausibility limit (default 2 x beds)")
    p.add_argument("--gap-intervals", choices=("missing", "span"), default="missing")


def _add_seed_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--stream-base", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rwalk", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"rwalk {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="load, correct and derive series to CSV")
    p.add_argument("input")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--log", help="write corrections as JSON lines")
    _add_ingest_options(p)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("analyze", help="statistics block per series")
    p.add_argument("input")
    p.add_argument("-o", "--output")
    p.add_argument("--clean", action="store_true", help="apply corrections first")
    p.add_argument("--window", choices=("hann", "hamming"), default="hann")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    _add_ingest_options(p)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("calibrate", help="simulate a reference ensemble")
    p.add_argument("--kind", choices=("white", "brownian"), required=True)
    p.add_argument("--m", type=int, default=100)
    p.add_argument("--n", type=int, default=1329)
    p.add_argument("--innovation", choices=("gaussian", "uniform"), default="gaussian")
    p.add_argument("-o", "--output")
    _add_seed_options(p)
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("compare", help="V-P comparison of two ensemble/estimate JSON files")
    p.add_argument("a")
    p.add_argument("b")
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("simulate", help="write noise traces as CSV")
    p.add_argument("--kind", choices=("white", "brownian", "cauchy"), required=True)
    p.add_argument("--n", type=int, default=1329)
    p.add_argument("--m", type=int, default=1)
    p.add_argument("--sigma", type=float, default=1.0)
    p.add_argument("--innovation", choices=("gaussian", "uniform"), default="gaussian")
    p.add_argument("-o", "--output")
    _add_seed_options(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("spectrum", help="spectral density CSV and slope summary")
    p.add_argument("input")
    p.add_argument("--column")
    p.add_argument("--window", choices=("hann", "hamming"), default="hann")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--summary", help="slope summary JSON path (default stdout)")
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("report", help="full pipeline with plot-ready output")
    p.add_argument("input")
    p.add_argument("--outdir", required=True)
    p.add_argument("--series", default=None, help="comma list of series to export (default all, '' for none)")
    p.add_argument("--m", type=int, default=100)
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--window", choices=("hann", "hamming"), default="hann")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    _add_ingest_options(p)
    _add_seed_options(p)
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("demo", help="write the synthetic 192-bed hospital CSV")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--clean", action="store_true", help="omit the injected export artefacts")
    p.set_defaults(func=cmd_demo)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except (stats.DegenerateDataError, fractal.NoDispersionError) as exc:
        log.error("%s", exc)
        return EXIT_DEGENERATE
    except (IngestError, FileNotFoundError, KeyError, ValueError, OSError, json.JSONDecodeError) as exc:
        log.error("%s", exc)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
