"""End-to-end analysis: load, clean, derive series, classify, report."""

from __future__ import annotations

import hashlib
import json
import logging
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__, fractal, spectral, stats
from .ingest import (
    Correction,
    HospitalBundle,
    Schema,
    TimeSeries,
    clean_bundle,
    daily_net,
    difference,
    load_csv,
    mean_stay,
    reconstruct_walk,
    write_corrections,
    write_series_csv,
)

log = logging.getLogger(__name__)

# row/column order of the pairwise comparison table
SERIES_ORDER = ("adm", "dis", "inp", "dinp", "ddiad", "xi")
REFERENCES = ("brownian", "white")


@dataclass(frozen=True)
class AnalysisConfig:
    seed: int = 1
    m: int = 100
    alpha: float = 0.05
    window: str = "hann"
    gap_mode: str = "missing"
    new_year_threshold: float | None = None
    bed_capacity: int | None = 192
    schema: Schema = field(default_factory=Schema)
    stream_base: int = 0
    workers: int = 1

    def __post_init__(self):
        if self.m < 2:
            raise ValueError("calibration needs m >= 2")
        if not 0 < self.alpha <= 1.0 / 6.0:
            raise ValueError("alpha must lie in (0, 1/6]")
        if self.window not in ("hann", "hamming"):
            raise ValueError(f"unknown window {self.window!r}")
        if self.gap_mode not in ("missing", "span"):
            raise ValueError(f"unknown gap mode {self.gap_mode!r}")

    def to_dict(self) -> dict:
        d = asdict(self)
        d.pop("workers")  # scheduling only, never changes results
        d["schema"] = {k: (dict(v) if isinstance(v, dict) else v) for k, v in d["schema"].items()}
        return d

    def digest(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()


def classify(vs_white: fractal.SignificanceResult, vs_brownian: fractal.SignificanceResult) -> str:
    """Walk-like when only the white reference is told apart, white-like when
    only the Brownian one is, ``other`` when both are, else undetermined."""
    w, b = vs_white.significant, vs_brownian.significant
    if w and not b:
        return "random-walk-like"
    if b and not w:
        return "white-like"
    if w and b:
        return "other"
    return "undetermined"


def _safe(fn, *args):
    try:
        return fn(*args).to_dict()
    except (stats.DegenerateDataError, ValueError) as exc:
        return {"error": str(exc)}


def describe(series: TimeSeries, window: str = "hann") -> dict:
    """Location, runs, normality and spectral slope of one series."""
    v = series.values
    block = {
        "n": len(series),
        "location": _safe(stats.hl_location, v),
        "runs": _safe(stats.runs_test, v),
        "jarque_bera": _safe(stats.jarque_bera, v),
        "jarque_bera_gel": _safe(stats.jarque_bera_gel, v),
    }
    try:
        spec = spectral.spectrum(v, window)
        fit = spectral.loglog_slope(spec)
        block["spectrum"] = {
            **fit.to_dict(),
            "peak_ratio": spectral.peak_ratio(spec, fit),
            "has_peak": spectral.has_peak(spec, fit),
        }
    except ValueError as exc:
        block["spectrum"] = {"error": str(exc)}
    return block


def smirnov_matrix(series: dict[str, TimeSeries]) -> dict:
    names = list(series)
    out = {}
    for i, a in enumerate(names):
        for b in names[i + 1 :]:
            out[f"{a}|{b}"] = stats.smirnov_test(series[a].values, series[b].values).to_dict()
    return out


@dataclass
class AnalysisReport:
    data: dict
    series: dict[str, TimeSeries]
    ensembles: dict[str, fractal.CalibrationEnsemble]
    corrections: list[Correction]
    window: str = "hann"

    def to_json(self) -> str:
        return json.dumps(_clean(self.data), sort_keys=True, indent=2, allow_nan=False) + "\n"


def _clean(obj):
    """JSON-safe copy: NaN/inf become null, numpy scalars become Python ones."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        f = float(obj)
        return f if math.isfinite(f) else None
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def derive_series(bundle: HospitalBundle) -> dict[str, TimeSeries]:
    """InP, Adm, Dis plus the derived DInP, DDiAd and the rebuilt walk Xi."""
    out = {}
    if bundle.adm is not None:
        out["adm"] = bundle.adm
    if bundle.dis is not None:
        out["dis"] = bundle.dis
    if bundle.inp is not None:
        out["inp"] = bundle.inp
        out["dinp"] = difference(bundle.inp, "dinp")
    if bundle.adm is not None and bundle.dis is not None:
        out["ddiad"] = daily_net(bundle.adm, bundle.dis, "ddiad")
        out["xi"] = reconstruct_walk(out["ddiad"], 0.0, "xi")
    return out


def analyze_bundle(bundle: HospitalBundle, config: AnalysisConfig, corrections=(), input_digest=None) -> AnalysisReport:
    series = derive_series(bundle)
    if not series:
        raise ValueError("no analysable series in input")
    n = len(next(iter(series.values())))
    log.info("calibrating white and brownian ensembles, m=%d n=%d", config.m, n)
    ensembles = {
        kind: fractal.calibrate(
            kind, config.m, n, config.seed, config.stream_base, workers=config.workers
        )
        for kind in REFERENCES
    }
    estimates = {name: fractal.estimate(s.values) for name, s in series.items()}

    per_series = {}
    for name, s in series.items():
        est = estimates[name]
        vs_w = fractal.compare_ds(est, ensembles["white"], config.alpha)
        vs_b = fractal.compare_ds(est, ensembles["brownian"], config.alpha)
        block = describe(s, config.window)
        block["fractal"] = est.to_dict()
        block["vs_white"] = vs_w.to_dict()
        block["vs_brownian"] = vs_b.to_dict()
        block["verdict"] = classify(vs_w, vs_b)
        per_series[name] = block

    members: dict[str, object] = {k: estimates[k] for k in SERIES_ORDER if k in estimates}
    members.update(ensembles)
    names = list(members)
    pairwise = {}
    for i, a in enumerate(names):
        for b in names[i + 1 :]:
            pairwise[f"{a}|{b}"] = fractal.compare_ds(members[a], members[b], config.alpha).to_dict()

    reconstruction = None
    if "xi" in series and "inp" in series:
        sm = stats.smirnov_test(series["dinp"].values, series["ddiad"].values)
        reconstruction = {
            "smirnov_dinp_ddiad": sm.to_dict(),
            "ds_inp_vs_xi": fractal.compare_ds(estimates["inp"], estimates["xi"], config.alpha).to_dict(),
        }

    units = {}
    for unit, (u_inp, u_stay) in bundle.units.items():
        stay = mean_stay(u_stay, u_inp, f"{unit}_mean_stay")
        ok = np.isfinite(stay.values)
        t = np.arange(len(stay), dtype=np.float64)
        units[unit] = {
            "inp": {**describe(u_inp, config.window), "theil": _safe(stats.theil_fit, t, u_inp.values)},
            "mean_stay": {
                "location": _safe(stats.hl_location, stay.values[ok]),
                "runs": _safe(stats.runs_test, stay.values[ok]),
                "theil": _safe(stats.theil_fit, t[ok], stay.values[ok]),
                "missing_days": int((~ok).sum()),
            },
        }

    data = {
        "provenance": {
            "tool": "rwalk",
            "version": __version__,
            "seed": config.seed,
            "stream_base": config.stream_base,
            "config": config.to_dict(),
            "config_sha256": config.digest(),
            "input_sha256": input_digest,
        },
        "n": n,
        "t0": next(iter(series.values())).t0.isoformat(),
        "bed_capacity": bundle.bed_capacity,
        "warnings": list(bundle.warnings),
        "corrections": len(corrections),
        "series": per_series,
        "ensembles": {
            k: {key: val for key, val in e.to_dict().items() if key not in ("d_s", "var_ds")}
            for k, e in ensembles.items()
        },
        "pairwise": pairwise,
        "smirnov": smirnov_matrix({k: series[k] for k in SERIES_ORDER if k in series}),
        "reconstruction": reconstruction,
        "units": units,
    }
    return AnalysisReport(data, series, ensembles, list(corrections), config.window)


def file_digest(path: str | Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def run_pipeline(config: AnalysisConfig, input_path: str | Path) -> AnalysisReport:
    """Load, clean and analyse one hospital CSV."""
    bundle = load_csv(input_path, config.schema, config.bed_capacity)
    cleaned, fixes = clean_bundle(bundle, config.new_year_threshold, config.gap_mode)
    return analyze_bundle(cleaned, config, fixes, file_digest(input_path))


def _write_csv_rows(path: Path, header: list[str], rows) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_num(v) for v in row) + "\n")


def _num(v) -> str:
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    f = float(v)
    if not math.isfinite(f):
        return ""
    return repr(f)


def emit_plot_data(report: AnalysisReport, names: list[str] | None, outdir: str | Path) -> list[Path]:
    """Write the report and per-figure CSV files; returns the paths written.

    Files: ``report.json``, ``corrections.jsonl``, and for a nonempty
    ``names`` also ``series.csv``, ``ecdf_<name>.csv``,
    ``spectrum_<name>.csv`` and ``ensemble_<kind>.csv``.
    """
    outdir = Path(outdir)
    try:
        outdir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {outdir}: {exc}") from exc
    written = []
    p = outdir / "report.json"
    p.write_text(report.to_json(), encoding="utf-8")
    written.append(p)
    if not names:
        return written
    unknown = [n for n in names if n not in report.series]
    if unknown:
        raise KeyError(f"unknown series {unknown}; have {sorted(report.series)}")

    p = outdir / "corrections.jsonl"
    write_corrections(report.corrections, p)
    written.append(p)

    p = outdir / "series.csv"
    write_series_csv([report.series[n] for n in names], p)
    written.append(p)

    for name in names:
        v = report.series[name].values
        xs, fs = stats.empirical_cdf(v[np.isfinite(v)]).steps()
        p = outdir / f"ecdf_{name}.csv"
        _write_csv_rows(p, ["x", "F"], zip(xs, fs))
        written.append(p)

        spec = spectral.spectrum(v, report.window)
        p = outdir / f"spectrum_{name}.csv"
        _write_csv_rows(p, ["f", "amplitude", "power"], zip(spec.frequencies, spec.amplitude, spec.power))
        written.append(p)

    for kind, ens in report.ensembles.items():
        p = outdir / f"ensemble_{kind}.csv"
        _write_csv_rows(p, ["trace", "d_s", "var_ds"], zip(range(ens.m), ens.d_s, ens.var_ds))
        written.append(p)
    return written
