"""Loading daily hospital series and the data-correction rules applied to them.

Missing days are carried as NaN inside :class:`TimeSeries` and written back
out as empty CSV cells.
"""

from __future__ import annotations

import csv
import datetime as dt
import json
import logging
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable

import numpy as np

log = logging.getLogger(__name__)

MISSING = math.nan
ONE_DAY = dt.timedelta(days=1)


class IngestError(ValueError):
    """Bad input file or a correction that cannot be applied."""


@dataclass(frozen=True)
class TimeSeries:
    """Daily series starting at ``t0``; ``values[i]`` belongs to ``t0 + i`` days."""

    label: str
    t0: dt.date
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim != 1:
            raise ValueError("TimeSeries values must be one-dimensional")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def __len__(self) -> int:
        return self.values.size

    def date(self, i: int) -> dt.date:
        return self.t0 + i * ONE_DAY

    def index_of(self, day: dt.date) -> int:
        return (day - self.t0).days

    def dates(self) -> list[dt.date]:
        return [self.date(i) for i in range(len(self))]

    def with_values(self, values, label: str | None = None) -> "TimeSeries":
        return TimeSeries(label if label is not None else self.label, self.t0, values)

    def missing(self) -> np.ndarray:
        return np.isnan(self.values)


@dataclass(frozen=True)
class Correction:
    """One modified point, logged as a JSON line."""

    series: str
    index: int
    date: str
    old: float | None
    new: float
    rule: str

    def to_json(self) -> str:
        old = None if self.old is None or math.isnan(self.old) else self.old
        return json.dumps(
            {
                "series": self.series,
                "index": self.index,
                "date": self.date,
                "old": old,
                "new": self.new,
                "rule": self.rule,
            },
            sort_keys=True,
        )


def write_corrections(corrections: Iterable[Correction], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for c in corrections:
            fh.write(c.to_json() + "\n")


@dataclass(frozen=True)
class Gap:
    start: dt.date
    end: dt.date

    @property
    def length(self) -> int:
        return (self.end - self.start).days + 1

    def __str__(self) -> str:
        return f"gap [{self.start.isoformat()},{self.end.isoformat()}]"


@dataclass
class HospitalBundle:
    """Admissions, discharges and inpatients sharing one calendar.

    ``raw`` keeps the values exactly as read, before any correction.
    """

    adm: TimeSeries | None
    dis: TimeSeries | None
    inp: TimeSeries | None
    bed_capacity: int | None = None
    units: dict[str, tuple[TimeSeries, TimeSeries]] = field(default_factory=dict)
    gaps: list[Gap] = field(default_factory=list)
    raw: dict[str, TimeSeries] = field(default_factory=dict)
    warnings: list[str] = field(default_factory=list)

    def series(self) -> dict[str, TimeSeries]:
        out = {}
        for name in ("adm", "dis", "inp"):
            s = getattr(self, name)
            if s is not None:
                out[name] = s
        return out

    def __len__(self) -> int:
        return len(next(iter(self.series().values())))

    @property
    def t0(self) -> dt.date:
        return next(iter(self.series().values())).t0

    def check(self) -> None:
        members = list(self.series().values())
        for unit_inp, unit_stay in self.units.values():
            members += [unit_inp, unit_stay]
        if not members:
            raise IngestError("bundle holds no series")
        t0, n = members[0].t0, len(members[0])
        for s in members:
            if s.t0 != t0 or len(s) != n:
                raise IngestError(f"series {s.label!r} is not aligned with the bundle")
        if self.bed_capacity is not None:
            if self.bed_capacity <= 0:
                raise IngestError("bed_capacity must be positive")
            if self.inp is not None:
                over = np.flatnonzero(self.inp.values > self.bed_capacity)
                if over.size:
                    msg = (
                        f"{over.size} inpatient value(s) exceed bed capacity "
                        f"{self.bed_capacity}, first at {self.inp.date(int(over[0]))}"
                    )
                    log.warning(msg)
                    self.warnings.append(msg)


@dataclass(frozen=True)
class Schema:
    """Maps CSV columns onto bundle fields.

    ``units`` maps a unit label to its (inpatient column, stay-sum column).
    """

    date: str = "date"
    adm: str | None = "adm"
    dis: str | None = "dis"
    inp: str | None = "inp"
    units: dict[str, tuple[str, str]] = field(default_factory=dict)
    date_format: str = "iso"  # or "mdy" for mm/dd/yyyy
    delimiter: str = ","

    @classmethod
    def from_mapping(cls, m: dict) -> "Schema":
        units = {k: tuple(v) for k, v in m.get("units", {}).items()}
        kw = {k: v for k, v in m.items() if k != "units"}
        return cls(units=units, **kw)


def parse_date(text: str, date_format: str = "iso") -> dt.date:
    text = text.strip()
    if date_format == "iso":
        return dt.date.fromisoformat(text)
    if date_format == "mdy":
        return dt.datetime.strptime(text, "%m/%d/%Y").date()
    raise ValueError(f"unknown date format {date_format!r}")


def _cell(text: str) -> float:
    text = text.strip()
    if text == "":
        return MISSING
    return float(text)


def load_csv(
    path: str | Path, schema: Schema | None = None, bed_capacity: int | None = None
) -> HospitalBundle:
    """Read a daily CSV into a bundle with one slot per calendar day.

    Missing calendar days become NaN slots and are reported in
    ``bundle.gaps`` for :func:`fill_gap`.
    """
    schema = schema or Schema()
    path = Path(path)
    if not path.exists():
        raise IngestError(f"{path}: no such file")

    columns = {
        name: col
        for name, col in (("adm", schema.adm), ("dis", schema.dis), ("inp", schema.inp))
        if col
    }
    for unit, (c_inp, c_stay) in schema.units.items():
        columns[f"unit:{unit}:inp"] = c_inp
        columns[f"unit:{unit}:stay"] = c_stay

    dates: list[dt.date] = []
    rows: dict[str, list[float]] = {k: [] for k in columns}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh, delimiter=schema.delimiter)
        header = reader.fieldnames or []
        if schema.date not in header:
            raise IngestError(f"{path}: missing date column {schema.date!r}")
        present = {k: c for k, c in columns.items() if c in header}
        if not present:
            raise IngestError(f"{path}: none of the value columns {sorted(columns.values())} found")
        columns = present
        rows = {k: [] for k in columns}
        for lineno, rec in enumerate(reader, start=2):
            try:
                day = parse_date(rec[schema.date] or "", schema.date_format)
                vals = {k: _cell(rec[c] or "") for k, c in columns.items()}
            except (ValueError, TypeError) as exc:
                raise IngestError(f"{path}: malformed row {lineno}: {exc}") from None
            if dates and day <= dates[-1]:
                raise IngestError(
                    f"{path}: non-monotone dates at row {lineno} ({day} after {dates[-1]})"
                )
            dates.append(day)
            for k, v in vals.items():
                rows[k].append(v)

    if not dates:
        raise IngestError(f"{path}: no data rows")

    t0 = dates[0]
    n = (dates[-1] - t0).days + 1
    offsets = np.array([(d - t0).days for d in dates])
    gaps = []
    for prev, cur in zip(dates, dates[1:]):
        if (cur - prev).days > 1:
            gaps.append(Gap(prev + ONE_DAY, cur - ONE_DAY))

    def build(key: str, label: str) -> TimeSeries:
        v = np.full(n, MISSING)
        v[offsets] = rows[key]
        return TimeSeries(label, t0, v)

    series = {k: build(k, k) for k in columns if not k.startswith("unit:")}
    units = {}
    for unit in schema.units:
        if f"unit:{unit}:inp" in columns:
            units[unit] = (
                build(f"unit:{unit}:inp", f"{unit}_inp"),
                build(f"unit:{unit}:stay", f"{unit}_stay"),
            )
    bundle = HospitalBundle(
        adm=series.get("adm"),
        dis=series.get("dis"),
        inp=series.get("inp"),
        bed_capacity=bed_capacity,
        units=units,
        gaps=gaps,
        raw=dict(series),
    )
    bundle.check()
    for g in gaps:
        log.info("%s: %s (%d missing days)", path.name, g, g.length)
    return bundle


def write_series_csv(series: list[TimeSeries], path: str | Path, delimiter: str = ",") -> None:
    """Write aligned series as ``date,<label>...``; NaN becomes an empty cell."""
    if not series:
        raise ValueError("nothing to write")
    n, t0 = len(series[0]), series[0].t0
    for s in series:
        if len(s) != n or s.t0 != t0:
            raise ValueError(f"series {s.label!r} is not aligned")
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, delimiter=delimiter, lineterminator="\n")
        w.writerow(["date"] + [s.label for s in series])
        for i in range(n):
            w.writerow([series[0].date(i).isoformat()] + [_fmt(s.values[i]) for s in series])


def _fmt(v: float) -> str:
    if math.isnan(v):
        return ""
    if float(v).is_integer():
        return str(int(v))
    return repr(float(v))


# -- corrections -----------------------------------------------------------


def correct_new_year(
    series: TimeSeries, threshold: float
) -> tuple[TimeSeries, list[Correction]]:
    """Replace implausible January 1 values by the mean of Dec 31 and Jan 2.

    Parameters
    ----------
    series : TimeSeries
        Daily admissions or discharges.
    threshold : float
        Values strictly above this on January 1 are treated as export
        artefacts. The pipeline default is twice the bed capacity.

    Returns
    -------
    (TimeSeries, list of Correction)
        The corrected series, bit-identical outside the replaced days, and
        one log record per replacement.
    """
    if len(series) < 3:
        raise IngestError("correct_new_year needs at least 3 points")
    v = series.values.copy()
    fixes = []
    for i in range(len(series)):
        day = series.date(i)
        if not (day.month == 1 and day.day == 1 and v[i] > threshold):
            continue
        if i == 0 or i == len(series) - 1:
            raise IngestError(f"cannot average at boundary: {day} is a series endpoint")
        new = (series.values[i - 1] + series.values[i + 1]) / 2.0
        if math.isnan(new):
            raise IngestError(f"cannot average at {day}: a neighbouring day is missing")
        fixes.append(Correction(series.label, i, day.isoformat(), float(v[i]), new, "new_year"))
        v[i] = new
    return series.with_values(v), fixes


def fill_gap(
    series: TimeSeries,
    gap_start: dt.date,
    gap_end: dt.date,
    mode: str = "missing",
) -> tuple[TimeSeries, list[Correction]]:
    """Close a run of missing days with equal daily changes.

    With ``g`` missing days between known levels ``y_before`` (day before the
    gap) and ``y_after`` (day after), every filled day gets the same change
    ``c`` and levels are rebuilt by cumulative addition from ``y_before``.

    ``mode="missing"`` uses ``c = (y_after - y_before) / g``: the last filled
    level lands on ``y_after`` and the change entering ``gap_end + 1`` is 0.
    ``mode="span"`` uses the ``g + 1`` intervals of the bracket instead, so
    the exit change equals ``c`` as well.
    """
    i0, i1 = series.index_of(gap_start), series.index_of(gap_end)
    g = i1 - i0 + 1
    if g < 1:
        raise IngestError(f"empty gap {gap_start}..{gap_end}")
    if i0 < 1 or i1 > len(series) - 2:
        raise IngestError(f"gap {gap_start}..{gap_end} touches the series boundary")
    before, after = series.values[i0 - 1], series.values[i1 + 1]
    if math.isnan(before) or math.isnan(after):
        raise IngestError(f"gap {gap_start}..{gap_end} is not bracketed by known values")
    if mode == "missing":
        step = (after - before) / g
    elif mode == "span":
        step = (after - before) / (g + 1)
    else:
        raise ValueError(f"unknown gap mode {mode!r}")
    v = series.values.copy()
    fixes = []
    level = before
    for k in range(g):
        level = level + step
        i = i0 + k
        fixes.append(
            Correction(series.label, i, series.date(i).isoformat(), float(v[i]), float(level), f"gap_{mode}")
        )
        v[i] = level
    return series.with_values(v), fixes


def difference(series: TimeSeries, label: str | None = None) -> TimeSeries:
    """Daily change series: 0 on the first day, ``y[t] - y[t-1]`` after."""
    if len(series) < 2:
        raise ValueError("difference needs at least 2 points")
    out = np.empty(len(series))
    out[0] = 0.0
    out[1:] = np.diff(series.values)
    return series.with_values(out, label or f"d{series.label}")


def daily_net(adm: TimeSeries, dis: TimeSeries, label: str = "ddiad") -> TimeSeries:
    """Admissions minus discharges, the daily net inflow of patients."""
    if len(adm) != len(dis) or adm.t0 != dis.t0:
        raise IngestError("daily_net: admissions and discharges are misaligned")
    return TimeSeries(label, adm.t0, adm.values - dis.values)


def reconstruct_walk(net: TimeSeries, offset: float = 0.0, label: str = "xi") -> TimeSeries:
    """Cumulative walk anchored at ``offset``; the first net value is ignored."""
    if len(net) < 1:
        raise ValueError("reconstruct_walk needs at least 1 point")
    out = np.empty(len(net))
    out[0] = offset
    # sequential sum keeps integer inputs exact and order-stable
    acc = offset
    vals = net.values
    for i in range(1, len(net)):
        acc = acc + vals[i]
        out[i] = acc
    return net.with_values(out, label)


def mean_stay(stay_sums: TimeSeries, patient_counts: TimeSeries, label: str | None = None) -> TimeSeries:
    """Per-day mean length of stay; days with no patients become missing."""
    if len(stay_sums) != len(patient_counts) or stay_sums.t0 != patient_counts.t0:
        raise IngestError("mean_stay: series are misaligned")
    counts = patient_counts.values
    if np.any(counts < 0):
        raise IngestError("mean_stay: negative patient count")
    out = np.full(len(counts), MISSING)
    ok = counts > 0
    out[ok] = stay_sums.values[ok] / counts[ok]
    return stay_sums.with_values(out, label or f"{stay_sums.label}_mean")


def clean_bundle(
    bundle: HospitalBundle,
    threshold: float | None = None,
    gap_mode: str = "missing",
) -> tuple[HospitalBundle, list[Correction]]:
    """Apply the new-year correction to Adm/Dis and fill every recorded gap."""
    if threshold is None:
        if bundle.bed_capacity is None:
            raise IngestError("new-year threshold needs a bed capacity or explicit value")
        threshold = 2.0 * bundle.bed_capacity
    fixes: list[Correction] = []
    out = {}
    for name, s in bundle.series().items():
        for gap in bundle.gaps:
            s, f = fill_gap(s, gap.start, gap.end, gap_mode)
            fixes += f
        if name in ("adm", "dis"):
            s, f = correct_new_year(s, threshold)
            fixes += f
        out[name] = s
    units = {}
    for unit, (u_inp, u_stay) in bundle.units.items():
        for gap in bundle.gaps:
            u_inp, f1 = fill_gap(u_inp, gap.start, gap.end, gap_mode)
            u_stay, f2 = fill_gap(u_stay, gap.start, gap.end, gap_mode)
            fixes += f1 + f2
        units[unit] = (u_inp, u_stay)
    cleaned = replace(
        bundle,
        adm=out.get("adm"),
        dis=out.get("dis"),
        inp=out.get("inp"),
        units=units,
        gaps=[],
        warnings=list(bundle.warnings),
    )
    cleaned.check()
    return cleaned, fixes
