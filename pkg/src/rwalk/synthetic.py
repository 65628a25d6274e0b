"""Synthetic hospital-scale fixtures.

The real command-panel data are not public, so the demo bundle is simulated:
192 beds, 1329 days from 2014-05-01, integer admissions and discharges, and
an inpatient census that conserves patients day to day. Optional artefacts
reproduce the export faults the cleaning rules exist for: a January 1
spike above 900 and a nine-day hole at the end of May 2014.
"""

from __future__ import annotations

import datetime as dt
import math
from pathlib import Path

import numpy as np

from . import rng
from .ingest import TimeSeries, write_series_csv

START = dt.date(2014, 5, 1)
DAYS = 1329
BEDS = 192
GAP = (dt.date(2014, 5, 29), dt.date(2014, 6, 6))


def _poisson(state: rng.GeneratorState, mean: float) -> int:
    # inversion; means here stay below ~10
    u = rng.uniform01(state)
    k, p = 0, math.exp(-mean)
    cdf = p
    while u > cdf and k < 1000:
        k += 1
        p *= mean / k
        cdf += p
    return k


def hospital_series(
    seed: int = 1,
    days: int = DAYS,
    beds: int = BEDS,
    start_census: int = 150,
    daily_mean: float = 2.5,
    reversion: float = 0.01,
) -> dict[str, TimeSeries]:
    """Conserving admissions / discharges / inpatients, no artefacts.

    ``inp[t] = inp[t-1] + adm[t] - dis[t]`` holds exactly for t >= 1.
    Discharges lean weakly towards a census of ``start_census`` so the walk
    stays inside the bed count over the full period.
    """
    state = rng.seed(seed, 101)
    adm = np.zeros(days)
    dis = np.zeros(days)
    inp = np.zeros(days)
    inp[0] = start_census
    adm[0] = _poisson(state, daily_mean)
    dis[0] = _poisson(state, daily_mean)
    for t in range(1, days):
        a = _poisson(state, daily_mean)
        d_mean = max(0.1, daily_mean + reversion * (inp[t - 1] - start_census))
        d = _poisson(state, d_mean)
        d = min(d, int(inp[t - 1]))
        a = min(a, beds - int(inp[t - 1]) + d)
        adm[t], dis[t] = a, d
        inp[t] = inp[t - 1] + a - d
    return {
        "adm": TimeSeries("adm", START, adm),
        "dis": TimeSeries("dis", START, dis),
        "inp": TimeSeries("inp", START, inp),
    }


def write_hospital_csv(
    path: str | Path,
    seed: int = 1,
    artefacts: bool = True,
    days: int = DAYS,
) -> Path:
    """Write the demo bundle as ``date,adm,dis,inp``.

    With ``artefacts`` the January 1 admissions of 2015 and 2016 are blown up
    past 900 and the May/June 2014 gap rows are dropped.
    """
    s = hospital_series(seed=seed, days=days)
    adm = s["adm"].values.copy()
    dis = s["dis"].values.copy()
    if artefacts:
        for year, bump in ((2015, 941.0), (2016, 917.0)):
            i = (dt.date(year, 1, 1) - START).days
            if 0 < i < days - 1:
                adm[i] += bump
                dis[i] += bump
    out = [s["adm"].with_values(adm), s["dis"].with_values(dis), s["inp"]]
    path = Path(path)
    write_series_csv(out, path)
    if artefacts:
        lo, hi = GAP
        lines = path.read_text().splitlines(keepends=True)
        keep = [lines[0]]
        for line in lines[1:]:
            day = dt.date.fromisoformat(line.split(",", 1)[0])
            if not lo <= day <= hi:
                keep.append(line)
        path.write_text("".join(keep))
    return path
