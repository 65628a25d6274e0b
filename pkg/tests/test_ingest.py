import datetime as dt
import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rwalk import ingest
from rwalk.ingest import IngestError, Schema, TimeSeries

D0 = dt.date(2014, 5, 1)


def ts(values, t0=D0, label="y"):
    return TimeSeries(label, t0, np.asarray(values, dtype=float))


def write(tmp_path, text, name="in.csv"):
    p = tmp_path / name
    p.write_text(text)
    return p


# -- load_csv ----------------------------------------------------------------


def test_load_four_rows(tmp_path):
    p = write(
        tmp_path,
        "date,adm,dis,inp\n2014-05-01,3,1,150\n2014-05-02,0,1,149\n2014-05-03,2,2,149\n2014-05-04,4,0,153\n",
    )
    b = ingest.load_csv(p, bed_capacity=192)
    assert len(b.inp) == 4
    assert b.inp.values.tolist() == [150, 149, 149, 153]
    assert b.adm.t0 == D0 and not b.gaps


def test_duplicate_date_rejected(tmp_path):
    p = write(tmp_path, "date,adm\n2014-05-01,3\n2014-05-01,4\n")
    with pytest.raises(IngestError, match="non-monotone dates"):
        ingest.load_csv(p)


def test_malformed_row_reports_line(tmp_path):
    p = write(tmp_path, "date,adm\n2014-05-01,3\n2014-05-02,abc\n")
    with pytest.raises(IngestError, match="row 3"):
        ingest.load_csv(p)


def test_missing_file(tmp_path):
    with pytest.raises(IngestError):
        ingest.load_csv(tmp_path / "nope.csv")


def test_nine_day_hole_flagged(tmp_path):
    days = [D0 + dt.timedelta(i) for i in range(40)]
    lo, hi = dt.date(2014, 5, 29), dt.date(2014, 6, 6)
    rows = [f"{d.isoformat()},{i}" for i, d in enumerate(days) if not lo <= d <= hi]
    p = write(tmp_path, "date,inp\n" + "\n".join(rows) + "\n")
    b = ingest.load_csv(p)
    assert [str(g) for g in b.gaps] == ["gap [2014-05-29,2014-06-06]"]
    assert b.gaps[0].length == 9
    assert len(b.inp) == 40 and np.isnan(b.inp.values[28:37]).all()


def test_mdy_dates_and_delimiter(tmp_path):
    p = write(tmp_path, "date;inp\n05/01/2014;10\n05/02/2014;11\n")
    b = ingest.load_csv(p, Schema(date_format="mdy", delimiter=";", adm=None, dis=None))
    assert b.inp.t0 == D0 and b.inp.values.tolist() == [10, 11]


def test_overfull_census_warns(tmp_path):
    p = write(tmp_path, "date,inp\n2014-05-01,190\n2014-05-02,200\n")
    b = ingest.load_csv(p, bed_capacity=192)
    assert b.warnings


def test_unit_columns(tmp_path):
    p = write(tmp_path, "date,icu_n,icu_stay\n2014-05-01,3,60\n2014-05-02,0,0\n")
    schema = Schema.from_mapping({"adm": None, "dis": None, "inp": None, "units": {"icu": ["icu_n", "icu_stay"]}})
    b = ingest.load_csv(p, schema)
    u_inp, u_stay = b.units["icu"]
    stay = ingest.mean_stay(u_stay, u_inp)
    assert stay.values[0] == 20.0 and np.isnan(stay.values[1])


def test_write_roundtrip(tmp_path):
    a = ts([1.0, np.nan, 3.5], label="a")
    p = tmp_path / "out.csv"
    ingest.write_series_csv([a], p)
    assert p.read_text().splitlines() == ["date,a", "2014-05-01,1", "2014-05-02,", "2014-05-03,3.5"]


# -- new-year correction -------------------------------------------------------


def _around_new_year(values, start=dt.date(2014, 12, 30)):
    return ts(values, start)


def test_new_year_example():
    s = _around_new_year([4, 5, 950, 7, 8])
    out, fixes = ingest.correct_new_year(s, 200)
    assert out.values[2] == 6.0
    assert len(fixes) == 1 and fixes[0].old == 950 and fixes[0].rule == "new_year"
    mask = np.arange(5) != 2
    assert np.array_equal(out.values[mask], s.values[mask])


def test_new_year_nothing_to_do():
    s = _around_new_year([4, 5, 6, 7, 8])
    out, fixes = ingest.correct_new_year(s, 200)
    assert fixes == [] and np.array_equal(out.values, s.values)


def test_new_year_two_years():
    start = dt.date(2014, 12, 31)
    n = 370
    v = np.full(n, 5.0)
    v[1] = 941
    v[366] = 917
    v[365], v[367] = 3.0, 9.0
    out, fixes = ingest.correct_new_year(ts(v, start), 384)
    assert len(fixes) == 2
    assert out.values[1] == 5.0 and out.values[366] == 6.0


def test_new_year_at_boundary():
    s = ts([950, 5, 6], dt.date(2015, 1, 1))
    with pytest.raises(IngestError, match="cannot average at boundary"):
        ingest.correct_new_year(s, 200)


# -- gap filling ---------------------------------------------------------------


def _gapped(before, after, g, pad=2):
    v = [before] * pad + [np.nan] * g + [after] * pad
    return ts(v), D0 + dt.timedelta(pad), D0 + dt.timedelta(pad + g - 1)


def test_gap_missing_mode_levels():
    s, a, b = _gapped(10.0, 28.0, 9)
    out, fixes = ingest.fill_gap(s, a, b)
    filled = out.values[2:11]
    assert np.allclose(np.diff(np.r_[10.0, filled]), 2.0)
    assert np.allclose(filled, np.arange(12, 29, 2))
    assert len(fixes) == 9
    # the last filled level lands on the value after the gap
    assert out.values[11] - filled[-1] == pytest.approx(0.0)


def test_gap_span_mode_exit_change_equals_fill():
    s, a, b = _gapped(10.0, 30.0, 9)
    out, _ = ingest.fill_gap(s, a, b, mode="span")
    steps = np.diff(out.values[1:12])
    assert np.allclose(steps, 2.0)


def test_gap_flat():
    s, a, b = _gapped(7.0, 7.0, 5)
    out, _ = ingest.fill_gap(s, a, b)
    assert np.all(out.values[2:7] == 7.0)


def test_gap_single_day():
    s, a, b = _gapped(0.0, 4.0, 1)
    out, _ = ingest.fill_gap(s, a, b)
    assert out.values[2] == 4.0


def test_gap_touches_boundary():
    s = ts([np.nan, np.nan, 3.0, 4.0])
    with pytest.raises(IngestError):
        ingest.fill_gap(s, D0, D0 + dt.timedelta(1))


def test_gap_leaves_rest_untouched():
    s, a, b = _gapped(10.0, 28.0, 9, pad=5)
    out, _ = ingest.fill_gap(s, a, b)
    assert np.array_equal(out.values[:5], s.values[:5])
    assert np.array_equal(out.values[14:], s.values[14:])


# -- difference / net / reconstruct ------------------------------------------


def test_difference_examples():
    assert ingest.difference(ts([150, 152, 149])).values.tolist() == [0, 2, -3]
    assert ingest.difference(ts([4, 4, 4, 4])).values.tolist() == [0, 0, 0, 0]


def test_difference_of_cumsum():
    x = np.array([0, 3, -1, 4, 0, -2], dtype=float)
    assert np.array_equal(ingest.difference(ts(np.cumsum(x))).values, x)


def test_daily_net():
    out = ingest.daily_net(ts([3, 0, 2]), ts([1, 1, 2]))
    assert out.values.tolist() == [2, -1, 0]
    assert not ingest.daily_net(ts([5, 6]), ts([5, 6])).values.any()


def test_daily_net_misaligned():
    with pytest.raises(IngestError):
        ingest.daily_net(ts([1, 2]), ts([1, 2], D0 + dt.timedelta(1)))


def test_conserving_fixture_net_matches_difference():
    from rwalk import synthetic

    s = synthetic.hospital_series(seed=4, days=300)
    net = ingest.daily_net(s["adm"], s["dis"])
    d = ingest.difference(s["inp"])
    assert np.array_equal(net.values[1:], d.values[1:])


def test_reconstruct_examples():
    assert ingest.reconstruct_walk(ts([0, 2, -1])).values.tolist() == [0, 2, 1]
    assert ingest.reconstruct_walk(ts([0, 0, 0]), 5.0).values.tolist() == [5, 5, 5]


@settings(max_examples=100, deadline=None)
@given(st.lists(st.integers(-10**6, 10**6), min_size=2, max_size=400))
def test_difference_reconstruct_inverse(values):
    s = ts(values)
    back = ingest.reconstruct_walk(ingest.difference(s), s.values[0])
    assert np.array_equal(back.values, s.values)


# -- mean stay -----------------------------------------------------------------


def test_mean_stay():
    assert ingest.mean_stay(ts([60]), ts([3])).values.tolist() == [20.0]
    out = ingest.mean_stay(ts([12, 5, 8]), ts([4, 0, 2])).values
    assert out[0] == 3.0 and np.isnan(out[1]) and out[2] == 4.0
    assert np.all(ingest.mean_stay(ts([7, 14, 21]), ts([1, 2, 3])).values == 7.0)


def test_mean_stay_negative_count():
    with pytest.raises(IngestError):
        ingest.mean_stay(ts([1, 2]), ts([1, -1]))


# -- whole-bundle cleaning -----------------------------------------------------


def test_clean_bundle_on_demo(hospital_csv):
    b = ingest.load_csv(hospital_csv, bed_capacity=192)
    assert len(b.gaps) == 1
    cleaned, fixes = ingest.clean_bundle(b)
    rules = {f.rule for f in fixes}
    assert rules == {"new_year", "gap_missing"}
    assert sum(f.rule == "new_year" for f in fixes) == 4
    for s in cleaned.series().values():
        assert np.isfinite(s.values).all() and (s.values >= 0).all()
    # raw values are kept as read
    assert np.isnan(cleaned.raw["adm"].values[28])


def test_correction_log_is_json_lines(tmp_path, hospital_csv):
    b = ingest.load_csv(hospital_csv, bed_capacity=192)
    _, fixes = ingest.clean_bundle(b)
    p = tmp_path / "c.jsonl"
    ingest.write_corrections(fixes, p)
    recs = [json.loads(line) for line in p.read_text().splitlines()]
    assert len(recs) == len(fixes)
    assert set(recs[0]) == {"series", "index", "date", "old", "new", "rule"}


def test_cleaning_is_deterministic(tmp_path, hospital_csv):
    outs = []
    for k in range(2):
        b = ingest.load_csv(hospital_csv, bed_capacity=192)
        cleaned, _ = ingest.clean_bundle(b)
        p = tmp_path / f"o{k}.csv"
        ingest.write_series_csv(
            [cleaned.inp, ingest.difference(cleaned.inp, "dinp")], p
        )
        outs.append(p.read_bytes())
    assert outs[0] == outs[1]
