"""File formats: point CSVs with window sidecars, curve and spectrum
tables, canonical JSON.

Floats are serialized with repr, so a write/read cycle must reproduce the
arrays bit for bit; every parser error must carry the file path and, for
row-level problems, the 1-based row number.
"""

import json
import math

import numpy as np
import pytest

from hyperlat import (
    BoxWindow,
    ConfigError,
    CsvFormatError,
    PointPattern,
    SeedSpec,
    count_histogram,
    global_envelope_test,
    PoissonModel,
    read_curve_csv,
    read_json,
    read_points_csv,
    scattering_intensity,
    simulate_poisson,
    window_sidecar_path,
    write_curve_csv,
    write_envelope_csv,
    write_histogram_csv,
    write_json,
    write_points_csv,
    write_spectrum_csv,
)
from hyperlat.ktheory import SummaryCurve


@pytest.fixture
def pattern():
    # awkward floats on purpose: 1/3, sqrt(2), tiny offsets near the boundary
    pts = np.array([
        [1.0 / 3.0, math.sqrt(2.0), 0.1],
        [2.5, 1e-9, 4.999999999999999],
        [4.0, 3.999999999, 2.0],
    ])
    return PointPattern(pts, BoxWindow([0.0, 0.0, 0.0], [5.0, 5.0, 5.0]))


# ---------------------------------------------------------------------------
# points and the window sidecar
# ---------------------------------------------------------------------------

def test_points_roundtrip_is_exact(tmp_path, pattern):
    path = str(tmp_path / "pts.csv")
    write_points_csv(path, pattern)
    back = read_points_csv(path)
    np.testing.assert_array_equal(back.points, pattern.points)
    np.testing.assert_array_equal(back.window.lo, pattern.window.lo)
    np.testing.assert_array_equal(back.window.hi, pattern.window.hi)


def test_sidecar_path_and_content(tmp_path, pattern):
    path = str(tmp_path / "pts.csv")
    write_points_csv(path, pattern)
    sidecar = window_sidecar_path(path)
    assert sidecar == str(tmp_path / "pts.window.json")
    with open(sidecar) as fh:
        payload = json.load(fh)
    assert payload == {"min": [0.0, 0.0, 0.0], "max": [5.0, 5.0, 5.0]}


def test_read_without_sidecar_uses_bounding_box(tmp_path):
    path = str(tmp_path / "bare.csv")
    with open(path, "w") as fh:
        fh.write("x,y\n0.5,1.5\n2.0,0.25\n")
    pat = read_points_csv(path)
    np.testing.assert_array_equal(pat.window.lo, [0.5, 0.25])
    np.testing.assert_array_equal(pat.window.hi, [2.0, 1.5])


def test_explicit_window_overrides_sidecar(tmp_path, pattern):
    path = str(tmp_path / "pts.csv")
    write_points_csv(path, pattern)
    big = BoxWindow([-1.0] * 3, [6.0] * 3)
    assert read_points_csv(path, window=big).window.volume() == big.volume()


def test_dim_mismatch_is_rejected(tmp_path, pattern):
    path = str(tmp_path / "pts.csv")
    write_points_csv(path, pattern)
    with pytest.raises(CsvFormatError, match="expected dim 2"):
        read_points_csv(path, dim=2)


@pytest.mark.parametrize("content, message", [
    ("", "empty file"),
    ("a,b,c\n1,2,3\n", "expected header like 'x,y,z'"),
    ("x,y\n1.0\n", "row 2: expected 2 values"),
    ("x,y\n1.0,2.0\n1.0,oops\n", "row 3: unparsable value"),
    ("x,y\n1.0,2.0\n1.0,nan\n", "row 3: non-finite coordinate"),
    ("x,y\n1.0,inf\n", "row 2: non-finite coordinate"),
])
def test_point_parse_errors_name_the_row(tmp_path, content, message):
    path = str(tmp_path / "bad.csv")
    with open(path, "w") as fh:
        fh.write(content)
    with pytest.raises(CsvFormatError, match=message):
        read_points_csv(path)


def test_point_outside_window_names_the_row(tmp_path):
    path = str(tmp_path / "out.csv")
    with open(path, "w") as fh:
        fh.write("x,y\n0.5,0.5\n3.0,0.5\n")
    with open(window_sidecar_path(path), "w") as fh:
        json.dump({"min": [0.0, 0.0], "max": [1.0, 1.0]}, fh)
    with pytest.raises(CsvFormatError, match="row 3: point outside"):
        read_points_csv(path)


def test_points_of_all_dims_roundtrip(tmp_path):
    for d in (1, 2, 3):
        win = BoxWindow([0.0] * d, [4.0] * d)
        pat = simulate_poisson(win, 1.0, SeedSpec(d))
        path = str(tmp_path / f"d{d}.csv")
        write_points_csv(path, pat)
        back = read_points_csv(path, dim=d)
        np.testing.assert_array_equal(back.points, pat.points)


# ---------------------------------------------------------------------------
# curves, spectra, histograms, envelopes
# ---------------------------------------------------------------------------

def test_curve_roundtrip_is_exact(tmp_path):
    r = np.linspace(0.1, 3.0, 37)
    curve = SummaryCurve(r, np.sqrt(r) * math.pi, "K")
    path = str(tmp_path / "k.csv")
    write_curve_csv(path, curve)
    back = read_curve_csv(path, kind="K")
    np.testing.assert_array_equal(back.r, curve.r)
    np.testing.assert_array_equal(back.values, curve.values)
    assert back.kind == "K"


def test_curve_csv_header_and_rows(tmp_path):
    path = str(tmp_path / "c.csv")
    with open(path, "w") as fh:
        fh.write("radius,value\n1.0,2.0\n")
    with pytest.raises(CsvFormatError, match="expected header 'r,value'"):
        read_curve_csv(path)
    with open(path, "w") as fh:
        fh.write("r,value\n1.0,2.0,3.0\n")
    with pytest.raises(CsvFormatError, match="row 2: expected 2 values"):
        read_curve_csv(path)
    with open(path, "w") as fh:
        fh.write("r,value\n1.0,huh\n")
    with pytest.raises(CsvFormatError, match="row 2: unparsable"):
        read_curve_csv(path)


def test_spectrum_csv_format(tmp_path):
    win = BoxWindow([0.0] * 3, [6.0] * 3)
    spec = scattering_intensity(simulate_poisson(win, 1.0, SeedSpec(5)), k_max=2.0)
    path = str(tmp_path / "s.csv")
    write_spectrum_csv(path, spec)
    with open(path) as fh:
        lines = fh.read().splitlines()
    assert lines[0] == "kx,ky,kz,k_norm,S"
    assert len(lines) == 1 + spec.values.size
    first = [float(c) for c in lines[1].split(",")]
    np.testing.assert_array_equal(first[:3], spec.k[0])
    assert first[3] == spec.k_norm[0]
    assert first[4] == spec.values[0]


def test_histogram_csv_format(tmp_path):
    win = BoxWindow([0.0] * 3, [10.0] * 3)
    hist = count_histogram(simulate_poisson(win, 1.0, SeedSpec(9)))
    path = str(tmp_path / "h.csv")
    write_histogram_csv(path, hist)
    with open(path) as fh:
        lines = fh.read().splitlines()
    assert lines[0] == "bin_lo,bin_hi,count"
    counts = [int(line.split(",")[2]) for line in lines[1:]]
    assert sum(counts) == hist.counts.sum()


def test_envelope_csv_format(tmp_path):
    win = BoxWindow([0.0] * 3, [10.0] * 3)
    data = simulate_poisson(win, 1.0, SeedSpec(21))
    res = global_envelope_test(data, PoissonModel(3, 1.0),
                               np.linspace(0.2, 2.0, 10), n_sims=19, seed=2)
    path = str(tmp_path / "e.csv")
    write_envelope_csv(path, res)
    with open(path) as fh:
        lines = fh.read().splitlines()
    assert lines[0] == "r,data,lower,upper"
    row = [float(c) for c in lines[3].split(",")]
    assert row[0] == res.r[2]
    assert row[1:] == [res.data_curve[2], res.lower[2], res.upper[2]]


# ---------------------------------------------------------------------------
# JSON
# ---------------------------------------------------------------------------

def test_json_is_canonical(tmp_path):
    path = str(tmp_path / "o.json")
    write_json(path, {"b": 1, "a": [1.5, None], "c": {"z": 0, "y": 1}})
    with open(path) as fh:
        text = fh.read()
    assert text.endswith("\n")
    assert text.index('"a"') < text.index('"b"') < text.index('"c"')
    assert text.index('"y"') < text.index('"z"')
    assert read_json(path) == {"b": 1, "a": [1.5, None], "c": {"z": 0, "y": 1}}


def test_json_identical_bytes_on_rewrite(tmp_path):
    obj = {"params": {"sigma": 0.1 + 0.2}, "seed": 12345678901234567}
    p1, p2 = str(tmp_path / "a.json"), str(tmp_path / "b.json")
    write_json(p1, obj)
    write_json(p2, json.loads(open(p1).read()))
    assert open(p1, "rb").read() == open(p2, "rb").read()
