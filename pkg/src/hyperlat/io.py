"""Delimited-text and JSON serialization.

All floats are written with ``repr``, which round-trips exactly in
Python 3, so rereading a file reproduces the in-memory values bit for
bit and reruns can be compared byte for byte. Point files carry their
window in a sidecar JSON next to the CSV.
"""

from __future__ import annotations

import json
import os

import numpy as np

from .errors import ConfigError, CsvFormatError
from .geometry import BoxWindow, PointPattern
from .ktheory import SummaryCurve

__all__ = [
    "window_sidecar_path",
    "write_points_csv",
    "read_points_csv",
    "write_curve_csv",
    "read_curve_csv",
    "write_spectrum_csv",
    "write_histogram_csv",
    "write_envelope_csv",
    "write_json",
    "read_json",
]

_AXES = ("x", "y", "z")


def _fmt(value: float) -> str:
    return repr(float(value))


def window_sidecar_path(csv_path: str) -> str:
    base, ext = os.path.splitext(csv_path)
    return (base if ext == ".csv" else csv_path) + ".window.json"


def write_points_csv(path: str, pattern: PointPattern) -> None:
    """Write one point per line under an x[,y[,z]] header, plus the
    window sidecar ``<path stem>.window.json``."""
    if pattern.dim > 3:
        raise ConfigError("point CSV supports dim 1..3")
    header = ",".join(_AXES[: pattern.dim])
    lines = [header]
    for row in pattern.points:
        lines.append(",".join(_fmt(v) for v in row))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
    with open(window_sidecar_path(path), "w") as fh:
        json.dump(pattern.window.as_dict(), fh, sort_keys=True)
        fh.write("\n")


def read_points_csv(path: str, dim: int | None = None,
                    window: BoxWindow | None = None) -> PointPattern:
    """Parse a point CSV into a PointPattern.

    The window is taken from the ``window`` argument, else the sidecar
    JSON, else the points' bounding box. Non-finite coordinates and
    points outside the declared window are format errors that name the
    offending row.
    """
    try:
        with open(path) as fh:
            raw = fh.read().splitlines()
    except FileNotFoundError:
        raise ConfigError(f"point CSV not found: {path}") from None
    rows = [line.strip() for line in raw if line.strip()]
    if not rows:
        raise CsvFormatError(f"{path}: empty file")
    header = [c.strip().lower() for c in rows[0].split(",")]
    file_dim = len(header)
    if header != list(_AXES[:file_dim]):
        raise CsvFormatError(
            f"{path}: expected header like 'x,y,z', got {rows[0]!r}")
    if dim is not None and file_dim != dim:
        raise CsvFormatError(
            f"{path}: header {rows[0]!r} has {file_dim} columns, expected dim {dim}")

    points = np.empty((len(rows) - 1, file_dim))
    for i, line in enumerate(rows[1:], start=2):
        cells = line.split(",")
        if len(cells) != file_dim:
            raise CsvFormatError(f"{path}: row {i}: expected {file_dim} values, "
                                 f"got {len(cells)}")
        try:
            vals = [float(c) for c in cells]
        except ValueError:
            raise CsvFormatError(f"{path}: row {i}: unparsable value") from None
        if not all(np.isfinite(vals)):
            raise CsvFormatError(f"{path}: row {i}: non-finite coordinate")
        points[i - 2] = vals

    if window is None:
        sidecar = window_sidecar_path(path)
        if os.path.exists(sidecar):
            with open(sidecar) as fh:
                window = BoxWindow.from_dict(json.load(fh))
        elif points.size:
            window = BoxWindow(points.min(axis=0), points.max(axis=0))
        else:
            raise CsvFormatError(f"{path}: no points and no window declared")
    inside = window.contains(points)
    if not np.all(inside):
        bad = int(np.argmin(inside)) + 2
        raise CsvFormatError(f"{path}: row {bad}: point outside declared window")
    return PointPattern(points, window, {"source": os.path.basename(path)})


def write_curve_csv(path: str, curve: SummaryCurve) -> None:
    lines = ["r,value"]
    for r, v in zip(curve.r, curve.values):
        lines.append(f"{_fmt(r)},{_fmt(v)}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def read_curve_csv(path: str, kind: str = "K") -> SummaryCurve:
    with open(path) as fh:
        rows = [line.strip() for line in fh.read().splitlines() if line.strip()]
    if not rows or rows[0].lower() != "r,value":
        raise CsvFormatError(f"{path}: expected header 'r,value'")
    r, v = [], []
    for i, line in enumerate(rows[1:], start=2):
        cells = line.split(",")
        if len(cells) != 2:
            raise CsvFormatError(f"{path}: row {i}: expected 2 values")
        try:
            r.append(float(cells[0]))
            v.append(float(cells[1]))
        except ValueError:
            raise CsvFormatError(f"{path}: row {i}: unparsable value") from None
    return SummaryCurve(np.asarray(r), np.asarray(v), kind, {"source": path})


def write_spectrum_csv(path: str, spectrum) -> None:
    d = spectrum.k.shape[1]
    if d > 3:
        raise ConfigError("spectrum CSV supports dim 1..3")
    header = ",".join(f"k{_AXES[a]}" for a in range(d)) + ",k_norm,S"
    lines = [header]
    for kvec, kn, s in zip(spectrum.k, spectrum.k_norm, spectrum.values):
        cells = [_fmt(c) for c in kvec] + [_fmt(kn), _fmt(s)]
        lines.append(",".join(cells))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def write_histogram_csv(path: str, hist) -> None:
    lines = ["bin_lo,bin_hi,count"]
    for lo, hi, c in zip(hist.bin_lo, hist.bin_hi, hist.counts):
        lines.append(f"{_fmt(lo)},{_fmt(hi)},{int(c)}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def write_envelope_csv(path: str, result) -> None:
    lines = ["r,data,lower,upper"]
    for r, d, lo, up in zip(result.r, result.data_curve, result.lower, result.upper):
        lines.append(f"{_fmt(r)},{_fmt(d)},{_fmt(lo)},{_fmt(up)}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def write_json(path: str, obj) -> None:
    """Canonical JSON: sorted keys, fixed separators, trailing newline."""
    with open(path, "w") as fh:
        json.dump(obj, fh, sort_keys=True, indent=2)
        fh.write("\n")


def read_json(path: str):
    with open(path) as fh:
        return json.load(fh)
