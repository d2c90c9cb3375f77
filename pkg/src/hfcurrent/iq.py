"""Open I/Q sample formats.

``csv``
    Header ``t,i,q`` then one row per sample (seconds, in-phase, quadrature).
    The sampling interval is inferred from the first two rows and every step
    must match it within 1e-6 relative.
``raw-f32``
    Little-endian float32 pairs ``I0 Q0 I1 Q1 ...`` with no header; the
    sampling interval comes from the configuration.
"""

from __future__ import annotations

import csv
import math
from pathlib import Path

import numpy as np

from .core import ComplexTimeSeries
from .errors import FormatError, InvalidArgument

FORMATS = ("csv", "raw-f32")
DT_TOLERANCE = 1e-6


def guess_format(path) -> str:
    suffix = Path(path).suffix.lower()
    if suffix == ".csv":
        return "csv"
    if suffix in (".f32", ".raw", ".bin", ".iq"):
        return "raw-f32"
    raise FormatError(f"cannot tell the IQ format of {path}; pass it explicitly")


def read_iq(path, format: str | None = None, dt: float | None = None) -> ComplexTimeSeries:
    fmt = format or guess_format(path)
    if fmt == "csv":
        return _read_csv(path, dt)
    if fmt == "raw-f32":
        if dt is None:
            raise InvalidArgument("raw-f32 files need the sampling interval from the configuration")
        return _read_raw(path, dt)
    raise InvalidArgument(f"unknown IQ format {fmt!r}")


def _read_csv(path, dt_hint):
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows or [c.strip() for c in rows[0]] != ["t", "i", "q"]:
        raise FormatError(f"{path}: line 1: expected header 't,i,q'", position=1)
    t = []
    x = []
    for lineno, row in enumerate(rows[1:], start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != 3:
            raise FormatError(f"{path}: line {lineno}: expected 3 fields, got {len(row)}", lineno)
        try:
            ti, re, im = (float(c) for c in row)
        except ValueError as exc:
            raise FormatError(f"{path}: line {lineno}: {exc}", lineno) from exc
        if not all(math.isfinite(v) for v in (ti, re, im)):
            raise FormatError(f"{path}: line {lineno}: non-finite value", lineno)
        t.append(ti)
        x.append(complex(re, im))
    if not x:
        raise FormatError(f"{path}: no samples", position=2)
    t = np.asarray(t)
    if t.size >= 2:
        dt = t[1] - t[0]
        if not dt > 0:
            raise FormatError(f"{path}: line 3: timestamps must increase", position=3)
        steps = np.diff(t)
        bad = np.flatnonzero(np.abs(steps - dt) > DT_TOLERANCE * dt)
        if bad.size:
            line = int(bad[0]) + 3
            raise FormatError(
                f"{path}: line {line}: non-uniform sampling (step {float(steps[bad[0]])!r}, expected {float(dt)!r})",
                line,
            )
    elif dt_hint is not None:
        dt = dt_hint
    else:
        raise FormatError(f"{path}: a single row does not define the sampling interval", position=2)
    return ComplexTimeSeries(np.asarray(x), float(dt), float(t[0]))


def _read_raw(path, dt):
    data = Path(path).read_bytes()
    if len(data) % 8:
        start = len(data) - len(data) % 8
        raise FormatError(f"{path}: byte {start}: truncated I/Q pair", position=start)
    if not data:
        raise FormatError(f"{path}: empty file", position=0)
    v = np.frombuffer(data, dtype="<f4")
    bad = np.flatnonzero(~np.isfinite(v))
    if bad.size:
        raise FormatError(f"{path}: byte {4 * int(bad[0])}: non-finite sample", 4 * int(bad[0]))
    x = v[0::2].astype(np.float64) + 1j * v[1::2].astype(np.float64)
    return ComplexTimeSeries(x, dt)


def write_iq(series: ComplexTimeSeries, path, format: str | None = None) -> None:
    fmt = format or guess_format(path)
    if fmt == "csv":
        t = series.t0 + series.dt * np.arange(series.n)
        with open(path, "w", newline="", encoding="utf-8") as fh:
            fh.write("t,i,q\n")
            for ti, v in zip(t, series.samples):
                fh.write(f"{float(ti)!r},{float(v.real)!r},{float(v.imag)!r}\n")
    elif fmt == "raw-f32":
        out = np.empty(2 * series.n, dtype="<f4")
        out[0::2] = series.samples.real
        out[1::2] = series.samples.imag
        Path(path).write_bytes(out.tobytes())
    else:
        raise InvalidArgument(f"unknown IQ format {fmt!r}")
