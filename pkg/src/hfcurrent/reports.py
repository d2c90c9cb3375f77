"""CSV emission and re-ingestion of sweep, map, track and spectrum reports.

Each file starts with ``# `` comment lines: the full run configuration in its
``key = value`` form, then a ``[report]`` block with the report kind and its
metadata. Numbers use 10 significant digits.
"""

from __future__ import annotations

import math
from pathlib import Path

import numpy as np

from .config import RunConfig, parse_config
from .core import PowerSpectrum
from .errors import FormatError, HFCurrentError
from .estimate import BraggEstimate, QcVerdict
from .harness import CurrentMap, CurrentTrack, SlopeFit, SweepReport

COLUMNS = {
    "sweep": ("axis", "success_rate_pct", "nrmse_pct", "trials"),
    "map": (
        "range_idx",
        "azimuth_idx",
        "u_r",
        "qc",
        "snr_plus",
        "snr_minus",
        "f_plus_hz",
        "f_minus_hz",
    ),
    "track": ("t_s", "u_r", "qc"),
    "spectrum": ("freq_hz", "psd"),
}


def fmt_num(v) -> str:
    """10 significant digits; NaN and None become an empty field."""
    if v is None:
        return ""
    v = float(v)
    if math.isnan(v):
        return ""
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return f"{v:.10g}"


def _num(text: str) -> float:
    return math.nan if text == "" else float(text)


def _meta_for(report) -> tuple[str, dict, list]:
    if isinstance(report, SweepReport):
        meta = {"axis_name": report.axis_name, "method": report.method, "trials": report.trials}
        rows = [
            (fmt_num(a), fmt_num(s), fmt_num(e), str(report.trials))
            for a, s, e in zip(report.axis, report.success_rate, report.nrmse)
        ]
        return "sweep", meta, rows
    if isinstance(report, CurrentMap):
        methods = sorted({e.method for *_, e in report.cells})
        refined = sorted({e.refined for *_, e in report.cells})
        meta = {
            "method": methods[0] if len(methods) == 1 else "",
            "refined": ("true" if refined[0] else "false") if len(refined) == 1 else "",
            "coverage_pct": fmt_num(report.coverage),
        }
        rows = [
            (
                str(r),
                str(a),
                fmt_num(e.u_r),
                str(e.qc),
                fmt_num(e.snr_plus),
                fmt_num(e.snr_minus),
                fmt_num(e.f_plus),
                fmt_num(e.f_minus),
            )
            for r, a, e in report.cells
        ]
        return "map", meta, rows
    if isinstance(report, CurrentTrack):
        meta = {"method": report.method, "window_len": report.window_len, "hop": report.hop}
        rows = [(fmt_num(t), fmt_num(u), str(q)) for t, u, q in zip(report.times, report.u_r, report.qc)]
        return "track", meta, rows
    if isinstance(report, SlopeFit):
        kind, meta, rows = _meta_for(report.spectrum)
        meta.update(
            slope=fmt_num(report.slope),
            slope_stderr=fmt_num(report.stderr),
            intercept=fmt_num(report.intercept),
        )
        return kind, meta, rows
    if isinstance(report, PowerSpectrum):
        meta = {"estimator": report.estimator}
        rows = [(fmt_num(f), fmt_num(v)) for f, v in zip(report.freqs, report.values)]
        return "spectrum", meta, rows
    raise TypeError(f"cannot write a {type(report).__name__} report")


def format_report(report, config: RunConfig | None = None) -> str:
    kind, meta, rows = _meta_for(report)
    lines = []
    if config is not None:
        lines += [f"# {ln}" for ln in config.to_text().splitlines()]
    lines.append("# [report]")
    lines.append(f"# kind = {kind}")
    lines += [f"# {k} = {v}" for k, v in meta.items()]
    lines.append(",".join(COLUMNS[kind]))
    lines += [",".join(r) for r in rows]
    return "\n".join(lines) + "\n"


def write_report(report, path, config: RunConfig | None = None) -> None:
    """Write ``report`` as CSV at ``path`` with a self-describing header."""
    text = format_report(report, config)
    try:
        Path(path).write_text(text, encoding="utf-8")
    except OSError as exc:
        raise OSError(exc.errno, f"cannot write report: {exc.strerror}", str(path)) from exc


def read_report(path):
    """Parse a report written by ``write_report``.

    Returns ``(report, config, meta)``; ``config`` is None when the file has
    no configuration header.
    """
    text = Path(path).read_text(encoding="utf-8")
    header, body = [], []
    for ln in text.splitlines():
        (header if ln.startswith("#") and not body else body).append(ln)
    cfg_lines, meta = [], {}
    in_report = False
    for ln in header:
        content = ln[1:].strip()
        if content == "[report]":
            in_report = True
            continue
        if in_report:
            k, _, v = content.partition("=")
            meta[k.strip()] = v.strip()
        else:
            cfg_lines.append(content)
    kind = meta.get("kind")
    if kind not in COLUMNS:
        raise FormatError(f"{path}: missing or unknown report kind {kind!r}")
    if not body or tuple(body[0].split(",")) != COLUMNS[kind]:
        raise FormatError(f"{path}: column header does not match a {kind} report")
    try:
        config = parse_config("\n".join(cfg_lines)) if cfg_lines else None
    except HFCurrentError as exc:
        raise FormatError(f"{path}: bad configuration header: {exc}") from exc
    rows = [ln.split(",") for ln in body[1:] if ln]
    try:
        report = _build(kind, meta, rows)
    except (ValueError, IndexError) as exc:
        raise FormatError(f"{path}: {exc}") from exc
    return report, config, meta


def _build(kind, meta, rows):
    if kind == "sweep":
        cols = list(zip(*rows)) if rows else [(), (), (), ()]
        return SweepReport(
            meta["axis_name"],
            [float(x) for x in cols[0]],
            [float(x) for x in cols[1]],
            [_num(x) for x in cols[2]],
            int(meta["trials"]),
            meta["method"],
        )
    if kind == "map":
        refined = meta.get("refined") == "true"
        cells = []
        for r in rows:
            qc = QcVerdict.parse(r[3])
            est = BraggEstimate(
                _num(r[6]),
                _num(r[7]),
                _num(r[4]),
                _num(r[5]),
                qc,
                meta.get("method", ""),
                refined,
                _num(r[2]) if qc.passed else None,
            )
            cells.append((int(r[0]), int(r[1]), est))
        return CurrentMap(tuple(cells))
    if kind == "track":
        return CurrentTrack(
            [float(r[0]) for r in rows],
            [_num(r[1]) for r in rows],
            tuple(QcVerdict.parse(r[2]) for r in rows),
            int(meta["window_len"]),
            int(meta["hop"]),
            meta["method"],
        )
    spectrum = PowerSpectrum(
        np.array([float(r[0]) for r in rows]), np.array([float(r[1]) for r in rows]), meta["estimator"]
    )
    if "slope" in meta:
        return SlopeFit(spectrum, float(meta["slope"]), float(meta["slope_stderr"]), float(meta["intercept"]))
    return spectrum
