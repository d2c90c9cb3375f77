"""``hfcurrent`` command line.

Exit status: 0 on success, 1 on a usage error, 2 when input data, files or
configuration are invalid.
"""

from __future__ import annotations

import argparse
import re
import sys
from dataclasses import replace
from pathlib import Path

from . import harness
from .config import DEFAULT_CONFIG, load_config
from .errors import HFCurrentError
from .estimate import estimate_current
from .harness import CurrentMap
from .iq import guess_format, read_iq, write_iq
from .reports import format_report, read_report, write_report

EXIT_OK, EXIT_USAGE, EXIT_DATA = 0, 1, 2
METHOD_TAGS = {"periodogram": "fft", "ar-mem": "armem"}
CELL_NAME = re.compile(r"(\d+)_(\d+)$")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _common(p):
    p.add_argument("--config", metavar="PATH", help="run configuration file")
    p.add_argument("--out", metavar="PATH", help="output file (default: stdout)")
    p.add_argument("--method", choices=("fft", "armem"), help="spectral estimator")
    p.add_argument("--seed", type=int, help="master random seed")
    p.add_argument("--n", type=int, help="samples per series")
    p.add_argument("--alpha", type=float, help="noise scale")
    p.add_argument("--ur", type=float, help="injected radial current (m/s)")
    p.add_argument("--trials", type=int, help="Monte-Carlo trials per point")
    p.add_argument("--input", metavar="PATH", help="input file or directory")
    p.add_argument("--format", choices=("csv", "raw-f32"), help="IQ file format")
    p.add_argument("--workers", type=int, default=1, help="worker processes (default 1)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="hfcurrent", description="HF radar radial current estimation")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)
    sub.required = True
    helps = {
        "simulate": "write a synthetic IQ series",
        "estimate": "estimate the radial current of one IQ series",
        "sweep-order": "AR-MEM success rate and nRMSE versus model order",
        "sweep-noise": "success rate and nRMSE versus noise level for both estimators",
        "map": "per-cell estimates over a synthetic or file-supplied grid",
        "track": "sliding-window current track",
        "spectrum": "fluctuation spectrum of a current track and its power-law slope",
    }
    for name, text in helps.items():
        _common(sub.add_parser(name, help=text, description=text))
    return parser


def _config(args):
    cfg = load_config(args.config) if args.config else DEFAULT_CONFIG
    over = {}
    if args.method:
        over["estimation__method"] = args.method
    if args.seed is not None:
        over["sweep__seed"] = args.seed
    if args.n is not None:
        over["simulation__n"] = args.n
    if args.alpha is not None:
        over["simulation__alpha"] = args.alpha
    if args.ur is not None:
        over["simulation__u_r"] = args.ur
    if args.trials is not None:
        over["sweep__trials"] = args.trials
    if args.input:
        over["io__input"] = args.input
    if args.out:
        over["io__output"] = args.out
    if args.format:
        over["io__format"] = args.format
    return cfg.with_overrides(**over) if over else cfg


def _emit(report, cfg, out, path=None):
    path = path or cfg["io", "output"]
    if path:
        write_report(report, path, cfg)
    else:
        out.write(format_report(report, cfg))


def _input(cfg):
    path = cfg["io", "input"]
    if not path:
        raise UsageError("this command needs --input PATH")
    return path


def _read_series(path, cfg, args):
    fmt = args.format
    if fmt is None:
        try:
            fmt = guess_format(path)
        except HFCurrentError:
            fmt = cfg["io", "format"]
    return read_iq(path, fmt, dt=cfg["radar", "dt"])


def cmd_simulate(cfg, args, out):
    path = cfg["io", "output"]
    if not path:
        raise UsageError("simulate needs --out PATH")
    series = harness.simulate_series(cfg.sim_params(), cfg["sweep", "seed"])
    fmt = args.format or guess_format(path)
    write_iq(series, path, fmt)
    out.write(f"wrote {series.n} samples (dt = {series.dt} s) to {path}\n")


def cmd_estimate(cfg, args, out):
    series = _read_series(_input(cfg), cfg, args)
    if args.n is not None:
        if args.n > series.n:
            raise HFCurrentError(f"--n {args.n} exceeds the {series.n} samples in the input")
        series = series.segment(0, args.n)
    est = estimate_current(
        series,
        cfg.radar(),
        cfg.policy(),
        cfg.method,
        cfg["estimation", "eval_bins"],
        cfg["estimation", "ar_order"],
        cfg["estimation", "centroid"],
        cfg["estimation", "centroid_half_width"],
    )
    u = "" if est.u_r is None else f"{est.u_r:.6f}"
    out.write(
        f"method = {est.method}\n"
        f"n = {series.n}\n"
        f"f_plus_hz = {est.f_plus:.10g}\n"
        f"f_minus_hz = {est.f_minus:.10g}\n"
        f"snr_plus_db = {est.snr_plus:.4f}\n"
        f"snr_minus_db = {est.snr_minus:.4f}\n"
        f"u_r = {u}\n"
        f"qc = {est.qc}\n"
    )
    if cfg["io", "output"]:
        write_report(CurrentMap(((0, 0, est),)), cfg["io", "output"], cfg)


def cmd_sweep_order(cfg, args, out):
    report = harness.order_sweep(
        cfg.sim_params(),
        cfg["sweep", "orders"],
        cfg["sweep", "trials"],
        cfg["sweep", "seed"],
        cfg.policy(),
        cfg["estimation", "eval_bins"],
        args.workers,
    )
    _emit(report, cfg, out)


def cmd_sweep_noise(cfg, args, out):
    methods = [cfg.method] if args.method else ["periodogram", "ar-mem"]
    reports = harness.noise_sweep(
        cfg.sim_params(),
        cfg["sweep", "alphas"],
        methods,
        cfg["sweep", "trials"],
        cfg["sweep", "seed"],
        cfg.policy(),
        cfg["estimation", "eval_bins"],
        args.workers,
    )
    target = cfg["io", "output"]
    for i, (m, rep) in enumerate(reports.items()):
        if target and len(reports) > 1:
            p = Path(target)
            _emit(rep, cfg, out, str(p.with_name(f"{p.stem}_{METHOD_TAGS[m]}{p.suffix or '.csv'}")))
        elif target:
            _emit(rep, cfg, out)
        else:
            if i:
                out.write("\n")
            _emit(rep, cfg, out)


def _grid_from_dir(path, cfg, args):
    cells = {}
    for f in sorted(Path(path).iterdir()):
        m = CELL_NAME.search(f.stem)
        if not f.is_file() or not m:
            continue
        cells[(int(m.group(1)), int(m.group(2)))] = _read_series(str(f), cfg, args)
    if not cells:
        raise HFCurrentError(f"{path}: no files named like <name>_<range>_<azimuth>")
    return cells


def cmd_map(cfg, args, out):
    if cfg["io", "input"]:
        cells = _grid_from_dir(cfg["io", "input"], cfg, args)
    else:
        cells = harness.synthetic_grid(
            cfg.sim_params(),
            cfg["grid", "cells"],
            cfg["sweep", "seed"],
            cfg["grid", "noise_only_fraction"],
        )
    cmap = harness.estimate_grid(
        cells, cfg.radar(), cfg.policy(), cfg.method, cfg["estimation", "eval_bins"], args.workers
    )
    _emit(cmap, cfg, out)


def _track(cfg, args):
    if cfg["io", "input"]:
        series = _read_series(cfg["io", "input"], cfg, args)
    else:
        params = replace(cfg.sim_params(), alpha=cfg["track", "alpha"])
        series, _ = harness.turbulent_series(
            params, cfg["track", "duration"], cfg["track", "turbulence_rms"], cfg["sweep", "seed"]
        )
    return harness.track_current(
        series,
        cfg["track", "window_len"],
        cfg["track", "hop"],
        cfg.radar(),
        cfg.policy(),
        cfg.method,
        cfg["estimation", "eval_bins"],
        args.workers,
    )


def cmd_track(cfg, args, out):
    _emit(_track(cfg, args), cfg, out)


def cmd_spectrum(cfg, args, out):
    path = cfg["io", "input"]
    if path and path.endswith(".csv") and _is_track(path):
        track = read_report(path)[0]
    else:
        track = _track(cfg, args)
    fit = harness.fluctuation_spectrum(track, cfg["track", "fit_band"])
    _emit(fit, cfg, out)
    if cfg["io", "output"]:
        out.write(f"slope = {fit.slope:.4f} +/- {fit.stderr:.4f}\n")


def _is_track(path) -> bool:
    with open(path, encoding="utf-8") as fh:
        return any(ln.strip() == "# kind = track" for ln in fh if ln.startswith("#"))


COMMANDS = {
    "simulate": cmd_simulate,
    "estimate": cmd_estimate,
    "sweep-order": cmd_sweep_order,
    "sweep-noise": cmd_sweep_noise,
    "map": cmd_map,
    "track": cmd_track,
    "spectrum": cmd_spectrum,
}


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return EXIT_OK if not exc.code else EXIT_USAGE
    try:
        if args.workers < 1:
            raise UsageError("--workers must be >= 1")
        cfg = _config(args)
        COMMANDS[args.command](cfg, args, out)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"hfcurrent: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (HFCurrentError, OSError, ValueError) as exc:
        print(f"hfcurrent: {exc}", file=sys.stderr)
        return EXIT_DATA
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
