"""Run configuration: ``[section]`` headers and ``key = value`` lines.

Blank lines and ``#`` comments are ignored. Every key has a default; unknown
sections or keys are rejected with the offending line number.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .burg import DEFAULT_EVAL_BINS
from .errors import ConfigError, HFCurrentError
from .estimate import QcPolicy, _method
from .harness import DEFAULT_TRIALS, SimParams
from .sim import DEFAULT_BUMPS, Bump, NoiseSource, RadarConfig, ReferenceSpectrumSpec

_SPEC_DEFAULTS = ReferenceSpectrumSpec()


def _float(text: str) -> float:
    v = float(text)
    if not math.isfinite(v):
        raise ValueError("not a finite number")
    return v


def _int(text: str) -> int:
    f = float(text)
    if f != int(f):
        raise ValueError("not an integer")
    return int(f)


def _opt_int(text: str):
    return None if text.lower() in ("", "auto", "none") else _int(text)


def _floats(text: str) -> tuple:
    return tuple(_float(t) for t in text.replace(";", ",").split(",") if t.strip())


def _ints(text: str) -> tuple:
    return tuple(_int(t) for t in text.replace(";", ",").split(",") if t.strip())


def _tristate(text: str):
    t = text.lower()
    if t in ("auto", ""):
        return None
    if t in ("true", "yes", "on", "1"):
        return True
    if t in ("false", "no", "off", "0"):
        return False
    raise ValueError("expected true, false or auto")


def _bumps(text: str) -> tuple:
    """``offset:width:level_db`` triples separated by commas."""
    out = []
    for item in text.split(","):
        item = item.strip()
        if not item:
            continue
        parts = item.split(":")
        if len(parts) != 3:
            raise ValueError(f"bump {item!r} is not offset:width:level_db")
        out.append(Bump(*(_float(p) for p in parts)))
    return tuple(out)


def _choice(*options):
    def parse(text: str) -> str:
        if text not in options:
            raise ValueError(f"expected one of {', '.join(options)}")
        return text

    return parse


def _str(text: str) -> str:
    return text


def _fmt(v) -> str:
    if v is None:
        return "auto"
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, tuple):
        if v and isinstance(v[0], Bump):
            return ", ".join(f"{b.offset!r}:{b.width!r}:{b.level_db!r}" for b in v)
        return ", ".join(_fmt(x) for x in v)
    return str(v)


# section -> key -> (parser, default)
SCHEMA = {
    "radar": {
        "carrier_freq": (_float, 16.15e6),
        "bistatic_angle": (_float, 0.0),
        "dt": (_float, 0.26),
    },
    "spectrum": {
        "bragg_amplitude_pos": (_float, _SPEC_DEFAULTS.bragg_amplitude_pos),
        "bragg_amplitude_neg": (_float, _SPEC_DEFAULTS.bragg_amplitude_neg),
        "line_width": (_float, _SPEC_DEFAULTS.line_width),
        "continuum_level": (_float, _SPEC_DEFAULTS.continuum_level),
        "bumps": (_bumps, DEFAULT_BUMPS),
    },
    "estimation": {
        "method": (_choice("fft", "armem", "periodogram", "ar-mem"), "armem"),
        "snr_threshold": (_float, 12.0),
        "symmetry_tolerance": (_float, 0.025),
        "max_abs_current": (_float, 1.0),
        "eval_bins": (_int, DEFAULT_EVAL_BINS),
        "ar_order": (_opt_int, None),
        "centroid": (_tristate, None),
        "centroid_half_width": (_int, 2),
    },
    "simulation": {
        "u_r": (_float, 0.3),
        "n": (_int, 1024),
        "alpha": (_float, 1.0),
        "noise": (_choice("gaussian", "file"), "gaussian"),
        "noise_path": (_str, ""),
        "noise_format": (_choice("csv", "raw-f32"), "raw-f32"),
    },
    "sweep": {
        "orders": (_ints, (50, 100, 200, 300, 400, 500, 512, 600, 700, 800, 900)),
        "alphas": (_floats, (0.0, 0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 1.75, 2.0)),
        "trials": (_int, DEFAULT_TRIALS),
        "seed": (_int, 0),
    },
    "grid": {
        "cells": (_int, 100),
        "noise_only_fraction": (_float, 0.0),
    },
    "track": {
        "window_len": (_int, 461),
        "hop": (_opt_int, None),
        "duration": (_float, 27 * 3600.0),
        "fit_band": (_floats, (0.15, 10.0)),
        "turbulence_rms": (_float, 0.2),
        "alpha": (_float, 0.25),
    },
    "io": {
        "input": (_str, ""),
        "output": (_str, ""),
        "format": (_choice("csv", "raw-f32"), "csv"),
    },
}


@dataclass(frozen=True)
class RunConfig:
    """Validated configuration values keyed by ``(section, key)``."""

    values: dict = field(default_factory=dict)
    lines: dict = field(default_factory=dict, compare=False, repr=False)

    def __getitem__(self, item):
        section, key = item
        if (section, key) in self.values:
            return self.values[(section, key)]
        return SCHEMA[section][key][1]

    def get(self, section: str, key: str):
        return self[section, key]

    def with_overrides(self, **kw) -> RunConfig:
        """Override with ``section__key=value`` keywords and re-validate."""
        vals = dict(self.values)
        for name, v in kw.items():
            section, key = name.split("__", 1)
            if key not in SCHEMA.get(section, {}):
                raise ConfigError(f"unknown key {section}.{key}", key=key)
            vals[(section, key)] = v
        out = RunConfig(vals)
        out.validate()
        return out

    # domain objects

    def radar(self) -> RadarConfig:
        return RadarConfig(
            self["radar", "carrier_freq"],
            math.radians(self["radar", "bistatic_angle"]),
            self["radar", "dt"],
        )

    def spectrum(self) -> ReferenceSpectrumSpec:
        return ReferenceSpectrumSpec(
            self["spectrum", "bragg_amplitude_pos"],
            self["spectrum", "bragg_amplitude_neg"],
            self["spectrum", "line_width"],
            self["spectrum", "bumps"],
            self["spectrum", "continuum_level"],
        )

    def policy(self) -> QcPolicy:
        return QcPolicy(
            self["estimation", "snr_threshold"],
            self["estimation", "symmetry_tolerance"],
            self["estimation", "max_abs_current"],
        )

    @property
    def method(self) -> str:
        return _method(self["estimation", "method"])

    def noise(self) -> NoiseSource:
        if self["simulation", "noise"] == "gaussian":
            return NoiseSource("gaussian-white")
        from .iq import read_iq

        path = self["simulation", "noise_path"]
        if not path:
            raise ConfigError("file noise needs simulation.noise_path", key="noise_path")
        series = read_iq(path, self["simulation", "noise_format"], dt=self["radar", "dt"])
        return NoiseSource("file-samples", series.samples)

    def sim_params(self) -> SimParams:
        return SimParams(
            self.radar(),
            self.spectrum(),
            self["simulation", "u_r"],
            self["simulation", "n"],
            self["simulation", "alpha"],
            self.noise(),
        )

    def validate(self) -> None:
        """Build every domain object once so invariant violations surface now."""
        checks = {
            "radar": self.radar,
            "spectrum": self.spectrum,
            "estimation": self.policy,
        }
        for section, build in checks.items():
            try:
                build()
            except HFCurrentError as exc:
                key = _guess_key(section, str(exc))
                raise ConfigError(f"[{section}] {exc}", key=key, line=self._line(section, key)) from exc
        simple = [
            ("estimation", "eval_bins", lambda v: v >= 8),
            ("estimation", "ar_order", lambda v: v is None or v >= 0),
            ("estimation", "centroid_half_width", lambda v: v >= 0),
            ("simulation", "n", lambda v: v >= 4),
            ("simulation", "alpha", lambda v: v >= 0),
            ("sweep", "trials", lambda v: v >= 1),
            ("sweep", "alphas", lambda v: all(a >= 0 for a in v)),
            ("sweep", "orders", lambda v: all(o >= 1 for o in v)),
            ("grid", "cells", lambda v: v >= 1),
            ("grid", "noise_only_fraction", lambda v: 0 <= v <= 1),
            ("track", "window_len", lambda v: v >= 4),
            ("track", "hop", lambda v: v is None or v >= 1),
            ("track", "duration", lambda v: v > 0),
            ("track", "fit_band", lambda v: len(v) == 2 and 0 < v[0] < v[1]),
            ("track", "turbulence_rms", lambda v: v >= 0),
            ("track", "alpha", lambda v: v >= 0),
        ]
        for section, key, ok in simple:
            if not ok(self[section, key]):
                raise ConfigError(
                    f"invalid value for {section}.{key}: {_fmt(self[section, key])}",
                    key=key,
                    line=self._line(section, key),
                )

    def _line(self, section, key):
        return self.lines.get((section, key))

    def to_text(self) -> str:
        """Canonical text listing every key; parses back to an equal config."""
        out = []
        for section, keys in SCHEMA.items():
            out.append(f"[{section}]")
            for key in keys:
                out.append(f"{key} = {_fmt(self[section, key])}")
        return "\n".join(out) + "\n"

    def __eq__(self, other):
        if not isinstance(other, RunConfig):
            return NotImplemented
        return all(
            self[s, k] == other[s, k] for s, keys in SCHEMA.items() for k in keys
        )

    __hash__ = None


def _guess_key(section: str, message: str) -> str | None:
    msg = message.lower().replace(" ", "_")
    for key in SCHEMA[section]:
        if key in msg:
            return key
    hints = {"bistatic": "bistatic_angle", "carrier": "carrier_freq", "dt": "dt", "bump": "bumps"}
    for word, key in hints.items():
        if key in SCHEMA[section] and word in message.lower():
            return key
    return None


def parse_config(text: str) -> RunConfig:
    """Parse and validate configuration text; absent keys take their defaults."""
    values = {}
    lines = {}
    section = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            if not line.endswith("]"):
                raise ConfigError(f"line {lineno}: malformed section header", line=lineno)
            section = line[1:-1].strip()
            if section not in SCHEMA:
                raise ConfigError(f"line {lineno}: unknown section [{section}]", line=lineno)
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'", line=lineno)
        key, value = (p.strip() for p in line.split("=", 1))
        if section is None:
            raise ConfigError(f"line {lineno}: key {key!r} outside any section", key=key, line=lineno)
        if key not in SCHEMA[section]:
            raise ConfigError(
                f"line {lineno}: unknown key {key!r} in [{section}]", key=key, line=lineno
            )
        parser = SCHEMA[section][key][0]
        try:
            values[(section, key)] = parser(value)
        except (ValueError, HFCurrentError) as exc:
            raise ConfigError(
                f"line {lineno}: bad value for {key}: {value!r} ({exc})", key=key, line=lineno
            ) from exc
        lines[(section, key)] = lineno
    cfg = RunConfig(values, lines)
    try:
        cfg.validate()
    except ConfigError as exc:
        if exc.line is not None:
            raise ConfigError(f"line {exc.line}: {exc}", key=exc.key, line=exc.line) from exc
        raise
    return cfg


def load_config(path) -> RunConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())


DEFAULT_CONFIG = RunConfig()
