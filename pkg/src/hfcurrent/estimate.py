"""Bragg-line extraction, quality control and radial current inversion."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .burg import DEFAULT_EVAL_BINS, ar_psd_grid, burg_fit, optimal_order
from .core import ComplexTimeSeries, PowerSpectrum, periodogram
from .errors import InsufficientFloorSupport, InvalidArgument
from .sim import RadarConfig, bragg_frequency, current_shift

METHODS = ("periodogram", "ar-mem")
MIN_FLOOR_BINS = 16
DEFAULT_CENTROID_HALF_WIDTH = 2


@dataclass(frozen=True)
class QcPolicy:
    snr_threshold: float = 12.0
    symmetry_tolerance: float = 0.025
    max_abs_current: float = 1.0

    def __post_init__(self):
        for name in ("snr_threshold", "symmetry_tolerance", "max_abs_current"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise InvalidArgument(f"{name} must be positive, got {v!r}")


@dataclass(frozen=True)
class QcVerdict:
    """Outcome of the quality checks; ``reason`` is None on success."""

    reason: str | None = None

    @property
    def passed(self) -> bool:
        return self.reason is None

    def __bool__(self) -> bool:
        return self.passed

    def __str__(self) -> str:
        return "pass" if self.reason is None else f"fail:{self.reason}"

    @classmethod
    def parse(cls, text: str) -> QcVerdict:
        if text == "pass":
            return cls()
        if text.startswith("fail:"):
            return cls(text[5:])
        raise ValueError(f"not a QC verdict: {text!r}")


PASS = QcVerdict()


@dataclass(frozen=True)
class BraggEstimate:
    f_plus: float
    f_minus: float
    snr_plus: float
    snr_minus: float
    qc: QcVerdict
    method: str
    refined: bool = False
    u_r: float | None = None

    def __post_init__(self):
        if self.u_r is not None and not self.qc.passed:
            raise InvalidArgument("a current value requires a passing QC verdict")


def _method(name: str) -> str:
    aliases = {"fft": "periodogram", "armem": "ar-mem", "ar": "ar-mem", "mem": "ar-mem"}
    m = aliases.get(name, name)
    if m not in METHODS:
        raise InvalidArgument(f"unknown method {name!r}")
    return m


def search_half_width(config: RadarConfig, policy: QcPolicy) -> float:
    """Largest Doppler offset of a Bragg line permitted by ``max_abs_current``."""
    return abs(current_shift(config, policy.max_abs_current))


def find_bragg_peaks(
    psd: PowerSpectrum, config: RadarConfig, policy: QcPolicy
) -> tuple[float, float]:
    """Frequencies of the PSD maximum in the windows around +f_B and -f_B."""
    fb = bragg_frequency(config)
    dfm = search_half_width(config, policy)
    f = psd.freqs
    if f[0] > -fb - dfm or f[-1] < fb + dfm:
        raise InvalidArgument("Bragg search windows extend beyond the spectrum grid")
    out = []
    for center in (fb, -fb):
        idx = np.flatnonzero(np.abs(f - center) <= dfm)
        if idx.size == 0:
            raise InvalidArgument("no grid point inside a Bragg search window")
        out.append(float(f[idx[np.argmax(psd.values[idx])]]))
    return out[0], out[1]


def noise_floor(psd: PowerSpectrum, config: RadarConfig, policy: QcPolicy) -> float:
    """Median density away from both Bragg regions.

    Excludes everything within ``2 * dfm`` of +/- f_B, which contains the
    search windows themselves.
    """
    fb = bragg_frequency(config)
    guard = 2 * search_half_width(config, policy)
    f = psd.freqs
    keep = (np.abs(f - fb) > guard) & (np.abs(f + fb) > guard)
    if np.count_nonzero(keep) < MIN_FLOOR_BINS:
        raise InsufficientFloorSupport(
            f"only {np.count_nonzero(keep)} bins left for the noise floor (need {MIN_FLOOR_BINS})"
        )
    return float(np.median(psd.values[keep]))


def estimate_snr(
    psd: PowerSpectrum,
    peak_freq: float,
    config: RadarConfig,
    policy: QcPolicy,
    floor: float | None = None,
) -> float:
    """Peak-to-floor ratio in dB at the bin nearest ``peak_freq``."""
    if not psd.freqs[0] <= peak_freq <= psd.freqs[-1]:
        raise InvalidArgument(f"peak {peak_freq} Hz is outside the spectrum grid")
    if floor is None:
        floor = noise_floor(psd, config, policy)
    peak = psd.values[psd.nearest_bin(peak_freq)]
    with np.errstate(divide="ignore"):
        return float(10 * np.log10(peak / floor)) if floor > 0 else math.inf


def radial_current(f_plus: float, f_minus: float, config: RadarConfig) -> float:
    """Radial current (m/s) from the mean shift of the two Bragg lines."""
    if not (math.isfinite(f_plus) and math.isfinite(f_minus)):
        raise InvalidArgument("Bragg frequencies must be finite")
    if config.cos_phi <= 0:
        raise InvalidArgument("bistatic geometry with cos(phi) <= 0")
    fc = 0.5 * (f_plus + f_minus)
    return config.wavelength * fc / (2 * config.cos_phi)


def quality_check(
    f_plus: float,
    f_minus: float,
    snr_plus: float,
    snr_minus: float,
    config: RadarConfig,
    policy: QcPolicy,
) -> QcVerdict:
    """Apply the SNR, symmetry and range checks in that order."""
    if not min(snr_plus, snr_minus) > policy.snr_threshold:
        return QcVerdict("snr")
    fb = bragg_frequency(config)
    if not abs(f_plus - f_minus - 2 * fb) < policy.symmetry_tolerance * fb:
        return QcVerdict("symmetry")
    if not abs(radial_current(f_plus, f_minus, config)) <= policy.max_abs_current:
        return QcVerdict("range")
    return PASS


@dataclass(frozen=True)
class Centroid:
    freq: float
    clipped: bool


def centroid_refine(psd: PowerSpectrum, peak_freq: float, half_width: int) -> Centroid:
    """Power-weighted mean frequency over +/- ``half_width`` bins of the peak.

    A neighbourhood that runs off the grid is clipped and flagged.
    """
    if half_width < 0:
        raise InvalidArgument("half_width must be >= 0")
    if half_width == 0:
        return Centroid(float(peak_freq), False)
    i = psd.nearest_bin(peak_freq)
    lo, hi = i - half_width, i + half_width + 1
    clipped = lo < 0 or hi > len(psd)
    lo, hi = max(lo, 0), min(hi, len(psd))
    w = psd.values[lo:hi]
    if not np.sum(w) > 0:
        return Centroid(float(psd.freqs[i]), clipped)
    return Centroid(float(np.sum(psd.freqs[lo:hi] * w) / np.sum(w)), clipped)


def compute_psd(
    series: ComplexTimeSeries,
    method: str,
    eval_bins: int = DEFAULT_EVAL_BINS,
    order: int | None = None,
) -> PowerSpectrum:
    method = _method(method)
    if method == "periodogram":
        return periodogram(series)
    p = optimal_order(series.n) if order is None else order
    return ar_psd_grid(burg_fit(series, p), eval_bins)


def estimate_from_psd(
    psd: PowerSpectrum,
    config: RadarConfig,
    policy: QcPolicy,
    method: str,
    centroid_half_width: int = 0,
) -> BraggEstimate:
    """Peak finding, SNR, QC and current inversion on a ready-made spectrum."""
    f_plus, f_minus = find_bragg_peaks(psd, config, policy)
    floor = noise_floor(psd, config, policy)
    snr_plus = estimate_snr(psd, f_plus, config, policy, floor)
    snr_minus = estimate_snr(psd, f_minus, config, policy, floor)
    refined = centroid_half_width > 0
    if refined:
        f_plus = centroid_refine(psd, f_plus, centroid_half_width).freq
        f_minus = centroid_refine(psd, f_minus, centroid_half_width).freq
    qc = quality_check(f_plus, f_minus, snr_plus, snr_minus, config, policy)
    u_r = radial_current(f_plus, f_minus, config) if qc.passed else None
    return BraggEstimate(f_plus, f_minus, snr_plus, snr_minus, qc, method, refined, u_r)


def estimate_current(
    series: ComplexTimeSeries,
    config: RadarConfig,
    policy: QcPolicy | None = None,
    method: str = "ar-mem",
    eval_bins: int = DEFAULT_EVAL_BINS,
    order: int | None = None,
    centroid: bool | None = None,
    centroid_half_width: int = DEFAULT_CENTROID_HALF_WIDTH,
) -> BraggEstimate:
    """Radial current from one voltage series.

    ``method`` is ``"periodogram"`` (Blackman-Harris FFT) or ``"ar-mem"``
    (Burg fit of order ``order``, default N/2, evaluated on ``eval_bins``
    full-band bins). Centroid refinement defaults to on for the periodogram
    only.
    """
    policy = policy or QcPolicy()
    method = _method(method)
    if abs(series.dt - config.dt) > 1e-9 * config.dt:
        raise InvalidArgument(f"series dt {series.dt} does not match radar dt {config.dt}")
    psd = compute_psd(series, method, eval_bins, order)
    if centroid is None:
        centroid = method == "periodogram"
    return estimate_from_psd(psd, config, policy, method, centroid_half_width if centroid else 0)
