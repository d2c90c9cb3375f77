"""Reference sea-echo Doppler spectra and synthetic radar voltage series."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import ComplexTimeSeries, PowerSpectrum, fft_grid
from .errors import DegenerateInput, InvalidArgument

G = 9.81
C_LIGHT = 299_792_458.0
DEFAULT_CARRIER = 16.15e6
DEFAULT_DT = 0.26


@dataclass(frozen=True)
class RadarConfig:
    """Radar geometry and sampling. ``bistatic_angle`` is in radians."""

    carrier_freq: float = DEFAULT_CARRIER
    bistatic_angle: float = 0.0
    dt: float = DEFAULT_DT
    g: float = G

    def __post_init__(self):
        if not self.carrier_freq > 0:
            raise InvalidArgument("carrier frequency must be positive")
        if not self.dt > 0:
            raise InvalidArgument("dt must be positive")
        if not (0 <= self.bistatic_angle < math.pi / 2):
            raise InvalidArgument(
                f"bistatic angle must lie in [0, pi/2), got {self.bistatic_angle!r} rad"
            )

    @classmethod
    def from_degrees(cls, carrier_freq=DEFAULT_CARRIER, bistatic_deg=0.0, dt=DEFAULT_DT):
        return cls(carrier_freq, math.radians(bistatic_deg), dt)

    @property
    def wavelength(self) -> float:
        return C_LIGHT / self.carrier_freq

    @property
    def cos_phi(self) -> float:
        return math.cos(self.bistatic_angle)


def bragg_frequency(config: RadarConfig) -> float:
    """First-order Bragg frequency ``sqrt(g cos(phi) / (pi lambda))`` in Hz."""
    return math.sqrt(config.g * config.cos_phi / (math.pi * config.wavelength))


def current_shift(config: RadarConfig, u_r):
    """Doppler shift ``2 U_r cos(phi) / lambda`` (Hz) of a radial current ``u_r`` (m/s)."""
    scale = 2.0 * config.cos_phi / config.wavelength
    if np.ndim(u_r):
        return scale * np.asarray(u_r, dtype=float)
    return scale * float(u_r)


@dataclass(frozen=True)
class Bump:
    """Second-order Gaussian peak placed ``offset`` Hz from a Bragg line."""

    offset: float
    width: float
    level_db: float

    def __post_init__(self):
        if not self.width > 0:
            raise InvalidArgument("bump width must be positive")
        if not self.level_db < 0:
            raise InvalidArgument("second-order bumps must sit below the Bragg line (level < 0 dB)")


# swell / wind-wave / hydrodynamic stand-ins around each Bragg line
DEFAULT_BUMPS = (
    Bump(-0.12, 0.010, -25.0),
    Bump(-0.05, 0.006, -35.0),
    Bump(0.05, 0.006, -30.0),
    Bump(0.12, 0.010, -20.0),
)


@dataclass(frozen=True)
class ReferenceSpectrumSpec:
    """Parametric stand-in for a second-order sea-echo spectrum.

    Two Gaussian lines at +/- f_B of standard deviation ``line_width`` (Hz)
    with peak densities ``bragg_amplitude_pos`` / ``bragg_amplitude_neg``.
    Each bump is replicated around both lines with its level taken relative
    to that line's peak. ``continuum_level`` is a flat floor in dB below the
    strongest line peak.
    """

    bragg_amplitude_pos: float = 1.0
    bragg_amplitude_neg: float = 10 ** (-14 / 10)
    line_width: float = 0.0015
    bumps: tuple = DEFAULT_BUMPS
    continuum_level: float = -45.0

    def __post_init__(self):
        if not self.line_width > 0:
            raise InvalidArgument("line_width must be positive")
        if self.bragg_amplitude_pos < 0 or self.bragg_amplitude_neg < 0:
            raise InvalidArgument("Bragg amplitudes must be nonnegative")
        if self.bragg_amplitude_pos + self.bragg_amplitude_neg <= 0:
            raise InvalidArgument("at least one Bragg line must have positive amplitude")
        bumps = tuple(b if isinstance(b, Bump) else Bump(*b) for b in self.bumps)
        object.__setattr__(self, "bumps", bumps)


def _gauss(f, center, width):
    return np.exp(-0.5 * ((f - center) / width) ** 2)


def build_reference_spectrum(
    spec: ReferenceSpectrumSpec, config: RadarConfig, grid
) -> PowerSpectrum:
    """Sample the stand-in spectrum on ``grid`` and normalize to unit power.

    ``grid`` must be equispaced and cover both Bragg frequencies.
    """
    f = np.asarray(grid, dtype=float).ravel()
    fb = bragg_frequency(config)
    nyq = 0.5 / config.dt
    if f.size < 2 or f[0] < -nyq * (1 + 1e-12) or f[-1] > nyq * (1 + 1e-12):
        raise InvalidArgument("grid must hold at least two points inside the Nyquist band")
    if not (f[0] <= -fb and f[-1] >= fb):
        raise InvalidArgument(f"grid [{f[0]:.4g}, {f[-1]:.4g}] Hz does not cover +/-{fb:.4g} Hz")
    sigma = np.zeros_like(f)
    for sign, amp in ((1, spec.bragg_amplitude_pos), (-1, spec.bragg_amplitude_neg)):
        if amp == 0:
            continue
        center = sign * fb
        sigma += amp * _gauss(f, center, spec.line_width)
        for b in spec.bumps:
            sigma += amp * 10 ** (b.level_db / 10) * _gauss(f, center + b.offset, b.width)
    peak = max(spec.bragg_amplitude_pos, spec.bragg_amplitude_neg)
    sigma += peak * 10 ** (spec.continuum_level / 10)
    df = f[1] - f[0]
    total = np.sum(sigma) * df
    if not total > 0:
        raise InvalidArgument("reference spectrum has no power on this grid")
    return PowerSpectrum(f, sigma / total, "periodogram", dt=config.dt)


def synthesize_signal(
    sigma0: PowerSpectrum, config: RadarConfig, u_r, n_samples: int, seed
) -> ComplexTimeSeries:
    """Random-phase realization of ``sigma0`` shifted by the current ``u_r``.

    ``sigma0`` must live on ``fft_grid(n_samples, config.dt)``. ``u_r`` is a
    scalar (m/s) or one value per sample, in which case the Doppler phase is
    accumulated sample by sample. The output is scaled to unit mean power.
    """
    n = int(n_samples)
    if len(sigma0) != n:
        raise InvalidArgument(f"spectrum has {len(sigma0)} bins, expected {n}")
    grid = fft_grid(n, config.dt)
    if not np.allclose(sigma0.freqs, grid, rtol=0, atol=1e-9 / config.dt):
        raise InvalidArgument("spectrum is not sampled on the N-point FFT grid")
    rng = np.random.default_rng(seed)
    phases = rng.uniform(0.0, 2 * np.pi, n)
    coef = np.sqrt(config.dt * sigma0.values) * np.exp(1j * phases)
    # sum_j c_j exp(2i pi f_j t_n) over the shifted grid == n * ifft in natural order
    s0 = n * np.fft.ifft(np.fft.ifftshift(coef))
    fc = current_shift(config, u_r)
    if np.ndim(fc) == 0:
        doppler = 2 * np.pi * fc * config.dt * np.arange(n)
    else:
        fc = np.asarray(fc, dtype=float).ravel()
        if fc.size != n:
            raise InvalidArgument(f"current series has {fc.size} values, expected {n}")
        doppler = 2 * np.pi * config.dt * np.concatenate(([0.0], np.cumsum(fc[:-1])))
    s0 = s0 * np.exp(1j * doppler)
    power = np.mean(np.abs(s0) ** 2)
    if not power > 0:
        raise DegenerateInput("reference spectrum produced a zero signal")
    return ComplexTimeSeries(s0 / np.sqrt(power), config.dt)


@dataclass(frozen=True)
class NoiseSource:
    """Additive noise: complex white Gaussian, or recycled recorded samples."""

    kind: str = "gaussian-white"
    samples: np.ndarray | None = field(default=None, repr=False)
    seed: int = 0

    def __post_init__(self):
        if self.kind not in ("gaussian-white", "file-samples"):
            raise InvalidArgument(f"unknown noise kind {self.kind!r}")
        if self.kind == "file-samples":
            if self.samples is None or np.size(self.samples) == 0:
                raise InvalidArgument("file-based noise needs a nonempty sample set")
            s = np.array(self.samples, dtype=np.complex128).ravel()
            s.setflags(write=False)
            object.__setattr__(self, "samples", s)

    def with_seed(self, seed) -> NoiseSource:
        return NoiseSource(self.kind, self.samples, seed)

    def draw(self, n: int) -> np.ndarray:
        """``n`` noise samples scaled to unit mean power."""
        rng = np.random.default_rng(self.seed)
        if self.kind == "gaussian-white":
            x = (rng.standard_normal(n) + 1j * rng.standard_normal(n)) / np.sqrt(2)
        else:
            src = self.samples
            start = int(rng.integers(src.size))
            x = src[(start + np.arange(n)) % src.size]
        power = np.mean(np.abs(x) ** 2)
        if not power > 0:
            raise DegenerateInput("noise source has zero variance")
        return x / np.sqrt(power)


def add_noise(signal: ComplexTimeSeries, noise: NoiseSource, alpha: float) -> ComplexTimeSeries:
    """``s + alpha * n`` with unit-power noise; ``alpha = 1`` is 0 dB SNR."""
    if not alpha >= 0:
        raise InvalidArgument(f"alpha must be >= 0, got {alpha!r}")
    n = noise.draw(signal.n)
    if alpha == 0:
        return signal
    return ComplexTimeSeries(signal.samples + alpha * n, signal.dt, signal.t0)


def power_law_series(n: int, dt: float, exponent: float, rms: float, seed) -> np.ndarray:
    """Real zero-mean series whose spectrum is exactly ``|f|^exponent``.

    Deterministic amplitudes with uniform random phases, scaled to the given
    standard deviation.
    """
    if n < 4:
        raise InvalidArgument("need at least 4 samples")
    rng = np.random.default_rng(seed)
    f = np.fft.rfftfreq(n, dt)
    amp = np.zeros(f.size)
    amp[1:] = f[1:] ** (exponent / 2)
    spec = amp * np.exp(1j * rng.uniform(0, 2 * np.pi, f.size))
    if n % 2 == 0:
        # Nyquist bin of a real signal must be real
        spec[-1] = amp[-1]
    x = np.fft.irfft(spec, n)
    return x * (rms / np.std(x))
