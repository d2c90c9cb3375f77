"""Time-series container, spectrum container and Fourier spectral estimation."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidArgument

# 4-term minimum-sidelobe Blackman-Harris coefficients
BH_COEFFS = (0.35875, 0.48829, 0.14128, 0.01168)

ESTIMATORS = ("periodogram", "ar-mem")


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class ComplexTimeSeries:
    """Uniformly sampled complex (I/Q) voltage samples.

    ``dt`` is the sampling interval in seconds and ``t0`` the time of the
    first sample.
    """

    samples: np.ndarray
    dt: float
    t0: float = 0.0

    def __post_init__(self):
        s = np.array(self.samples, dtype=np.complex128).ravel()
        if s.size == 0:
            raise InvalidArgument("time series must contain at least one sample")
        if not (np.isfinite(self.dt) and self.dt > 0):
            raise InvalidArgument(f"dt must be positive, got {self.dt!r}")
        object.__setattr__(self, "samples", _frozen(s))
        object.__setattr__(self, "dt", float(self.dt))
        object.__setattr__(self, "t0", float(self.t0))

    def __len__(self) -> int:
        return self.samples.size

    @property
    def n(self) -> int:
        return self.samples.size

    @property
    def duration(self) -> float:
        return self.n * self.dt

    @property
    def times(self) -> np.ndarray:
        return self.t0 + self.dt * np.arange(self.n)

    @property
    def nyquist(self) -> float:
        return 0.5 / self.dt

    def power(self) -> float:
        """Mean squared modulus of the samples."""
        return float(np.mean(np.abs(self.samples) ** 2))

    def segment(self, start: int, stop: int) -> ComplexTimeSeries:
        return ComplexTimeSeries(self.samples[start:stop], self.dt, self.t0 + start * self.dt)


@dataclass(frozen=True)
class PowerSpectrum:
    """Spectral density ``values`` (voltage^2/Hz) on the ascending grid ``freqs`` (Hz)."""

    freqs: np.ndarray
    values: np.ndarray
    estimator: str
    dt: float | None = field(default=None, compare=False)

    def __post_init__(self):
        f = np.array(self.freqs, dtype=float).ravel()
        v = np.array(self.values, dtype=float).ravel()
        if f.size != v.size:
            raise InvalidArgument(f"{f.size} frequencies but {v.size} values")
        if f.size == 0:
            raise InvalidArgument("empty spectrum")
        if f.size > 1 and np.any(np.diff(f) <= 0):
            raise InvalidArgument("frequencies must be strictly increasing")
        if np.any(~np.isfinite(v)) or np.any(v < 0):
            raise InvalidArgument("spectral values must be finite and nonnegative")
        if self.estimator not in ESTIMATORS:
            raise InvalidArgument(f"unknown estimator tag {self.estimator!r}")
        if self.dt is not None:
            nyq = 0.5 / self.dt
            if f[0] < -nyq * (1 + 1e-12) or f[-1] > nyq * (1 + 1e-12):
                raise InvalidArgument("frequencies outside the Nyquist band")
        object.__setattr__(self, "freqs", _frozen(f))
        object.__setattr__(self, "values", _frozen(v))

    def __len__(self) -> int:
        return self.freqs.size

    @property
    def df(self) -> float:
        """Grid step; only meaningful on equispaced grids."""
        return float(self.freqs[1] - self.freqs[0]) if self.freqs.size > 1 else float("nan")

    def total_power(self) -> float:
        return float(np.sum(self.values) * self.df)

    def nearest_bin(self, freq: float) -> int:
        return int(np.argmin(np.abs(self.freqs - freq)))

    def to_db(self, ref: float | None = None) -> np.ndarray:
        ref = np.max(self.values) if ref is None else ref
        with np.errstate(divide="ignore"):
            return 10 * np.log10(self.values / ref)


def fft_grid(n: int, dt: float) -> np.ndarray:
    """Two-sided frequency grid of an ``n``-point DFT, ascending from -1/(2 dt)."""
    if n < 1:
        raise InvalidArgument("grid size must be positive")
    return np.fft.fftshift(np.fft.fftfreq(n, dt))


def blackman_harris_window(n: int) -> np.ndarray:
    """Symmetric 4-term Blackman-Harris taper of length ``n``.

    A length-1 window is defined as ``[1.0]``.
    """
    if n < 1:
        raise InvalidArgument(f"window length must be >= 1, got {n}")
    if n == 1:
        return np.ones(1)
    a0, a1, a2, a3 = BH_COEFFS
    x = 2 * np.pi * np.arange(n) / (n - 1)
    w = a0 - a1 * np.cos(x) + a2 * np.cos(2 * x) - a3 * np.cos(3 * x)
    # enforce exact symmetry against rounding in cos
    return 0.5 * (w + w[::-1])


def rectangular_window(n: int) -> np.ndarray:
    return np.ones(n)


def periodogram(
    series: ComplexTimeSeries,
    window: np.ndarray | str | None = None,
    pad_to: int | None = None,
) -> PowerSpectrum:
    """Two-sided windowed periodogram.

    Parameters
    ----------
    series : ComplexTimeSeries
    window : array, ``"blackman-harris"``, ``"rectangular"`` or None
        Taper applied before the FFT. None selects Blackman-Harris.
    pad_to : int, optional
        Zero-pad to this many points. This only interpolates the grid.

    Returns
    -------
    PowerSpectrum
        Density on ``fft_grid(M, dt)`` where ``M`` is ``N`` or ``pad_to``,
        scaled so that ``sum(values) * df`` equals the window-compensated
        mean power ``mean(|w s|^2) / mean(w^2)``.
    """
    n = series.n
    if window is None or (isinstance(window, str) and window == "blackman-harris"):
        w = blackman_harris_window(n)
    elif isinstance(window, str) and window == "rectangular":
        w = rectangular_window(n)
    elif isinstance(window, str):
        raise InvalidArgument(f"unknown window {window!r}")
    else:
        w = np.asarray(window, dtype=float).ravel()
        if w.size != n:
            raise InvalidArgument(f"window length {w.size} != series length {n}")
    m = n if pad_to is None else int(pad_to)
    if m < n:
        raise InvalidArgument(f"pad_to={m} is shorter than the series ({n})")
    spec = np.fft.fft(series.samples * w, m)
    # |X|^2 dt / (N mean(w^2)) is the density whose Riemann sum over the
    # N-point grid returns the compensated mean power; padding keeps the
    # density and refines the grid
    values = np.abs(np.fft.fftshift(spec)) ** 2 * series.dt / (n * np.mean(w**2))
    return PowerSpectrum(fft_grid(m, series.dt), values, "periodogram", dt=series.dt)
