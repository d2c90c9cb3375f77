"""Autoregressive modelling by Burg's maximum-entropy recursion.

Sign convention: the process is ``s[n] = -sum_k a[k] s[n-k] + e[n]`` so the
spectral density is ``P_e dt / |1 + sum_k a[k] exp(-2i pi f k dt)|^2``.
A stable AR(1) with positive lag-one correlation therefore has ``a[1] < 0``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import ComplexTimeSeries, PowerSpectrum, fft_grid
from .errors import DegenerateInput, InvalidArgument, NumericallyDegenerate

DEFAULT_EVAL_BINS = 4096
# stop the recursion once a stage is this close to a perfect prediction
STABILITY_GUARD = 1e-12


@dataclass(frozen=True)
class ARModel:
    """AR coefficients ``a[1..p]``, innovation power and sampling interval.

    ``reflection`` holds the lattice reflection coefficients. ``stopped_at``
    is the stage at which the stability guard ended the recursion early
    (None when the requested order was reached).
    """

    coeffs: np.ndarray
    innovation_power: float
    dt: float
    reflection: np.ndarray = field(default=None, compare=False, repr=False)
    stopped_at: int | None = None

    def __post_init__(self):
        a = np.array(self.coeffs, dtype=np.complex128).ravel()
        a.setflags(write=False)
        object.__setattr__(self, "coeffs", a)
        if not self.innovation_power > 0:
            raise InvalidArgument(f"innovation power must be > 0, got {self.innovation_power}")
        if not self.dt > 0:
            raise InvalidArgument("dt must be positive")
        if self.reflection is not None:
            k = np.array(self.reflection, dtype=np.complex128).ravel()
            k.setflags(write=False)
            object.__setattr__(self, "reflection", k)

    @property
    def order(self) -> int:
        return self.coeffs.size

    @property
    def polynomial(self) -> np.ndarray:
        """Prediction-error filter ``[1, a[1], ..., a[p]]``."""
        return np.concatenate(([1.0 + 0j], self.coeffs))

    def roots(self) -> np.ndarray:
        """Poles of the model in the z-plane."""
        if self.order == 0:
            return np.zeros(0, dtype=complex)
        return np.roots(self.polynomial)


def optimal_order(n: int) -> int:
    """Half the sample count, the empirical best order for Doppler work."""
    if n < 4:
        raise InvalidArgument(f"need at least 4 samples to pick an order, got {n}")
    return n // 2


def _burg(x: np.ndarray, order: int, snapshots=()):
    """Run the lattice recursion up to ``order``.

    Returns ``(a, k, e, stopped_at, saved)`` where ``saved`` maps each stage in
    ``snapshots`` to its ``(a, e)`` pair.
    """
    n = x.size
    e = float(np.mean(np.abs(x) ** 2))
    a = np.zeros(order, dtype=np.complex128)
    k_all = np.zeros(order, dtype=np.complex128)
    saved = {}
    if 0 in snapshots:
        saved[0] = (a[:0].copy(), e)
    f = x[1:].copy()
    b = x[:-1].copy()
    stopped_at = None
    tiny = np.finfo(float).tiny * n
    m = 0
    for m in range(1, order + 1):
        den = np.vdot(f, f).real + np.vdot(b, b).real
        if not den > tiny:
            raise NumericallyDegenerate(f"Burg denominator underflow at stage {m}", stage=m)
        k = -2.0 * np.vdot(b, f) / den
        q = 1.0 - abs(k) ** 2
        if q < STABILITY_GUARD:
            stopped_at = m
            m -= 1
            break
        # Levinson step: a_m[j] = a_{m-1}[j] + k conj(a_{m-1}[m-j]), a_m[m] = k
        prev = a[: m - 1].copy()
        a[: m - 1] = prev + k * np.conj(prev[::-1])
        a[m - 1] = k
        k_all[m - 1] = k
        e *= q
        f, b = f + k * b, b + np.conj(k) * f
        f = f[1:]
        b = b[:-1]
        if m in snapshots:
            saved[m] = (a[:m].copy(), e)
    reached = m if stopped_at is not None else order
    return a[:reached].copy(), k_all[:reached].copy(), e, stopped_at, saved


def _check_input(series: ComplexTimeSeries, p: int) -> np.ndarray:
    if p < 0 or int(p) != p:
        raise InvalidArgument(f"order must be a nonnegative integer, got {p!r}")
    if p >= series.n:
        raise InvalidArgument(f"order {p} must be smaller than the sample count {series.n}")
    x = series.samples
    if not np.any(x != 0):
        raise DegenerateInput("series has zero power")
    return x


def burg_fit(series: ComplexTimeSeries, p: int) -> ARModel:
    """Fit an order-``p`` AR model by Burg's method.

    Costs O(N p) time and O(N) working memory. If a stage would make
    ``1 - |k|^2`` fall below ``STABILITY_GUARD`` the recursion stops and the
    previous-order model is returned with ``stopped_at`` set.
    """
    x = _check_input(series, p)
    a, k, e, stopped_at, _ = _burg(x, int(p))
    return ARModel(a, e, series.dt, reflection=k, stopped_at=stopped_at)


def burg_path(series: ComplexTimeSeries, orders) -> dict[int, ARModel]:
    """Models for several orders from one recursion.

    Lower-order Burg models are the intermediate stages of a higher-order
    fit, so this is equivalent to calling ``burg_fit`` once per order.
    """
    orders = sorted({int(o) for o in orders})
    if not orders:
        return {}
    x = _check_input(series, orders[-1])
    a, k, e, stopped_at, saved = _burg(x, orders[-1], snapshots=set(orders))
    out = {}
    for o in orders:
        if o in saved:
            ao, eo = saved[o]
            out[o] = ARModel(ao, eo, series.dt, reflection=k[:o], stopped_at=None)
        else:
            # recursion stopped before reaching this order
            out[o] = ARModel(a, e, series.dt, reflection=k, stopped_at=stopped_at)
    return out


def ar_psd(model: ARModel, freqs) -> PowerSpectrum:
    """Closed-form AR spectral density on an arbitrary ascending grid (Hz)."""
    f = np.asarray(freqs, dtype=float).ravel()
    nyq = 0.5 / model.dt
    if f.size and (f[0] < -nyq * (1 + 1e-12) or f[-1] > nyq * (1 + 1e-12)):
        raise InvalidArgument("frequency outside the Nyquist band")
    lags = np.arange(1, model.order + 1)
    denom = np.ones(f.size, dtype=np.complex128)
    # chunk to bound the (freq x lag) matrix
    step = max(1, 2**22 // max(1, model.order))
    for i in range(0, f.size, step):
        ph = np.exp(-2j * np.pi * model.dt * np.outer(f[i : i + step], lags))
        denom[i : i + step] += ph @ model.coeffs
    values = model.innovation_power * model.dt / np.abs(denom) ** 2
    return PowerSpectrum(f, values, "ar-mem", dt=model.dt)


def ar_psd_grid(model: ARModel, n_bins: int = DEFAULT_EVAL_BINS) -> PowerSpectrum:
    """AR density on the ``n_bins``-point full-band FFT grid.

    Same values as ``ar_psd(model, fft_grid(n_bins, dt))`` computed with one
    FFT of the zero-padded prediction-error filter.
    """
    if n_bins <= model.order:
        return ar_psd(model, fft_grid(n_bins, model.dt))
    denom = np.fft.fftshift(np.fft.fft(model.polynomial, n_bins))
    values = model.innovation_power * model.dt / np.abs(denom) ** 2
    return PowerSpectrum(fft_grid(n_bins, model.dt), values, "ar-mem", dt=model.dt)
