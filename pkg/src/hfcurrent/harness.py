"""Monte-Carlo studies, grid mapping, current tracking and fluctuation spectra."""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .burg import DEFAULT_EVAL_BINS, ar_psd_grid, burg_path
from .core import ComplexTimeSeries, PowerSpectrum, fft_grid, periodogram
from .errors import InsufficientData, InvalidArgument
from .estimate import (
    BraggEstimate,
    QcPolicy,
    _method,
    estimate_current,
    estimate_from_psd,
)
from .sim import (
    NoiseSource,
    RadarConfig,
    ReferenceSpectrumSpec,
    add_noise,
    build_reference_spectrum,
    power_law_series,
    synthesize_signal,
)

DEFAULT_TRIALS = 1000
# synthesis grid floor: short series are cut from a longer realization so the
# Bragg lines are not snapped onto a coarse N-point grid
MIN_SYNTH_LEN = 4096


def trial_seed(seed: int, index: int) -> np.random.SeedSequence:
    return np.random.SeedSequence([int(seed), int(index)])


def _child_seeds(ss: np.random.SeedSequence, k: int) -> list[int]:
    return [int(x) for x in ss.generate_state(k)]


@dataclass(frozen=True)
class SimParams:
    config: RadarConfig = field(default_factory=RadarConfig)
    spectrum: ReferenceSpectrumSpec = field(default_factory=ReferenceSpectrumSpec)
    u_r: float = 0.3
    n: int = 1024
    alpha: float = 1.0
    noise: NoiseSource = field(default_factory=NoiseSource)
    synth_len: int | None = None

    def __post_init__(self):
        if self.n < 4:
            raise InvalidArgument("need at least 4 samples")
        if self.alpha < 0:
            raise InvalidArgument("alpha must be >= 0")


_SIGMA_CACHE: dict = {}


def reference_on_grid(spec: ReferenceSpectrumSpec, config: RadarConfig, m: int) -> PowerSpectrum:
    key = (spec, config, m)
    if key not in _SIGMA_CACHE:
        if len(_SIGMA_CACHE) > 16:
            _SIGMA_CACHE.clear()
        _SIGMA_CACHE[key] = build_reference_spectrum(spec, config, fft_grid(m, config.dt))
    return _SIGMA_CACHE[key]


def simulate_series(params: SimParams, seed, u_r=None) -> ComplexTimeSeries:
    """Noisy synthetic voltage series of ``params.n`` samples.

    The clean signal is synthesized on a grid of ``max(n, 4096)`` points (or
    ``params.synth_len``), truncated to ``n`` samples and re-normalized to unit
    power before noise is added.
    """
    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    s_sig, s_noise = _child_seeds(ss, 2)
    n = params.n
    m = params.synth_len or max(n, MIN_SYNTH_LEN)
    u = params.u_r if u_r is None else u_r
    sigma0 = reference_on_grid(params.spectrum, params.config, m)
    if np.ndim(u) and np.size(u) == n and m != n:
        u = np.concatenate([np.asarray(u, float), np.full(m - n, float(np.asarray(u)[-1]))])
    s0 = synthesize_signal(sigma0, params.config, u, m, s_sig)
    if m != n:
        x = s0.samples[:n]
        s0 = ComplexTimeSeries(x / np.sqrt(np.mean(np.abs(x) ** 2)), s0.dt)
    return add_noise(s0, params.noise.with_seed(s_noise), params.alpha)


@dataclass(frozen=True)
class SweepReport:
    axis_name: str
    axis: np.ndarray
    success_rate: np.ndarray
    nrmse: np.ndarray
    trials: int
    method: str

    def __post_init__(self):
        for name in ("axis", "success_rate", "nrmse"):
            a = np.array(getattr(self, name), dtype=float).ravel()
            a.setflags(write=False)
            object.__setattr__(self, name, a)
        if not (self.axis.size == self.success_rate.size == self.nrmse.size):
            raise InvalidArgument("one success rate and one nRMSE per axis value")
        if np.any((self.success_rate < 0) | (self.success_rate > 100)):
            raise InvalidArgument("success rates are percentages")

    def rate_at(self, value: float) -> float:
        return float(self.success_rate[np.flatnonzero(np.isclose(self.axis, value))[0]])

    def nrmse_at(self, value: float) -> float:
        return float(self.nrmse[np.flatnonzero(np.isclose(self.axis, value))[0]])


def _summarize(u_true: float, estimates: np.ndarray) -> tuple[float, float]:
    """Success rate (%) and nRMSE (% of |U_r|) from per-trial estimates (NaN = QC fail)."""
    ok = np.isfinite(estimates)
    rate = 100.0 * np.count_nonzero(ok) / estimates.size
    if not np.any(ok):
        return rate, math.nan
    rmse = math.sqrt(np.mean((estimates[ok] - u_true) ** 2))
    scale = abs(u_true) if u_true != 0 else 1.0
    return rate, 100.0 * rmse / scale


def _u(est: BraggEstimate) -> float:
    return est.u_r if est.u_r is not None else math.nan


def _map(fn, items, workers: int | None):
    if workers is None or workers <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(fn, items, chunksize=max(1, len(items) // (4 * workers))))


class _OrderTrial:
    def __init__(self, params, orders, policy, eval_bins, seed):
        self.params, self.orders, self.policy = params, orders, policy
        self.eval_bins, self.seed = eval_bins, seed

    def __call__(self, i):
        s = simulate_series(self.params, trial_seed(self.seed, i))
        models = burg_path(s, self.orders)
        out = []
        for p in self.orders:
            psd = ar_psd_grid(models[p], self.eval_bins)
            out.append(_u(estimate_from_psd(psd, self.params.config, self.policy, "ar-mem")))
        return out


def order_sweep(
    params: SimParams,
    orders,
    trials: int = DEFAULT_TRIALS,
    seed: int = 0,
    policy: QcPolicy | None = None,
    eval_bins: int = DEFAULT_EVAL_BINS,
    workers: int | None = None,
) -> SweepReport:
    """QC success rate and nRMSE of AR-MEM as a function of the model order.

    Every order sees the same ``trials`` realizations; the per-order fits come
    from a single Burg recursion per realization.
    """
    orders = [int(p) for p in orders]
    if not orders or any(p < 1 or p >= params.n for p in orders):
        raise InvalidArgument(f"orders must lie in [1, {params.n - 1}]")
    if trials < 1:
        raise InvalidArgument("need at least one trial")
    policy = policy or QcPolicy()
    rows = np.array(_map(_OrderTrial(params, orders, policy, eval_bins, seed), range(trials), workers))
    rates, errs = zip(*(_summarize(params.u_r, rows[:, j]) for j in range(len(orders))))
    return SweepReport("order", orders, rates, errs, trials, "ar-mem")


class _NoiseTrial:
    def __init__(self, params, alphas, methods, policy, eval_bins, seed):
        self.params, self.alphas, self.methods = params, alphas, methods
        self.policy, self.eval_bins, self.seed = policy, eval_bins, seed

    def __call__(self, i):
        out = []
        for a in self.alphas:
            s = simulate_series(replace(self.params, alpha=a), trial_seed(self.seed, i))
            out.append(
                [
                    _u(estimate_current(s, self.params.config, self.policy, m, self.eval_bins))
                    for m in self.methods
                ]
            )
        return out


def noise_sweep(
    params: SimParams,
    alphas,
    methods=("periodogram", "ar-mem"),
    trials: int = DEFAULT_TRIALS,
    seed: int = 0,
    policy: QcPolicy | None = None,
    eval_bins: int = DEFAULT_EVAL_BINS,
    workers: int | None = None,
) -> dict[str, SweepReport]:
    """QC success rate versus noise level for each method.

    Trial ``i`` uses the same clean signal and noise draw at every ``alpha``,
    only the noise scale changes.
    """
    alphas = [float(a) for a in alphas]
    if any(a < 0 for a in alphas):
        raise InvalidArgument("alphas must be >= 0")
    methods = [_method(m) for m in methods]
    policy = policy or QcPolicy()
    # trials x alphas x methods
    cube = np.array(
        _map(_NoiseTrial(params, alphas, methods, policy, eval_bins, seed), range(trials), workers)
    )
    reports = {}
    for k, m in enumerate(methods):
        rates, errs = zip(*(_summarize(params.u_r, cube[:, j, k]) for j in range(len(alphas))))
        reports[m] = SweepReport("alpha", alphas, rates, errs, trials, m)
    return reports


def crossing_alpha(report: SweepReport, level: float = 50.0) -> tuple[float, bool]:
    """First noise level where the success rate drops below ``level``.

    Linear interpolation between the bracketing axis values. Returns
    ``(alpha, crossed)``; when the curve never drops below ``level`` the
    largest tested alpha is returned as a lower bound with ``crossed=False``.
    """
    a, r = report.axis, report.success_rate
    below = np.flatnonzero(r < level)
    if below.size == 0:
        return float(a[-1]), False
    j = below[0]
    if j == 0:
        return float(a[0]), True
    frac = (r[j - 1] - level) / (r[j - 1] - r[j])
    return float(a[j - 1] + frac * (a[j] - a[j - 1])), True


@dataclass(frozen=True)
class CurrentMap:
    cells: tuple  # ((range_idx, azimuth_idx, BraggEstimate), ...)

    @property
    def coverage(self) -> float:
        if not self.cells:
            return 0.0
        return 100.0 * sum(1 for *_, e in self.cells if e.qc.passed) / len(self.cells)

    def currents(self) -> dict:
        return {(r, a): e.u_r for r, a, e in self.cells}


class _CellJob:
    def __init__(self, config, policy, method, eval_bins):
        self.config, self.policy, self.method, self.eval_bins = config, policy, method, eval_bins

    def __call__(self, item):
        (r, a), series = item
        return r, a, estimate_current(series, self.config, self.policy, self.method, self.eval_bins)


def estimate_grid(
    cells,
    config: RadarConfig,
    policy: QcPolicy | None = None,
    method: str = "ar-mem",
    eval_bins: int = DEFAULT_EVAL_BINS,
    workers: int | None = None,
) -> CurrentMap:
    """Independent per-cell estimates over a ``{(range, azimuth): series}`` mapping."""
    items = sorted(dict(cells).items())
    dts = {s.dt for _, s in items}
    if len(dts) > 1:
        raise InvalidArgument(f"cells have heterogeneous sampling intervals {sorted(dts)}")
    job = _CellJob(config, policy or QcPolicy(), _method(method), eval_bins)
    return CurrentMap(tuple(_map(job, items, workers)))


def synthetic_grid(
    params: SimParams,
    n_cells: int,
    seed: int = 0,
    noise_only_fraction: float = 0.0,
) -> dict:
    """``n_cells`` synthetic cells on a single range row.

    The last ``round(noise_only_fraction * n_cells)`` cells hold unit-power
    noise only.
    """
    n_noise = int(round(noise_only_fraction * n_cells))
    out = {}
    for i in range(n_cells):
        ss = trial_seed(seed, i)
        if i >= n_cells - n_noise:
            noise = params.noise.with_seed(_child_seeds(ss, 1)[0])
            out[(0, i)] = ComplexTimeSeries(noise.draw(params.n), params.config.dt)
        else:
            out[(0, i)] = simulate_series(params, ss)
    return out


@dataclass(frozen=True)
class CurrentTrack:
    times: np.ndarray
    u_r: np.ndarray  # NaN where QC failed
    qc: tuple  # QcVerdict per entry
    window_len: int
    hop: int
    method: str

    def __post_init__(self):
        t = np.array(self.times, dtype=float).ravel()
        u = np.array(self.u_r, dtype=float).ravel()
        if t.size != u.size or t.size != len(self.qc):
            raise InvalidArgument("times, u_r and qc must have equal length")
        if t.size > 1 and np.any(np.diff(t) <= 0):
            raise InvalidArgument("track times must be strictly increasing")
        if self.hop < 1:
            raise InvalidArgument("hop must be >= 1")
        t.setflags(write=False)
        u.setflags(write=False)
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "u_r", u)
        object.__setattr__(self, "qc", tuple(self.qc))

    def __len__(self) -> int:
        return self.times.size

    @property
    def missing(self) -> np.ndarray:
        return ~np.isfinite(self.u_r)


class _WindowJob:
    def __init__(self, series, window_len, config, policy, method, eval_bins):
        self.series, self.window_len = series, window_len
        self.config, self.policy, self.method, self.eval_bins = config, policy, method, eval_bins

    def __call__(self, start):
        seg = self.series.segment(start, start + self.window_len)
        return estimate_current(seg, self.config, self.policy, self.method, self.eval_bins)


def track_current(
    series: ComplexTimeSeries,
    window_len: int,
    hop: int | None = None,
    config: RadarConfig | None = None,
    policy: QcPolicy | None = None,
    method: str = "ar-mem",
    eval_bins: int = DEFAULT_EVAL_BINS,
    workers: int | None = None,
) -> CurrentTrack:
    """Sliding-window current estimates; ``hop`` defaults to non-overlapping windows."""
    hop = window_len if hop is None else hop
    if hop < 1:
        raise InvalidArgument("hop must be >= 1")
    if window_len < 4 or window_len > series.n:
        raise InvalidArgument(f"window of {window_len} samples does not fit a {series.n}-sample series")
    config = config or RadarConfig(dt=series.dt)
    starts = list(range(0, series.n - window_len + 1, hop))
    job = _WindowJob(series, window_len, config, policy or QcPolicy(), _method(method), eval_bins)
    ests = _map(job, starts, workers)
    times = series.t0 + (np.array(starts) + 0.5 * window_len) * series.dt
    return CurrentTrack(
        times, [_u(e) for e in ests], tuple(e.qc for e in ests), window_len, hop, job.method
    )


MIN_TRACK_POINTS = 32
MAX_MISSING_FRACTION = 0.2


def fill_gaps(track: CurrentTrack) -> np.ndarray:
    """Linear interpolation over QC failures; edges hold the nearest value."""
    ok = ~track.missing
    if np.count_nonzero(ok) < MIN_TRACK_POINTS:
        raise InsufficientData(
            f"{np.count_nonzero(ok)} valid track entries, need at least {MIN_TRACK_POINTS}"
        )
    if np.mean(~ok) > MAX_MISSING_FRACTION:
        raise InsufficientData(f"{100 * np.mean(~ok):.1f}% of the track is missing (limit 20%)")
    return np.interp(track.times, track.times[ok], track.u_r[ok])


@dataclass(frozen=True)
class SlopeFit:
    spectrum: PowerSpectrum
    slope: float
    stderr: float
    intercept: float


def fluctuation_spectrum(track: CurrentTrack, fit_band) -> SlopeFit:
    """One-sided PSD of the current track and its log-log slope.

    ``fit_band`` is ``(f_lo, f_hi)`` in cycles per hour. The track is
    gap-filled, mean-removed and Blackman-Harris windowed.
    """
    f_lo, f_hi = (float(x) / 3600.0 for x in fit_band)
    if not 0 < f_lo < f_hi:
        raise InvalidArgument("fit band must satisfy 0 < f_lo < f_hi")
    u = fill_gaps(track)
    dt = float(np.median(np.diff(track.times)))
    psd = periodogram(ComplexTimeSeries(u - u.mean(), dt))
    pos = psd.freqs > 0
    # fold the symmetric two-sided density of a real series
    one_sided = PowerSpectrum(psd.freqs[pos], 2 * psd.values[pos], "periodogram")
    return fit_power_law(one_sided, (f_lo, f_hi))


def fit_power_law(psd: PowerSpectrum, band) -> SlopeFit:
    """Least-squares line through ``log10 P`` vs ``log10 f`` inside ``band`` (Hz)."""
    f_lo, f_hi = band
    sel = (psd.freqs >= f_lo) & (psd.freqs <= f_hi) & (psd.values > 0)
    if np.count_nonzero(sel) < 3:
        raise InsufficientData("fewer than 3 spectral points inside the fit band")
    x = np.log10(psd.freqs[sel])
    y = np.log10(psd.values[sel])
    (slope, intercept), cov = np.polyfit(x, y, 1, cov="unscaled")
    resid = y - (slope * x + intercept)
    dof = max(1, x.size - 2)
    stderr = math.sqrt(cov[0, 0] * np.sum(resid**2) / dof)
    return SlopeFit(psd, float(slope), stderr, float(intercept))


KOLMOGOROV_EXPONENT = -5.0 / 3.0


def turbulent_series(
    params: SimParams,
    duration: float,
    rms: float,
    seed: int = 0,
    exponent: float = KOLMOGOROV_EXPONENT,
) -> tuple[ComplexTimeSeries, np.ndarray]:
    """Long voltage series whose current wanders around ``params.u_r``.

    The per-sample current is ``u_r`` plus a power-law fluctuation with
    spectrum ``|f|**exponent`` and standard deviation ``rms``. Returns the
    series and the injected current.
    """
    n = int(round(duration / params.config.dt))
    if n < 4:
        raise InvalidArgument("duration shorter than four samples")
    ss = np.random.SeedSequence([int(seed), 0x7A11])
    s_cur, s_sig = ss.spawn(2)
    u = np.full(n, float(params.u_r))
    if rms > 0:
        u += power_law_series(n, params.config.dt, exponent, rms, s_cur)
    series = simulate_series(replace(params, n=n, synth_len=n), s_sig, u_r=u)
    return series, u
