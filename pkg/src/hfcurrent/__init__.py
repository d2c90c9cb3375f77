"""Radial surface current estimation from HF radar voltage time series.

Two spectral estimators are provided, a Blackman-Harris periodogram and an
autoregressive maximum-entropy (Burg) fit, together with a Doppler signal
simulator and the Monte-Carlo harness used to compare them.
"""

from .burg import ARModel, ar_psd, ar_psd_grid, burg_fit, burg_path, optimal_order
from .config import DEFAULT_CONFIG, RunConfig, load_config, parse_config
from .core import ComplexTimeSeries, PowerSpectrum, blackman_harris_window, fft_grid, periodogram
from .errors import (
    ConfigError,
    DegenerateInput,
    FormatError,
    HFCurrentError,
    InsufficientData,
    InsufficientFloorSupport,
    InvalidArgument,
    NumericallyDegenerate,
)
from .estimate import (
    BraggEstimate,
    QcPolicy,
    QcVerdict,
    estimate_current,
    estimate_snr,
    find_bragg_peaks,
    quality_check,
    radial_current,
)
from .harness import (
    CurrentMap,
    CurrentTrack,
    SimParams,
    SlopeFit,
    SweepReport,
    crossing_alpha,
    estimate_grid,
    fill_gaps,
    fit_power_law,
    fluctuation_spectrum,
    noise_sweep,
    order_sweep,
    simulate_series,
    synthetic_grid,
    track_current,
    turbulent_series,
)
from .iq import read_iq, write_iq
from .reports import read_report, write_report
from .sim import (
    NoiseSource,
    RadarConfig,
    ReferenceSpectrumSpec,
    add_noise,
    bragg_frequency,
    build_reference_spectrum,
    current_shift,
    power_law_series,
    synthesize_signal,
)

__version__ = "0.1.0"
