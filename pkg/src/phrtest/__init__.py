"""Frequency-domain test for strict stationarity based on the frame-averaged
second-order cumulant spectrum, with a KPSS comparator, the data-generating
processes used to study both, and a Monte Carlo harness."""

from .datagen import DgpSpec, InnovationSpec, VarianceProfile, gen_series
from .errors import DegenerateError, InputError, PhrError, SimulationError
from .kpss import KpssConfig, kpss_statistic, kpss_test, long_run_variance
from .montecarlo import KpssSpec, PhrSpec, Preprocessing, Scenario, run_scenario, table_sweep
from .phr import TestResult, ks_standard_normal, phr_test, stack_components, y_statistics
from .spectral import CumulantGrid, estimate_cumulant_grid, principal_domain
from .timeseries import (
    TimeSeries,
    demean,
    describe,
    detrend,
    load_csv,
    log_returns,
    prewhiten,
    rolling_variance_standardize,
    trim,
)

__version__ = "0.1.0"

__all__ = [
    "CumulantGrid",
    "DegenerateError",
    "DgpSpec",
    "InnovationSpec",
    "InputError",
    "KpssConfig",
    "KpssSpec",
    "PhrError",
    "PhrSpec",
    "Preprocessing",
    "Scenario",
    "SimulationError",
    "TestResult",
    "TimeSeries",
    "VarianceProfile",
    "demean",
    "describe",
    "detrend",
    "estimate_cumulant_grid",
    "gen_series",
    "kpss_statistic",
    "kpss_test",
    "ks_standard_normal",
    "load_csv",
    "log_returns",
    "long_run_variance",
    "phr_test",
    "prewhiten",
    "principal_domain",
    "rolling_variance_standardize",
    "run_scenario",
    "stack_components",
    "table_sweep",
    "trim",
    "y_statistics",
]
