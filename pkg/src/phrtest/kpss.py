"""KPSS test for level stationarity with a Bartlett-kernel long-run variance."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateVarianceError, InputError
from .phr import TestResult
from .timeseries import TimeSeries

__all__ = [
    "CRITICAL_VALUES",
    "KpssConfig",
    "resolve_bandwidth",
    "long_run_variance",
    "kpss_statistic",
    "kpss_test",
]

# Level-stationarity upper-tail critical values, keyed by significance level.
CRITICAL_VALUES: dict[float, float] = {0.10: 0.347, 0.05: 0.463, 0.025: 0.574, 0.01: 0.739}

BANDWIDTH_RULES = ("auto", "short")


@dataclass(frozen=True)
class KpssConfig:
    """``bandwidth`` is a lag count or a rule name.

    ``"auto"`` is ``floor(4 (T/100)^(1/4))``; ``"short"`` is
    ``floor(3 sqrt(T) / 13)``, the default of R's ``tseries::kpss.test``.
    """

    bandwidth: int | str = "auto"
    alpha: float = 0.05

    def __post_init__(self) -> None:
        if self.alpha not in CRITICAL_VALUES:
            raise InputError(f"alpha must be one of {sorted(CRITICAL_VALUES)}, got {self.alpha}")
        if isinstance(self.bandwidth, str):
            if self.bandwidth not in BANDWIDTH_RULES:
                raise InputError(f"bandwidth rule must be one of {BANDWIDTH_RULES}, got {self.bandwidth!r}")
        elif self.bandwidth < 0:
            raise InputError("bandwidth must be non-negative")


def resolve_bandwidth(bandwidth: int | str, n: int) -> int:
    if bandwidth == "auto":
        return int(math.floor(4.0 * (n / 100.0) ** 0.25))
    if bandwidth == "short":
        return int(math.floor(3.0 * math.sqrt(n) / 13.0))
    if isinstance(bandwidth, str):
        raise InputError(f"unknown bandwidth rule {bandwidth!r}")
    return int(bandwidth)


def _values(series: TimeSeries | np.ndarray) -> np.ndarray:
    return series.values if isinstance(series, TimeSeries) else np.asarray(series, dtype=float)


def long_run_variance(series: TimeSeries | np.ndarray, bandwidth: int | str = "auto") -> float:
    """Bartlett-weighted sum of autocovariances of the demeaned series (1/T scaling)."""
    x = _values(series)
    n = x.size
    if n < 2:
        raise InputError("long-run variance needs at least two observations")
    lags = resolve_bandwidth(bandwidth, n)
    if lags >= n:
        raise InputError(f"bandwidth {lags} must be smaller than the series length {n}")
    e = x - x.mean()
    gamma0 = float(np.dot(e, e)) / n
    if gamma0 <= (64.0 * np.finfo(float).eps * float(np.max(np.abs(x)))) ** 2:
        raise DegenerateVarianceError("series is constant; long-run variance is zero")
    s2 = gamma0
    for j in range(1, lags + 1):
        s2 += 2.0 * (1.0 - j / (lags + 1.0)) * float(np.dot(e[j:], e[:-j])) / n
    if not s2 > 0:
        raise DegenerateVarianceError(f"long-run variance estimate is non-positive ({s2:.3e})")
    return s2


def kpss_statistic(series: TimeSeries | np.ndarray, config: KpssConfig | None = None) -> float:
    config = config or KpssConfig()
    x = _values(series)
    n = x.size
    if n < 10:
        raise InputError(f"KPSS needs at least 10 observations, got {n}")
    s2 = long_run_variance(x, config.bandwidth)
    partial = np.cumsum(x - x.mean())
    return float(np.dot(partial, partial) / (s2 * n * n))


def _p_bracket(stat: float) -> tuple[float, float]:
    levels = sorted(CRITICAL_VALUES.items(), key=lambda kv: kv[1])  # ascending critical value
    upper = 1.0
    for alpha, crit in levels:
        if stat <= crit:
            return (alpha, upper)
        upper = alpha
    return (0.0, upper)


def kpss_test(series: TimeSeries, config: KpssConfig | None = None) -> TestResult:
    config = config or KpssConfig()
    stat = kpss_statistic(series, config)
    lags = resolve_bandwidth(config.bandwidth, len(series.values if isinstance(series, TimeSeries) else series))
    preprocessing = list(series.preprocessing_log) if isinstance(series, TimeSeries) else []
    return TestResult(
        test_name="KPSS",
        statistic=stat,
        p_value=None,
        alpha=config.alpha,
        reject=stat > CRITICAL_VALUES[config.alpha],
        config={"bandwidth": lags, "preprocessing": preprocessing},
        p_bracket=_p_bracket(stat),
    )
