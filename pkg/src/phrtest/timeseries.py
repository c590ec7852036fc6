"""Time-series container, preprocessing transforms and descriptive statistics.

Every transform returns a new :class:`TimeSeries` whose ``preprocessing_log``
gains one entry, so a test result can echo exactly what was done to the data.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy.linalg import solve_toeplitz

from .errors import DegenerateWindowError, InputError

__all__ = [
    "TimeSeries",
    "DescriptiveStats",
    "ARModel",
    "load_csv",
    "log_returns",
    "trim",
    "demean",
    "detrend",
    "prewhiten",
    "rolling_variance_standardize",
    "describe",
]

MAX_TRIM_FRACTION = 0.1
ROLLING_STD_FLOOR = 1e-12


@dataclass(frozen=True)
class TimeSeries:
    """Ordered, finite, real-valued observations.

    Parameters
    ----------
    values : array_like
        Observations in time order. Copied and made read-only.
    sampling_interval : float
        Spacing between observations; the Nyquist frequency is
        ``1 / (2 * sampling_interval)``.
    preprocessing_log : tuple of str
        Transforms already applied, oldest first.
    """

    values: np.ndarray
    sampling_interval: float = 1.0
    preprocessing_log: tuple[str, ...] = field(default=())

    def __post_init__(self) -> None:
        arr = np.array(self.values, dtype=np.float64).ravel()
        if arr.size < 1:
            raise InputError("a time series needs at least one observation")
        if not np.all(np.isfinite(arr)):
            bad = int(np.flatnonzero(~np.isfinite(arr))[0])
            raise InputError(f"non-finite value at index {bad}")
        if not (self.sampling_interval > 0 and math.isfinite(self.sampling_interval)):
            raise InputError("sampling_interval must be a positive finite number")
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)
        object.__setattr__(self, "preprocessing_log", tuple(self.preprocessing_log))

    def __len__(self) -> int:
        return self.values.size

    @property
    def nyquist(self) -> float:
        return 1.0 / (2.0 * self.sampling_interval)

    def derive(self, values: np.ndarray, tag: str) -> TimeSeries:
        """New series with ``values`` and ``tag`` appended to the log."""
        return TimeSeries(values, self.sampling_interval, self.preprocessing_log + (tag,))


@dataclass(frozen=True)
class DescriptiveStats:
    n: int
    mean: float
    std_dev: float
    min: float
    max: float
    skewness: float
    excess_kurtosis: float

    def as_dict(self) -> dict[str, float | int]:
        return {
            "n": self.n,
            "mean": self.mean,
            "std_dev": self.std_dev,
            "min": self.min,
            "max": self.max,
            "skewness": self.skewness,
            "excess_kurtosis": self.excess_kurtosis,
        }


@dataclass(frozen=True)
class ARModel:
    """Autoregressive fit ``x(t) - mu = sum_j phi_j (x(t-j) - mu) + e(t)``."""

    order: int
    coefficients: tuple[float, ...]
    residual_variance: float
    mean: float = 0.0
    aic: float = float("nan")

    def __post_init__(self) -> None:
        if len(self.coefficients) != self.order:
            raise InputError("coefficient count must equal the model order")

    def spectral_radius(self) -> float:
        if self.order == 0:
            return 0.0
        companion = np.zeros((self.order, self.order))
        companion[0, :] = self.coefficients
        companion[1:, :-1] = np.eye(self.order - 1)
        return float(np.max(np.abs(np.linalg.eigvals(companion))))


def load_csv(
    path: str | Path,
    column: int | str = 0,
    skip_header: bool = False,
    sampling_interval: float = 1.0,
) -> TimeSeries:
    """Read one numeric column of a CSV file.

    ``column`` is a zero-based index or a header name. Selecting by name implies
    the first row is a header. Rows whose cells are all empty are skipped; any
    other row that lacks the column or fails to parse raises ``InputError``
    naming its 1-based line number.
    """
    path = Path(path)
    if not path.is_file():
        raise InputError(f"input file not found: {path}")
    with path.open(newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))

    has_header = skip_header or isinstance(column, str)
    start = 0
    if has_header:
        if not rows:
            raise InputError(f"{path}: file is empty")
        header = [cell.strip() for cell in rows[0]]
        start = 1
        if isinstance(column, str):
            if column not in header:
                raise InputError(f"{path}: no column named {column!r} in header {header}")
            column = header.index(column)
    if column < 0:
        raise InputError("column index must be non-negative")

    values: list[float] = []
    for lineno, row in enumerate(rows[start:], start=start + 1):
        if all(not cell.strip() for cell in row):
            continue
        if column >= len(row):
            raise InputError(f"{path}: row {lineno} has no column {column}")
        cell = row[column].strip()
        try:
            value = float(cell)
        except ValueError:
            raise InputError(f"{path}: row {lineno}: cannot parse {cell!r} as a number") from None
        if not math.isfinite(value):
            raise InputError(f"{path}: row {lineno}: non-finite value {cell!r}")
        values.append(value)
    if not values:
        raise InputError(f"{path}: column {column} is empty")
    return TimeSeries(np.asarray(values), sampling_interval, (f"load_csv(column={column})",))


def log_returns(prices: TimeSeries) -> TimeSeries:
    """First difference of the natural log of a price series."""
    p = prices.values
    if p.size < 2:
        raise InputError("log returns need at least two prices")
    if np.any(p <= 0):
        raise InputError(f"non-positive price at index {int(np.flatnonzero(p <= 0)[0])}")
    return prices.derive(np.diff(np.log(p)), "log_returns")


def trim(series: TimeSeries, fraction: float) -> TimeSeries:
    """Delete the ``floor(fraction * T)`` smallest and largest observations.

    This is deletion, not winsorization: the series gets shorter. Survivors keep
    their original order. Among tied extremes the earliest index goes first.
    """
    if not 0.0 <= fraction <= MAX_TRIM_FRACTION:
        raise InputError(f"trim fraction must lie in [0, {MAX_TRIM_FRACTION}], got {fraction}")
    x = series.values
    k = int(math.floor(fraction * x.size))
    if x.size - 2 * k < 2:
        raise InputError("trimming would leave fewer than two observations")
    keep = _trim_mask(x, k)
    return series.derive(x[keep], f"trim(fraction={fraction:g})")


def _trim_mask(x: np.ndarray, k: int) -> np.ndarray:
    keep = np.ones(x.size, dtype=bool)
    if k == 0:
        return keep
    idx = np.arange(x.size)
    lowest = np.lexsort((idx, x))[:k]
    keep[lowest] = False
    remaining = idx[keep]
    highest = remaining[np.lexsort((remaining, -x[remaining]))[:k]]
    keep[highest] = False
    return keep


def demean(series: TimeSeries) -> TimeSeries:
    x = series.values
    y = x - math.fsum(x) / x.size
    y -= math.fsum(y) / y.size
    return series.derive(y, "demean")


def detrend(series: TimeSeries) -> TimeSeries:
    """Remove the least-squares line ``a + b t`` over ``t = 0..T-1``."""
    x = series.values
    n = x.size
    if n < 2:
        raise InputError("detrending needs at least two observations")
    t = np.arange(n, dtype=np.float64)
    tc = t - t.mean()
    xc = x - x.mean()
    slope = np.dot(tc, xc) / np.dot(tc, tc)
    resid = xc - slope * tc
    # one refinement pass keeps the residuals orthogonal to [1, t] for large offsets
    resid = resid - resid.mean()
    resid = resid - (np.dot(tc, resid) / np.dot(tc, tc)) * tc
    return series.derive(resid, "detrend")


def _autocovariances(x: np.ndarray, max_lag: int) -> np.ndarray:
    n = x.size
    xc = x - x.mean()
    return np.array([np.dot(xc[: n - j], xc[j:]) / n for j in range(max_lag + 1)])


def fit_ar(series: TimeSeries, max_order: int = 10) -> ARModel:
    """Yule-Walker AR fits for orders ``0..max_order``; return the AIC minimizer."""
    x = series.values
    n = x.size
    if max_order < 0:
        raise InputError("max_order must be non-negative")
    if n < 10 * max(1, max_order):
        raise InputError(f"series of length {n} too short for max_order={max_order}")
    acov = _autocovariances(x, max_order)
    if acov[0] <= 0:
        raise InputError("autocovariance system is singular (constant series)")

    best = ARModel(0, (), float(acov[0]), float(x.mean()), n * math.log(acov[0]))
    for p in range(1, max_order + 1):
        try:
            phi = solve_toeplitz(acov[:p], acov[1 : p + 1])
        except np.linalg.LinAlgError as exc:
            raise InputError(f"autocovariance system of order {p} is not invertible") from exc
        sigma2 = float(acov[0] - np.dot(phi, acov[1 : p + 1]))
        if sigma2 <= 0:
            raise InputError(f"non-positive innovation variance at order {p}")
        aic = n * math.log(sigma2) + 2 * p
        if aic < best.aic:
            best = ARModel(p, tuple(float(c) for c in phi), sigma2, float(x.mean()), aic)
    if best.spectral_radius() >= 1.0:
        raise InputError(f"fitted AR({best.order}) model is not causal")
    return best


def prewhiten(series: TimeSeries, max_order: int = 10) -> tuple[TimeSeries, ARModel]:
    """Filter a series through its AIC-selected Yule-Walker AR model.

    Returns the residuals (length ``T - p``) and the model. When order 0 wins
    the input series is returned untouched.
    """
    model = fit_ar(series, max_order)
    if model.order == 0:
        return series, model
    p = model.order
    xc = series.values - model.mean
    resid = xc[p:].copy()
    for j, phi in enumerate(model.coefficients, start=1):
        resid -= phi * xc[p - j : xc.size - j]
    return series.derive(resid, f"prewhiten(order={p})"), model


def rolling_variance_standardize(series: TimeSeries, window: int) -> TimeSeries:
    """Divide each value by the standard deviation of its trailing window.

    The first ``window - 1`` values have no full trailing window and reuse the
    first full window's standard deviation.
    """
    x = series.values
    if window < 2:
        raise InputError("rolling window must be at least 2")
    if x.size < window:
        raise InputError(f"series of length {x.size} shorter than window {window}")
    s = sliding_window_view(x, window).std(axis=1, ddof=1)
    if np.any(s < ROLLING_STD_FLOOR):
        first = int(np.flatnonzero(s < ROLLING_STD_FLOOR)[0]) + window - 1
        raise DegenerateWindowError(f"rolling standard deviation is ~0 in the window ending at index {first}")
    scale = np.concatenate([np.full(window - 1, s[0]), s])
    return series.derive(x / scale, f"rolling_variance_standardize(window={window})")


def describe(series: TimeSeries) -> DescriptiveStats:
    x = series.values
    n = x.size
    if n < 4:
        raise InputError("descriptive statistics need at least four observations")
    mean = x.mean()
    dev = x - mean
    m2 = np.mean(dev**2)
    if m2 > 0:
        skew = np.mean(dev**3) / m2**1.5
        kurt = np.mean(dev**4) / m2**2 - 3.0
    else:
        skew, kurt = 0.0, float("nan")
    return DescriptiveStats(
        n=n,
        mean=float(mean),
        std_dev=float(np.sqrt(np.sum(dev**2) / (n - 1))),
        min=float(x.min()),
        max=float(x.max()),
        skewness=float(skew),
        excess_kurtosis=float(kurt),
    )
