"""PHR test of strict stationarity.

Under strict stationarity the second-order cumulant spectrum vanishes on the
principal domain. The frame-averaged estimate is normalized into

    Y(k1, k2) = sqrt(2 P) * K_hat(k1, k2) / sqrt(S_hat(k1) S_hat(k2))

whose real and imaginary parts are asymptotically i.i.d. standard normal. The
stacked real/imaginary parts go through a one-sample Kolmogorov-Smirnov test
against N(0, 1); a small p-value rejects stationarity.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Any, NamedTuple

import numpy as np
from scipy.special import ndtr

from .errors import DegenerateSpectrumError, InputError
from .spectral import CumulantGrid, FrequencyPair, default_frame_length, estimate_cumulant_grid
from .timeseries import TimeSeries

__all__ = [
    "YGrid",
    "KSResult",
    "TestResult",
    "PhrOutcome",
    "SmallSampleWarning",
    "y_statistics",
    "stack_components",
    "normal_cdf",
    "kolmogorov_sf",
    "ks_standard_normal",
    "phr_test",
]

SPECTRUM_FLOOR_REL = 1e-9
KS_MIN_N = 8
KS_SERIES_TOL = 1e-12
RECOMMENDED_T = 500
MINIMUM_T = 150


class SmallSampleWarning(UserWarning):
    pass


@dataclass(frozen=True)
class YGrid:
    pairs: tuple[FrequencyPair, ...]
    y: np.ndarray
    gamma_hat: np.ndarray

    def __post_init__(self) -> None:
        if not (len(self.pairs) == self.y.size == self.gamma_hat.size):
            raise InputError("YGrid arrays must match the pair list")
        if not (np.all(np.isfinite(self.y)) and np.all(np.isfinite(self.gamma_hat))):
            raise InputError("YGrid values must be finite")


@dataclass(frozen=True)
class KSResult:
    d_statistic: float
    p_value: float
    n: int


@dataclass(frozen=True)
class TestResult:
    """Outcome of one hypothesis test.

    ``p_value`` is exact for PHR. KPSS reports ``p_bracket`` instead, the
    interval between adjacent tabulated levels that contains the p-value.
    """

    test_name: str
    statistic: float
    p_value: float | None
    alpha: float
    reject: bool
    config: dict[str, Any] = field(default_factory=dict)
    p_bracket: tuple[float, float] | None = None

    __test__ = False  # not a pytest class

    def to_dict(self) -> dict[str, Any]:
        if self.test_name == "PHR":
            return {
                "test": "PHR",
                "D": self.statistic,
                "p_value": self.p_value,
                "alpha": self.alpha,
                "reject": self.reject,
                "L": self.config["L"],
                "P": self.config["P"],
                "n_pairs": self.config["n_pairs"],
                "preprocessing": list(self.config.get("preprocessing", [])),
            }
        if self.test_name == "KPSS":
            return {
                "test": "KPSS",
                "statistic": self.statistic,
                "p_bracket": list(self.p_bracket) if self.p_bracket else None,
                "alpha": self.alpha,
                "reject": self.reject,
                "bandwidth": self.config["bandwidth"],
                "preprocessing": list(self.config.get("preprocessing", [])),
            }
        raise InputError(f"unknown test {self.test_name!r}")


class PhrOutcome(NamedTuple):
    result: TestResult
    ygrid: YGrid
    grid: CumulantGrid


def y_statistics(grid: CumulantGrid) -> YGrid:
    """Normalize the cumulant estimates into the pivotal quantity."""
    s = grid.s_hat
    floor = SPECTRUM_FLOOR_REL * float(np.mean(s))
    small = np.flatnonzero(~(s >= floor) | (s <= 0))
    if small.size:
        k = int(small[0])
        raise DegenerateSpectrumError(k, float(s[k]), floor)
    k1 = np.fromiter((p.k1 for p in grid.pairs), dtype=np.intp, count=len(grid.pairs))
    k2 = np.fromiter((abs(p.k2) for p in grid.pairs), dtype=np.intp, count=len(grid.pairs))
    gamma = grid.k_hat / np.sqrt(s[k1] * s[k2])
    y = math.sqrt(2.0 * grid.plan.frame_count) * gamma
    return YGrid(grid.pairs, y, gamma)


def stack_components(ygrid: YGrid) -> np.ndarray:
    """All real parts in pair order, then all imaginary parts."""
    return np.concatenate([ygrid.y.real, ygrid.y.imag])


def normal_cdf(x: np.ndarray | float) -> np.ndarray:
    return ndtr(x)


def kolmogorov_sf(lam: float) -> float:
    """Survival function ``Q(lam) = 2 sum_{j>=1} (-1)^(j-1) exp(-2 j^2 lam^2)``.

    For ``lam < 1`` the equivalent Jacobi-theta form of ``1 - Q`` converges in a
    handful of terms where the alternating series would need hundreds.
    """
    if lam <= 0:
        return 1.0
    total = 0.0
    if lam < 1.0:
        c = math.pi**2 / (8.0 * lam * lam)
        j = 1
        while True:
            term = math.exp(-((2 * j - 1) ** 2) * c)
            total += term
            if term < KS_SERIES_TOL:
                break
            j += 1
        q = 1.0 - math.sqrt(2.0 * math.pi) / lam * total
    else:
        j = 1
        while True:
            term = math.exp(-2.0 * j * j * lam * lam)
            total += term if j % 2 else -term
            if term < KS_SERIES_TOL:
                break
            j += 1
        q = 2.0 * total
    return min(1.0, max(0.0, q))


def ks_standard_normal(values: np.ndarray) -> KSResult:
    """Two-sided one-sample KS test against N(0, 1), asymptotic p-value.

    The p-value uses the small-sample adjusted argument
    ``lam = (sqrt(n) + 0.12 + 0.11 / sqrt(n)) * D``. Ties are left in place.
    """
    v = np.asarray(values, dtype=float).ravel()
    n = v.size
    if n < KS_MIN_N:
        raise InputError(f"KS test needs at least {KS_MIN_N} values, got {n}")
    if not np.all(np.isfinite(v)):
        raise InputError("KS test input contains non-finite values")
    u = np.sort(normal_cdf(v))
    i = np.arange(1, n + 1)
    d = float(max(np.max(i / n - u), np.max(u - (i - 1) / n)))
    rn = math.sqrt(n)
    p = kolmogorov_sf((rn + 0.12 + 0.11 / rn) * d)
    return KSResult(d, p, n)


def phr_test(
    series: TimeSeries,
    L: int | str = "auto",
    alpha: float = 0.05,
    *,
    warn_small: bool = True,
) -> PhrOutcome:
    """Run the full PHR pipeline on a series.

    Parameters
    ----------
    series : TimeSeries
        Ideally zero-mean, prewhitened and free of outliers.
    L : int or "auto"
        Frame length (even, >= 4). ``"auto"`` picks the even integer nearest
        to ``sqrt(T)``.
    alpha : float
        Significance level; reject when the KS p-value is below it.

    Returns
    -------
    PhrOutcome
        ``(result, ygrid, grid)``.
    """
    if not 0.0 < alpha < 1.0:
        raise InputError(f"alpha must lie in (0, 1), got {alpha}")
    n = len(series)
    if L == "auto":
        L = default_frame_length(n)
    elif isinstance(L, str):
        raise InputError(f"frame length must be an integer or 'auto', got {L!r}")
    if warn_small and n < RECOMMENDED_T:
        level = "below the minimum" if n < MINIMUM_T else "below the recommended"
        warnings.warn(
            f"series length {n} is {level} ({MINIMUM_T if n < MINIMUM_T else RECOMMENDED_T}); "
            "PHR size may be distorted",
            SmallSampleWarning,
            stacklevel=2,
        )
    grid = estimate_cumulant_grid(series, int(L))
    ygrid = y_statistics(grid)
    ks = ks_standard_normal(stack_components(ygrid))
    result = TestResult(
        test_name="PHR",
        statistic=ks.d_statistic,
        p_value=ks.p_value,
        alpha=alpha,
        reject=ks.p_value < alpha,
        config={
            "L": grid.plan.frame_length,
            "P": grid.plan.frame_count,
            "n_pairs": len(grid.pairs),
            "preprocessing": list(series.preprocessing_log),
        },
    )
    return PhrOutcome(result, ygrid, grid)
