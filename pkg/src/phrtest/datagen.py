"""Seeded data-generating processes for size and power studies.

Randomness is organized as ``(seed, stream)`` pairs mapped through
:class:`numpy.random.SeedSequence` spawn keys, so the stationary component and
the random-walk component of a unit-root mixture come from disjoint streams,
and Monte Carlo replications derive their own seeds from
``(base_seed, replication_index)`` without any shared generator state.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field, replace
from typing import Any

import numpy as np
from scipy.signal import lfilter
from scipy.special import expit

from .errors import InputError
from .timeseries import TimeSeries

__all__ = [
    "ALLOWED_DF",
    "DGP_KINDS",
    "VARIANCE_PATTERNS",
    "InnovationSpec",
    "VarianceProfile",
    "DgpSpec",
    "derive_seed",
    "stream_rng",
    "gen_innovations",
    "variance_profile",
    "gen_series",
]

ALLOWED_DF = (3, 5, 10, 15)
DGP_KINDS = ("stationary", "unit_root_mixture", "dgp1", "dgp2")
VARIANCE_PATTERNS = ("constant", "single_break", "smooth_transition", "piecewise_linear")
BURN_IN = 100
# Logistic steepness multiplier applied on the normalized time axis.
SMOOTH_TIME_SCALE = 20.0

U_STREAM = 0
W_STREAM = 1

_U64 = (1 << 64) - 1


def derive_seed(base_seed: int, index: int) -> int:
    """Independent 64-bit seed for replication ``index`` of ``base_seed``."""
    ss = np.random.SeedSequence(base_seed & _U64, spawn_key=(index,))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def stream_rng(seed: int, stream: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed & _U64, spawn_key=(stream,))))


@dataclass(frozen=True)
class InnovationSpec:
    distribution: str = "normal"
    df: int | None = None
    rho: float = 0.0
    seed: int = 0

    def __post_init__(self) -> None:
        if self.distribution == "normal":
            if self.df is not None:
                raise InputError("df applies only to the t distribution")
        elif self.distribution == "t":
            if self.df not in ALLOWED_DF:
                raise InputError(f"t degrees of freedom must be one of {ALLOWED_DF}, got {self.df}")
        else:
            raise InputError(f"unknown innovation distribution {self.distribution!r}")
        if not -1.0 < self.rho < 1.0:
            raise InputError(f"rho must lie in (-1, 1), got {self.rho}")
        if not 0 <= self.seed <= _U64:
            raise InputError("seed must be a 64-bit unsigned integer")

    def draw(self, rng: np.random.Generator, n: int) -> np.ndarray:
        if self.distribution == "normal":
            return rng.standard_normal(n)
        return rng.standard_t(self.df, n)


@dataclass(frozen=True)
class VarianceProfile:
    pattern: str = "constant"
    m: float = 0.5
    c: float = 1.0
    gamma: float = 10.0
    sigma0: float = 1.0

    def __post_init__(self) -> None:
        if self.pattern not in VARIANCE_PATTERNS:
            raise InputError(f"unknown variance pattern {self.pattern!r}")
        if not 0.0 <= self.m < 1.0:
            raise InputError(f"m must lie in [0, 1), got {self.m}")
        if not self.c > 0:
            raise InputError(f"c must be positive, got {self.c}")
        if not (self.gamma > 0 and self.sigma0 > 0):
            raise InputError("gamma and sigma0 must be positive")

    @property
    def sigma1(self) -> float:
        return self.c * self.sigma0


@dataclass(frozen=True)
class DgpSpec:
    kind: str
    T: int
    innovations: InnovationSpec = field(default_factory=InnovationSpec)
    lam: float = 0.0
    variance: VarianceProfile = field(default_factory=VarianceProfile)

    def __post_init__(self) -> None:
        if self.kind not in DGP_KINDS:
            raise InputError(f"unknown DGP kind {self.kind!r}")
        if self.T < 16:
            raise InputError(f"T must be at least 16, got {self.T}")
        if self.lam < 0:
            raise InputError("lambda must be non-negative")
        if self.lam and self.kind != "unit_root_mixture":
            raise InputError("lambda applies only to the unit_root_mixture DGP")
        if self.variance.pattern != "constant" and self.kind not in ("dgp1", "dgp2"):
            raise InputError("variance patterns apply only to dgp1 and dgp2")

    @property
    def seed(self) -> int:
        return self.innovations.seed

    def with_seed(self, seed: int) -> DgpSpec:
        return replace(self, innovations=replace(self.innovations, seed=seed))

    def to_dict(self) -> dict[str, Any]:
        inn, var = self.innovations, self.variance
        return {
            "kind": self.kind,
            "T": self.T,
            "lambda": self.lam,
            "rho": inn.rho,
            "distribution": inn.distribution,
            "df": inn.df,
            "pattern": var.pattern,
            "m": var.m,
            "c": var.c,
            "gamma": var.gamma,
            "seed": inn.seed,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> DgpSpec:
        known = {"kind", "T", "lambda", "rho", "distribution", "df", "pattern", "m", "c", "gamma", "seed", "sigma0"}
        unknown = set(data) - known
        if unknown:
            raise InputError(f"unknown DGP fields: {sorted(unknown)}")
        try:
            inn = InnovationSpec(
                distribution=data.get("distribution", "normal"),
                df=data.get("df"),
                rho=float(data.get("rho", 0.0)),
                seed=int(data.get("seed", 0)),
            )
            defaults = asdict(VarianceProfile())
            var = VarianceProfile(
                pattern=data.get("pattern", "constant"),
                **{k: float(data.get(k, defaults[k])) for k in ("m", "c", "gamma", "sigma0")},
            )
            return cls(kind=data["kind"], T=int(data["T"]), innovations=inn, lam=float(data.get("lambda", 0.0)), variance=var)
        except KeyError as exc:
            raise InputError(f"DGP spec is missing field {exc.args[0]!r}") from None
        except (TypeError, ValueError) as exc:
            if isinstance(exc, InputError):
                raise
            raise InputError(f"invalid DGP spec: {exc}") from None


def gen_innovations(spec: InnovationSpec, T: int, stream: int = U_STREAM) -> np.ndarray:
    """``u(t) = rho u(t-1) + v(t)`` with i.i.d. ``v``; 100 burn-in draws when ``rho != 0``."""
    if T < 1:
        raise InputError("T must be positive")
    rng = stream_rng(spec.seed, stream)
    if spec.rho == 0.0:
        return spec.draw(rng, T)
    v = spec.draw(rng, T + BURN_IN)
    return lfilter([1.0], [1.0, -spec.rho], v)[BURN_IN:]


def variance_profile(profile: VarianceProfile, T: int) -> np.ndarray:
    """Innovation variance ``sigma_t^2`` on normalized time ``tau = t / T, t = 1..T``."""
    if T < 2:
        raise InputError("T must be at least 2")
    tau = np.arange(1, T + 1) / T
    s0, s1 = profile.sigma0**2, profile.sigma1**2
    m = profile.m
    if profile.pattern == "constant":
        return np.full(T, s0)
    if profile.pattern == "single_break":
        return np.where(tau >= m, s1, s0)
    if profile.pattern == "smooth_transition":
        w = expit(profile.gamma * SMOOTH_TIME_SCALE * (tau - m))
        return s0 + (s1 - s0) * w
    ramp = np.clip((tau - m) / (1.0 - m), 0.0, None)
    return np.where(tau >= m, s0 + (s1 - s0) * ramp, s0)


def gen_series(spec: DgpSpec) -> TimeSeries:
    inn = spec.innovations
    u = gen_innovations(inn, spec.T, U_STREAM)
    if spec.kind == "stationary":
        x = u
    elif spec.kind == "unit_root_mixture":
        if spec.lam == 0.0:
            x = u
        else:
            w = inn.draw(stream_rng(inn.seed, W_STREAM), spec.T)
            x = spec.lam * np.cumsum(w) + u
    else:
        scaled = np.sqrt(variance_profile(spec.variance, spec.T)) * u
        x = scaled if spec.kind == "dgp1" else np.cumsum(scaled)
    return TimeSeries(x)
