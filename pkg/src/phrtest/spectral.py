"""Frame-averaged spectrum and second-order cumulant spectrum estimates.

A series of length ``T`` is cut into ``P = T // L`` consecutive non-overlapping
frames of length ``L`` (the tail is dropped). For each frame

    X_p(k)        = sum_t x_p(t) exp(-2j pi k t / L)
    S_p(k)        = |X_p(k)|^2 / L
    K_p(k1, k2)   = X_p(k1) X_p(k2) / L

and both are averaged over frames. ``K`` is evaluated on the principal domain
``0 < k1 <= L/2, -k1 < k2 <= k1`` minus the aliased point ``k1 + k2 = L``. No
taper is applied inside a frame.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple

import numpy as np

from .errors import InputError
from .timeseries import TimeSeries

__all__ = [
    "FramePlan",
    "FrequencyPair",
    "CumulantGrid",
    "default_frame_length",
    "partition_frames",
    "dft_frame",
    "dft_direct",
    "principal_domain",
    "pair_count",
    "frame_spectrum",
    "frame_cumulant",
    "average_estimates",
    "estimate_cumulant_grid",
]


class FrequencyPair(NamedTuple):
    k1: int
    k2: int


@dataclass(frozen=True)
class FramePlan:
    frame_length: int
    frame_count: int

    @property
    def total_used(self) -> int:
        return self.frame_length * self.frame_count


@dataclass(frozen=True)
class CumulantGrid:
    """Frame-averaged estimates.

    ``s_hat[k]`` holds the spectrum for ``k = 0..L/2``; negative frequencies
    follow from symmetry. ``k_hat[i]`` is the cumulant spectrum at ``pairs[i]``.
    ``frame_dfts`` (shape ``(P, L/2 + 1)``) is kept only when requested.
    """

    plan: FramePlan
    pairs: tuple[FrequencyPair, ...]
    k_hat: np.ndarray
    s_hat: np.ndarray
    frame_dfts: np.ndarray | None = None

    def spectrum_at(self, k: int) -> float:
        return float(self.s_hat[abs(k)])

    def to_dict(self) -> dict:
        return {
            "L": self.plan.frame_length,
            "P": self.plan.frame_count,
            "pairs": [[p.k1, p.k2] for p in self.pairs],
            "k_hat_re": self.k_hat.real.tolist(),
            "k_hat_im": self.k_hat.imag.tolist(),
            "s_hat": self.s_hat.tolist(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> CumulantGrid:
        plan = FramePlan(int(data["L"]), int(data["P"]))
        pairs = tuple(FrequencyPair(int(a), int(b)) for a, b in data["pairs"])
        k_hat = np.asarray(data["k_hat_re"], dtype=float) + 1j * np.asarray(data["k_hat_im"], dtype=float)
        return cls(plan, pairs, k_hat, np.asarray(data["s_hat"], dtype=float))


def default_frame_length(n: int) -> int:
    """Nearest even integer to ``sqrt(n)``, never below 4."""
    if n < 16:
        raise InputError(f"series of length {n} is too short for an automatic frame length")
    return max(4, 2 * int(round(np.sqrt(n) / 2.0)))


def _check_frame_length(L: int) -> None:
    if L < 4:
        raise InputError(f"frame length must be at least 4, got {L}")
    if L % 2:
        raise InputError(f"frame length must be even, got {L}")


def partition_frames(series: TimeSeries | np.ndarray, L: int) -> tuple[FramePlan, np.ndarray]:
    """Split into ``P = T // L`` frames; returns the plan and a ``(P, L)`` view."""
    x = series.values if isinstance(series, TimeSeries) else np.asarray(series, dtype=float)
    _check_frame_length(L)
    P = x.size // L
    if P < 2:
        raise InputError(f"frame length {L} leaves {P} complete frame(s) of a length-{x.size} series; need at least 2")
    return FramePlan(L, P), x[: P * L].reshape(P, L)


def dft_frame(frame: np.ndarray, L: int) -> np.ndarray:
    """Full-length DFT ``X(k), k = 0..L-1`` of one real frame."""
    frame = np.asarray(frame, dtype=float)
    if frame.shape != (L,):
        raise InputError(f"frame has shape {frame.shape}, expected ({L},)")
    return np.fft.fft(frame)


def dft_direct(frame: np.ndarray, offset: int = 0) -> np.ndarray:
    """O(L^2) reference DFT using absolute time ``t + offset`` in the phase."""
    frame = np.asarray(frame, dtype=float)
    L = frame.size
    t = np.arange(L) + offset
    k = np.arange(L)[:, None]
    # reduce k*t mod L in integers so large offsets don't lose phase precision
    phase = -2.0 * np.pi * ((k * t) % L) / L
    return np.exp(1j * phase) @ frame


@lru_cache(maxsize=64)
def principal_domain(L: int) -> tuple[FrequencyPair, ...]:
    _check_frame_length(L)
    return tuple(
        FrequencyPair(k1, k2)
        for k1 in range(1, L // 2 + 1)
        for k2 in range(-k1 + 1, k1 + 1)
        if (k1 + k2) % L != 0
    )


def pair_count(L: int) -> int:
    return L * L // 4 + L // 2 - 1


@lru_cache(maxsize=64)
def _pair_index(L: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    arr = np.array(principal_domain(L), dtype=np.intp)
    k1, k2 = arr[:, 0], arr[:, 1]
    for a in (k1, k2):
        a.setflags(write=False)
    neg = k2 < 0
    neg.setflags(write=False)
    return k1, k2, neg


def frame_spectrum(dft: np.ndarray, L: int) -> np.ndarray:
    dft = np.asarray(dft)
    if dft.shape[-1] != L:
        raise InputError(f"DFT has length {dft.shape[-1]}, expected {L}")
    half = dft[..., : L // 2 + 1]
    return (half.real**2 + half.imag**2) / L


def frame_cumulant(dft: np.ndarray, pairs: tuple[FrequencyPair, ...] | list, L: int) -> np.ndarray:
    """``X(k1) X(k2) / L`` per pair; ``X(-k)`` is taken as ``conj(X(k))``."""
    dft = np.asarray(dft)
    if dft.shape[-1] != L:
        raise InputError(f"DFT has length {dft.shape[-1]}, expected {L}")
    pairs = [FrequencyPair(*p) for p in pairs]
    for k1, k2 in pairs:
        if not (0 < k1 <= L // 2 and -k1 < k2 <= k1 and (k1 + k2) % L != 0):
            raise InputError(f"pair ({k1}, {k2}) lies outside the principal domain for L={L}")
    k1 = np.array([p.k1 for p in pairs], dtype=np.intp)
    k2 = np.array([p.k2 for p in pairs], dtype=np.intp)
    return _cumulants(dft, k1, k2, k2 < 0, L)


def _cumulants(half_or_full: np.ndarray, k1: np.ndarray, k2: np.ndarray, neg: np.ndarray, L: int) -> np.ndarray:
    x1 = half_or_full[..., k1]
    x2 = half_or_full[..., np.abs(k2)]
    x2 = np.where(neg, np.conj(x2), x2)
    return x1 * x2 / L


def average_estimates(
    spectra: np.ndarray,
    cumulants: np.ndarray,
    plan: FramePlan,
    pairs: tuple[FrequencyPair, ...] | None = None,
) -> CumulantGrid:
    """Average per-frame ``S_p`` (shape ``(P, L/2+1)``) and ``K_p`` (shape ``(P, n_pairs)``)."""
    L, P = plan.frame_length, plan.frame_count
    pairs = principal_domain(L) if pairs is None else tuple(FrequencyPair(*p) for p in pairs)
    spectra = np.asarray(spectra, dtype=float)
    cumulants = np.asarray(cumulants, dtype=complex)
    if spectra.shape != (P, L // 2 + 1):
        raise InputError(f"spectra have shape {spectra.shape}, expected {(P, L // 2 + 1)}")
    if cumulants.shape != (P, len(pairs)):
        raise InputError(f"cumulants have shape {cumulants.shape}, expected {(P, len(pairs))}")
    return CumulantGrid(plan, pairs, cumulants.mean(axis=0), spectra.mean(axis=0))


def estimate_cumulant_grid(series: TimeSeries | np.ndarray, L: int, keep_frames: bool = False) -> CumulantGrid:
    """Partition, transform and average in one vectorized pass."""
    plan, frames = partition_frames(series, L)
    half = np.fft.rfft(frames, axis=1)
    k1, k2, neg = _pair_index(L)
    spectra = (half.real**2 + half.imag**2) / L
    cumulants = _cumulants(half, k1, k2, neg, L)
    grid = average_estimates(spectra, cumulants, plan, principal_domain(L))
    if keep_frames:
        return CumulantGrid(grid.plan, grid.pairs, grid.k_hat, grid.s_hat, half)
    return grid
