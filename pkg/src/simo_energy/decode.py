"""Receivers: interval energy decoder, noncoherent ML, energy-domain ML for ASK,
and the pilot-based MMSE + coherent PAM pipeline.

Every decoder is parameterized by the statistics it *assumes*; those may
differ from the statistics the data was actually drawn from, which is how
mismatch studies are run.  All tie-breaks go to the smaller index so that
decoding is deterministic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.stats import chi2, ncx2

from .rates import Constellation


@dataclass(frozen=True)
class ReceivedBlock:
    """Complex samples of one coherence block: n antennas by T symbol slots.

    The first `pilot_slots` columns are pilots (coherent schemes only).
    """

    samples: np.ndarray
    pilot_slots: int = 0

    def __post_init__(self):
        samples = np.atleast_2d(np.asarray(self.samples, dtype=np.complex128))
        object.__setattr__(self, "samples", samples)
        if samples.ndim != 2 or samples.shape[0] < 1 or samples.shape[1] < 1:
            raise ValueError("samples must be an n-by-T complex matrix")
        if not (0 <= self.pilot_slots < samples.shape[1]):
            raise ValueError("pilot slots must leave at least one data slot")

    @property
    def n(self) -> int:
        return self.samples.shape[0]

    @property
    def T(self) -> int:
        return self.samples.shape[1]


@dataclass(frozen=True)
class EnergyRegions:
    """Interval decoder over the energy statistic."""

    constellation: Constellation

    def __post_init__(self):
        if self.constellation.boundaries is None:
            raise ValueError("energy-region decoding needs boundaries")


@dataclass(frozen=True)
class NoncoherentML:
    """Gaussian-likelihood decoder using assumed (mu, sigma_h2, sigma2)."""

    levels: tuple
    mu: float
    sigma_h2: float
    sigma2: float

    def __post_init__(self):
        _check_levels_and_noise(self.levels, self.sigma2)


@dataclass(frozen=True)
class EnergyMLAsk:
    """Exact likelihood of the energy statistic itself, for a fixed antenna count."""

    levels: tuple
    mu: float
    sigma_h2: float
    sigma2: float
    n: int

    def __post_init__(self):
        _check_levels_and_noise(self.levels, self.sigma2)
        if self.n < 1:
            raise ValueError("antenna count must be at least 1")


@dataclass(frozen=True)
class PilotPAM:
    """MMSE channel estimation from pilots followed by coherent PAM detection.

    pilot_slots = 0 means no training: the channel estimate falls back to the
    prior mean mu, which is the zero-pilot MMSE estimate.
    """

    amplitudes: tuple
    mu: float
    sigma_h2: float
    sigma2: float
    coherence_slots: int
    pilot_slots: int
    pilot_power: float = 1.0

    def __post_init__(self):
        if len(self.amplitudes) < 2:
            raise ValueError("need at least two amplitudes")
        if any(b <= a for a, b in zip(self.amplitudes, self.amplitudes[1:])):
            raise ValueError("amplitudes must be strictly increasing")
        if not (self.sigma2 > 0):
            raise ValueError("assumed noise power must be positive")
        if not (0 <= self.pilot_slots < self.coherence_slots):
            raise ValueError("pilot slots must leave at least one data slot")


def _check_levels_and_noise(levels, sigma2):
    if len(levels) < 1:
        raise ValueError("need at least one level")
    if any(b <= a for a, b in zip(levels, levels[1:])):
        raise ValueError("levels must be strictly increasing")
    if not (sigma2 > 0):
        raise ValueError("assumed noise power must be positive")


def energy_statistic(block: ReceivedBlock, column: int) -> float:
    """Average received power ||y||^2 / n of one symbol slot."""
    y = block.samples[:, column]
    return float(np.mean(np.abs(y) ** 2))


def energy_decode(regions: Constellation, stat: float) -> int:
    """Index of the region containing the statistic; boundaries belong to the lower region."""
    if stat < 0:
        raise ValueError("energy statistic is nonnegative")
    if regions.boundaries is None:
        raise ValueError("constellation has no decoding regions")
    return int(np.searchsorted(regions.boundaries, stat, side="left"))


def noncoherent_nll(
    levels: np.ndarray,
    mu: float,
    sigma_h2: float,
    sigma2: float,
    n: int,
    norm2: np.ndarray,
    re_sum: np.ndarray,
) -> np.ndarray:
    """Negative log-likelihood matrix (draws x levels) from the two sufficient sums.

    norm2 is ||y||^2 and re_sum is Re(sum_i y_i) per draw; the transmit
    convention is x = sqrt(p) with nonnegative real amplitude.
    """
    levels = np.asarray(levels, dtype=float)
    s2 = sigma2 + sigma_h2 * levels
    amp = mu * np.sqrt(levels)
    norm2 = np.atleast_1d(norm2)[:, None]
    re_sum = np.atleast_1d(re_sum)[:, None]
    dist2 = norm2 - 2.0 * amp * re_sum + n * amp**2
    return dist2 / s2 + n * np.log(s2)


def ml_noncoherent_rician(
    block: ReceivedBlock,
    column: int,
    levels: Sequence[float],
    mu: float,
    sigma_h2: float,
    sigma2: float,
) -> int:
    """argmin over levels of ||y - mu*sqrt(p)*1||^2/(sigma2 + sigma_h2*p) + n*log(...)."""
    y = block.samples[:, column]
    n = block.n
    norm2 = float(np.sum(np.abs(y) ** 2))
    re_sum = float(np.sum(y.real))
    nll = noncoherent_nll(np.asarray(levels), mu, sigma_h2, sigma2, n, norm2, re_sum)
    return int(np.argmin(nll[0]))


def energy_ml_logpdf(
    stat: np.ndarray,
    n: int,
    levels: np.ndarray,
    mu: float,
    sigma_h2: float,
    sigma2: float,
) -> np.ndarray:
    """Exact log-density matrix (draws x levels) of the energy statistic.

    Conditioned on level p the scaled statistic 2n*stat/s^2 with
    s^2 = sigma_h2*p + sigma2 is noncentral chi-square with 2n degrees of
    freedom and noncentrality 2n*mu^2*p/s^2 (central when mu^2*p = 0).
    """
    levels = np.asarray(levels, dtype=float)
    stat = np.atleast_1d(np.asarray(stat, dtype=float))
    s2 = sigma_h2 * levels + sigma2
    w = 2.0 * n * stat[:, None] / s2
    out = np.empty_like(w)
    for j, p in enumerate(levels):
        nc = 2.0 * n * mu * mu * p / s2[j]
        if nc > 0.0:
            out[:, j] = ncx2.logpdf(w[:, j], 2 * n, nc)
        else:
            out[:, j] = chi2.logpdf(w[:, j], 2 * n)
        out[:, j] += math.log(2.0 * n / s2[j])
    return out


def ml_energy_ask(
    stat: float,
    n: int,
    levels: Sequence[float],
    mu: float,
    sigma_h2: float,
    sigma2: float,
) -> int:
    """Most likely level given only the energy statistic (exact finite-n density)."""
    if n < 1:
        raise ValueError("antenna count must be at least 1")
    logpdf = energy_ml_logpdf(
        np.asarray([stat]), n, np.asarray(levels), mu, sigma_h2, sigma2
    )
    return int(np.argmax(logpdf[0]))


def pilot_mmse_estimate(
    block: ReceivedBlock,
    pilot_slots: int,
    pilot_amplitude: float,
    mu: float,
    sigma_h2: float,
    sigma2: float,
) -> np.ndarray:
    """Per-antenna MMSE channel estimate from the first pilot_slots columns."""
    if pilot_slots < 1:
        raise ValueError("need at least one pilot slot")
    y_bar = block.samples[:, :pilot_slots].mean(axis=1)
    gain = sigma_h2 * pilot_amplitude / (
        sigma_h2 * pilot_amplitude**2 + sigma2 / pilot_slots
    )
    return mu + gain * (y_bar - mu * pilot_amplitude)


def pam_project(h_hat: np.ndarray, y: np.ndarray) -> float:
    """Scalar decision variable Re(h_hat^H y) / ||h_hat||^2 (0 when the estimate is null)."""
    g = float(np.sum(np.abs(h_hat) ** 2))
    if g == 0.0:
        return 0.0
    return float(np.sum(np.conj(h_hat) * y).real) / g


def nearest_amplitude_index(amplitudes: np.ndarray, z) -> np.ndarray:
    """Index of the closest amplitude; midpoints resolve to the smaller amplitude."""
    amplitudes = np.asarray(amplitudes, dtype=float)
    midpoints = 0.5 * (amplitudes[:-1] + amplitudes[1:])
    return np.searchsorted(midpoints, z, side="left")


def coherent_pam_decode(
    block: ReceivedBlock,
    column: int,
    h_hat: np.ndarray,
    amplitudes: Sequence[float],
) -> int:
    """argmin over amplitudes a of ||y - h_hat*a||^2, via the scalar projection."""
    z = pam_project(np.asarray(h_hat), block.samples[:, column])
    return int(nearest_amplitude_index(np.asarray(amplitudes), z))


def gray_code(index: int) -> int:
    return index ^ (index >> 1)


def gray_map(index: int, bits: int) -> str:
    """Binary reflected Gray code of `index` as a zero-padded bit string."""
    if not (0 <= index < (1 << bits)):
        raise ValueError(f"index {index} out of range for {bits} bits")
    return format(gray_code(index), f"0{bits}b")


def gray_unmap(code: str) -> int:
    """Inverse of gray_map: bit string of a Gray code back to its index."""
    g = int(code, 2)
    mask = g >> 1
    while mask:
        g ^= mask
        mask >>= 1
    return g


def ml_threshold_boundaries(
    levels: Sequence[float], sigma_h2: float, sigma2: float
) -> Constellation:
    """Decoding regions whose boundaries are the zero-mean likelihood crossings.

    For mu = 0 the noncoherent likelihood depends on the statistic alone, and
    adjacent levels' log-likelihoods cross at
    b = log(s2_{k+1}/s2_k) / (1/s2_k - 1/s2_{k+1}); interval decoding with
    these boundaries reproduces the ML decisions exactly.
    """
    levels = tuple(float(p) for p in levels)
    s2 = [sigma_h2 * p + sigma2 for p in levels]
    boundaries = []
    for a, b in zip(s2, s2[1:]):
        boundaries.append(math.log(b / a) / (1.0 / a - 1.0 / b))
    return Constellation(levels, sigma2, tuple(boundaries))
