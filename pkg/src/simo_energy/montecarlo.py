"""Deterministic, shardable Monte Carlo engine for symbol/bit error estimation.

Randomness is organized in fixed-size logical blocks: block b of a scenario
draws from a counter-based Philox stream keyed by (seed, b), so the merged
error counts do not depend on how blocks are distributed over shards, and any
rerun with the same seed reproduces the counts bit for bit.  Noncoherent
schemes draw a fresh channel every symbol; the pilot-based PAM scheme draws
one channel per coherence block.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, replace
from typing import Optional, Union

import numpy as np

from .channel import ChannelSpec, MomentsOnly, NotSamplableError, sample_channel
from .decode import (
    EnergyMLAsk,
    EnergyRegions,
    NoncoherentML,
    PilotPAM,
    energy_ml_logpdf,
    gray_code,
    nearest_amplitude_index,
    noncoherent_nll,
)
from .rates import Constellation

_BLOCK_DRAWS = 1 << 18  # target number of antenna draws per logical rng block
_WILSON_Z = 1.959963984540054  # 95% two-sided


def wilson_interval(errors: int, trials: int, z: float = _WILSON_Z):
    """Wilson score interval for a binomial proportion."""
    if trials == 0:
        return 0.0, 1.0
    p_hat = errors / trials
    z2 = z * z
    denom = 1.0 + z2 / trials
    center = (p_hat + z2 / (2.0 * trials)) / denom
    half = (
        z * math.sqrt(p_hat * (1.0 - p_hat) / trials + z2 / (4.0 * trials * trials))
        / denom
    )
    # The exact endpoints at 0 and all-errors are 0 and 1; keep them exact so
    # the interval always contains the point estimate.
    lo = 0.0 if errors == 0 else max(0.0, center - half)
    hi = 1.0 if errors == trials else min(1.0, center + half)
    return lo, hi


DecoderLike = Union[EnergyRegions, NoncoherentML, EnergyMLAsk, PilotPAM]


@dataclass(frozen=True)
class SimScenario:
    """One simulation setup: true statistics, a decoder with assumed statistics,
    antenna count, and a reproducibility contract (seed, shards)."""

    true_channel: ChannelSpec
    true_sigma2: float
    decoder: DecoderLike
    n: int
    symbols: int
    seed: int
    shards: int = 1

    def __post_init__(self):
        if isinstance(self.true_channel, MomentsOnly):
            raise NotSamplableError("cannot simulate a moments-only channel")
        if not (self.true_sigma2 >= 0):
            raise ValueError("true noise power must be nonnegative")
        if self.n < 1:
            raise ValueError("antenna count must be at least 1")
        if self.symbols < 1000:
            raise ValueError("symbol budget must be at least 1000")
        if self.shards < 1:
            raise ValueError("shard count must be at least 1")
        if not (0 <= self.seed < 2**64):
            raise ValueError("seed must fit in 64 bits")
        if isinstance(self.decoder, EnergyMLAsk) and self.decoder.n != self.n:
            raise ValueError("decoder antenna count disagrees with scenario")

    @property
    def scheme(self) -> str:
        return {
            EnergyRegions: "energy",
            NoncoherentML: "noncoherent_ml",
            EnergyMLAsk: "ask_energy_ml",
            PilotPAM: "pilot_pam",
        }[type(self.decoder)]

    @property
    def L(self) -> int:
        if isinstance(self.decoder, EnergyRegions):
            return self.decoder.constellation.L
        if isinstance(self.decoder, PilotPAM):
            return len(self.decoder.amplitudes)
        return len(self.decoder.levels)

    @property
    def bits_per_symbol(self) -> int:
        return max(1, (self.L - 1).bit_length())

    @property
    def effective_rate(self) -> float:
        """Information bits per channel use after pilot overhead."""
        bits = math.log2(self.L)
        if isinstance(self.decoder, PilotPAM):
            T, T_l = self.decoder.coherence_slots, self.decoder.pilot_slots
            return (T - T_l) / T * bits
        return bits


@dataclass(frozen=True)
class SimReport:
    """Monte Carlo outcome with provenance; counts are exact integers."""

    scheme: str
    symbols: int
    symbol_errors: int
    bits: int
    bit_errors: int
    ser: float
    ber: float
    ser_ci: tuple
    ber_ci: tuple
    seed: int
    shards: int
    tx_counts: tuple
    err_counts: tuple
    elapsed_s: float


def _block_generator(seed: int, index: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=(seed << 64) + index))


def _symbols_per_block(n: int, coherence: int = 1) -> int:
    per = max(1, _BLOCK_DRAWS // max(n, 1))
    if coherence > 1:
        per = max(coherence, (per // coherence) * coherence)
    return per


def _popcount_table(bits: int) -> np.ndarray:
    size = 1 << bits
    return np.array([bin(v).count("1") for v in range(size)], dtype=np.int64)


def _transmit_levels(scenario: SimScenario) -> np.ndarray:
    if isinstance(scenario.decoder, EnergyRegions):
        return np.asarray(scenario.decoder.constellation.levels, dtype=float)
    if isinstance(scenario.decoder, PilotPAM):
        raise TypeError("pilot scheme transmits amplitudes, not power levels")
    return np.asarray(scenario.decoder.levels, dtype=float)


def _run_noncoherent_block(scenario: SimScenario, rng, count: int, levels, gray, pop):
    n = scenario.n
    idx = rng.integers(0, len(levels), size=count)
    h = sample_channel(scenario.true_channel, count * n, rng).reshape(count, n)
    noise_scale = math.sqrt(scenario.true_sigma2 / 2.0)
    g = rng.standard_normal((count, n, 2))
    v = noise_scale * (g[..., 0] + 1j * g[..., 1])
    y = h * np.sqrt(levels[idx])[:, None] + v

    dec = scenario.decoder
    if isinstance(dec, EnergyRegions):
        stat = np.mean(np.abs(y) ** 2, axis=1)
        decoded = np.searchsorted(dec.constellation.boundaries, stat, side="left")
    elif isinstance(dec, NoncoherentML):
        norm2 = np.sum(np.abs(y) ** 2, axis=1)
        re_sum = np.sum(y.real, axis=1)
        nll = noncoherent_nll(
            np.asarray(dec.levels), dec.mu, dec.sigma_h2, dec.sigma2, n, norm2, re_sum
        )
        decoded = np.argmin(nll, axis=1)
    else:  # EnergyMLAsk
        stat = np.mean(np.abs(y) ** 2, axis=1)
        logpdf = energy_ml_logpdf(
            stat, n, np.asarray(dec.levels), dec.mu, dec.sigma_h2, dec.sigma2
        )
        decoded = np.argmax(logpdf, axis=1)

    errors = decoded != idx
    bit_err = int(pop[gray[idx] ^ gray[decoded]].sum())
    tx = np.bincount(idx, minlength=len(levels))
    err = np.bincount(idx[errors], minlength=len(levels))
    return count, int(errors.sum()), bit_err, tx, err


def _run_pilot_pam_block(scenario: SimScenario, rng, count: int, gray, pop):
    dec: PilotPAM = scenario.decoder
    n = scenario.n
    T, T_l = dec.coherence_slots, dec.pilot_slots
    nb = count // T
    amps = np.asarray(dec.amplitudes, dtype=float)
    L = len(amps)

    h = sample_channel(scenario.true_channel, nb * n, rng).reshape(nb, n)
    noise_scale = math.sqrt(scenario.true_sigma2 / 2.0)
    if T_l >= 1:
        # The pilot average over T_l slots is Gaussian with variance
        # sigma2/T_l; draw it directly.
        pilot_scale = math.sqrt(scenario.true_sigma2 / (2.0 * T_l))
        g = rng.standard_normal((nb, n, 2))
        v_bar = pilot_scale * (g[..., 0] + 1j * g[..., 1])
        y_bar = math.sqrt(dec.pilot_power) * h + v_bar
        gain = dec.sigma_h2 * math.sqrt(dec.pilot_power) / (
            dec.sigma_h2 * dec.pilot_power + dec.sigma2 / T_l
        )
        h_hat = dec.mu + gain * (y_bar - dec.mu * math.sqrt(dec.pilot_power))
    else:
        h_hat = np.full((nb, n), dec.mu, dtype=np.complex128)

    g_norm = np.sum(np.abs(h_hat) ** 2, axis=1)
    safe = g_norm > 0.0

    nd = T - T_l
    idx = rng.integers(0, L, size=(nb, nd))
    g = rng.standard_normal((nb, n, nd, 2))
    v = noise_scale * (g[..., 0] + 1j * g[..., 1])
    y = h[:, :, None] * amps[idx][:, None, :] + v

    z = np.sum(np.conj(h_hat)[:, :, None] * y, axis=1).real
    z = np.where(safe[:, None], z / np.where(safe, g_norm, 1.0)[:, None], 0.0)
    decoded = nearest_amplitude_index(amps, z)

    errors = decoded != idx
    bit_err = int(pop[gray[idx.ravel()] ^ gray[decoded.ravel()]].sum())
    tx = np.bincount(idx.ravel(), minlength=L)
    err = np.bincount(idx.ravel()[errors.ravel()], minlength=L)
    return nb * nd, int(errors.sum()), bit_err, tx, err


def _accumulate(scenario: SimScenario, stop_bit_errors: Optional[int] = None):
    """Run the scenario block by block; optionally stop early on enough bit errors.

    The early stop is evaluated at block granularity in block-index order, so
    it is as deterministic as the full run.
    """
    levels = None
    coherence = 1
    if isinstance(scenario.decoder, PilotPAM):
        coherence = scenario.decoder.coherence_slots
    else:
        levels = _transmit_levels(scenario)
    L = scenario.L
    bits = scenario.bits_per_symbol
    gray = np.array([gray_code(i) for i in range(L)], dtype=np.int64)
    pop = _popcount_table(bits)

    per_block = _symbols_per_block(scenario.n, coherence)
    total = scenario.symbols
    if coherence > 1:
        total = (total // coherence) * coherence
        if total == 0:
            raise ValueError("symbol budget is below one coherence block")

    symbols = sym_err = bit_err = 0
    tx = np.zeros(L, dtype=np.int64)
    err = np.zeros(L, dtype=np.int64)
    consumed = 0
    block_index = 0
    while consumed < total:
        count = min(per_block, total - consumed)
        if coherence > 1:
            count = (count // coherence) * coherence
            if count == 0:
                break
        rng = _block_generator(scenario.seed, block_index)
        if isinstance(scenario.decoder, PilotPAM):
            s, e, b, t_c, e_c = _run_pilot_pam_block(scenario, rng, count, gray, pop)
        else:
            s, e, b, t_c, e_c = _run_noncoherent_block(
                scenario, rng, count, levels, gray, pop
            )
        symbols += s
        sym_err += e
        bit_err += b
        tx += t_c
        err += e_c
        consumed += count
        block_index += 1
        if stop_bit_errors is not None and bit_err >= stop_bit_errors:
            break
    return symbols, sym_err, bit_err, tx, err


def simulate(scenario: SimScenario) -> SimReport:
    """Estimate SER/BER for the scenario with full-budget deterministic sampling."""
    start = time.perf_counter()
    symbols, sym_err, bit_err, tx, err = _accumulate(scenario)
    bits = symbols * scenario.bits_per_symbol
    return SimReport(
        scheme=scenario.scheme,
        symbols=symbols,
        symbol_errors=sym_err,
        bits=bits,
        bit_errors=bit_err,
        ser=sym_err / symbols,
        ber=bit_err / bits,
        ser_ci=wilson_interval(sym_err, symbols),
        ber_ci=wilson_interval(bit_err, bits),
        seed=scenario.seed,
        shards=scenario.shards,
        tx_counts=tuple(int(c) for c in tx),
        err_counts=tuple(int(c) for c in err),
        elapsed_s=time.perf_counter() - start,
    )


NOT_REACHED = None


def min_antennas(
    scenario_template: SimScenario,
    target_ber: float,
    n_max: int,
    min_bit_errors: int = 100,
) -> Optional[int]:
    """Smallest antenna count whose Wilson upper BER bound beats the target.

    Each candidate n simulates until min_bit_errors bit errors are seen or the
    template's symbol budget runs out.  Exponential bracketing is followed by
    bisection under the usual monotone-BER assumption.  Returns None when even
    n_max fails.
    """
    if not (0.0 < target_ber < 0.5):
        raise ValueError("target BER must be in (0, 0.5)")
    if n_max < 1:
        raise ValueError("n_max must be at least 1")

    def qualifies(n: int) -> bool:
        scen = _with_antennas(scenario_template, n)
        symbols, _, bit_err, _, _ = _accumulate(scen, stop_bit_errors=min_bit_errors)
        bits = symbols * scen.bits_per_symbol
        _, upper = wilson_interval(bit_err, bits)
        return upper < target_ber

    n = 1
    lo = 0
    hi = None
    while n <= n_max:
        if qualifies(n):
            hi = n
            break
        lo = n
        n *= 2
    if hi is None:
        if lo < n_max and qualifies(n_max):
            hi = n_max
        else:
            return NOT_REACHED
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if qualifies(mid):
            hi = mid
        else:
            lo = mid
    return hi


def _with_antennas(template: SimScenario, n: int) -> SimScenario:
    decoder = template.decoder
    if isinstance(decoder, EnergyMLAsk):
        decoder = replace(decoder, n=n)
    return replace(template, n=n, decoder=decoder)


@dataclass(frozen=True)
class StatHistogram:
    """Per-symbol empirical distribution of the energy statistic."""

    bin_edges: tuple
    counts: tuple  # counts[k] is the tuple of bin counts for symbol k
    boundaries: tuple
    receiver_points: tuple
    means: tuple
    variances: tuple
    outside_fraction: tuple  # mass falling outside each symbol's own region


def histogram(
    constellation: Constellation,
    channel: ChannelSpec,
    sigma2: float,
    n: int,
    trials: int,
    bins: int,
    seed: int = 0,
) -> StatHistogram:
    """Sampled statistic histograms for every level of a region-decoded constellation."""
    if bins < 10:
        raise ValueError("need at least 10 bins")
    if constellation.boundaries is None:
        raise ValueError("constellation has no decoding regions")
    from .channel import u_second_moment

    levels = constellation.levels
    r_pts = [p + sigma2 for p in levels]
    spread = math.sqrt(u_second_moment(channel, sigma2, levels[-1]) / n)
    hi = max(r_pts[-1] + 6.0 * spread, constellation.boundaries[-1] * 1.05)
    edges = np.linspace(0.0, hi, bins + 1)

    region_edges = (0.0,) + constellation.boundaries + (math.inf,)
    counts, means, variances, outside = [], [], [], []
    for k, p in enumerate(levels):
        rng = _block_generator(seed, k)
        h = sample_channel(channel, trials * n, rng).reshape(trials, n)
        g = rng.standard_normal((trials, n, 2))
        v = math.sqrt(sigma2 / 2.0) * (g[..., 0] + 1j * g[..., 1])
        stat = np.mean(np.abs(h * math.sqrt(p) + v) ** 2, axis=1)
        c, _ = np.histogram(stat, bins=edges)
        counts.append(tuple(int(x) for x in c))
        means.append(float(stat.mean()))
        variances.append(float(stat.var(ddof=1)))
        inside = (stat > region_edges[k]) & (stat <= region_edges[k + 1])
        outside.append(float(1.0 - inside.mean()))
    return StatHistogram(
        bin_edges=tuple(float(e) for e in edges),
        counts=tuple(counts),
        boundaries=constellation.boundaries,
        receiver_points=tuple(r_pts),
        means=tuple(means),
        variances=tuple(variances),
        outside_fraction=tuple(outside),
    )
