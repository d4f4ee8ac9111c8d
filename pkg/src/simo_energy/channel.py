"""Fading-channel statistics, samplers, and the received-energy log-MGF.

The physical model is a single-antenna transmitter sending a nonnegative
real symbol sqrt(p) through i.i.d. per-antenna fading h with additive
circularly-symmetric complex Gaussian noise of power sigma2.  Everything
downstream (rate functions, constellation design, simulation) consumes the
per-antenna energy fluctuation

    U = |h*sqrt(p) + v|^2 - (p + sigma2),

so this module provides its moments and its log moment generating function
for the supported fading families.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np
from scipy.optimize import brentq
from scipy.special import gammaln


class NotSamplableError(TypeError):
    """Raised when a distribution-dependent operation gets a moments-only channel."""


class DivergentMgfError(ValueError):
    """Raised when the energy MGF is evaluated at or beyond its domain boundary."""

    def __init__(self, theta: float, theta_max: float):
        super().__init__(
            f"energy MGF diverges at theta={theta!r} (domain boundary {theta_max!r})"
        )
        self.theta = theta
        self.theta_max = theta_max


def db_to_linear(x_db: float) -> float:
    return 10.0 ** (x_db / 10.0)


def linear_to_db(x: float) -> float:
    return 10.0 * math.log10(x)


def sigma_from_snr(gamma_db: float) -> float:
    """Noise power for a given per-antenna SNR in dB (unit channel second moment)."""
    if not math.isfinite(gamma_db):
        raise ValueError(f"SNR must be finite, got {gamma_db!r} dB")
    return 10.0 ** (-gamma_db / 10.0)


@dataclass(frozen=True)
class NoisePlan:
    """Receiver noise power together with the SNR it was derived from."""

    gamma_db: float
    sigma2: float

    @classmethod
    def from_snr_db(cls, gamma_db: float) -> "NoisePlan":
        return cls(gamma_db=gamma_db, sigma2=sigma_from_snr(gamma_db))

    @classmethod
    def from_sigma2(cls, sigma2: float) -> "NoisePlan":
        if not (sigma2 > 0):
            raise ValueError("noise power must be positive")
        return cls(gamma_db=-linear_to_db(sigma2), sigma2=sigma2)


@dataclass(frozen=True)
class Rician:
    """Rician fading h ~ CN(mu, sigma_h^2) with E|h|^2 = 1.

    The K-factor is given in dB; K_db = -inf is Rayleigh and K_db = +inf is a
    deterministic unit line-of-sight channel.
    """

    K_db: float

    @property
    def k_lin(self) -> float:
        if math.isinf(self.K_db):
            return math.inf if self.K_db > 0 else 0.0
        return 10.0 ** (self.K_db / 10.0)

    @property
    def mu(self) -> float:
        k = self.k_lin
        if math.isinf(k):
            return 1.0
        return math.sqrt(k / (k + 1.0))

    @property
    def sigma_h2(self) -> float:
        k = self.k_lin
        if math.isinf(k):
            return 0.0
        return 1.0 / (k + 1.0)

    @property
    def second_moment(self) -> float:
        return 1.0


@dataclass(frozen=True)
class NakagamiReal:
    """Nonnegative real amplitude with a Nakagami(m, omega) law, zero imaginary part."""

    m: float
    omega: float = 1.0

    def __post_init__(self):
        if not (self.m > 0):
            raise ValueError("Nakagami shape m must be positive")
        if not (self.omega > 0):
            raise ValueError("Nakagami second moment omega must be positive")

    @property
    def mu(self) -> float:
        # E[A] for A^2 ~ Gamma(m, omega/m)
        return math.exp(gammaln(self.m + 0.5) - gammaln(self.m)) * math.sqrt(
            self.omega / self.m
        )

    @property
    def sigma_h2(self) -> float:
        return self.omega - self.mu**2

    @property
    def second_moment(self) -> float:
        return self.omega


@dataclass(frozen=True)
class MomentsOnly:
    """Channel known only through its fourth-moment coefficient; not samplable."""

    alpha1_value: float

    def __post_init__(self):
        if not (self.alpha1_value >= 0):
            raise ValueError("alpha1 must be nonnegative")


ChannelSpec = Union[Rician, NakagamiReal, MomentsOnly]


def rayleigh() -> Rician:
    """Rayleigh fading, i.e. a Rician channel with K = 0 (K_db = -inf)."""
    return Rician(K_db=-math.inf)


def alpha1(channel: ChannelSpec) -> float:
    """Fourth-moment coefficient of the fading law.

    This is E[h_re^4] + E[h_im^4] + 2 E[h_re^2] E[h_im^2] - 1 for a channel
    normalized to E|h|^2 = 1; it multiplies p^2 in the energy variance.
    """
    if isinstance(channel, MomentsOnly):
        return channel.alpha1_value
    if isinstance(channel, Rician):
        k = channel.k_lin
        if math.isinf(k):
            return 0.0
        return (1.0 + 2.0 * k) / (1.0 + k) ** 2
    if isinstance(channel, NakagamiReal):
        return channel.omega**2 * (1.0 + 1.0 / channel.m) - 1.0
    raise TypeError(f"unsupported channel {channel!r}")


def _require_normalized(channel: ChannelSpec) -> None:
    if isinstance(channel, MomentsOnly):
        return
    if abs(channel.second_moment - 1.0) > 1e-9:
        raise ValueError(
            f"channel must satisfy E|h|^2 = 1, got {channel.second_moment!r}"
        )


def u_second_moment(channel: ChannelSpec, sigma2: float, p: float) -> float:
    """Variance E[U^2] of the per-antenna energy fluctuation at power level p."""
    if p < 0:
        raise ValueError("power level must be nonnegative")
    _require_normalized(channel)
    return alpha1(channel) * p * p + 2.0 * sigma2 * p + sigma2 * sigma2


def sample_channel(
    channel: ChannelSpec, count: int, rng: np.random.Generator
) -> np.ndarray:
    """Draw `count` i.i.d. channel coefficients as a complex vector."""
    if isinstance(channel, MomentsOnly):
        raise NotSamplableError("moments-only channels cannot be sampled")
    if isinstance(channel, Rician):
        mu = channel.mu
        sh2 = channel.sigma_h2
        if sh2 == 0.0:
            return np.full(count, mu, dtype=np.complex128)
        scale = math.sqrt(sh2 / 2.0)
        g = rng.standard_normal((count, 2))
        return mu + scale * (g[:, 0] + 1j * g[:, 1])
    if isinstance(channel, NakagamiReal):
        power = rng.gamma(shape=channel.m, scale=channel.omega / channel.m, size=count)
        return np.sqrt(power).astype(np.complex128)
    raise TypeError(f"unsupported channel {channel!r}")


def theta_max_energy(channel: ChannelSpec, sigma2: float, p: float) -> float:
    """Right boundary of the energy-MGF domain: E[exp(theta*U)] < inf for theta < theta_max."""
    if isinstance(channel, Rician):
        return 1.0 / (channel.sigma_h2 * p + sigma2)
    if isinstance(channel, NakagamiReal):
        return channel.m / (channel.omega * p + channel.m * sigma2)
    raise NotSamplableError("moments-only channels have no MGF")


# Fixed-order Gauss-Legendre rule used for the generic amplitude-law MGF.
_GL_ORDER = 64
_GL_X, _GL_W = np.polynomial.legendre.leggauss(_GL_ORDER)
_GL_Z = 0.5 * (_GL_X + 1.0)  # nodes mapped to (0, 1)
_GL_LOGW = np.log(0.5 * _GL_W)


def _log_mgf_rician(channel: Rician, sigma2: float, p: float, theta: float) -> float:
    s2 = channel.sigma_h2 * p + sigma2
    q = 1.0 - theta * s2
    if q <= 0.0:
        raise DivergentMgfError(theta, 1.0 / s2)
    lam = channel.mu**2 * p
    return -theta * (p + sigma2) + theta * lam / q - math.log(q)


def _log_tilted_amplitude_integral(m: float, beta: float) -> float:
    """log of int_0^inf 2 a^(2m-1) exp(-beta a^2) da by the mapped quadrature rule.

    The amplitude axis is mapped through a = scale*z/(1-z) with
    scale = sqrt(m/beta), which makes the transformed integrand depend on m
    only; the rule's relative error is therefore identical for every beta and
    cancels in ratios of these integrals.
    """
    scale = math.sqrt(m / beta)
    a = scale * _GL_Z / (1.0 - _GL_Z)
    log_jac = math.log(scale) - 2.0 * np.log1p(-_GL_Z)
    terms = (
        _GL_LOGW
        + math.log(2.0)
        + (2.0 * m - 1.0) * np.log(a)
        - beta * a * a
        + log_jac
    )
    peak = terms.max()
    return float(peak + math.log(np.exp(terms - peak).sum()))


def _log_mgf_nakagami(
    channel: NakagamiReal, sigma2: float, p: float, theta: float
) -> float:
    # Conditional on the amplitude a, |y|^2 is noncentral exponential, so
    # E[e^{theta|y|^2}] = E_G[e^{cG}] / (1 - theta*sigma2) with G = a^2 and
    # c = theta*p/(1 - theta*sigma2).  The outer expectation is the ratio of
    # two tilted amplitude integrals (tilt rates m/omega - c and m/omega),
    # each evaluated by the fixed-order mapped quadrature; the ratio keeps
    # log M(0) = 0 exact and cancels the rule's m-dependent error.
    qn = 1.0 - theta * sigma2
    t_max = theta_max_energy(channel, sigma2, p)
    if qn <= 0.0 or theta >= t_max:
        raise DivergentMgfError(theta, t_max)
    m, omega = channel.m, channel.omega
    c = theta * p / qn
    beta = m / omega - c
    if beta <= 0.0:
        raise DivergentMgfError(theta, t_max)
    log_e = _log_tilted_amplitude_integral(m, beta) - _log_tilted_amplitude_integral(
        m, m / omega
    )
    return log_e - math.log(qn) - theta * (omega * p + sigma2)


def log_mgf_energy(
    channel: ChannelSpec, sigma2: float, p: float, theta: float
) -> float:
    """log E[exp(theta*U)] for U = |h*sqrt(p) + v|^2 - (p + sigma2).

    Rician channels use the closed form of the scaled noncentral chi-square
    MGF; Nakagami channels go through the generic amplitude-law quadrature.
    Raises DivergentMgfError at or beyond the domain boundary.
    """
    if p < 0:
        raise ValueError("power level must be nonnegative")
    if theta == 0.0:
        return 0.0
    if isinstance(channel, Rician):
        return _log_mgf_rician(channel, sigma2, p, theta)
    if isinstance(channel, NakagamiReal):
        return _log_mgf_nakagami(channel, sigma2, p, theta)
    raise NotSamplableError("moments-only channels have no MGF")


def nakagami_m_from_K(K_db: float) -> float:
    """Shape m of the Nakagami amplitude whose mean matches a Rician K-factor.

    Solves Gamma(m + 1/2) / (Gamma(m) * sqrt(m)) = sqrt(K/(K+1)) for the unique
    m > 0; the left side increases monotonically from 0 toward 1.
    """
    if not math.isfinite(K_db):
        raise ValueError("K must be finite in dB")
    k = 10.0 ** (K_db / 10.0)
    target = math.sqrt(k / (k + 1.0))
    if not (0.0 < target < 1.0):
        raise ValueError(f"no matching m for K_db={K_db!r}")
    log_target = math.log(target)

    def f(m: float) -> float:
        return gammaln(m + 0.5) - gammaln(m) - 0.5 * math.log(m) - log_target

    lo = 1e-8
    hi = 1.0
    while f(hi) < 0.0:
        hi *= 2.0
        if hi > 1e15:
            raise ValueError(f"no matching m for K_db={K_db!r}")
    return brentq(f, lo, hi, xtol=1e-300, rtol=1e-12)
