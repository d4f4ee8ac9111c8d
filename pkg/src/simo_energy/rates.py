"""Tail exponents of the averaged energy statistic and constellation-level bounds.

For a power level p the receiver statistic ||y||^2/n concentrates at
r(p) = p + sigma2; deviations of size d to the right or left decay like
exp(-n*I(d)) where I is the Legendre transform of the log-MGF of the
per-antenna fluctuation U.  This module computes those exponents, their
inverses, the small-deviation quadratic approximation, and the resulting
union bound / error exponent of a constellation with interval decoding
regions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

from .channel import (
    ChannelSpec,
    DivergentMgfError,
    MomentsOnly,
    NotSamplableError,
    log_mgf_energy,
    theta_max_energy,
    u_second_moment,
)

_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0  # golden-section shrink factor


def _golden_max(f, lo: float, hi: float, rel_tol: float = 1e-9) -> float:
    """Maximum value of a unimodal f on [lo, hi] by golden-section search."""
    tol = rel_tol * max(hi - lo, 1.0)
    a, b = lo, hi
    x1 = b - _INV_PHI * (b - a)
    x2 = a + _INV_PHI * (b - a)
    f1, f2 = f(x1), f(x2)
    best = max(f1, f2)
    while (b - a) > tol:
        if f1 < f2:
            a, x1, f1 = x1, x2, f2
            x2 = a + _INV_PHI * (b - a)
            f2 = f(x2)
        else:
            b, x2, f2 = x2, x1, f1
            x1 = b - _INV_PHI * (b - a)
            f1 = f(x1)
        best = max(best, f1, f2)
    return best


class RateOracle:
    """Left/right deviation exponents of the energy statistic for one power level.

    Immutable after construction; all evaluations are pure, so one oracle can
    be shared freely across threads.
    """

    def __init__(self, channel: ChannelSpec, sigma2: float, p: float):
        if isinstance(channel, MomentsOnly):
            raise NotSamplableError("moments-only channels have no rate functions")
        if not (sigma2 > 0):
            raise ValueError("noise power must be positive")
        if p < 0:
            raise ValueError("power level must be nonnegative")
        self.channel = channel
        self.sigma2 = sigma2
        self.p = p
        self.theta_max = theta_max_energy(channel, sigma2, p)
        self.r = channel.second_moment * p + sigma2
        self.u2 = u_second_moment(channel, sigma2, p)
        # Anchor log_mgf(0) = 0 exactly; only the quadrature path has a
        # nonzero raw offset.
        self._offset = log_mgf_energy(channel, sigma2, p, 0.0)

    def log_mgf(self, theta: float) -> float:
        return log_mgf_energy(self.channel, self.sigma2, self.p, theta) - self._offset

    def rate_right(self, d: float) -> float:
        """sup over theta >= 0 of theta*d - log_mgf(theta): exponent of P(mean U > d)."""
        if d < 0:
            raise ValueError("deviation must be nonnegative")
        if d == 0.0:
            return 0.0
        hi = self.theta_max * (1.0 - 1e-12)

        def objective(theta: float) -> float:
            try:
                return theta * d - self.log_mgf(theta)
            except DivergentMgfError:
                return -math.inf

        return max(_golden_max(objective, 0.0, hi), 0.0)

    def rate_left(self, d: float) -> float:
        """Exponent of P(mean U < -d); infinite once d reaches the statistic floor r(p)."""
        if d < 0:
            raise ValueError("deviation must be nonnegative")
        if d == 0.0:
            return 0.0
        if d >= self.r:
            return math.inf

        def objective(theta: float) -> float:
            return theta * d - self.log_mgf(-theta)

        # Bracket the concave objective by geometric expansion.
        a, fa = 0.0, 0.0
        b = d / self.u2 if self.u2 > 0 else 1.0
        fb = objective(b)
        if fb >= fa:
            c = 2.0 * b
            fc = objective(c)
            while fc > fb:
                a, b, fb = b, c, fc
                c *= 2.0
                if c > 1e18:
                    return math.inf
                fc = objective(c)
            hi = c
        else:
            hi = b
        return max(_golden_max(objective, a, hi), 0.0)

    def inverse_rate(self, side: str, t: float) -> float:
        """Smallest deviation d with rate(side)(d) = t, by bisection.

        The rate functions are continuous and strictly increasing, so the root
        is unique; iteration stops once |I(d) - t| < 1e-10 and the bracketing
        interval is below 1e-12 relative width.
        """
        if not (t > 0):
            raise ValueError("target exponent must be positive")
        if side == "right":
            rate = self.rate_right
            lo = 0.0
            hi = math.sqrt(2.0 * t * self.u2) if self.u2 > 0 else 1.0
            for _ in range(200):
                if rate(hi) >= t:
                    break
                lo = hi
                hi *= 2.0
            else:
                raise RuntimeError("failed to bracket the right rate inverse")
        elif side == "left":
            rate = self.rate_left
            lo = 0.0
            hi = self.r * (1.0 - 1e-15)
        else:
            raise ValueError(f"side must be 'left' or 'right', got {side!r}")

        mid = 0.5 * (lo + hi)
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            val = rate(mid)
            if val >= t:
                hi = mid
            else:
                lo = mid
            if (hi - lo) < 1e-12 * max(hi, 1e-300) and abs(val - t) < 1e-10:
                break
        return 0.5 * (lo + hi)


class QuadraticRateOracle:
    """Small-deviation stand-in for RateOracle: both tails are d^2 / (2 E[U^2])."""

    def __init__(self, alpha1_value: float, sigma2: float, p: float):
        if p < 0:
            raise ValueError("power level must be nonnegative")
        self.p = p
        self.sigma2 = sigma2
        self.r = p + sigma2
        self.u2 = alpha1_value * p * p + 2.0 * sigma2 * p + sigma2 * sigma2

    def rate_right(self, d: float) -> float:
        return approx_rate(self.u2, d)

    def rate_left(self, d: float) -> float:
        return approx_rate(self.u2, d)

    def inverse_rate(self, side: str, t: float) -> float:
        if not (t > 0):
            raise ValueError("target exponent must be positive")
        return math.sqrt(2.0 * t * self.u2)


def rate_right(oracle, d: float) -> float:
    return oracle.rate_right(d)


def rate_left(oracle, d: float) -> float:
    return oracle.rate_left(d)


def inverse_rate(oracle, side: str, t: float) -> float:
    return oracle.inverse_rate(side, t)


def approx_rate(s_p: float, d: float) -> float:
    """Quadratic approximation d^2 / (2 s_p) with s_p = E[U^2]."""
    if not (s_p > 0):
        raise ValueError("energy variance must be positive")
    if d < 0:
        raise ValueError("deviation must be nonnegative")
    return d * d / (2.0 * s_p)


def equalize_boundary(oracle_k, oracle_next, gap: float) -> float:
    """Split `gap` between adjacent receiver points so both tail exponents match.

    Returns d_R in (0, gap) with oracle_k.rate_right(d_R) equal to
    oracle_next.rate_left(gap - d_R); the difference is monotone in d_R, so
    bisection converges to residual below 1e-10.
    """
    if not (gap > 0):
        raise ValueError("gap must be positive")
    lo, hi = 0.0, gap
    d = 0.5 * gap
    for _ in range(200):
        d = 0.5 * (lo + hi)
        diff = oracle_k.rate_right(d) - oracle_next.rate_left(gap - d)
        if diff >= 0:
            hi = d
        else:
            lo = d
        if math.isfinite(diff) and abs(diff) < 1e-10:
            break
        if (hi - lo) < 1e-16 * gap:
            break
    return d


@dataclass(frozen=True)
class Constellation:
    """Ordered transmit power levels with optional energy-domain decoding regions.

    Region k is the half-open interval (c_{k-1}, c_k] of the statistic axis,
    with c_0 = 0 and c_L = +inf.  `boundaries` is None for level-only
    constellations that are decoded by a likelihood rule instead of fixed
    regions.  Symbol k carries the width-ceil(log2 L) binary reflected Gray
    code of its index.
    """

    levels: tuple
    sigma2_design: float
    boundaries: Optional[tuple] = None

    def __post_init__(self):
        levels = tuple(float(p) for p in self.levels)
        object.__setattr__(self, "levels", levels)
        if len(levels) < 1:
            raise ValueError("constellation needs at least one level")
        if levels[0] < 0:
            raise ValueError("power levels must be nonnegative")
        if any(b <= a for a, b in zip(levels, levels[1:])):
            raise ValueError("power levels must be strictly increasing")
        if not (self.sigma2_design > 0):
            raise ValueError("design noise power must be positive")
        if self.boundaries is not None:
            bounds = tuple(float(c) for c in self.boundaries)
            object.__setattr__(self, "boundaries", bounds)
            if len(bounds) != len(levels) - 1:
                raise ValueError("need exactly L-1 region boundaries")
            if any(b <= a for a, b in zip(bounds, bounds[1:])):
                raise ValueError("boundaries must be strictly increasing")
            r = self.receiver_points()
            cs = (0.0,) + bounds + (math.inf,)
            for k in range(len(levels)):
                if not (cs[k] < r[k] < cs[k + 1]):
                    raise ValueError(
                        f"receiver point {r[k]!r} of level {k} is outside its region"
                    )

    @property
    def L(self) -> int:
        return len(self.levels)

    @property
    def bits_per_symbol(self) -> int:
        return max(1, (self.L - 1).bit_length())

    def receiver_points(self) -> tuple:
        """Mean statistic r(p_k) = p_k + sigma2 for each level."""
        return tuple(p + self.sigma2_design for p in self.levels)

    def mean_power(self) -> float:
        return sum(self.levels) / self.L

    def deviations(self, sigma2: Optional[float] = None):
        """Per-level (d_left, d_right) distances from r(p_k) to the region edges.

        The outermost sides are infinite.  Evaluating under a noise power
        different from the design-time one shifts the receiver points.
        """
        if self.boundaries is None:
            raise ValueError("constellation has no decoding regions")
        s2 = self.sigma2_design if sigma2 is None else sigma2
        out = []
        for k, p in enumerate(self.levels):
            r = p + s2
            d_l = r - self.boundaries[k - 1] if k > 0 else math.inf
            d_r = self.boundaries[k] - r if k < self.L - 1 else math.inf
            out.append((d_l, d_r))
        return out


def chernoff_ser_bound(
    constellation: Constellation,
    channel: ChannelSpec,
    sigma2: float,
    n: int,
) -> float:
    """Union-of-tails upper bound on the symbol error rate with n antennas.

    Averages exp(-n*I_right) + exp(-n*I_left) over the levels; the unbounded
    outer sides contribute zero.  A deviation that comes out negative (the
    mean statistic falls outside its region, possible only under mismatch)
    contributes the trivial factor 1.
    """
    if n < 1:
        raise ValueError("antenna count must be at least 1")
    if constellation.L == 1:
        return 0.0
    total = 0.0
    for (d_l, d_r), p in zip(constellation.deviations(sigma2), constellation.levels):
        oracle = RateOracle(channel, sigma2, p)
        if math.isfinite(d_l):
            total += math.exp(-n * oracle.rate_left(max(d_l, 0.0)))
        if math.isfinite(d_r):
            total += math.exp(-n * oracle.rate_right(max(d_r, 0.0)))
    return total / constellation.L


def error_exponent(
    constellation: Constellation, channel: ChannelSpec, sigma2: float
) -> float:
    """Worst finite tail exponent over all levels; the SER decays like exp(-n*I_e)."""
    worst = math.inf
    for (d_l, d_r), p in zip(constellation.deviations(sigma2), constellation.levels):
        oracle = RateOracle(channel, sigma2, p)
        if math.isfinite(d_l):
            worst = min(worst, oracle.rate_left(max(d_l, 0.0)))
        if math.isfinite(d_r):
            worst = min(worst, oracle.rate_right(max(d_r, 0.0)))
    return worst
