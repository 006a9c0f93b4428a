"""Anytime confidence sequences for means of [0, 1]-valued reward streams.

Four interchangeable schemes sit behind one interface:

* ``kl``        tilted-KL intervals: invert D((tilt*mu_hat + m)/(tilt+1), m)
                against the iterated-logarithm threshold schedule.
* ``kl-prime``  plain-KL intervals: invert D(mu_hat, m) against the same
                schedule inflated by untilt_factor(tilt).
* ``sg1``       sub-Gaussian analogue of ``kl`` with the matching schedule.
* ``sg2``       baseline sub-Gaussian radius from a per-time union bound
                (pluggable; see sg2_radius).

A scheme is immutable after construction (its normalization constants are
precomputed) and all operations are pure, so schemes are safe to share
across threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .kl_math import (
    as_prob,
    _kl,
    kl_lower_inverse,
    kl_upper_inverse,
    tilted_kl_lower_inverse,
    tilted_kl_upper_inverse,
)

KL_TILTED = "kl"
KL_PRIME = "kl-prime"
SG1 = "sg1"
SG2 = "sg2"
SCHEME_KINDS = (KL_TILTED, KL_PRIME, SG1, SG2)

# Explicit terms summed for the slowly-converging tail series inside kappa;
# the remainder is closed with an integral bound that over-estimates the sum,
# which keeps the union bound on the conservative side.
KAPPA_TAIL_TERMS = 10**6


def _check_delta(delta: float) -> float:
    delta = float(delta)
    if math.isnan(delta) or not 0.0 < delta < 1.0:
        raise ValueError(f"delta must lie in (0, 1), got {delta!r}")
    return delta


def _check_tilt_pow2(tilt: int) -> int:
    if not isinstance(tilt, int) or tilt < 1 or tilt & (tilt - 1):
        raise ValueError(f"tilt must be a power of two >= 1, got {tilt!r}")
    return tilt


@lru_cache(maxsize=None)
def _kappa_series(tilt: int) -> float:
    """The delta-free series inside kappa: S1 + tilt * S2.

    S1 sums log2(2t)^-(tilt+1)/tilt over t in 1..tilt (dropped entirely when
    tilt == 1).  S2 sums (k+1)^-(tilt+1)/tilt for k >= log2(tilt); it is
    summed explicitly for KAPPA_TAIL_TERMS terms and closed with the exact
    integral tail bound tilt * (k_last + 1)^(-1/tilt), an over-estimate.
    """
    level = tilt.bit_length() - 1
    expo = (tilt + 1.0) / tilt
    if level == 0:
        s1 = 0.0
    else:
        t = np.arange(1, tilt + 1, dtype=np.float64)
        s1 = float(np.sum(np.log2(2.0 * t) ** -expo))
    k = np.arange(level, level + KAPPA_TAIL_TERMS, dtype=np.float64)
    s2 = float(np.sum((k + 1.0) ** -expo))
    k_last = level + KAPPA_TAIL_TERMS - 1
    s2 += tilt * (k_last + 1.0) ** (-1.0 / tilt)
    return s1 + tilt * s2


def kappa(tilt: int, delta: float) -> float:
    """Union-bound normalizer: delta^(1/(tilt+1)) * series^(tilt/(tilt+1)).

    Defined so that the stitched union bound over all sample sizes sums to
    at most delta; strictly increasing in delta.
    """
    _check_tilt_pow2(tilt)
    _check_delta(delta)
    s = _kappa_series(tilt)
    return delta ** (1.0 / (tilt + 1.0)) * s ** (tilt / (tilt + 1.0))


def untilt_factor(tilt: int) -> float:
    """(tilt+1)/(tilt - ln(tilt+1)).

    Inflation applied to the divergence threshold so the plain-KL interval
    dominates the tilted one; > 1 for every tilt >= 1 and decreases to 1.
    """
    if not isinstance(tilt, int) or tilt < 1:
        raise ValueError(f"tilt must be a positive integer, got {tilt!r}")
    return (tilt + 1.0) / (tilt - math.log(tilt + 1.0))


@dataclass(frozen=True)
class BoundScheme:
    """Which anytime confidence sequence is in force, plus its parameters.

    ``tilt`` is the mixing weight of the tilted divergence (the empirical
    mean receives weight tilt/(tilt+1)); it must be a power of two.  ``sg2``
    ignores it.  ``kappa_cache`` and ``c_cache`` are precomputed at
    construction so bound evaluations stay cheap.
    """

    kind: str
    tilt: int = 8
    delta: float = 0.01
    kappa_cache: float = field(init=False, repr=False, compare=False)
    c_cache: float = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if self.kind not in SCHEME_KINDS:
            raise ValueError(f"unknown scheme kind {self.kind!r}; choose from {SCHEME_KINDS}")
        _check_tilt_pow2(self.tilt)
        _check_delta(self.delta)
        if self.kind == KL_PRIME and self.tilt <= math.e:
            raise ValueError("kl-prime requires tilt > e (use tilt >= 4)")
        object.__setattr__(self, "kappa_cache", kappa(self.tilt, self.delta))
        c = untilt_factor(self.tilt) if self.kind == KL_PRIME else 1.0
        object.__setattr__(self, "c_cache", c)

    def with_delta(self, delta: float) -> "BoundScheme":
        """Same scheme at a different confidence level."""
        return BoundScheme(self.kind, self.tilt, delta)


def threshold(scheme: BoundScheme, t: int) -> float:
    """Divergence budget after t samples: ln(kappa * log2(2t) / delta) / t.

    Multiplied by untilt_factor for ``kl-prime``; clamped below at zero,
    which can only engage for delta pathologically close to 1.
    """
    if t < 1:
        raise ValueError(f"t must be >= 1, got {t!r}")
    base = math.log(scheme.kappa_cache * math.log2(2.0 * t) / scheme.delta) / t
    return max(0.0, scheme.c_cache * base)


def sg1_radius(scheme: BoundScheme, t: int) -> float:
    """Sub-Gaussian deviation radius matching the tilted-KL schedule."""
    ratio = (scheme.tilt + 1.0) / scheme.tilt
    return math.sqrt(0.5 * ratio * ratio * threshold(scheme, t))


def sg2_radius(t: int, delta: float) -> float:
    """Baseline anytime sub-Gaussian radius sqrt(ln(pi^2 t^2 / (6 delta)) / (2t)).

    A per-time Hoeffding tail at level 6*delta/(pi^2 t^2) summed over all t
    spends exactly delta, so the radius is anytime-valid one-sided at level
    delta for any [0, 1]-bounded stream.  Kept as a standalone function so
    the baseline can be swapped out without touching the scheme interface.
    """
    if t < 1:
        raise ValueError(f"t must be >= 1, got {t!r}")
    _check_delta(delta)
    return math.sqrt(math.log(math.pi * math.pi * t * t / (6.0 * delta)) / (2.0 * t))


def _first_arg_upper_inverse(mu: float, bound: float) -> float:
    """Largest x >= mu with D(x, mu) <= bound (inverse in the first argument)."""
    if _kl(1.0, mu) <= bound:
        return 1.0
    lo, hi = mu, 1.0
    for _ in range(200):
        if hi - lo < 1e-13:
            break
        mid = 0.5 * (lo + hi)
        if _kl(mid, mu) <= bound:
            lo = mid
        else:
            hi = mid
    return lo


def _first_arg_lower_inverse(mu: float, bound: float) -> float:
    """Smallest x <= mu with D(x, mu) <= bound."""
    if _kl(0.0, mu) <= bound:
        return 0.0
    lo, hi = 0.0, mu
    for _ in range(200):
        if hi - lo < 1e-13:
            break
        mid = 0.5 * (lo + hi)
        if _kl(mid, mu) <= bound:
            hi = mid
        else:
            lo = mid
    return hi


def deviation_envelope(scheme: BoundScheme, mu: float, t: int, side: str = "upper") -> float:
    """The deviation budget z_t at sample size t around a known mean.

    Solves D(mu + tilt/(tilt+1) * z, mu) = threshold(t) for z in (0, 1-mu]
    (upper side; the lower side mirrors on (0, mu]) and returns the boundary
    value when the threshold exceeds every achievable divergence.
    Only defined for the ``kl`` scheme.
    """
    if scheme.kind != KL_TILTED:
        raise ValueError("deviation_envelope is defined for the 'kl' scheme only")
    mu = as_prob(mu, "mu")
    thr = threshold(scheme, t)
    weight = scheme.tilt / (scheme.tilt + 1.0)
    if side == "upper":
        reach = _first_arg_upper_inverse(mu, thr)
        return min(1.0 - mu, (reach - mu) / weight)
    if side == "lower":
        reach = _first_arg_lower_inverse(mu, thr)
        return min(mu, (mu - reach) / weight)
    raise ValueError(f"side must be 'upper' or 'lower', got {side!r}")


@dataclass(frozen=True)
class DeviationSequence:
    """The per-t deviation budgets of a ``kl`` scheme around a fixed mean."""

    scheme: BoundScheme
    mu: float

    def upper(self, t: int) -> float:
        return deviation_envelope(self.scheme, self.mu, t, "upper")

    def lower(self, t: int) -> float:
        return deviation_envelope(self.scheme, self.mu, t, "lower")


def upper_bound(scheme: BoundScheme, stats) -> float:
    """Anytime upper confidence limit for the mean behind ``stats``.

    ``stats`` is anything exposing ``pulls`` and ``mean``; at least one
    sample is required.
    """
    t = stats.pulls
    if t < 1:
        raise ValueError("upper_bound requires at least one sample")
    mu_hat = stats.mean
    if scheme.kind == KL_TILTED:
        return tilted_kl_upper_inverse(mu_hat, threshold(scheme, t), scheme.tilt)
    if scheme.kind == KL_PRIME:
        return kl_upper_inverse(mu_hat, threshold(scheme, t))
    if scheme.kind == SG1:
        return min(1.0, mu_hat + sg1_radius(scheme, t))
    return min(1.0, mu_hat + sg2_radius(t, scheme.delta))


def lower_bound(scheme: BoundScheme, stats) -> float:
    """Anytime lower confidence limit; mirror of upper_bound, clamped at 0."""
    t = stats.pulls
    if t < 1:
        raise ValueError("lower_bound requires at least one sample")
    mu_hat = stats.mean
    if scheme.kind == KL_TILTED:
        return tilted_kl_lower_inverse(mu_hat, threshold(scheme, t), scheme.tilt)
    if scheme.kind == KL_PRIME:
        return kl_lower_inverse(mu_hat, threshold(scheme, t))
    if scheme.kind == SG1:
        return max(0.0, mu_hat - sg1_radius(scheme, t))
    return max(0.0, mu_hat - sg2_radius(t, scheme.delta))


def coverage_envelope(scheme: BoundScheme, mu: float, t_max: int):
    """Exact per-t exit thresholds for the empirical mean of a known stream.

    Returns arrays (low, high) of length t_max such that, at sample size t,
    the true mean mu falls outside [lower_bound, upper_bound] computed from
    the empirical mean m exactly when m < low[t-1] (mu above the interval)
    or m > high[t-1] (mu below the interval).  This reduces Monte-Carlo
    coverage checks to comparing running sums against precomputed curves
    instead of inverting bounds along every trajectory.
    """
    mu = as_prob(mu, "mu")
    if t_max < 1:
        raise ValueError(f"t_max must be >= 1, got {t_max!r}")
    low = np.empty(t_max)
    high = np.empty(t_max)
    tilt = scheme.tilt
    for t in range(1, t_max + 1):
        if scheme.kind in (SG1, SG2):
            r = sg1_radius(scheme, t) if scheme.kind == SG1 else sg2_radius(t, scheme.delta)
            low[t - 1] = mu - r
            high[t - 1] = mu + r
            continue
        thr = threshold(scheme, t)
        if scheme.kind == KL_TILTED:
            # m exits when the tilted divergence at the true mean exceeds the
            # budget: D((tilt*m + mu)/(tilt+1), mu) > thr.  Solving the
            # mixture point for m via the first-argument inverses of D(., mu):
            zu = _first_arg_upper_inverse(mu, thr)
            zl = _first_arg_lower_inverse(mu, thr)
            high[t - 1] = mu + (tilt + 1.0) / tilt * (zu - mu)
            low[t - 1] = mu - (tilt + 1.0) / tilt * (mu - zl)
        else:  # KL_PRIME: exit when D(m, mu) > thr on the matching side
            high[t - 1] = _first_arg_upper_inverse(mu, thr)
            low[t - 1] = _first_arg_lower_inverse(mu, thr)
    return low, high
