"""Bernoulli information-theoretic primitives.

Exact binary KL divergence, numerical inverses of the divergence in its
second argument (plain and tilted variants), and Chernoff information via
bisection on the equal-divergence crossing point.

All logarithms are natural.  Inputs are validated on entry; degenerate
cases follow the conventions 0*log(0) = 0 and D(p, q) = +inf exactly when
q is degenerate and p disagrees with it.  All functions are pure and safe
for concurrent use.
"""

from __future__ import annotations

import math

# Absolute tolerance on the probability argument of every bisection, with a
# hard iteration cap so the cost is deterministic.
BISECTION_TOL = 1e-12
BISECTION_MAX_ITER = 200

# Pre-scan resolution used to guard the tilted inverses against a
# non-monotone divergence map (never observed; see tilted_kl_upper_inverse).
_SCAN_POINTS = 64


def as_prob(value: float, name: str = "probability") -> float:
    """Validate that ``value`` is a probability; rejects NaN and out-of-range."""
    value = float(value)
    if math.isnan(value) or value < 0.0 or value > 1.0:
        raise ValueError(f"{name} must lie in [0, 1], got {value!r}")
    return value


def as_divergence(value: float, name: str = "divergence") -> float:
    """Validate a divergence value: non-negative real, +inf allowed, NaN rejected."""
    value = float(value)
    if math.isnan(value) or value < 0.0:
        raise ValueError(f"{name} must be a non-negative real, got {value!r}")
    return value


def _kl(p: float, q: float) -> float:
    """D(p, q) without input validation (hot path)."""
    if p == q:
        return 0.0
    if q <= 0.0 or q >= 1.0:
        return math.inf
    if p == 0.0:
        return -math.log1p(-q)
    if p == 1.0:
        return -math.log(q)
    return p * math.log(p / q) + (1.0 - p) * math.log((1.0 - p) / (1.0 - q))


def bernoulli_kl(p: float, q: float) -> float:
    """KL divergence between Bernoulli(p) and Bernoulli(q).

    Returns +inf exactly when (q == 0 and p > 0) or (q == 1 and p < 1);
    D(0, 0) = D(1, 1) = 0.
    """
    return _kl(as_prob(p, "p"), as_prob(q, "q"))


def kl_upper_inverse(p: float, bound: float) -> float:
    """Largest m >= p with D(p, m) <= bound.

    D(p, m) is continuous and strictly increasing in m on [p, 1], so the
    feasible set is an interval [p, m*]; bisection returns a feasible point
    within BISECTION_TOL of m*.  Returns 1.0 for an infinite budget.
    """
    p = as_prob(p, "p")
    bound = as_divergence(bound, "bound")
    if math.isinf(bound):
        return 1.0
    if bound == 0.0 or p == 1.0:
        return p if p < 1.0 else 1.0
    lo, hi = p, 1.0
    for _ in range(BISECTION_MAX_ITER):
        if hi - lo < BISECTION_TOL:
            break
        mid = 0.5 * (lo + hi)
        if _kl(p, mid) <= bound:
            lo = mid
        else:
            hi = mid
    return lo


def kl_lower_inverse(p: float, bound: float) -> float:
    """Smallest m <= p with D(p, m) <= bound; mirror of kl_upper_inverse on [0, p]."""
    p = as_prob(p, "p")
    bound = as_divergence(bound, "bound")
    if math.isinf(bound):
        return 0.0
    if bound == 0.0 or p == 0.0:
        return p
    lo, hi = 0.0, p
    for _ in range(BISECTION_MAX_ITER):
        if hi - lo < BISECTION_TOL:
            break
        mid = 0.5 * (lo + hi)
        if _kl(p, mid) <= bound:
            hi = mid
        else:
            lo = mid
    return hi


def _check_tilt(tilt: int) -> int:
    if not isinstance(tilt, int) or tilt < 1:
        raise ValueError(f"tilt must be a positive integer, got {tilt!r}")
    return tilt


def _tilted_div_above(p: float, m: float, tilt: int) -> float:
    """D((tilt*p + m)/(tilt+1), m), the tilted divergence used by the inverses."""
    return _kl((tilt * p + m) / (tilt + 1.0), m)


def _scan_is_monotone(p: float, lo: float, hi: float, tilt: int, increasing: bool) -> bool:
    """Coarse 64-point check that the tilted divergence moves one way on [lo, hi]."""
    step = (hi - lo) / (_SCAN_POINTS - 1)
    prev = _tilted_div_above(p, lo, tilt)
    for i in range(1, _SCAN_POINTS):
        cur = _tilted_div_above(p, lo + i * step, tilt)
        if increasing and cur < prev - 1e-9:
            return False
        if not increasing and cur > prev + 1e-9:
            return False
        prev = cur
    return True


def tilted_kl_upper_inverse(p: float, bound: float, tilt: int) -> float:
    """Largest m >= p with D((tilt*p + m)/(tilt+1), m) <= bound.

    The map m -> D((tilt*p + m)/(tilt+1), m) vanishes at m = p and is
    nondecreasing on [p, 1] (the partial-fraction identity
    1/(m(1-m)) = 1/m + 1/(1-m) bounds its derivative below by zero), so
    plain bisection applies.  A coarse pre-scan guards that claim; on a
    detected reversal the solver falls back to bracketing the last
    sub-level crossing found by the scan.
    """
    p = as_prob(p, "p")
    bound = as_divergence(bound, "bound")
    _check_tilt(tilt)
    if math.isinf(bound):
        return 1.0
    if bound == 0.0 or p == 1.0:
        return p if p < 1.0 else 1.0
    if not _scan_is_monotone(p, p, 1.0, tilt, increasing=True):
        return _last_sublevel_point(
            lambda m: _tilted_div_above(p, m, tilt), p, 1.0, bound
        )
    lo, hi = p, 1.0
    for _ in range(BISECTION_MAX_ITER):
        if hi - lo < BISECTION_TOL:
            break
        mid = 0.5 * (lo + hi)
        if _tilted_div_above(p, mid, tilt) <= bound:
            lo = mid
        else:
            hi = mid
    return lo


def tilted_kl_lower_inverse(p: float, bound: float, tilt: int) -> float:
    """Smallest m <= p with D((tilt*p + m)/(tilt+1), m) <= bound; mirror on [0, p]."""
    p = as_prob(p, "p")
    bound = as_divergence(bound, "bound")
    _check_tilt(tilt)
    if math.isinf(bound):
        return 0.0
    if bound == 0.0 or p == 0.0:
        return p
    if not _scan_is_monotone(p, 0.0, p, tilt, increasing=False):
        return _first_sublevel_point(
            lambda m: _tilted_div_above(p, m, tilt), 0.0, p, bound
        )
    lo, hi = 0.0, p
    for _ in range(BISECTION_MAX_ITER):
        if hi - lo < BISECTION_TOL:
            break
        mid = 0.5 * (lo + hi)
        if _tilted_div_above(p, mid, tilt) <= bound:
            hi = mid
        else:
            lo = mid
    return hi


def _last_sublevel_point(fn, lo: float, hi: float, bound: float) -> float:
    """Fallback for a non-monotone fn: largest x in [lo, hi] with fn(x) <= bound."""
    step = (hi - lo) / (_SCAN_POINTS - 1)
    feasible = [i for i in range(_SCAN_POINTS) if fn(lo + i * step) <= bound]
    if not feasible:
        return lo
    j = feasible[-1]
    if j == _SCAN_POINTS - 1:
        return hi
    a, b = lo + j * step, lo + (j + 1) * step
    for _ in range(BISECTION_MAX_ITER):
        if b - a < BISECTION_TOL:
            break
        mid = 0.5 * (a + b)
        if fn(mid) <= bound:
            a = mid
        else:
            b = mid
    return a


def _first_sublevel_point(fn, lo: float, hi: float, bound: float) -> float:
    """Fallback for a non-monotone fn: smallest x in [lo, hi] with fn(x) <= bound."""
    step = (hi - lo) / (_SCAN_POINTS - 1)
    feasible = [i for i in range(_SCAN_POINTS) if fn(lo + i * step) <= bound]
    if not feasible:
        return hi
    j = feasible[0]
    if j == 0:
        return lo
    a, b = lo + (j - 1) * step, lo + j * step
    for _ in range(BISECTION_MAX_ITER):
        if b - a < BISECTION_TOL:
            break
        mid = 0.5 * (a + b)
        if fn(mid) <= bound:
            b = mid
        else:
            a = mid
    return b


def chernoff_crossing(x: float, y: float) -> float:
    """The unique z between x and y with D(z, x) = D(z, y).

    Returns x when x == y.  At a degenerate endpoint (0 or 1) the crossing
    collapses onto that endpoint and the boundary value is returned.
    """
    x = as_prob(x, "x")
    y = as_prob(y, "y")
    a, b = (x, y) if x <= y else (y, x)
    if a == b:
        return a
    if a == 0.0 and b == 1.0:
        return 0.5
    if a == 0.0:
        return 0.0
    if b == 1.0:
        return 1.0
    lo, hi = a, b
    for _ in range(BISECTION_MAX_ITER):
        if hi - lo < BISECTION_TOL:
            break
        mid = 0.5 * (lo + hi)
        if _kl(mid, a) <= _kl(mid, b):
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def chernoff_information(x: float, y: float) -> float:
    """Chernoff information between Bernoulli(x) and Bernoulli(y).

    For interior x != y this is D(z*, x) at the crossing z* with
    D(z*, x) = D(z*, y); the result is symmetric in its arguments because
    they are normalized before solving.  Degenerate cases: 0 when x == y,
    D(x, y) evaluated at the degenerate endpoint when exactly one of the
    two is 0 or 1, and +inf for the pair (0, 1).
    """
    x = as_prob(x, "x")
    y = as_prob(y, "y")
    a, b = (x, y) if x <= y else (y, x)
    if a == b:
        return 0.0
    if a == 0.0 and b == 1.0:
        return math.inf
    if a == 0.0:
        return -math.log1p(-b)
    if b == 1.0:
        return -math.log(a)
    z = chernoff_crossing(a, b)
    return 0.5 * (_kl(z, a) + _kl(z, b))


def chernoff_floor(mu: float, delta_gap: float) -> float:
    """Closed-form lower bound on chernoff_information(mu, mu + delta_gap).

    Evaluates -log(sqrt(mu*(mu+gap)) + sqrt((1-mu)*(1-mu-gap))); used as a
    test oracle bounding the Chernoff information from below.
    """
    mu = as_prob(mu, "mu")
    delta_gap = float(delta_gap)
    if math.isnan(delta_gap) or delta_gap < 0.0:
        raise ValueError(f"delta_gap must be >= 0, got {delta_gap!r}")
    if mu + delta_gap > 1.0:
        raise ValueError(f"mu + delta_gap must not exceed 1, got {mu + delta_gap!r}")
    upper = mu + delta_gap
    s = math.sqrt(mu * upper) + math.sqrt(max(0.0, (1.0 - mu) * (1.0 - upper)))
    if s == 0.0:
        return math.inf
    return -math.log(s)
