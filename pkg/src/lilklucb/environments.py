"""Reward-generating processes for simulation experiments.

Three arm families, all with support inside [0, 1]: parametric Bernoulli,
finite discrete distributions, and bootstrap replay of an observed pool of
ratings.  An Environment bundles one distribution per arm with the analytic
means, ordered so arm 0 is the unique best arm.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from .data_ingest import ContestDataset
from .kl_math import as_prob

# Star ratings collapse onto [0, 1] rewards; configurable because any
# three increasing values in [0, 1] give a valid bounded-reward mapping.
DEFAULT_STAR_MAP = {1: 0.0, 2: 0.5, 3: 1.0}

MEAN_MATCH_TOL = 1e-12


@dataclass(frozen=True)
class Bernoulli:
    """Arm paying 1 with probability p, else 0."""

    p: float

    def __post_init__(self) -> None:
        as_prob(self.p, "p")

    @property
    def mean(self) -> float:
        return self.p

    def draw(self, rng: np.random.Generator) -> float:
        return 1.0 if rng.random() < self.p else 0.0


@dataclass(frozen=True)
class Discrete:
    """Arm drawing from finitely many values in [0, 1] with fixed weights."""

    values: tuple[float, ...]
    weights: tuple[float, ...]
    _cum: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if not self.values or len(self.values) != len(self.weights):
            raise ValueError("values and weights must be non-empty and equal length")
        for v in self.values:
            as_prob(v, "support value")
        if any(w < 0.0 for w in self.weights):
            raise ValueError("weights must be non-negative")
        total = math.fsum(self.weights)
        if abs(total - 1.0) > 1e-12:
            raise ValueError(f"weights must sum to 1 within 1e-12, got {total!r}")
        object.__setattr__(self, "_cum", np.cumsum(np.asarray(self.weights)))

    @property
    def mean(self) -> float:
        return math.fsum(v * w for v, w in zip(self.values, self.weights))

    def draw(self, rng: np.random.Generator) -> float:
        idx = int(np.searchsorted(self._cum, rng.random(), side="right"))
        return self.values[min(idx, len(self.values) - 1)]


@dataclass(frozen=True)
class Bootstrap:
    """Arm resampling uniformly with replacement from an observed pool."""

    pool: tuple[float, ...]

    def __post_init__(self) -> None:
        if not self.pool:
            raise ValueError("bootstrap pool must be non-empty")
        for v in self.pool:
            as_prob(v, "pool value")

    @property
    def mean(self) -> float:
        return math.fsum(self.pool) / len(self.pool)

    def draw(self, rng: np.random.Generator) -> float:
        return self.pool[int(rng.integers(len(self.pool)))]


ArmDistribution = Union[Bernoulli, Discrete, Bootstrap]


@dataclass(frozen=True)
class Environment:
    """A fixed set of arms with known means, arm 0 strictly best.

    Immutable; concurrent runs should derive independent generators (e.g.
    via with_seed) rather than share one.
    """

    arms: tuple[ArmDistribution, ...]
    true_means: tuple[float, ...]
    seed: int = 0

    def __post_init__(self) -> None:
        if len(self.arms) != len(self.true_means):
            raise ValueError("one true mean per arm required")
        if len(self.arms) >= 2 and not self.true_means[0] > self.true_means[1]:
            raise ValueError("arm 0 must be the unique best arm")
        for a, b in zip(self.true_means, self.true_means[1:]):
            if b > a:
                raise ValueError("true_means must be non-increasing")
        for arm, mu in zip(self.arms, self.true_means):
            as_prob(mu, "true mean")
            if abs(arm.mean - mu) > MEAN_MATCH_TOL:
                raise ValueError(
                    f"stored mean {mu!r} disagrees with analytic mean {arm.mean!r}"
                )

    @property
    def n_arms(self) -> int:
        return len(self.arms)

    def with_seed(self, seed: int) -> "Environment":
        return Environment(self.arms, self.true_means, seed)

    def rng(self) -> np.random.Generator:
        return np.random.default_rng(self.seed)


def sample(env: Environment, arm: int, rng: np.random.Generator) -> float:
    """Draw one reward from the given arm."""
    if not 0 <= arm < env.n_arms:
        raise IndexError(f"arm index {arm} out of range for {env.n_arms} arms")
    return env.arms[arm].draw(rng)


def parametric_means(n: int, alpha: float) -> tuple[float, ...]:
    """Mean profile 1 - ((i-1)/n)^alpha for i = 1..n; the best mean is exactly 1."""
    if n < 2:
        raise ValueError(f"need at least 2 arms, got {n!r}")
    if not alpha > 0.0:
        raise ValueError(f"alpha must be positive, got {alpha!r}")
    return tuple(1.0 - ((i - 1) / n) ** alpha for i in range(1, n + 1))


def gap_family(n: int, alpha: float) -> tuple[float, ...]:
    """Mean gaps (i/n)^alpha for i = 1..n, strictly increasing."""
    if n < 1:
        raise ValueError(f"need at least 1 gap, got {n!r}")
    if not alpha > 0.0:
        raise ValueError(f"alpha must be positive, got {alpha!r}")
    return tuple((i / n) ** alpha for i in range(1, n + 1))


def bernoulli_environment(means, seed: int = 0) -> Environment:
    """Environment of independent Bernoulli arms with the given mean profile."""
    means = tuple(float(m) for m in means)
    return Environment(tuple(Bernoulli(m) for m in means), means, seed)


def from_contest(
    dataset: ContestDataset,
    star_map: dict[int, float] | None = None,
    seed: int = 0,
) -> Environment:
    """Bootstrap environment from contest vote counts.

    Each caption becomes one arm whose pool holds its observed ratings mapped
    through ``star_map``; arms are reordered by decreasing pool mean.  A tie
    between the top two pool means is rejected rather than perturbed, since
    identification experiments need a unique best arm.
    """
    if star_map is None:
        star_map = DEFAULT_STAR_MAP
    if sorted(star_map) != [1, 2, 3]:
        raise ValueError("star_map must have exactly the keys 1, 2, 3")
    mapped = {s: as_prob(v, f"star_map[{s}]") for s, v in star_map.items()}

    pools = []
    means = []
    for cap in dataset.captions:
        total = sum(cap.star_counts)
        if total < 1:
            raise ValueError(f"caption {cap.text!r} has no votes")
        pool = []
        for star, count in zip((1, 2, 3), cap.star_counts):
            pool.extend([mapped[star]] * count)
        pools.append(tuple(pool))
        means.append(math.fsum(pool) / total)

    order = sorted(range(len(means)), key=lambda i: (-means[i], i))
    if len(order) >= 2 and means[order[0]] == means[order[1]]:
        raise ValueError("top two pool means are tied; no unique best arm")
    arms = tuple(Bootstrap(pools[i]) for i in order)
    true_means = tuple(means[i] for i in order)
    return Environment(arms, true_means, seed)
