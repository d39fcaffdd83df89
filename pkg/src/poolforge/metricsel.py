"""Dispersion-vote selection of one overlapping and one neighborhood measure.

Each iteration resamples a batch of bags from the training instances,
computes every complexity measure on every bag, and gives one vote to
the single measure with the largest standard deviation across the bags.
After all iterations the most-voted measure of each family wins.
High-dispersion measures leave the downstream optimizer more room to
spread bags over the complexity space.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .complexity import ALL_MEASURES, NEIGHBORHOOD_MEASURES, OVERLAPPING_MEASURES, Measure, compute_profile
from .errors import DataError, DegenerateBagError
from .rng import derive_seed, rng_for

DEFAULT_SUBSETS = 100
DEFAULT_SUBSET_FRAC = 0.5
DEFAULT_ITERATIONS = 20

_GUARD_ATTEMPTS = 100


@dataclass
class VoteTally:
    """Vote counts per measure plus the per-family winners."""

    votes: dict[Measure, int]
    iterations: int
    selected: tuple[Measure, Measure]

    def __post_init__(self) -> None:
        if sum(self.votes.values()) != self.iterations:
            raise ValueError("vote counts must sum to the iteration count")

    def as_dict(self) -> dict:
        return {
            "votes": {m.value: self.votes[m] for m in ALL_MEASURES},
            "iterations": self.iterations,
            "cm1": self.selected[0].value,
            "cm2": self.selected[1].value,
        }


def sample_bag(rng: np.random.Generator, n: int, size: int) -> np.ndarray:
    """One bag of instance positions, drawn with replacement."""
    return rng.integers(0, n, size=size, dtype=np.int64)


def draw_valid_bag(
    rng: np.random.Generator, y: np.ndarray, size: int, attempts: int = _GUARD_ATTEMPTS
) -> np.ndarray:
    """Draw bags until one contains at least two classes."""
    n = y.shape[0]
    for _ in range(attempts):
        bag = sample_bag(rng, n, size)
        if np.unique(y[bag]).size >= 2:
            return bag
    raise DegenerateBagError(f"no multi-class bag found in {attempts} draws")


def _family_winner(votes: dict[Measure, int], family: tuple[Measure, ...]) -> Measure:
    # max with ties broken by the fixed measure order (iteration order)
    best = family[0]
    for m in family[1:]:
        if votes[m] > votes[best]:
            best = m
    return best


def select_metrics(
    X: np.ndarray,
    y: np.ndarray,
    n_subsets: int = DEFAULT_SUBSETS,
    subset_frac: float = DEFAULT_SUBSET_FRAC,
    iterations: int = DEFAULT_ITERATIONS,
    seed: int = 0,
) -> VoteTally:
    """Run the dispersion vote over the training instances.

    Per iteration: ``n_subsets`` bags of ``floor(subset_frac * n)``
    instances are drawn with replacement; each of the eleven measures is
    computed per bag; the measure with the largest standard deviation
    (population, ties to the fixed measure order) earns the iteration's
    vote. Returns the tally and the per-family argmax pair; a family
    with zero votes falls back to its first measure in the fixed order.
    """
    if n_subsets < 2:
        raise DataError("n_subsets must be at least 2")
    if iterations < 1:
        raise DataError("iterations must be at least 1")
    if not (0.0 < subset_frac <= 1.0):
        raise DataError("subset_frac must be in (0, 1]")

    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    n = X.shape[0]
    size = max(2, math.floor(subset_frac * n))

    votes: dict[Measure, int] = {m: 0 for m in ALL_MEASURES}
    for it in range(iterations):
        rng = rng_for(seed, "metric-vote", it)
        values = np.empty((len(ALL_MEASURES), n_subsets))
        for b in range(n_subsets):
            bag = draw_valid_bag(rng, y, size)
            profile = compute_profile(
                X[bag], y[bag], seed=derive_seed(seed, "metric-vote-n4", it, b)
            )
            for mi, m in enumerate(ALL_MEASURES):
                values[mi, b] = profile[m]
        stds = values.std(axis=1)
        winner = ALL_MEASURES[int(np.argmax(stds))]  # argmax: lowest index on ties
        votes[winner] += 1

    cm1 = _family_winner(votes, OVERLAPPING_MEASURES)
    cm2 = _family_winner(votes, NEIGHBORHOOD_MEASURES)
    return VoteTally(votes=votes, iterations=iterations, selected=(cm1, cm2))
