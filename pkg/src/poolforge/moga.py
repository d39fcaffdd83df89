"""Multi-objective evolution of instance bags.

Chromosomes are fixed-length vectors of training-instance positions
(half the training set). Each generation produces offspring through
interval crossover and donor-gene mutation, evaluates parents and
offspring together, and selects survivors with NSGA-II (non-dominated
sorting plus crowding distance). The three objectives per bag are:

- dispersion of the bag's value under each of two complexity measures,
  i.e. the mean absolute difference to every other bag's value
  (maximized, one objective per measure);
- the bag's classifier mean double fault against all other classifiers
  on the validation set (minimized: fewer coincident errors).

The run keeps the generation whose population fitness is most spread
out (largest mean pairwise Euclidean distance between fitness rows) and
returns a pool of perceptrons trained on that generation's bags.

Cost note: per-bag measure values and classifiers are cached by bag
content, so a generation costs one measure/train pass over new bags
plus O(population^2) aggregation for the dispersion and double-fault
objectives and the NSGA-II sort.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .complexity import Measure, measure_value, pairwise_distances
from .diversity import ddv_all
from .errors import DataError, DegenerateBagError
from .learner import (
    PerceptronConfig,
    Pool,
    PoolMember,
    bag_training_seed,
    train_perceptron,
)
from .rng import bag_fingerprint, derive_seed, rng_for

_GUARD_ATTEMPTS = 100

DEFAULT_OBJECTIVES = ("phi1", "phi2", "ddv")


@dataclass
class GaConfig:
    """Evolution parameters.

    ``offspring_size`` is the number of new bags produced per
    generation; ``selection_size`` is accepted for interface
    completeness and must equal it (it has no independent role).
    """

    generations: int = 20
    population_size: int = 100
    offspring_size: int = 100
    selection_size: int | None = None
    crossover_prob: float = 0.9
    mutation_prob: float = 0.2
    seed: int = 0

    def __post_init__(self) -> None:
        if self.generations < 1:
            raise DataError("generations must be >= 1")
        if self.population_size < 2 or self.offspring_size < 2:
            raise DataError("population and offspring sizes must be >= 2")
        if self.selection_size is None:
            self.selection_size = self.offspring_size
        if self.selection_size != self.offspring_size:
            raise DataError("selection_size must equal offspring_size")
        for p in (self.crossover_prob, self.mutation_prob):
            if not (0.0 <= p <= 1.0):
                raise DataError("probabilities must be in [0, 1]")


@dataclass
class GenerationRecord:
    """Snapshot of one generation: bags, fitness matrix, global dispersion."""

    index: int
    population: list[np.ndarray]
    fitness: np.ndarray
    g_disp: float


def chromosome_length(n_train: int) -> int:
    return math.floor(0.5 * n_train)


def _bag_is_valid(bag: np.ndarray, y: np.ndarray, n_classes: int) -> bool:
    return bag.shape[0] >= n_classes and np.unique(y[bag]).size >= 2


def init_population(y: np.ndarray, cfg: GaConfig) -> list[np.ndarray]:
    """Random initial bags, each sampled without replacement.

    Requires at least 4 training instances so the half-size chromosome
    can hold two classes.
    """
    n = y.shape[0]
    if n < 4:
        raise DataError("need at least 4 training instances")
    length = chromosome_length(n)
    n_classes = int(y.max()) + 1
    rng = rng_for(cfg.seed, "ga-init")
    population = []
    for _ in range(cfg.population_size):
        for _ in range(_GUARD_ATTEMPTS):
            bag = rng.choice(n, size=length, replace=False).astype(np.int64)
            if _bag_is_valid(bag, y, n_classes):
                population.append(bag)
                break
        else:
            raise DegenerateBagError("initial population guard exhausted")
    return population


def crossover(
    population: list[np.ndarray],
    rng: np.random.Generator,
    y: np.ndarray | None = None,
    n_classes: int = 2,
) -> np.ndarray:
    """Interval crossover of two distinct random parents.

    Draws ``start`` uniformly in ``[0, L]`` and ``end`` in
    ``[start, L]``; gene ``k`` comes from the first parent when
    ``k <= start`` or ``k >= end`` and from the second otherwise. When a
    label vector is supplied, invalid children are re-drawn (fresh
    parents and cut points), up to 100 attempts.
    """
    if len(population) < 2:
        raise DataError("crossover needs at least 2 individuals")
    length = population[0].shape[0]
    for _ in range(_GUARD_ATTEMPTS):
        i = int(rng.integers(len(population)))
        j = int(rng.integers(len(population) - 1))
        if j >= i:
            j += 1
        start = int(rng.integers(0, length + 1))
        end = int(rng.integers(start, length + 1))
        k = np.arange(length)
        child = np.where((k <= start) | (k >= end), population[i], population[j])
        if y is None or _bag_is_valid(child, y, n_classes):
            return child
    raise DegenerateBagError("crossover guard exhausted")


def mutate(
    population: list[np.ndarray],
    rng: np.random.Generator,
    receiver: np.ndarray | None = None,
    y: np.ndarray | None = None,
    n_classes: int = 2,
) -> np.ndarray:
    """Replace one gene of a receiver with a gene from a random donor.

    The receiver defaults to a random pick from the population (the
    donor may be the same individual). Returns a new array; with a label
    vector the degeneracy guard re-draws invalid results.
    """
    if len(population) < 2:
        raise DataError("mutation needs at least 2 individuals")
    base = receiver if receiver is not None else None
    for _ in range(_GUARD_ATTEMPTS):
        if base is None:
            source = population[int(rng.integers(len(population)))]
        else:
            source = base
        donor = population[int(rng.integers(len(population)))]
        child = source.copy()
        position = int(rng.integers(child.shape[0]))
        child[position] = donor[int(rng.integers(donor.shape[0]))]
        if y is None or _bag_is_valid(child, y, n_classes):
            return child
    raise DegenerateBagError("mutation guard exhausted")


def make_offspring(
    population: list[np.ndarray],
    cfg: GaConfig,
    rng: np.random.Generator,
    y: np.ndarray,
    n_classes: int,
) -> list[np.ndarray]:
    """Produce ``offspring_size`` children: crossover with probability
    ``crossover_prob`` (else a cloned random parent), then mutation with
    probability ``mutation_prob``."""
    children = []
    for _ in range(cfg.offspring_size):
        if rng.random() < cfg.crossover_prob:
            child = crossover(population, rng, y=y, n_classes=n_classes)
        else:
            child = population[int(rng.integers(len(population)))].copy()
        if rng.random() < cfg.mutation_prob:
            child = mutate(population, rng, receiver=child, y=y, n_classes=n_classes)
        children.append(child)
    return children


# ---------------------------------------------------------------------------
# Fitness aggregation
# ---------------------------------------------------------------------------


def pairwise_dispersion(values: np.ndarray) -> np.ndarray:
    """Per element: mean absolute difference to all other elements."""
    values = np.asarray(values, dtype=np.float64)
    if values.shape[0] < 2:
        raise DataError("dispersion needs at least 2 values")
    diffs = np.abs(values[:, None] - values[None, :])
    return diffs.sum(axis=1) / (values.shape[0] - 1)


def g_disp(fitness: np.ndarray) -> float:
    """Mean over individuals of their mean fitness-space distance to the rest.

    Zero exactly when all fitness rows coincide; grows with population
    spread. Homogeneous of degree one in the fitness values.
    """
    F = np.asarray(fitness, dtype=np.float64)
    if F.ndim == 1:
        F = F[:, None]
    mu = F.shape[0]
    if mu < 2:
        raise DataError("global dispersion needs at least 2 individuals")
    diff = F[:, None, :] - F[None, :, :]
    dist = np.sqrt(np.sum(diff**2, axis=2))
    return float(dist.sum() / (mu * (mu - 1)))


# ---------------------------------------------------------------------------
# NSGA-II selection
# ---------------------------------------------------------------------------


def fast_nondominated_sort(minim: np.ndarray) -> list[np.ndarray]:
    """Fronts of a minimization objective matrix (Deb's fast sort)."""
    n = minim.shape[0]
    le = np.ones((n, n), dtype=bool)
    lt = np.zeros((n, n), dtype=bool)
    for k in range(minim.shape[1]):
        col = minim[:, k]
        le &= col[:, None] <= col[None, :]
        lt |= col[:, None] < col[None, :]
    dominates = le & lt  # [i, j] True when i dominates j
    dominated_count = dominates.sum(axis=0).astype(np.int64)
    fronts = []
    current = np.flatnonzero(dominated_count == 0)
    assigned = np.zeros(n, dtype=bool)
    while current.size:
        fronts.append(current)
        assigned[current] = True
        dominated_count = dominated_count - dominates[current].sum(axis=0)
        current = np.flatnonzero((dominated_count == 0) & ~assigned)
    return fronts


def crowding_distance(minim: np.ndarray, front: np.ndarray) -> np.ndarray:
    """Crowding distances of one front (boundary points get +inf)."""
    size = front.shape[0]
    dist = np.zeros(size)
    if size <= 2:
        dist[:] = np.inf
        return dist
    for k in range(minim.shape[1]):
        col = minim[front, k]
        order = np.argsort(col, kind="stable")
        span = col[order[-1]] - col[order[0]]
        dist[order[0]] = dist[order[-1]] = np.inf
        if span > 0:
            gaps = (col[order[2:]] - col[order[:-2]]) / span
            dist[order[1:-1]] += gaps
    return dist


def nsga2_select_indices(
    fitness: np.ndarray,
    mu: int,
    maximize: tuple[bool, ...],
) -> np.ndarray:
    """Indices of the ``mu`` survivors of a combined population.

    Fronts fill in order; the final front is truncated by descending
    crowding distance with ties broken by individual index. The returned
    indices are sorted ascending, so selection is the identity when
    ``mu`` equals the population size.
    """
    F = np.asarray(fitness, dtype=np.float64)
    if F.ndim == 1:
        F = F[:, None]
    if F.shape[0] < mu:
        raise DataError("not enough individuals to select from")
    if len(maximize) != F.shape[1]:
        raise DataError("one direction flag per objective required")
    signs = np.array([-1.0 if m else 1.0 for m in maximize])
    minim = F * signs[None, :]

    chosen: list[int] = []
    for front in fast_nondominated_sort(minim):
        if len(chosen) + front.size <= mu:
            chosen.extend(front.tolist())
        else:
            dist = crowding_distance(minim, front)
            order = sorted(range(front.size), key=lambda t: (-dist[t], front[t]))
            need = mu - len(chosen)
            chosen.extend(front[order[:need]].tolist())
        if len(chosen) == mu:
            break
    return np.array(sorted(chosen), dtype=np.int64)


def nsga2_select(
    parents: list[np.ndarray],
    offspring: list[np.ndarray],
    fitness: np.ndarray,
    mu: int,
    maximize: tuple[bool, ...] = (True, True, False),
) -> list[np.ndarray]:
    """NSGA-II survivor selection over parents + offspring."""
    combined = list(parents) + list(offspring)
    if len(combined) != np.asarray(fitness).shape[0]:
        raise DataError("fitness matrix must cover parents plus offspring")
    idx = nsga2_select_indices(fitness, mu, maximize)
    return [combined[i] for i in idx]


# ---------------------------------------------------------------------------
# Evaluation context (per-bag caching) and the full run
# ---------------------------------------------------------------------------


class _EvalContext:
    """Caches per-bag measure values and trained classifiers by content."""

    def __init__(
        self,
        train_X: np.ndarray,
        train_y: np.ndarray,
        val_X: np.ndarray,
        val_y: np.ndarray,
        cm1: Measure,
        cm2: Measure,
        seed: int,
        objectives: tuple[str, ...],
        learner_config: PerceptronConfig | None,
    ) -> None:
        self.train_X = train_X
        self.train_y = train_y
        self.val_X = val_X
        self.val_y = val_y
        self.cm = {"phi1": cm1, "phi2": cm2}
        self.seed = seed
        self.objectives = objectives
        self.learner_config = learner_config
        self.n_classes = int(train_y.max()) + 1
        self._values: dict[tuple[str, bytes], float] = {}
        self._models: dict[bytes, tuple] = {}

    def _measure(self, objective: str, bag: np.ndarray, key: bytes) -> float:
        cache_key = (objective, key)
        if cache_key not in self._values:
            measure = self.cm[objective]
            X, y = self.train_X[bag], self.train_y[bag]
            distances = None
            if measure.family == "neighborhood" and measure is not Measure.N4:
                distances = pairwise_distances(X)
            self._values[cache_key] = measure_value(
                measure,
                X,
                y,
                seed=derive_seed(self.seed, "n4", key),
                distances=distances,
            )
        return self._values[cache_key]

    def model_for(self, bag: np.ndarray):
        key = bag_fingerprint(bag)
        if key not in self._models:
            model = train_perceptron(
                self.train_X[bag],
                self.train_y[bag],
                self.n_classes,
                config=self.learner_config,
                seed=bag_training_seed(self.seed, bag),
            )
            correct = model.predict_batch(self.val_X) == self.val_y
            self._models[key] = (model, correct)
        return self._models[key]

    def evaluate(self, population: list[np.ndarray]) -> np.ndarray:
        """Objective matrix of a population (values are population-relative)."""
        columns = []
        for objective in self.objectives:
            if objective == "ddv":
                correct = np.stack([self.model_for(bag)[1] for bag in population])
                columns.append(ddv_all(correct))
            else:
                raw = np.array(
                    [
                        self._measure(objective, bag, bag_fingerprint(bag))
                        for bag in population
                    ]
                )
                columns.append(pairwise_dispersion(raw))
        return np.column_stack(columns)


def objective_directions(objectives: tuple[str, ...]) -> tuple[bool, ...]:
    """True = maximize. Dispersion objectives are maximized, the
    coincident-error objective is minimized."""
    return tuple(obj != "ddv" for obj in objectives)


def run_pgdcs(
    train_X: np.ndarray,
    train_y: np.ndarray,
    val_X: np.ndarray,
    val_y: np.ndarray,
    cfg: GaConfig,
    cm1: Measure,
    cm2: Measure,
    objectives: tuple[str, ...] = DEFAULT_OBJECTIVES,
    learner_config: PerceptronConfig | None = None,
) -> tuple[Pool, list[GenerationRecord]]:
    """Full evolution run; returns the pool of the best generation.

    Every generation evaluates parents and offspring together (the
    dispersion objectives are only meaningful within one evaluation
    population), selects ``population_size`` survivors with NSGA-II, and
    records the survivors' self-consistent fitness matrix and its global
    dispersion. The generation with the highest dispersion (the initial
    population included) supplies the final bags; ties keep the earliest
    generation. Classifiers are deterministic functions of (seed, bag),
    so the returned pool reproduces the weights seen during evaluation.
    """
    unknown = [o for o in objectives if o not in DEFAULT_OBJECTIVES]
    if unknown:
        raise DataError(f"unknown objectives: {unknown}")
    if not objectives:
        raise DataError("at least one objective required")

    train_X = np.asarray(train_X, dtype=np.float64)
    train_y = np.asarray(train_y, dtype=np.int64)
    val_X = np.asarray(val_X, dtype=np.float64)
    val_y = np.asarray(val_y, dtype=np.int64)
    ctx = _EvalContext(
        train_X, train_y, val_X, val_y, cm1, cm2, cfg.seed, objectives, learner_config
    )
    directions = objective_directions(objectives)
    rng = rng_for(cfg.seed, "ga-loop")

    population = init_population(train_y, cfg)
    fitness = ctx.evaluate(population)
    records = [
        GenerationRecord(0, [b.copy() for b in population], fitness, g_disp(fitness))
    ]
    best = records[0]

    for t in range(1, cfg.generations + 1):
        offspring = make_offspring(population, cfg, rng, train_y, ctx.n_classes)
        combined = population + offspring
        combined_fitness = ctx.evaluate(combined)
        idx = nsga2_select_indices(combined_fitness, cfg.population_size, directions)
        population = [combined[i] for i in idx]
        fitness = ctx.evaluate(population)
        record = GenerationRecord(
            t, [b.copy() for b in population], fitness, g_disp(fitness)
        )
        records.append(record)
        if record.g_disp > best.g_disp:
            best = record

    members = []
    for bag in best.population:
        model, _ = ctx.model_for(bag)
        members.append(PoolMember(model=model, bag=bag.copy()))
    pool = Pool(
        members=members,
        metadata={
            "method": "pgdcs",
            "seed": cfg.seed,
            "pool_size": cfg.population_size,
            "cm1": cm1.value,
            "cm2": cm2.value,
            "objectives": list(objectives),
            "chosen_generation": best.index,
            "g_disp_history": [r.g_disp for r in records],
        },
    )
    return pool, records
