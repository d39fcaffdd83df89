"""Linear perceptron base classifier, classifier pools, and bagging.

Perceptrons are one-vs-rest linear units with a bias term, trained with
the classic mistake-driven update; prediction is the argmax over class
scores with ties to the lowest class id. A :class:`Pool` is an ordered
list of trained perceptrons, each carrying the instance bag it was
trained on, plus provenance metadata, and serializes to JSON so pools
can be evaluated without the training data.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from numba import njit

from .errors import DataError, DegenerateBagError
from .metricsel import draw_valid_bag
from .rng import bag_fingerprint, derive_seed

DEFAULT_POOL_SIZE = 100
DEFAULT_BAG_FRAC = 0.5


@dataclass
class PerceptronConfig:
    epochs: int = 100
    learning_rate: float = 1.0

    def __post_init__(self) -> None:
        if self.epochs < 1:
            raise DataError("epochs must be >= 1")
        if self.learning_rate <= 0:
            raise DataError("learning_rate must be positive")


@dataclass
class Perceptron:
    """One-vs-rest linear classifier.

    ``weights`` has shape ``(n_classes, n_features + 1)``; the last
    column is the bias. Immutable after training.
    """

    weights: np.ndarray
    training_seed: int = 0
    epochs_run: int = 0

    def __post_init__(self) -> None:
        W = np.asarray(self.weights, dtype=np.float64)
        if W.ndim != 2:
            raise DataError("weight matrix must be 2-D")
        if not np.isfinite(W).all():
            raise DataError("weight matrix must be finite")
        W.flags.writeable = False
        self.weights = W

    @property
    def n_classes(self) -> int:
        return self.weights.shape[0]

    @property
    def n_features(self) -> int:
        return self.weights.shape[1] - 1

    def scores(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        if x.shape != (self.n_features,):
            raise DataError(f"expected {self.n_features} features, got {x.shape}")
        return self.weights[:, :-1] @ x + self.weights[:, -1]

    def predict(self, x: np.ndarray) -> int:
        """Class with the highest score; exact ties go to the lowest id."""
        return int(np.argmax(self.scores(x)))

    def predict_batch(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2 or X.shape[1] != self.n_features:
            raise DataError(f"expected (m, {self.n_features}) features")
        return np.argmax(X @ self.weights[:, :-1].T + self.weights[:, -1], axis=1)


@njit(cache=True)
def _train_loop(Xb, targets, perms, y, learning_rate):  # pragma: no cover - jitted
    n_classes, n = targets.shape
    width = Xb.shape[1]
    W = np.zeros((n_classes, width))
    epochs_run = 0
    for epoch in range(perms.shape[0]):
        for p in range(n):
            i = perms[epoch, p]
            for c in range(n_classes):
                score = 0.0
                for k in range(width):
                    score += W[c, k] * Xb[i, k]
                pred = 1.0 if score >= 0.0 else -1.0
                step = (targets[c, i] - pred) / 2.0
                if step != 0.0:
                    for k in range(width):
                        W[c, k] += learning_rate * step * Xb[i, k]
        epochs_run = epoch + 1
        clean = True
        for i in range(n):
            best_c = 0
            best_s = -np.inf
            for c in range(n_classes):
                score = 0.0
                for k in range(width):
                    score += W[c, k] * Xb[i, k]
                if score > best_s:
                    best_s = score
                    best_c = c
            if best_c != y[i]:
                clean = False
                break
        if clean:
            break
    return W, epochs_run


def train_perceptron(
    X: np.ndarray,
    y: np.ndarray,
    n_classes: int,
    config: PerceptronConfig | None = None,
    seed: int = 0,
) -> Perceptron:
    """Train one-vs-rest perceptrons on a bag.

    Instance order is reshuffled every epoch from ``seed``; training
    stops at the epoch cap or as soon as the argmax prediction makes no
    error on the bag. Requires at least two classes in the bag.
    """
    config = config or PerceptronConfig()
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    if np.unique(y).size < 2:
        raise DegenerateBagError("cannot train on a single-class bag")
    n, f = X.shape
    Xb = np.concatenate([X, np.ones((n, 1))], axis=1)
    targets = np.where(np.arange(n_classes)[:, None] == y[None, :], 1.0, -1.0)
    rng = np.random.default_rng(seed)
    perms = np.stack([rng.permutation(n) for _ in range(config.epochs)])
    W, epochs_run = _train_loop(Xb, targets, perms, y, float(config.learning_rate))
    return Perceptron(weights=W, training_seed=seed, epochs_run=int(epochs_run))


@dataclass
class PoolMember:
    model: Perceptron
    bag: np.ndarray


@dataclass
class Pool:
    """Ordered collection of trained classifiers with provenance metadata."""

    members: list[PoolMember]
    metadata: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not self.members:
            raise DataError("pool must have at least one member")

    @property
    def size(self) -> int:
        return len(self.members)

    @property
    def n_classes(self) -> int:
        return self.members[0].model.n_classes

    @property
    def n_features(self) -> int:
        return self.members[0].model.n_features

    def predict_batch(self, X: np.ndarray) -> np.ndarray:
        """Member predictions as an ``(n_members, n_instances)`` matrix."""
        return np.stack([m.model.predict_batch(X) for m in self.members])

    def to_json(self) -> dict:
        return {
            "metadata": self.metadata,
            "members": [
                {
                    "weights": m.model.weights[:, :-1].tolist(),
                    "bias": m.model.weights[:, -1].tolist(),
                    "bag_indices": m.bag.tolist(),
                    "training_seed": m.model.training_seed,
                    "epochs_run": m.model.epochs_run,
                }
                for m in self.members
            ],
        }

    @classmethod
    def from_json(cls, payload: dict) -> "Pool":
        members = []
        for entry in payload["members"]:
            weights = np.asarray(entry["weights"], dtype=np.float64)
            bias = np.asarray(entry["bias"], dtype=np.float64)
            if weights.ndim != 2 or bias.shape != (weights.shape[0],):
                raise DataError("malformed pool member weights")
            members.append(
                PoolMember(
                    model=Perceptron(
                        weights=np.concatenate([weights, bias[:, None]], axis=1),
                        training_seed=int(entry.get("training_seed", 0)),
                        epochs_run=int(entry.get("epochs_run", 0)),
                    ),
                    bag=np.asarray(entry["bag_indices"], dtype=np.int64),
                )
            )
        return cls(members=members, metadata=dict(payload.get("metadata", {})))

    def save(self, path: str | Path) -> Path:
        path = Path(path)
        path.write_text(json.dumps(self.to_json(), indent=2, sort_keys=True) + "\n")
        return path

    @classmethod
    def load(cls, path: str | Path) -> "Pool":
        path = Path(path)
        if not path.exists():
            raise DataError(f"no such pool file: {path}")
        try:
            payload = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise DataError(f"{path}: invalid pool JSON ({exc})") from None
        return cls.from_json(payload)


def majority_vote(pool: Pool, x: np.ndarray) -> int:
    """Plurality class over member predictions; ties to the lowest id."""
    votes = np.bincount(
        [m.model.predict(x) for m in pool.members], minlength=pool.n_classes
    )
    return int(np.argmax(votes))


def majority_vote_rows(predictions: np.ndarray, n_classes: int) -> np.ndarray:
    """Column-wise plurality of an ``(n_members, n_instances)`` matrix."""
    counts = np.zeros((predictions.shape[1], n_classes), dtype=np.int64)
    cols = np.arange(predictions.shape[1])
    for row in predictions:
        np.add.at(counts, (cols, row), 1)
    return np.argmax(counts, axis=1)


def bag_training_seed(master_seed: int, bag: np.ndarray) -> int:
    """Training seed derived from bag content, not evaluation order."""
    return derive_seed(master_seed, "perceptron", bag_fingerprint(bag))


def bagging_generate(
    X: np.ndarray,
    y: np.ndarray,
    pool_size: int = DEFAULT_POOL_SIZE,
    bag_frac: float = DEFAULT_BAG_FRAC,
    seed: int = 0,
    config: PerceptronConfig | None = None,
) -> Pool:
    """Bootstrap-style pool: resampled bags, one perceptron per bag.

    Bags are drawn with replacement at ``bag_frac`` of the training size
    (default 0.5 so the bag size matches the evolved pools; pass 1.0 for
    the classic full-size bootstrap). Single-class bags are re-drawn, up
    to 100 attempts each.
    """
    if pool_size < 1:
        raise DataError("pool_size must be >= 1")
    if not (0.0 < bag_frac <= 1.0):
        raise DataError("bag_frac must be in (0, 1]")
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    n_classes = int(y.max()) + 1
    size = max(2, int(bag_frac * X.shape[0]))
    rng = np.random.default_rng(derive_seed(seed, "bagging"))
    members = []
    for _ in range(pool_size):
        bag = draw_valid_bag(rng, y, size)
        model = train_perceptron(
            X[bag], y[bag], n_classes, config=config, seed=bag_training_seed(seed, bag)
        )
        members.append(PoolMember(model=model, bag=bag))
    return Pool(
        members=members,
        metadata={
            "method": "bagging",
            "seed": seed,
            "pool_size": pool_size,
            "bag_frac": bag_frac,
        },
    )
