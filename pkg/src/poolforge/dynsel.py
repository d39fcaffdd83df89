"""Dynamic classifier and ensemble selection over a trained pool.

All methods estimate member competence on the ``k`` validation (DSEL)
instances nearest to the query and are deterministic: neighbor ties go
to the lowest instance index, member-competence ties to the lowest
member index, and vote ties to the lowest class id.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DataError
from .learner import Pool, majority_vote_rows

DEFAULT_K = 7


@dataclass
class RegionOfCompetence:
    """The k nearest DSEL instances to a query, ascending by distance."""

    indices: np.ndarray
    distances: np.ndarray


def region_of_competence(query: np.ndarray, dsel_X: np.ndarray, k: int) -> RegionOfCompetence:
    if k < 1 or k > dsel_X.shape[0]:
        raise DataError(f"k must be in [1, {dsel_X.shape[0]}]")
    dist = np.sqrt(np.sum((dsel_X - query[None, :]) ** 2, axis=1))
    order = np.lexsort((np.arange(dist.shape[0]), dist))[:k]
    return RegionOfCompetence(indices=order, distances=dist[order])


class DselScorer:
    """Precomputed member behavior on the DSEL set, shared across queries."""

    def __init__(self, pool: Pool, dsel_X: np.ndarray, dsel_y: np.ndarray,
                 dsel_predictions: np.ndarray | None = None) -> None:
        if not pool.members:
            raise DataError("empty pool")
        dsel_X = np.asarray(dsel_X, dtype=np.float64)
        dsel_y = np.asarray(dsel_y, dtype=np.int64)
        if dsel_predictions is None:
            dsel_predictions = pool.predict_batch(dsel_X)
        self.pool = pool
        self.dsel_X = dsel_X
        self.dsel_y = dsel_y
        self.predictions = np.asarray(dsel_predictions, dtype=np.int64)
        self.correct = self.predictions == dsel_y[None, :]

    def query_predictions(self, x: np.ndarray) -> np.ndarray:
        return np.array([m.model.predict(x) for m in self.pool.members], dtype=np.int64)

    def mvr(self, query_preds: np.ndarray) -> int:
        votes = np.bincount(query_preds, minlength=self.pool.n_classes)
        return int(np.argmax(votes))


def _prepare(pool, dsel_X, dsel_y, dsel_predictions) -> DselScorer:
    if isinstance(pool, DselScorer):
        return pool
    return DselScorer(pool, dsel_X, dsel_y, dsel_predictions)


def ola(pool, dsel_X, dsel_y, query, k: int = DEFAULT_K, dsel_predictions=None,
        query_predictions=None) -> int:
    """Overall local accuracy: the member most accurate on the region wins."""
    s = _prepare(pool, dsel_X, dsel_y, dsel_predictions)
    query = np.asarray(query, dtype=np.float64)
    roc = region_of_competence(query, s.dsel_X, k)
    if query_predictions is None:
        query_predictions = s.query_predictions(query)
    competence = s.correct[:, roc.indices].mean(axis=1)
    return int(query_predictions[int(np.argmax(competence))])


def lca(pool, dsel_X, dsel_y, query, k: int = DEFAULT_K, dsel_predictions=None,
        query_predictions=None) -> int:
    """Local class accuracy: accuracy over neighbors of the member's
    predicted class for the query; an absent class scores 0."""
    s = _prepare(pool, dsel_X, dsel_y, dsel_predictions)
    query = np.asarray(query, dtype=np.float64)
    roc = region_of_competence(query, s.dsel_X, k)
    query_preds = s.query_predictions(query) if query_predictions is None else query_predictions
    labels = s.dsel_y[roc.indices]
    competence = np.zeros(s.pool.size)
    for i, pred in enumerate(query_preds):
        mask = labels == pred
        if mask.any():
            competence[i] = s.correct[i, roc.indices[mask]].mean()
    return int(query_preds[int(np.argmax(competence))])


def rank(pool, dsel_X, dsel_y, query, k: int = DEFAULT_K, dsel_predictions=None,
         query_predictions=None) -> int:
    """Competence = consecutive correct neighbors starting at the nearest."""
    s = _prepare(pool, dsel_X, dsel_y, dsel_predictions)
    query = np.asarray(query, dtype=np.float64)
    roc = region_of_competence(query, s.dsel_X, k)
    if query_predictions is None:
        query_predictions = s.query_predictions(query)
    rows = s.correct[:, roc.indices]
    wrong_padded = np.concatenate([~rows, np.ones((rows.shape[0], 1), dtype=bool)], axis=1)
    streaks = wrong_padded.argmax(axis=1)
    return int(query_predictions[int(np.argmax(streaks))])


def knora_e(pool, dsel_X, dsel_y, query, k: int = DEFAULT_K, dsel_predictions=None,
            query_predictions=None) -> int:
    """KNORA-Eliminate: members correct on the whole region vote; the
    region shrinks until someone qualifies, falling back to majority
    voting over the full pool."""
    s = _prepare(pool, dsel_X, dsel_y, dsel_predictions)
    query = np.asarray(query, dtype=np.float64)
    roc = region_of_competence(query, s.dsel_X, k)
    query_preds = s.query_predictions(query) if query_predictions is None else query_predictions
    for kk in range(k, 0, -1):
        qualified = s.correct[:, roc.indices[:kk]].all(axis=1)
        if qualified.any():
            votes = np.bincount(query_preds[qualified], minlength=s.pool.n_classes)
            return int(np.argmax(votes))
    return s.mvr(query_preds)


def knora_u(pool, dsel_X, dsel_y, query, k: int = DEFAULT_K, dsel_predictions=None,
            query_predictions=None) -> int:
    """KNORA-Union: each member casts one vote per neighbor it classifies
    correctly; all-zero votes fall back to majority voting."""
    s = _prepare(pool, dsel_X, dsel_y, dsel_predictions)
    query = np.asarray(query, dtype=np.float64)
    roc = region_of_competence(query, s.dsel_X, k)
    query_preds = s.query_predictions(query) if query_predictions is None else query_predictions
    weights = s.correct[:, roc.indices].sum(axis=1)
    if not weights.any():
        return s.mvr(query_preds)
    votes = np.zeros(s.pool.n_classes, dtype=np.int64)
    np.add.at(votes, query_preds, weights)
    return int(np.argmax(votes))


COMBINERS = {
    "mvr": None,  # plain majority voting, no region needed
    "ola": ola,
    "lca": lca,
    "rank": rank,
    "knora-e": knora_e,
    "knora-u": knora_u,
}


def evaluate_pool(
    pool: Pool,
    test_X: np.ndarray,
    test_y: np.ndarray,
    dsel_X: np.ndarray | None = None,
    dsel_y: np.ndarray | None = None,
    combiner: str = "mvr",
    k: int = DEFAULT_K,
) -> float:
    """Test-set accuracy of a pool under one combiner."""
    if combiner not in COMBINERS:
        raise DataError(f"unknown combiner: {combiner!r}")
    test_X = np.asarray(test_X, dtype=np.float64)
    test_y = np.asarray(test_y, dtype=np.int64)
    test_preds = pool.predict_batch(test_X)
    if combiner == "mvr":
        combined = majority_vote_rows(test_preds, pool.n_classes)
        return float(np.mean(combined == test_y))
    if dsel_X is None or dsel_y is None:
        raise DataError(f"combiner {combiner!r} needs a DSEL set")
    scorer = DselScorer(pool, dsel_X, dsel_y)
    method = COMBINERS[combiner]
    correct = 0
    for row in range(test_X.shape[0]):
        pred = method(scorer, None, None, test_X[row], k=k,
                      query_predictions=test_preds[:, row])
        correct += int(pred == test_y[row])
    return correct / test_X.shape[0]
