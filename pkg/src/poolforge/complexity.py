"""Data-complexity measures of the overlapping and neighborhood families.

Eleven measures over a labeled sample (an instance bag): F1, F1v, F2,
F3, F4 quantify attribute-range/discriminant overlap between classes;
N1, N2, N3, N4, T1, LSC quantify separability through local distance
structure. All return a finite value in ``[0, 1]`` with the convention
*higher = more complex*, using the bounded forms of the standard
taxonomy (F1 reported as ``1/(1+r)``, N2 as ``r/(1+r)``, ...).

Conventions shared by every measure:

- Euclidean distances on the features as given (scale beforehand if
  scale-invariance is wanted).
- Deterministic tie-breaks: lowest instance index for nearest-neighbor
  ties, ``(weight, i, j)`` ordering for spanning-tree edges, lowest
  feature index for F4 feature ties.
- Multiclass inputs are handled by one-vs-one decomposition averaged
  over class pairs (F1, F1v, F2, F3, F4); the neighborhood measures are
  natively multiclass.
- Zero-variance denominators are guarded by ``EPS = 1e-12`` so values
  stay bounded on degenerate bags.

Every measure requires at least 2 instances and 2 classes present and
raises :class:`DegenerateBagError` otherwise. All are pure functions of
their inputs (plus an explicit seed for N4), so they are safe to
evaluate concurrently across bags.
"""

from __future__ import annotations

from enum import Enum

import numpy as np

from .errors import DegenerateBagError

EPS = 1e-12


class Measure(str, Enum):
    """Identifier of one complexity measure; order fixes all tie-breaks."""

    F1 = "F1"
    F1V = "F1v"
    F2 = "F2"
    F3 = "F3"
    F4 = "F4"
    N1 = "N1"
    N2 = "N2"
    N3 = "N3"
    N4 = "N4"
    T1 = "T1"
    LSC = "LSC"

    @property
    def family(self) -> str:
        return "overlapping" if self.value.startswith("F") else "neighborhood"


OVERLAPPING_MEASURES = (Measure.F1, Measure.F1V, Measure.F2, Measure.F3, Measure.F4)
NEIGHBORHOOD_MEASURES = (
    Measure.N1,
    Measure.N2,
    Measure.N3,
    Measure.N4,
    Measure.T1,
    Measure.LSC,
)
ALL_MEASURES = OVERLAPPING_MEASURES + NEIGHBORHOOD_MEASURES


def _check_bag(X: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    if X.ndim != 2 or X.shape[0] != y.shape[0]:
        raise DegenerateBagError("bag features/labels shape mismatch")
    if X.shape[0] < 2:
        raise DegenerateBagError("bag needs at least 2 instances")
    if np.unique(y).size < 2:
        raise DegenerateBagError("bag has a single class")
    return X, y


def pairwise_distances(X: np.ndarray) -> np.ndarray:
    """Dense Euclidean distance matrix with an exact zero diagonal."""
    sq = np.sum(X**2, axis=1)
    d2 = sq[:, None] + sq[None, :] - 2.0 * (X @ X.T)
    np.clip(d2, 0.0, None, out=d2)
    np.fill_diagonal(d2, 0.0)
    return np.sqrt(d2)


def _class_pairs(y: np.ndarray) -> list[tuple[int, int]]:
    present = np.unique(y)
    return [(int(a), int(b)) for i, a in enumerate(present) for b in present[i + 1 :]]


def _ovo(X: np.ndarray, y: np.ndarray, pair_fn) -> float:
    values = []
    for a, b in _class_pairs(y):
        mask = (y == a) | (y == b)
        values.append(pair_fn(X[mask], y[mask] == b))
    return float(np.mean(values))


# ---------------------------------------------------------------------------
# Overlapping family
# ---------------------------------------------------------------------------


def _fisher_ratio(X: np.ndarray, positive: np.ndarray) -> float:
    """Best single-feature Fisher ratio (mu_a - mu_b)^2 / (var_a + var_b)."""
    Xa, Xb = X[~positive], X[positive]
    num = (Xa.mean(axis=0) - Xb.mean(axis=0)) ** 2
    den = Xa.var(axis=0) + Xb.var(axis=0) + EPS
    return float(np.max(num / den))


def f1(X: np.ndarray, y: np.ndarray) -> float:
    """Maximum Fisher's discriminant ratio, mapped to ``1/(1+r)``.

    ``r`` takes the best feature's between-class separation over the sum
    of the two population variances; multiclass averages ``1/(1+r)``
    over class pairs. Equal class distributions give 1.0; perfectly
    separated zero-variance classes approach 0 under the EPS guard.
    """
    X, y = _check_bag(X, y)
    return _ovo(X, y, lambda Xp, pos: 1.0 / (1.0 + _fisher_ratio(Xp, pos)))


def _directional_ratio(X: np.ndarray, positive: np.ndarray) -> float:
    Xa, Xb = X[~positive], X[positive]
    mu_a, mu_b = Xa.mean(axis=0), Xb.mean(axis=0)
    delta = mu_a - mu_b
    ca = (Xa - mu_a).T @ (Xa - mu_a) / Xa.shape[0]
    cb = (Xb - mu_b).T @ (Xb - mu_b) / Xb.shape[0]
    W = ca + cb + EPS * np.eye(X.shape[1])
    d = np.linalg.solve(W, delta)
    num = float(d @ delta) ** 2
    den = float(d @ W @ d)
    return num / (den + EPS)


def f1v(X: np.ndarray, y: np.ndarray) -> float:
    """Directional-vector Fisher ratio, mapped to ``1/(1+r)``.

    Projects each class pair onto the direction maximizing separation
    (the EPS-regularized inverse of the summed within-class scatter
    applied to the mean difference) and takes the Fisher ratio along it.
    On one-feature data this reduces exactly to :func:`f1`.
    """
    X, y = _check_bag(X, y)
    return _ovo(X, y, lambda Xp, pos: 1.0 / (1.0 + _directional_ratio(Xp, pos)))


def _overlap_bounds(col: np.ndarray, positive: np.ndarray) -> tuple[float, float]:
    """Inter-class overlap interval [lo, hi] of one feature (lo > hi if none)."""
    a, b = col[~positive], col[positive]
    return max(a.min(), b.min()), min(a.max(), b.max())


def _f2_pair(X: np.ndarray, positive: np.ndarray) -> float:
    value = 1.0
    for j in range(X.shape[1]):
        col = X[:, j]
        lo, hi = _overlap_bounds(col, positive)
        span = col.max() - col.min()
        if span <= 0.0:
            factor = 1.0  # constant feature: identical ranges, full overlap
        else:
            factor = max(0.0, hi - lo) / span
        value *= factor
        if value == 0.0:
            break
    return value


def f2(X: np.ndarray, y: np.ndarray) -> float:
    """Volume of the per-feature overlap region (product of widths).

    Each feature contributes its class-range overlap width normalized by
    the feature's total range; one non-overlapping feature zeroes the
    product. Multiclass averages over class pairs.
    """
    X, y = _check_bag(X, y)
    return _ovo(X, y, _f2_pair)


def _f3_pair(X: np.ndarray, positive: np.ndarray) -> float:
    best = 1.0
    for j in range(X.shape[1]):
        col = X[:, j]
        lo, hi = _overlap_bounds(col, positive)
        inside = 0.0 if lo > hi else float(np.mean((col >= lo) & (col <= hi)))
        best = min(best, inside)
    return best


def f3(X: np.ndarray, y: np.ndarray) -> float:
    """Best single feature's residual: fraction of instances inside its
    inter-class overlap interval, minimized over features."""
    X, y = _check_bag(X, y)
    return _ovo(X, y, _f3_pair)


def _f4_pair(X: np.ndarray, positive: np.ndarray) -> float:
    n = X.shape[0]
    alive = np.ones(n, dtype=bool)
    remaining = list(range(X.shape[1]))
    while alive.any() and remaining:
        best_feature = -1
        best_mask: np.ndarray | None = None
        best_count = 0
        for j in remaining:
            col = X[alive, j]
            pos = positive[alive]
            if pos.all() or (~pos).all():
                outside = np.ones(col.shape[0], dtype=bool)
            else:
                lo, hi = _overlap_bounds(col, pos)
                outside = (col < lo) | (col > hi)
            count = int(outside.sum())
            if count > best_count:
                best_feature, best_mask, best_count = j, outside, count
        if best_count == 0:
            break
        keep = np.flatnonzero(alive)[~best_mask]
        alive[:] = False
        alive[keep] = True
        remaining.remove(best_feature)
    return float(alive.sum()) / n


def f4(X: np.ndarray, y: np.ndarray) -> float:
    """Collective feature efficiency, reported as the residual fraction.

    Repeatedly picks the feature separating the most remaining instances
    (ties to the lowest feature index), removes those instances and the
    feature, and returns the fraction never separated. 0 means every
    instance is discriminated by some feature sequence.
    """
    X, y = _check_bag(X, y)
    return _ovo(X, y, _f4_pair)


# ---------------------------------------------------------------------------
# Neighborhood family
# ---------------------------------------------------------------------------


class _UnionFind:
    def __init__(self, n: int) -> None:
        self.parent = list(range(n))

    def find(self, a: int) -> int:
        while self.parent[a] != a:
            self.parent[a] = self.parent[self.parent[a]]
            a = self.parent[a]
        return a

    def union(self, a: int, b: int) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        self.parent[rb] = ra
        return True


def minimum_spanning_tree(distances: np.ndarray) -> list[tuple[int, int]]:
    """Kruskal MST edges with the deterministic sort key (weight, i, j)."""
    n = distances.shape[0]
    iu, ju = np.triu_indices(n, k=1)
    order = np.lexsort((ju, iu, distances[iu, ju]))
    uf = _UnionFind(n)
    edges: list[tuple[int, int]] = []
    for k in order:
        i, j = int(iu[k]), int(ju[k])
        if uf.union(i, j):
            edges.append((i, j))
            if len(edges) == n - 1:
                break
    return edges


def n1(X: np.ndarray, y: np.ndarray, distances: np.ndarray | None = None) -> float:
    """Fraction of instances touching a between-class spanning-tree edge."""
    X, y = _check_bag(X, y)
    D = pairwise_distances(X) if distances is None else distances
    boundary = np.zeros(X.shape[0], dtype=bool)
    for i, j in minimum_spanning_tree(D):
        if y[i] != y[j]:
            boundary[i] = boundary[j] = True
    return float(boundary.mean())


def _nearest_split(D: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Per instance: distance to nearest same-class and other-class point.

    Instances whose class has no other member get intra distance 0
    (a singleton is maximally compact).
    """
    n = D.shape[0]
    same = y[:, None] == y[None, :]
    masked_same = np.where(same, D, np.inf)
    np.fill_diagonal(masked_same, np.inf)
    intra = masked_same.min(axis=1)
    intra[~np.isfinite(intra)] = 0.0
    masked_other = np.where(same, np.inf, D)
    extra = masked_other.min(axis=1)
    return intra, extra


def n2(X: np.ndarray, y: np.ndarray, distances: np.ndarray | None = None) -> float:
    """Intra/extra-class nearest-neighbor distance ratio as ``r/(1+r)``."""
    X, y = _check_bag(X, y)
    D = pairwise_distances(X) if distances is None else distances
    intra, extra = _nearest_split(D, y)
    intra_sum, extra_sum = float(intra.sum()), float(extra.sum())
    if intra_sum == 0.0:
        return 0.0
    if extra_sum == 0.0:
        return 1.0
    r = intra_sum / extra_sum
    return r / (1.0 + r)


def _nearest_index(row: np.ndarray, exclude: int | None = None) -> int:
    masked = row.copy()
    if exclude is not None:
        masked[exclude] = np.inf
    return int(np.argmin(masked))  # argmin takes the lowest index on ties


def n3(X: np.ndarray, y: np.ndarray, distances: np.ndarray | None = None) -> float:
    """Leave-one-out 1NN error rate (distance ties to the lowest index)."""
    X, y = _check_bag(X, y)
    D = pairwise_distances(X) if distances is None else distances
    errors = 0
    for i in range(X.shape[0]):
        errors += int(y[_nearest_index(D[i], exclude=i)] != y[i])
    return errors / X.shape[0]


def n4(X: np.ndarray, y: np.ndarray, seed: int = 0) -> float:
    """1NN error on within-class interpolated points.

    Synthesizes ``n`` points: each draws an anchor uniformly over the
    instances, a partner uniformly over the anchor's class members (in
    ascending index order, possibly the anchor itself), interpolates at
    ``t ~ U[0,1)``, and keeps the anchor's class. The synthetic set is
    classified by 1NN against the original instances (ties to the lowest
    index); the error rate is returned. Deterministic for a fixed seed.
    """
    X, y = _check_bag(X, y)
    rng = np.random.default_rng(seed)
    n = X.shape[0]
    members = {int(c): np.flatnonzero(y == c) for c in np.unique(y)}
    synth = np.empty_like(X)
    synth_y = np.empty(n, dtype=np.int64)
    for s in range(n):
        anchor = int(rng.integers(n))
        same = members[int(y[anchor])]
        partner = int(same[rng.integers(same.size)])
        t = rng.random()
        synth[s] = X[anchor] + t * (X[partner] - X[anchor])
        synth_y[s] = y[anchor]
    d2 = (
        np.sum(synth**2, axis=1)[:, None]
        + np.sum(X**2, axis=1)[None, :]
        - 2.0 * (synth @ X.T)
    )
    np.clip(d2, 0.0, None, out=d2)
    nearest = d2.argmin(axis=1)
    return float(np.mean(y[nearest] != synth_y))


#: Relative slack of the sphere-containment test. Collinear geometry puts
#: genuine containments exactly on the triangle-equality boundary, where a
#: raw float comparison would be decided by rounding noise.
T1_CONTAINMENT_RTOL = 1e-9


def t1(X: np.ndarray, y: np.ndarray, distances: np.ndarray | None = None) -> float:
    """Fraction of enemy-bounded hyperspheres left after absorption.

    Each instance grows a sphere with radius equal to its nearest-enemy
    distance; a sphere is absorbed when it lies fully inside a same-class
    sphere: ``d + r_i <= r_j`` up to :data:`T1_CONTAINMENT_RTOL`, with
    identical spheres keeping the lowest index.
    """
    X, y = _check_bag(X, y)
    D = pairwise_distances(X) if distances is None else distances
    n = X.shape[0]
    same = y[:, None] == y[None, :]
    radii = np.where(same, np.inf, D).min(axis=1)
    survives = np.ones(n, dtype=bool)
    for i in range(n):
        for j in range(n):
            if i == j or not same[i, j]:
                continue
            slack = radii[j] - radii[i] - D[i, j]
            tol = T1_CONTAINMENT_RTOL * (1.0 + radii[i] + radii[j] + D[i, j])
            if slack >= -tol and (
                radii[j] > radii[i] or (radii[j] == radii[i] and j < i)
            ):
                survives[i] = False
                break
    return float(survives.mean())


def lsc(X: np.ndarray, y: np.ndarray, distances: np.ndarray | None = None) -> float:
    """Local-set average cardinality, as ``1 - sum(|LS|)/n^2``.

    ``LS(x)`` holds the other instances strictly closer to ``x`` than
    ``x``'s nearest enemy. Larger local sets mean simpler structure.
    """
    X, y = _check_bag(X, y)
    D = pairwise_distances(X) if distances is None else distances
    n = X.shape[0]
    same = y[:, None] == y[None, :]
    enemy = np.where(same, np.inf, D).min(axis=1)
    inside = D < enemy[:, None]
    np.fill_diagonal(inside, False)
    return 1.0 - float(inside.sum()) / (n * n)


# ---------------------------------------------------------------------------
# Dispatch
# ---------------------------------------------------------------------------

_DISTANCE_AWARE = {
    Measure.N1: n1,
    Measure.N2: n2,
    Measure.N3: n3,
    Measure.T1: t1,
    Measure.LSC: lsc,
}
_PLAIN = {Measure.F1: f1, Measure.F1V: f1v, Measure.F2: f2, Measure.F3: f3, Measure.F4: f4}


def measure_value(
    measure: Measure,
    X: np.ndarray,
    y: np.ndarray,
    seed: int = 0,
    distances: np.ndarray | None = None,
) -> float:
    """Evaluate one measure; ``distances`` lets callers share the matrix."""
    if measure in _PLAIN:
        return _PLAIN[measure](X, y)
    if measure is Measure.N4:
        return n4(X, y, seed=seed)
    return _DISTANCE_AWARE[measure](X, y, distances=distances)


def compute_profile(
    X: np.ndarray,
    y: np.ndarray,
    seed: int = 0,
    measures: tuple[Measure, ...] = ALL_MEASURES,
) -> dict[Measure, float]:
    """All requested measures of one bag, sharing one distance matrix."""
    X, y = _check_bag(X, y)
    D = None
    if any(m in _DISTANCE_AWARE for m in measures):
        D = pairwise_distances(X)
    return {m: measure_value(m, X, y, seed=seed, distances=D) for m in measures}
