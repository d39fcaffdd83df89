"""Dataset representation, CSV ingestion, splitting, and synthetic problems.

A :class:`Dataset` is the immutable universe that instance bags index
into: an ``(n, f)`` float matrix plus dense integer class labels in
``[0, y)``. Loaders re-encode arbitrary label strings densely in order
of first appearance and keep the originals for round-tripping.
"""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DataError
from .rng import rng_for

#: Values treated as missing during ingestion (rows containing them are
#: dropped with a reported count; no imputation is attempted).
_MISSING = {"", "?", "NA", "na", "NaN"}

DEFAULT_FRACTIONS = (0.5, 0.25, 0.25)


@dataclass
class Dataset:
    """Numeric feature matrix with dense integer class labels.

    Invariants enforced at construction: ``n >= 1``, ``f >= 1``, at least
    two classes, every class id in ``[0, y)`` present, all feature values
    finite. Arrays are frozen after validation.
    """

    features: np.ndarray
    labels: np.ndarray
    name: str = "dataset"
    feature_names: list[str] = field(default_factory=list)
    label_names: list[str] = field(default_factory=list)
    label_column: str = "label"

    def __post_init__(self) -> None:
        X = np.asarray(self.features, dtype=np.float64)
        y = np.asarray(self.labels, dtype=np.int64)
        if X.ndim != 2 or X.shape[0] < 1 or X.shape[1] < 1:
            raise DataError(f"{self.name}: feature matrix must be 2-D and non-empty")
        if y.shape != (X.shape[0],):
            raise DataError(f"{self.name}: labels must be one per instance")
        if not np.isfinite(X).all():
            raise DataError(f"{self.name}: NaN/inf feature value")
        present = np.unique(y)
        if present.size < 2:
            raise DataError(f"{self.name}: fewer than 2 classes")
        if present[0] != 0 or present[-1] != present.size - 1:
            raise DataError(f"{self.name}: labels must be dense ids 0..y-1")
        if not self.feature_names:
            self.feature_names = [f"x{i}" for i in range(X.shape[1])]
        if len(self.feature_names) != X.shape[1]:
            raise DataError(f"{self.name}: feature name count mismatch")
        if not self.label_names:
            self.label_names = [str(c) for c in range(present.size)]
        if len(self.label_names) != present.size:
            raise DataError(f"{self.name}: label name count mismatch")
        X.flags.writeable = False
        y.flags.writeable = False
        self.features = X
        self.labels = y

    @property
    def n_instances(self) -> int:
        return self.features.shape[0]

    @property
    def n_features(self) -> int:
        return self.features.shape[1]

    @property
    def n_classes(self) -> int:
        return int(self.labels.max()) + 1

    def subset(self, indices: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Feature/label view over the given instance indices."""
        idx = np.asarray(indices, dtype=np.int64)
        return self.features[idx], self.labels[idx]

    def class_counts(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=self.n_classes)


@dataclass
class Split:
    """Disjoint train/validation/test index sets over a parent dataset."""

    train: np.ndarray
    validation: np.ndarray
    test: np.ndarray

    def __post_init__(self) -> None:
        for part in (self.train, self.validation, self.test):
            part.flags.writeable = False


def load_csv(
    path: str | Path,
    label_column: str | None = None,
    name: str | None = None,
) -> Dataset:
    """Load a dataset from a headered CSV file.

    The label column is the last one unless ``label_column`` names another.
    All remaining columns must parse as numbers; parse failures report the
    offending row and column. Rows with missing values (empty, ``?``, NA)
    are dropped and their count reported as a warning. Labels are
    re-encoded densely as ``0..y-1`` in order of first appearance.
    """
    path = Path(path)
    if not path.exists():
        raise DataError(f"no such file: {path}")
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path}: empty file") from None
        header = [h.strip() for h in header]
        if label_column is None:
            label_idx = len(header) - 1
        else:
            try:
                label_idx = header.index(label_column)
            except ValueError:
                raise DataError(f"{path}: no column named {label_column!r}") from None
        feature_idx = [i for i in range(len(header)) if i != label_idx]
        if not feature_idx:
            raise DataError(f"{path}: no feature columns")

        rows: list[list[float]] = []
        raw_labels: list[str] = []
        dropped = 0
        for row_no, row in enumerate(reader, start=2):
            if not row:
                continue
            cells = [c.strip() for c in row]
            if len(cells) != len(header):
                raise DataError(
                    f"{path}: row {row_no} has {len(cells)} cells, expected {len(header)}"
                )
            if any(cells[i] in _MISSING for i in range(len(cells))):
                dropped += 1
                continue
            values = []
            for i in feature_idx:
                try:
                    v = float(cells[i])
                except ValueError:
                    raise DataError(
                        f"{path}: row {row_no}, column {header[i]!r}: "
                        f"cannot parse {cells[i]!r} as a number"
                    ) from None
                if not math.isfinite(v):
                    raise DataError(
                        f"{path}: row {row_no}, column {header[i]!r}: NaN/inf value"
                    )
                values.append(v)
            rows.append(values)
            raw_labels.append(cells[label_idx])

    if dropped:
        warnings.warn(f"{path}: dropped {dropped} rows with missing values", stacklevel=2)
    if not rows:
        raise DataError(f"{path}: no usable rows")

    encoding: dict[str, int] = {}
    labels = []
    for raw in raw_labels:
        if raw not in encoding:
            encoding[raw] = len(encoding)
        labels.append(encoding[raw])
    if len(encoding) < 2:
        raise DataError(f"{path}: fewer than 2 classes")

    return Dataset(
        features=np.array(rows, dtype=np.float64),
        labels=np.array(labels, dtype=np.int64),
        name=name or path.stem,
        feature_names=[header[i] for i in feature_idx],
        label_names=list(encoding),
        label_column=header[label_idx],
    )


def write_csv(dataset: Dataset, path: str | Path) -> Path:
    """Write a dataset to CSV (features then label column, with header).

    Original label strings are emitted, so ``load_csv(write_csv(d))``
    reproduces the feature matrix and label vector exactly.
    """
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([*dataset.feature_names, dataset.label_column])
        for xrow, label in zip(dataset.features, dataset.labels):
            writer.writerow([repr(float(v)) for v in xrow] + [dataset.label_names[label]])
    return path


def _apportion(quotas: np.ndarray, total: int, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    """Largest-remainder rounding of quotas to a fixed total within bounds.

    Starts from clamped floors and hands out the missing units by
    descending fractional remainder (ties to the lower index), skipping
    entries at their upper bound; excess units are reclaimed from the
    smallest remainders first. Raises when the bounds make the total
    unreachable.
    """
    if int(lo.sum()) > total or int(hi.sum()) < total:
        raise DataError("class too small to stratify")
    alloc = np.clip(np.floor(quotas).astype(np.int64), lo, hi)
    remainders = quotas - np.floor(quotas)
    while alloc.sum() < total:
        candidates = np.flatnonzero(alloc < hi)
        order = candidates[np.argsort(-remainders[candidates], kind="stable")]
        alloc[order[0]] += 1
        remainders[order[0]] -= 1.0
    while alloc.sum() > total:
        candidates = np.flatnonzero(alloc > lo)
        order = candidates[np.argsort(remainders[candidates], kind="stable")]
        alloc[order[0]] -= 1
        remainders[order[0]] += 1.0
    return alloc


def split_sizes(n: int, fractions: tuple[float, float, float]) -> tuple[int, int, int]:
    """Partition sizes under the declared rounding rule.

    Each part gets the floor of its fraction; leftover instances go to
    validation first, then test.
    """
    t = math.floor(fractions[0] * n)
    v = math.floor(fractions[1] * n)
    s = math.floor(fractions[2] * n)
    leftover = n - (t + v + s)
    if leftover >= 1:
        v += 1
    if leftover >= 2:
        s += 1
    return t, v, s


def stratified_split(
    dataset: Dataset,
    fractions: tuple[float, float, float] = DEFAULT_FRACTIONS,
    seed: int = 0,
) -> Split:
    """Deterministic stratified train/validation/test split.

    Every class lands at least once in each part, per-class train
    proportions stay within ``1/|train|`` of the global class
    proportions, and the global part sizes follow :func:`split_sizes`.
    Requires at least 3 instances of every class.
    """
    if len(fractions) != 3 or any(f <= 0 for f in fractions):
        raise DataError("fractions must be three positive numbers")
    if abs(sum(fractions) - 1.0) > 1e-9:
        raise DataError("fractions must sum to 1")

    n = dataset.n_instances
    y = dataset.labels
    n_classes = dataset.n_classes
    counts = dataset.class_counts()
    too_small = np.flatnonzero(counts < 3)
    if too_small.size:
        raise DataError(
            f"{dataset.name}: class too small to stratify "
            f"(class {int(too_small[0])} has {int(counts[too_small[0]])} instances)"
        )

    target_train, target_val, target_test = split_sizes(n, fractions)
    if min(target_train, target_val, target_test) < n_classes:
        raise DataError(
            f"{dataset.name}: class too small to stratify (partition smaller than class count)"
        )

    # Train column first: largest-remainder apportionment of the train
    # target across classes, keeping 2 instances per class for val+test.
    ones = np.ones(n_classes, dtype=np.int64)
    train_alloc = _apportion(
        counts * (target_train / n), target_train, lo=ones, hi=counts - 2
    )
    deviation = np.abs(train_alloc - counts * (target_train / n))
    if np.any(deviation > 1.0 + 1e-9):
        # forced by the per-class minimums; the proportionality bound is
        # unreachable for this class layout
        raise DataError(f"{dataset.name}: class too small to stratify")

    # Validation among what remains; test takes the rest (>= 1 by the cap).
    rest = counts - train_alloc
    val_alloc = _apportion(
        rest * (target_val / (n - target_train)), target_val, lo=ones, hi=rest - 1
    )

    rng = rng_for(seed, "stratified-split")
    parts: list[list[int]] = [[], [], []]
    for c in range(n_classes):
        members = np.flatnonzero(y == c)
        members = members[rng.permutation(members.size)]
        t, v = int(train_alloc[c]), int(val_alloc[c])
        parts[0].extend(members[:t].tolist())
        parts[1].extend(members[t : t + v].tolist())
        parts[2].extend(members[t + v :].tolist())

    return Split(
        train=np.array(sorted(parts[0]), dtype=np.int64),
        validation=np.array(sorted(parts[1]), dtype=np.int64),
        test=np.array(sorted(parts[2]), dtype=np.int64),
    )


def _interleave(points: list[np.ndarray], labels: list[int]) -> tuple[np.ndarray, np.ndarray]:
    """Order rows so class 0 appears first and classes alternate."""
    by_class: dict[int, list[np.ndarray]] = {}
    for p, c in zip(points, labels):
        by_class.setdefault(c, []).append(p)
    ordered_p: list[np.ndarray] = []
    ordered_y: list[int] = []
    queues = [list(reversed(by_class.get(c, []))) for c in sorted(by_class)]
    while any(queues):
        for c, q in enumerate(queues):
            if q:
                ordered_p.append(q.pop())
                ordered_y.append(c)
    return np.array(ordered_p), np.array(ordered_y, dtype=np.int64)


def _p2_label(x: float, z: float) -> int:
    """Class rule of the four-boundary synthetic problem on [0,10]^2."""
    above = 0
    above += z > 2.0 * math.sin(x) + 5.0
    above += z > (x - 2.0) ** 2 + 1.0
    above += z > -0.1 * x**2 + 0.6 * math.sin(4.0 * x) + 8.0
    above += z > ((x - 10.0) ** 2) / 2.0 + 7.902
    return int(above >= 2)


def generate_synthetic(kind: str, n: int, noise: float = 0.1, seed: int = 0) -> Dataset:
    """Generate a 2-feature, 2-class synthetic dataset.

    ``blobs``: two Gaussian clusters (std = ``noise``) at (-2,-2)/(2,2).
    ``banana``: two interleaved crescent clusters jittered by ``noise``.
    ``p2``: multi-region problem bounded by four curves on [0,10]^2
    (``noise`` is ignored; the boundary is deterministic). Classes are
    balanced and interleaved in row order.
    """
    if n < 10:
        raise DataError("synthetic datasets need n >= 10")
    rng = rng_for(seed, "synthetic", kind)
    n0 = (n + 1) // 2
    n1 = n - n0

    if kind == "blobs":
        centers = np.array([[-2.0, -2.0], [2.0, 2.0]])
        points, labels = [], []
        for i in range(n):
            c = i % 2
            points.append(centers[c] + noise * rng.standard_normal(2))
            labels.append(c)
        X, y = np.array(points), np.array(labels, dtype=np.int64)
    elif kind == "banana":
        points, labels = [], []
        for c, quota in ((0, n0), (1, n1)):
            for _ in range(quota):
                t = rng.uniform(0.0, math.pi)
                if c == 0:
                    base = np.array([math.cos(t), math.sin(t)])
                else:
                    base = np.array([1.0 - math.cos(t), 0.5 - math.sin(t)])
                points.append(base + noise * rng.standard_normal(2))
                labels.append(c)
        X, y = _interleave(points, labels)
    elif kind == "p2":
        quotas = {0: n0, 1: n1}
        points: list[np.ndarray] = []
        labels: list[int] = []
        while any(quotas.values()):
            cand = rng.uniform(0.0, 10.0, size=2)
            c = _p2_label(cand[0], cand[1])
            if quotas[c] > 0:
                quotas[c] -= 1
                points.append(cand)
                labels.append(c)
        X, y = _interleave(points, labels)
    else:
        raise DataError(f"unknown synthetic kind: {kind!r}")

    return Dataset(features=X, labels=y, name=kind)


def minmax_params(features: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Per-feature (min, max) of the rows used to fit the scaling."""
    X = np.asarray(features, dtype=np.float64)
    return X.min(axis=0), X.max(axis=0)


def apply_minmax(dataset: Dataset, mins: np.ndarray, maxs: np.ndarray) -> Dataset:
    """Rescale features to (x - min)/(max - min); constant features map to 0."""
    span = np.asarray(maxs, dtype=np.float64) - np.asarray(mins, dtype=np.float64)
    safe = np.where(span > 0, span, 1.0)
    scaled = (dataset.features - mins) / safe
    scaled[:, span <= 0] = 0.0
    return Dataset(
        features=scaled,
        labels=dataset.labels.copy(),
        name=dataset.name,
        feature_names=list(dataset.feature_names),
        label_names=list(dataset.label_names),
        label_column=dataset.label_column,
    )


def scale_by_subset(dataset: Dataset, fit_indices: np.ndarray) -> tuple[Dataset, dict]:
    """Min-max scale the whole dataset using statistics of ``fit_indices``.

    Returns the scaled dataset and the parameters (for reuse on data the
    fitting rows never saw, e.g. a held-out test file).
    """
    mins, maxs = minmax_params(dataset.features[np.asarray(fit_indices, dtype=np.int64)])
    params = {"min": mins.tolist(), "max": maxs.tolist()}
    return apply_minmax(dataset, mins, maxs), params
