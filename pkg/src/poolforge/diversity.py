"""Decision-space diversity: pairwise double fault and its per-member mean.

The prediction table convention is a boolean matrix ``correct`` of shape
``(n_members, n_instances)``: entry ``[i, j]`` says member ``i``
classified validation instance ``j`` correctly. Lower double-fault
values mean fewer coincident errors, i.e. more decision diversity.
"""

from __future__ import annotations

import numpy as np

from .errors import DataError


def correctness_table(predictions: np.ndarray, y_true: np.ndarray) -> np.ndarray:
    """Boolean table from a member-prediction matrix and true labels."""
    predictions = np.asarray(predictions)
    y_true = np.asarray(y_true)
    if predictions.ndim != 2 or predictions.shape[1] != y_true.shape[0]:
        raise DataError("predictions must be (n_members, n_instances)")
    return predictions == y_true[None, :]


def double_fault(ci_correct: np.ndarray, cj_correct: np.ndarray) -> float:
    """Fraction of instances both members got wrong."""
    a = np.asarray(ci_correct, dtype=bool)
    b = np.asarray(cj_correct, dtype=bool)
    if a.shape != b.shape or a.ndim != 1:
        raise DataError("correctness rows must be equal-length vectors")
    if a.shape[0] == 0:
        raise DataError("correctness rows must be non-empty")
    return float(np.mean(~a & ~b))


def double_fault_matrix(correct: np.ndarray) -> np.ndarray:
    """All pairwise double-fault values of a correctness table."""
    correct = np.asarray(correct, dtype=bool)
    if correct.ndim != 2 or correct.shape[1] == 0:
        raise DataError("correctness table must be (n_members, n_instances)")
    wrong = (~correct).astype(np.float64)
    return (wrong @ wrong.T) / correct.shape[1]


def ddv_all(correct: np.ndarray) -> np.ndarray:
    """Each member's mean double fault against every other member."""
    correct = np.asarray(correct, dtype=bool)
    if correct.shape[0] < 2:
        raise DataError("need at least 2 members for a diversity value")
    df = double_fault_matrix(correct)
    return (df.sum(axis=1) - np.diag(df)) / (correct.shape[0] - 1)


def ddv(correct: np.ndarray, i: int) -> float:
    """Decision-based diversity value of member ``i``."""
    return float(ddv_all(correct)[i])
