import json

import numpy as np
import pytest

from poolforge import learner
from poolforge.dataset import generate_synthetic
from poolforge.errors import DataError, DegenerateBagError

XOR_X = np.array([[0.0, 0.0], [1.0, 1.0], [0.0, 1.0], [1.0, 0.0]])
XOR_Y = np.array([0, 0, 1, 1])


def test_separable_blobs_reach_perfect_training_accuracy():
    d = generate_synthetic("blobs", 40, noise=0.2, seed=1)
    model = learner.train_perceptron(d.features, d.labels, 2, seed=3)
    assert np.mean(model.predict_batch(d.features) == d.labels) == 1.0
    assert model.epochs_run < learner.PerceptronConfig().epochs


def test_training_deterministic():
    d = generate_synthetic("banana", 60, seed=2)
    a = learner.train_perceptron(d.features, d.labels, 2, seed=11)
    b = learner.train_perceptron(d.features, d.labels, 2, seed=11)
    assert np.array_equal(a.weights, b.weights)
    c = learner.train_perceptron(d.features, d.labels, 2, seed=12)
    assert not np.array_equal(a.weights, c.weights) or a.epochs_run == c.epochs_run


def test_xor_capped_at_three_quarters():
    model = learner.train_perceptron(XOR_X, XOR_Y, 2, seed=0)
    acc = np.mean(model.predict_batch(XOR_X) == XOR_Y)
    assert acc <= 0.75


def test_no_linear_boundary_beats_three_quarters_on_xor():
    # independent check: scan many hyperplanes, none exceeds 3/4
    rng = np.random.default_rng(0)
    best = 0.0
    for _ in range(20000):
        w = rng.normal(size=3)
        scores = XOR_X @ w[:2] + w[2]
        pred = (scores > 0).astype(int)
        best = max(best, np.mean(pred == XOR_Y), np.mean((1 - pred) == XOR_Y))
    assert best == 0.75


def test_single_class_bag_rejected():
    with pytest.raises(DegenerateBagError):
        learner.train_perceptron(np.zeros((3, 2)), np.zeros(3, dtype=int), 2)


def test_predict_margin_and_ties():
    # class 1 favored by margin
    m = learner.Perceptron(weights=np.array([[0.0, 0.0], [1.0, 1.0]]))
    assert m.predict(np.array([2.0])) == 1
    # exact tie between classes 0 and 2 -> 0
    tie = learner.Perceptron(weights=np.array([[1.0, 0.0], [0.0, -5.0], [1.0, 0.0]]))
    assert tie.predict(np.array([3.0])) == 0
    # zero weights -> class 0 for any input
    zero = learner.Perceptron(weights=np.zeros((3, 3)))
    assert zero.predict(np.array([4.0, -4.0])) == 0


def test_predict_dimension_mismatch():
    m = learner.Perceptron(weights=np.zeros((2, 3)))
    with pytest.raises(DataError):
        m.predict(np.array([1.0, 2.0, 3.0]))


def constant_member(cls, n_classes=2, n_features=1):
    w = np.zeros((n_classes, n_features + 1))
    w[cls, -1] = 1.0
    return learner.PoolMember(
        model=learner.Perceptron(weights=w), bag=np.array([0, 1])
    )


def test_majority_vote_plurality_and_ties():
    x = np.array([0.0])
    pool = learner.Pool(members=[constant_member(1), constant_member(1), constant_member(0)])
    assert learner.majority_vote(pool, x) == 1
    tied = learner.Pool(
        members=[constant_member(0), constant_member(0), constant_member(1), constant_member(1)]
    )
    assert learner.majority_vote(tied, x) == 0


def test_majority_vote_identical_members():
    x = np.array([0.0])
    pool = learner.Pool(members=[constant_member(1)] * 100)
    assert learner.majority_vote(pool, x) == 1


def test_empty_pool_rejected():
    with pytest.raises(DataError):
        learner.Pool(members=[])


def test_bagging_pool_size_and_determinism(tmp_path):
    d = generate_synthetic("banana", 120, seed=5)
    pool = learner.bagging_generate(d.features, d.labels, pool_size=100, seed=9)
    assert pool.size == 100
    assert pool.metadata["method"] == "bagging"
    bag_len = int(0.5 * 120)
    assert all(m.bag.shape == (bag_len,) for m in pool.members)
    assert all(m.bag.max() < 120 for m in pool.members)

    again = learner.bagging_generate(d.features, d.labels, pool_size=100, seed=9)
    p1 = tmp_path / "a.json"
    p2 = tmp_path / "b.json"
    pool.save(p1)
    again.save(p2)
    assert p1.read_bytes() == p2.read_bytes()


def test_bagging_bags_mostly_unique():
    d = generate_synthetic("banana", 120, seed=6)
    pool = learner.bagging_generate(d.features, d.labels, pool_size=100, seed=1)
    unique = {tuple(m.bag.tolist()) for m in pool.members}
    assert len(unique) >= 99


def test_pool_json_round_trip(tmp_path):
    d = generate_synthetic("blobs", 30, noise=0.4, seed=8)
    pool = learner.bagging_generate(d.features, d.labels, pool_size=5, seed=2)
    path = pool.save(tmp_path / "pool.json")
    loaded = learner.Pool.load(path)
    assert loaded.size == pool.size
    assert loaded.metadata == pool.metadata
    for a, b in zip(pool.members, loaded.members):
        assert np.array_equal(a.model.weights, b.model.weights)
        assert np.array_equal(a.bag, b.bag)
    # schema check: weights and bias stored separately
    payload = json.loads(path.read_text())
    member = payload["members"][0]
    assert set(member) >= {"weights", "bias", "bag_indices"}
    assert len(member["weights"][0]) == d.n_features


def test_pool_load_errors(tmp_path):
    with pytest.raises(DataError, match="no such pool"):
        learner.Pool.load(tmp_path / "missing.json")
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(DataError, match="invalid pool JSON"):
        learner.Pool.load(bad)


def test_mvr_of_identical_members_equals_member_accuracy():
    d = generate_synthetic("banana", 80, seed=3)
    model = learner.train_perceptron(d.features, d.labels, 2, seed=1)
    member_acc = np.mean(model.predict_batch(d.features) == d.labels)
    pool = learner.Pool(
        members=[learner.PoolMember(model=model, bag=np.arange(2))] * 7
    )
    preds = learner.majority_vote_rows(pool.predict_batch(d.features), 2)
    assert np.mean(preds == d.labels) == member_acc
