import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from poolforge import moga
from poolforge.complexity import Measure
from poolforge.dataset import generate_synthetic
from poolforge.errors import DataError

from conftest import make_dataset


class FixedRng:
    """Stand-in generator returning scripted draws."""

    def __init__(self, integers=(), randoms=()):
        self._integers = list(integers)
        self._randoms = list(randoms)

    def integers(self, *args, **kwargs):
        return self._integers.pop(0)

    def random(self):
        return self._randoms.pop(0)


def small_cfg(**kw):
    defaults = dict(generations=3, population_size=8, offspring_size=8, seed=0)
    defaults.update(kw)
    return moga.GaConfig(**defaults)


def train_view(n=40, seed=0):
    d = generate_synthetic("banana", n, noise=0.3, seed=seed)
    return d.features, d.labels


# --- config -------------------------------------------------------------------


def test_config_validation():
    with pytest.raises(DataError):
        moga.GaConfig(generations=0)
    with pytest.raises(DataError):
        moga.GaConfig(population_size=1)
    with pytest.raises(DataError):
        moga.GaConfig(crossover_prob=1.5)
    with pytest.raises(DataError):
        moga.GaConfig(offspring_size=10, selection_size=12)
    cfg = moga.GaConfig()
    assert cfg.selection_size == cfg.offspring_size == 100


# --- init ----------------------------------------------------------------------


def test_init_population_shapes():
    X, y = train_view(40)
    cfg = small_cfg(population_size=10)
    pop = moga.init_population(y, cfg)
    assert len(pop) == 10
    assert all(c.shape == (20,) for c in pop)
    assert all(np.unique(c).size == c.size for c in pop)  # without replacement
    assert all(c.max() < 40 for c in pop)


def test_init_population_deterministic():
    X, y = train_view(40)
    a = moga.init_population(y, small_cfg(seed=5))
    b = moga.init_population(y, small_cfg(seed=5))
    assert all(np.array_equal(p, q) for p, q in zip(a, b))


def test_init_population_too_small():
    with pytest.raises(DataError):
        moga.init_population(np.array([0, 1, 0]), small_cfg())


def test_init_population_chromosome_length_rule():
    y = np.tile([0, 1], 192)  # n = 384 -> wait, want 383
    y = y[:383]
    pop = moga.init_population(y, small_cfg(population_size=4))
    assert all(c.shape == (191,) for c in pop)


# --- crossover -------------------------------------------------------------------


def test_crossover_start_zero_takes_gene_zero_from_first_parent():
    pop = [np.arange(10), np.arange(100, 110)]
    # draws: parent i=0, j offset 0 -> parent 1, start=0, end=L
    rng = FixedRng(integers=[0, 0, 0, 10])
    child = moga.crossover(pop, rng)
    assert child[0] == 0
    assert child[1:].tolist() == list(range(101, 110))


def test_crossover_start_equals_end_copies_first_parent():
    pop = [np.arange(10), np.arange(100, 110)]
    rng = FixedRng(integers=[0, 0, 4, 4])
    child = moga.crossover(pop, rng)
    assert child.tolist() == list(range(10))


def test_crossover_identical_parents():
    pop = [np.arange(10), np.arange(10)]
    rng = FixedRng(integers=[0, 0, 3, 7])
    child = moga.crossover(pop, rng)
    assert child.tolist() == list(range(10))


def test_crossover_needs_two():
    with pytest.raises(DataError):
        moga.crossover([np.arange(4)], np.random.default_rng(0))


@given(st.integers(0, 2**31 - 1))
@settings(max_examples=30, deadline=None)
def test_crossover_positionwise_gene_origin(seed):
    rng = np.random.default_rng(seed)
    length = int(rng.integers(2, 30))
    pop = [rng.integers(0, 50, size=length), 100 + rng.integers(0, 50, size=length)]
    child = moga.crossover(pop, rng)
    assert child.shape == (length,)
    for k in range(length):
        assert child[k] in (pop[0][k], pop[1][k])


# --- mutation --------------------------------------------------------------------


def test_mutate_mechanical_substitution():
    pop = [np.array([1, 2, 3]), np.array([7, 8, 9])]
    # receiver given; draws: donor index 1, position 1, donor gene 1 -> 8
    rng = FixedRng(integers=[1, 1, 1])
    child = moga.mutate(pop, rng, receiver=pop[0])
    assert child.tolist() == [1, 8, 3]
    assert pop[0].tolist() == [1, 2, 3]  # input untouched


def test_mutate_donor_equals_receiver_allowed():
    pop = [np.array([1, 2, 3]), np.array([7, 8, 9])]
    rng = FixedRng(integers=[0, 0, 0, 0])  # receiver 0, donor 0, pos 0, gene 0
    child = moga.mutate(pop, rng)
    assert child.tolist() == [1, 2, 3]


def test_mutate_guard_redraws_single_class_results():
    y = np.array([0, 0, 0, 1])
    pop = [np.array([0, 3]), np.array([1, 2])]  # receiver [1,2] single-class risk
    rng = np.random.default_rng(0)
    for _ in range(50):
        child = moga.mutate(pop, rng, y=y, n_classes=2)
        assert np.unique(y[child]).size == 2


# --- fitness arithmetic ------------------------------------------------------------


def test_pairwise_dispersion_hand_example():
    values = np.array([0.1, 0.3, 0.5])
    assert moga.pairwise_dispersion(values) == pytest.approx([0.3, 0.2, 0.3])


def test_pairwise_dispersion_two_values():
    values = np.array([0.2, 0.9])
    assert moga.pairwise_dispersion(values) == pytest.approx([0.7, 0.7])


def test_pairwise_dispersion_permutation_sum_invariant(rng):
    values = rng.random(20)
    perm = rng.permutation(20)
    assert moga.pairwise_dispersion(values).sum() == pytest.approx(
        moga.pairwise_dispersion(values[perm]).sum()
    )


def test_g_disp_identical_rows_zero():
    F = np.ones((5, 3))
    assert moga.g_disp(F) == 0.0


def test_g_disp_two_rows():
    F = np.array([[0.0, 0.0, 0.0], [1.0, 0.0, 0.0]])
    assert moga.g_disp(F) == pytest.approx(1.0)


def test_g_disp_homogeneous(rng):
    F = rng.random((12, 3))
    assert moga.g_disp(3.5 * F) == pytest.approx(3.5 * moga.g_disp(F))


def test_g_disp_permutation_invariant(rng):
    F = rng.random((12, 3))
    perm = rng.permutation(12)
    assert moga.g_disp(F[perm]) == pytest.approx(moga.g_disp(F))
    assert moga.g_disp(F) >= 0.0


def test_g_disp_needs_two():
    with pytest.raises(DataError):
        moga.g_disp(np.ones((1, 3)))


# --- NSGA-II -----------------------------------------------------------------------


def brute_force_front0(F, maximize):
    signs = np.array([-1.0 if m else 1.0 for m in maximize])
    M = F * signs
    front = []
    for i in range(M.shape[0]):
        dominated = False
        for j in range(M.shape[0]):
            if (M[j] <= M[i]).all() and (M[j] < M[i]).any():
                dominated = True
                break
        if not dominated:
            front.append(i)
    return front


def test_domination_example():
    F = np.array([[1.0, 1.0, 0.0], [0.5, 0.5, 0.5]])
    signs = np.array([-1.0, -1.0, 1.0])
    fronts = moga.fast_nondominated_sort(F * signs)
    assert fronts[0].tolist() == [0]
    assert fronts[1].tolist() == [1]


def test_identity_selection_when_mu_equals_total():
    rng = np.random.default_rng(0)
    F = rng.random((10, 3))
    idx = moga.nsga2_select_indices(F, 10, (True, True, False))
    assert idx.tolist() == list(range(10))


def test_boundary_individuals_survive_truncation():
    # mutually non-dominated diagonal front; extremes get infinite crowding
    F = np.stack([np.linspace(0, 1, 9), 1 - np.linspace(0, 1, 9)], axis=1)
    idx = moga.nsga2_select_indices(F, 3, (True, True))
    assert 0 in idx and 8 in idx


def test_front0_matches_bruteforce_random(rng):
    for _ in range(20):
        F = rng.random((int(rng.integers(5, 60)), 3))
        maximize = (True, True, False)
        fronts = moga.fast_nondominated_sort(
            F * np.array([-1.0, -1.0, 1.0])
        )
        assert sorted(fronts[0].tolist()) == brute_force_front0(F, maximize)


def test_nsga2_select_over_parents_and_offspring():
    parents = [np.array([0, 1]), np.array([2, 3])]
    offspring = [np.array([4, 5])]
    F = np.array([[1.0, 1.0, 0.0], [0.2, 0.2, 0.9], [0.9, 0.9, 0.1]])
    survivors = moga.nsga2_select(parents, offspring, F, 2)
    assert [s.tolist() for s in survivors] == [[0, 1], [4, 5]]
    with pytest.raises(DataError):
        moga.nsga2_select(parents, offspring, F[:2], 2)


# --- full run ------------------------------------------------------------------------


def run_small(seed=0, objectives=moga.DEFAULT_OBJECTIVES, generations=4):
    X, y = train_view(48, seed=7)
    d_val = generate_synthetic("banana", 24, noise=0.3, seed=8)
    cfg = small_cfg(seed=seed, generations=generations)
    return moga.run_pgdcs(
        X, y, d_val.features, d_val.labels, cfg, Measure.F2, Measure.N3,
        objectives=objectives,
    )


def test_run_record_count_and_metadata():
    pool, records = run_small(generations=4)
    assert len(records) == 5  # initial + one per generation
    assert pool.size == 8
    assert pool.metadata["method"] == "pgdcs"
    assert pool.metadata["cm1"] == "F2"
    assert pool.metadata["cm2"] == "N3"
    assert len(pool.metadata["g_disp_history"]) == 5
    assert pool.metadata["chosen_generation"] == int(
        np.argmax(pool.metadata["g_disp_history"])
    )


def test_run_chosen_at_least_initial():
    pool, records = run_small()
    history = pool.metadata["g_disp_history"]
    assert history[pool.metadata["chosen_generation"]] >= history[0]


def test_run_deterministic(tmp_path):
    pool_a, _ = run_small(seed=3)
    pool_b, _ = run_small(seed=3)
    pa, pb = tmp_path / "a.json", tmp_path / "b.json"
    pool_a.save(pa)
    pool_b.save(pb)
    assert pa.read_bytes() == pb.read_bytes()


def test_run_chromosome_length_invariant():
    _, records = run_small()
    for rec in records:
        assert all(c.shape == (24,) for c in rec.population)


def test_single_objective_mode():
    pool, records = run_small(objectives=("phi1",))
    assert records[0].fitness.shape == (8, 1)
    assert pool.metadata["objectives"] == ["phi1"]


def test_unknown_objective_rejected():
    with pytest.raises(DataError):
        run_small(objectives=("phi1", "accuracy"))


def test_evaluate_identical_population():
    X, y = train_view(30, seed=1)
    d_val = generate_synthetic("banana", 20, noise=0.3, seed=2)
    ctx = moga._EvalContext(
        X, y, d_val.features, d_val.labels, Measure.F2, Measure.N3,
        seed=0, objectives=moga.DEFAULT_OBJECTIVES, learner_config=None,
    )
    bag = np.arange(15)
    F = ctx.evaluate([bag.copy(), bag.copy(), bag.copy()])
    assert np.allclose(F[:, 0], 0.0)
    assert np.allclose(F[:, 1], 0.0)
    assert np.allclose(F[:, 2], F[0, 2])
