import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from poolforge import diversity as dv
from poolforge.errors import DataError


def row(wrong_positions, m=10):
    r = np.ones(m, dtype=bool)
    r[list(wrong_positions)] = False
    return r


def test_double_fault_enumeration():
    c1 = row({1, 2, 3})
    c2 = row({3, 4})
    assert dv.double_fault(c1, c2) == pytest.approx(0.1)


def test_double_fault_identical_rows_equal_error_rate():
    c = row({0, 4, 7})
    assert dv.double_fault(c, c) == pytest.approx(0.3)


def test_double_fault_complementary_errors():
    c1 = row({0, 1})
    c2 = row({5, 6})
    assert dv.double_fault(c1, c2) == 0.0


def test_double_fault_validation():
    with pytest.raises(DataError):
        dv.double_fault(row({0}, m=5), row({0}, m=6))
    with pytest.raises(DataError):
        dv.double_fault(np.array([], dtype=bool), np.array([], dtype=bool))


def test_ddv_arithmetic():
    # pairwise DF(0,1)=0.2, DF(0,2)=0.4 -> ddv(0)=0.3
    m = 10
    c0 = row(set(range(0, 4)), m)  # wrong on 0..3
    c1 = row({0, 1}, m)  # both wrong: 2 -> 0.2
    c2 = row({0, 1, 2, 3}, m)  # both wrong: 4 -> 0.4
    table = np.stack([c0, c1, c2])
    assert dv.double_fault(c0, c1) == pytest.approx(0.2)
    assert dv.double_fault(c0, c2) == pytest.approx(0.4)
    assert dv.ddv(table, 0) == pytest.approx(0.3)


def test_ddv_identical_members():
    table = np.stack([row({0, 1}), row({0, 1}), row({0, 1})])
    assert np.allclose(dv.ddv_all(table), 0.2)


def test_ddv_perfect_member_is_zero():
    table = np.stack([row(set()), row({0, 1, 2}), row({3, 4})])
    assert dv.ddv(table, 0) == 0.0


def test_ddv_requires_two_members():
    with pytest.raises(DataError):
        dv.ddv_all(row({0})[None, :])


@given(st.integers(0, 2**31 - 1), st.integers(2, 12), st.integers(1, 30))
@settings(max_examples=30, deadline=None)
def test_ddv_matches_bruteforce_and_df_properties(seed, n_members, m):
    rng = np.random.default_rng(seed)
    table = rng.random((n_members, m)) < 0.7
    values = dv.ddv_all(table)
    for i in range(n_members):
        expected = np.mean(
            [dv.double_fault(table[i], table[j]) for j in range(n_members) if j != i]
        )
        assert values[i] == pytest.approx(expected, abs=1e-12)
    for i in range(n_members):
        for j in range(n_members):
            df = dv.double_fault(table[i], table[j])
            assert df == pytest.approx(dv.double_fault(table[j], table[i]), abs=0)
            err_i = np.mean(~table[i])
            err_j = np.mean(~table[j])
            assert 0.0 <= df <= min(err_i, err_j) + 1e-12


def test_correctness_table():
    preds = np.array([[0, 1, 2], [2, 1, 0]])
    table = dv.correctness_table(preds, np.array([0, 1, 0]))
    assert table.tolist() == [[True, True, False], [False, True, True]]
    with pytest.raises(DataError):
        dv.correctness_table(preds, np.array([0, 1]))
