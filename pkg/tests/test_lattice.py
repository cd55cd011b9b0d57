import numpy as np
import oracles
import pytest
from hypothesis import given
from hypothesis import strategies as st

from heislab.counting import r2k_table
from heislab.errors import BudgetExceededError
from heislab.lattice import (
    ADJOINT,
    COORD_LIMIT,
    FORWARD,
    LatticePoint,
    LatticeSet,
    SparseFunction,
    iterate_map,
    iterate_rows,
    match_rows,
    omega_rows,
    shell_points,
    symplectic_form,
)

coord = st.integers(-10**6, 10**6)
small = st.integers(-10**4, 10**4)


def vec(k, c=coord):
    return st.lists(c, min_size=2 * k, max_size=2 * k).map(tuple)


ks = st.integers(1, 3)


# --- symplectic form ---------------------------------------------------------


def test_omega_examples():
    assert symplectic_form((1, 2), (3, 4)) == 4
    assert symplectic_form((1, 0, 0, 1), (2, 3, 4, 5)) == -2
    assert symplectic_form((7, -3), (7, -3)) == 0


def test_omega_dimension_mismatch():
    with pytest.raises(ValueError):
        symplectic_form((1, 2), (1, 2, 3, 4))


@given(ks.flatmap(lambda k: st.tuples(vec(k), vec(k), vec(k))))
def test_omega_antisymmetric_bilinear(args):
    n, n2, m = args
    assert symplectic_form(n, m) == -symplectic_form(m, n)
    assert symplectic_form(n, n) == 0
    nn = tuple(a + b for a, b in zip(n, n2))
    assert symplectic_form(nn, m) == symplectic_form(n, m) + symplectic_form(n2, m)
    assert symplectic_form(n, m) == oracles.omega(n, m)


@given(ks.flatmap(lambda k: st.tuples(st.just(k), st.lists(st.tuples(vec(k), vec(k)), min_size=1, max_size=20))))
def test_omega_rows_matches_scalar(args):
    k, pairs = args
    n = np.array([p[0] for p in pairs], dtype=np.int64)
    m = np.array([p[1] for p in pairs], dtype=np.int64)
    assert omega_rows(n, m, k).tolist() == [oracles.omega(a, b) for a, b in pairs]


def test_omega_rows_overflow_guard():
    big = np.full((1, 8), COORD_LIMIT, dtype=np.int64)
    with pytest.raises(OverflowError):
        omega_rows(big, big, 4)


# --- points and iteration -----------------------------------------------------


def test_point_guard():
    LatticePoint((COORD_LIMIT, 0), -COORD_LIMIT)
    with pytest.raises(OverflowError):
        LatticePoint((COORD_LIMIT + 1, 0), 0)
    with pytest.raises(ValueError):
        LatticePoint((1, 2, 3), 0)


def test_iterate_examples():
    x = LatticePoint((1, 2), 5)
    assert iterate_map(x, (3, 4), FORWARD) == LatticePoint((-2, -2), 1)
    assert iterate_map(x, (0, 0), FORWARD) == x
    assert iterate_map(x, (3, 4), ADJOINT) == LatticePoint((4, 6), 9)


@given(ks.flatmap(lambda k: st.tuples(vec(k, small), small, vec(k, small))))
def test_iterate_inverse_pair(args):
    n, t, m = args
    x = LatticePoint(n, t)
    assert iterate_map(iterate_map(x, m, FORWARD), m, ADJOINT) == x
    assert iterate_map(iterate_map(x, m, ADJOINT), m, FORWARD) == x
    assert iterate_map(x, m, FORWARD) == LatticePoint(*oracles.forward((n, t), m))


def test_iterate_rows_matches_scalar():
    rng = np.random.default_rng(3)
    rows = rng.integers(-50, 50, size=(40, 5))
    m = rng.integers(-9, 9, size=(40, 4))
    got = iterate_rows(rows, m, 2, ADJOINT)
    for r, mm, g in zip(rows.tolist(), m.tolist(), got.tolist()):
        assert g == list(iterate_map(LatticePoint.from_row(r), mm, ADJOINT).row())


# --- shells ---------------------------------------------------------------------


@pytest.mark.parametrize("k,j,size", [(1, 0, 8), (1, 1, 36), (2, 0, 64)])
def test_shell_sizes(k, j, size):
    assert len(shell_points(k, j)) == size


def test_shell_j0_members():
    got = {tuple(m) for m in shell_points(1, 0).points.tolist()}
    assert got == {(1, 0), (-1, 0), (0, 1), (0, -1), (1, 1), (1, -1), (-1, 1), (-1, -1)}


@pytest.mark.parametrize("k,j", [(1, 0), (1, 1), (1, 2), (1, 3), (2, 0), (2, 1)])
def test_shell_matches_brute_force(k, j):
    sh = shell_points(k, j)
    got = sorted(map(tuple, sh.points.tolist()))
    assert got == sorted(oracles.shell(k, j))
    assert np.abs(sh.points).max() <= 2 ** (j + 1)


@pytest.mark.parametrize("j", range(6))
def test_shell_size_from_r2(j):
    r2 = r2k_table(4 ** (j + 1), 1)
    assert len(shell_points(1, j)) == int(r2[4**j : 4 ** (j + 1)].sum())


def test_shell_budget():
    with pytest.raises(BudgetExceededError):
        shell_points(2, 6, budget=1000)


def test_budget_env(monkeypatch):
    monkeypatch.setenv("HEISLAB_BUDGET", "100")
    with pytest.raises(BudgetExceededError, match="HEISLAB_BUDGET"):
        shell_points(1, 3)


# --- sets and sparse functions -----------------------------------------------


def test_sparse_function_drops_zeros_and_sums():
    f = SparseFunction.from_rows(1, [[0, 0, 0], [1, 0, 0], [0, 0, 0], [2, 2, 2]], [1.0, 0.0, 2.0, 0.5])
    assert len(f) == 2
    assert f[LatticePoint((0, 0), 0)] == 3.0
    assert f[LatticePoint((1, 0), 0)] == 0.0
    g = SparseFunction(1, {LatticePoint((2, 2), 2): 0.5, LatticePoint((0, 0), 0): 3.0})
    assert f == g


def test_sparse_function_cancellation_removed():
    f = SparseFunction.from_rows(1, [[1, 1, 1], [1, 1, 1]], [1.5, -1.5])
    assert len(f) == 0


def test_sparse_function_k_mismatch():
    with pytest.raises(ValueError):
        SparseFunction.from_rows(1, [[0, 0, 0, 0, 0]], [1.0])


def test_values_at_and_restriction():
    f = SparseFunction.from_rows(1, [[0, 0, 0], [1, 2, 3]], [1.0, 4.0])
    assert f.values_at(np.array([[1, 2, 3], [9, 9, 9]])).tolist() == [4.0, 0.0]
    s = LatticeSet(1, [LatticePoint((1, 2), 3)])
    assert f.restricted(s) == SparseFunction.from_rows(1, [[1, 2, 3]], [4.0])
    assert f.scaled(-2.0)[LatticePoint((1, 2), 3)] == -8.0


def test_set_operations():
    s = LatticeSet.from_rows(1, [[0, 0, 0], [1, 1, 1], [0, 0, 0]])
    assert len(s) == 2
    assert LatticePoint((1, 1), 1) in s
    assert LatticePoint((1, 1), 2) not in s
    assert s.contains_rows(np.array([[1, 1, 1], [5, 5, 5]])).tolist() == [True, False]
    assert s.filter(np.array([True, False])).issubset(s)
    assert s.indicator().values.tolist() == [1.0, 1.0]
    y = LatticePoint((2, 0), 5)
    assert s.reflected_about(y) == LatticeSet.from_rows(1, [[2, 0, 5], [1, -1, 4]])


@given(st.lists(st.tuples(st.integers(-20, 20), st.integers(-20, 20), st.integers(-20, 20)), max_size=30),
       st.lists(st.tuples(st.integers(-20, 20), st.integers(-20, 20), st.integers(-20, 20)), max_size=30))
def test_match_rows(table, queries):
    t = LatticeSet.from_rows(1, np.array(table, dtype=np.int64).reshape(-1, 3))
    q = np.array(queries, dtype=np.int64).reshape(-1, 3)
    idx = match_rows(q, t.rows)
    for row, i in zip(q.tolist(), idx.tolist()):
        if tuple(row) in set(table):
            assert t.rows[i].tolist() == row
        else:
            assert i == -1
