import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from heislab.lattice import LatticeSet, SparseFunction
from heislab.norms import (
    BOUNDARY_OPEN,
    BOUNDED_K1,
    CONJECTURED_BOUNDED,
    OUTSIDE,
    UNBOUNDED,
    ExponentQuery,
    classify_exponents,
    homogeneity_deficit,
    lorentz_norm,
    lp_norm,
    rearrangement,
    weak_norm,
)

INF = math.inf
values = st.lists(st.floats(-1e6, 1e6, allow_nan=False).filter(lambda v: abs(v) > 1e-6), min_size=1, max_size=40)
exps = st.floats(1.0, 8.0)


def fn(vals):
    rows = np.column_stack([np.arange(len(vals)), np.zeros((len(vals), 2), dtype=np.int64)])
    return SparseFunction.from_rows(1, rows, vals)


def chi(size):
    return LatticeSet.from_rows(1, np.column_stack([np.arange(size), np.zeros((size, 2), dtype=np.int64)])).indicator()


# --- examples -------------------------------------------------------------------


def test_lp_examples():
    assert lp_norm(chi(8), 3) == pytest.approx(2.0, rel=1e-15)
    assert lp_norm(fn([3.0, 4.0]), 2) == 5.0
    for p in (1, 2.5, INF):
        assert lp_norm(SparseFunction.delta(1), p) == 1.0


def test_weak_examples():
    assert weak_norm(chi(27), 3) == pytest.approx(3.0, rel=1e-15)
    assert weak_norm(fn([7.5]), 2) == 7.5
    assert weak_norm(fn([4.0, 1.0]), 1) == 4.0


def test_lorentz_examples():
    assert lorentz_norm(fn([2.0, 1.0]), 2, 2) == pytest.approx(math.sqrt(5), rel=1e-15)
    assert lorentz_norm(fn([0.3]), 1.5, 4) == pytest.approx(0.3, rel=1e-15)


def test_empty_and_errors():
    z = SparseFunction.zero(1)
    assert lp_norm(z, 2) == weak_norm(z, 2) == lorentz_norm(z, 2, 3) == 0.0
    with pytest.raises(ValueError):
        lp_norm(chi(3), 0.5)
    with pytest.raises(ValueError):
        lorentz_norm(chi(3), INF, 2)


def test_rearrangement():
    assert rearrangement(fn([1.0, -5.0, 3.0])).tolist() == [5.0, 3.0, 1.0]


# --- footnote identity ------------------------------------------------------------


@pytest.mark.parametrize("size", [1, 2, 7, 64, 1000])
@pytest.mark.parametrize("p", [1, 1.5, 2, 3])
@pytest.mark.parametrize("q", [1, 1.5, 2, 3, INF])
def test_indicator_lorentz_identity(size, p, q):
    assert lorentz_norm(chi(size), p, q) == pytest.approx(size ** (1 / p), rel=1e-12)


@given(st.integers(1, 500), exps)
def test_indicator_weak_identity(size, q):
    assert weak_norm(chi(size), q) == pytest.approx(size ** (1 / q), rel=1e-12)
    assert lorentz_norm(chi(size), q, 2.0) == pytest.approx(size ** (1 / q), rel=1e-12)


# --- properties -------------------------------------------------------------------


@given(values, exps)
def test_weak_below_lp(vals, q):
    f = fn(vals)
    assert weak_norm(f, q) <= lp_norm(f, q) * (1 + 1e-12)


@given(values, exps)
def test_lorentz_diagonal_is_lp(vals, p):
    f = fn(vals)
    assert lorentz_norm(f, p, p) == pytest.approx(lp_norm(f, p), rel=1e-12)


@given(values, exps, exps, st.floats(-1e3, 1e3).filter(lambda c: abs(c) > 1e-3))
def test_homogeneity(vals, p, q, c):
    f, g = fn(vals), fn([c * v for v in vals])
    assert lp_norm(g, p) == pytest.approx(abs(c) * lp_norm(f, p), rel=1e-12)
    assert weak_norm(g, q) == pytest.approx(abs(c) * weak_norm(f, q), rel=1e-12)
    assert lorentz_norm(g, p, q) == pytest.approx(abs(c) * lorentz_norm(f, p, q), rel=1e-12)


@given(values)
def test_lorentz_permutation_invariant(vals):
    f, g = fn(vals), fn(vals[::-1])
    assert lorentz_norm(f, 2, 3) == lorentz_norm(g, 2, 3)


# --- classifier -------------------------------------------------------------------


def cls(k, lam, ip, iq):
    return classify_exponents(ExponentQuery.from_reciprocals(k, lam, ip, iq)).label


def test_classifier_examples():
    assert cls(1, 0.6, 0.8, 0.5) == BOUNDED_K1
    assert cls(1, 0.7, 1.0, 0.9) == UNBOUNDED
    assert classify_exponents(ExponentQuery(1, 0.6, 1.25, 2)).label == BOUNDED_K1


def point_on_line(k, lam):
    """Midpoint of the part of the homogeneity line where (ii) holds strictly."""
    gap = 2 * k * (1 - lam) / (2 * k + 2)
    lo, hi = max(1 - lam, gap), min(1.0, lam + gap)
    assert lo < hi
    ip = (lo + hi) / 2
    return ip, ip - gap


@pytest.mark.parametrize("lam", [0.4, 0.5, 0.8])
def test_classifier_boundary_line(lam):
    assert cls(1, lam, *point_on_line(1, lam)) == BOUNDARY_OPEN
    assert cls(2, lam, *point_on_line(2, lam)) == CONJECTURED_BOUNDED


def test_boundary_line_misses_region_for_small_lambda():
    # for k = 1 and lam <= 1/3, no point of the line satisfies (ii)
    for ip in np.linspace(0, 1, 201):
        assert cls(1, 0.3, ip, ip - 0.35) in (UNBOUNDED, OUTSIDE) or ip - 0.35 < 0


def test_classifier_condition_ii():
    assert cls(1, 0.5, 0.9, 0.5) == UNBOUNDED  # 1/q = lambda
    assert cls(1, 0.5, 0.5, 0.1) == UNBOUNDED  # 1/p = 1 - lambda
    assert cls(1, 0.5, 0.9, 0.3) == BOUNDED_K1


def test_classifier_outside():
    assert cls(1, 1.2, 0.9, 0.1) == OUTSIDE
    assert cls(1, 0.0, 0.9, 0.1) == OUTSIDE
    assert classify_exponents(ExponentQuery(1, 0.5, 0.5, 2)).label == OUTSIDE


def test_deficit_sign():
    assert homogeneity_deficit(1, 0.6, 0.8, 0.5) == pytest.approx(0.1)
    assert homogeneity_deficit(2, 0.5, 0.5, 0.5 - 1 / 3) == pytest.approx(0.0, abs=1e-15)


@pytest.mark.parametrize("k", [1, 2])
@pytest.mark.parametrize("lam", [0.25, 0.5, 0.75])
def test_classifier_monotone(k, lam):
    grid = np.linspace(0.0, 1.0, 41)
    ok = {BOUNDED_K1, BOUNDARY_OPEN, CONJECTURED_BOUNDED}
    for ip in grid:
        for iq in grid:
            if cls(k, lam, ip, iq) not in ok:
                continue
            for ip2 in grid[grid >= ip]:
                for iq2 in grid[grid <= iq]:
                    if iq2 < lam and ip2 > 1 - lam:
                        assert cls(k, lam, ip2, iq2) != UNBOUNDED
