import random
from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import generating_oracle, theta_oracle
from wkneading import fixtures
from wkneading.kneading import (
    ScalarKneading,
    boundary_column_residual,
    f_matrix,
    fr_residual,
    gamma,
    gamma_direct,
    kneading_det,
    kneading_matrix,
    mki_residual,
    mt_relations,
    row_germs,
    theta,
    theta_all,
)
from wkneading.semiconj import generating
from wkneading.series import TruncatedSeries
from wkneading.system import (
    FLOAT,
    GermInterval,
    closed_interval,
    germ_step,
    minus,
    open_interval,
    plus,
    sample_germs,
    singleton,
)


def _series_div(num, den, N):
    return (TruncatedSeries(num + [F(0)] * (N + 1 - len(num)))
            * TruncatedSeries(den + [F(0)] * (N + 1 - len(den))).inverse())


def test_tent_determinant_closed_form(tent):
    # oracle: (1-2t)/(1-t) by series division
    D = kneading_det(tent, 32)
    assert list(D) == list(_series_div([F(1), F(-2)], [F(1), F(-1)], 32))


def test_golden_determinant_zero_is_inverse_golden_mean(golden):
    D = kneading_det(golden, 40).to_float()
    t = (5**0.5 - 1) / 2
    assert abs(D.eval(t)) < 1e-6


@pytest.mark.parametrize("name", ["tent", "golden", "appendix_c", "discont_3_2"])
def test_constant_term_identity(name):
    sys = fixtures.FIXTURES[name]()
    R = kneading_matrix(sys, 4)
    assert R.coefficient(0).tolist() == np.eye(sys.ell + 1).tolist()


@pytest.mark.parametrize("seed", range(5))
def test_theta_matches_point_orbit(any_fixture, seed):
    rng = random.Random(seed)
    for g in sample_germs(any_fixture, 3, rng, denominator=997):
        for k in range(any_fixture.ell + 1):
            assert list(theta(any_fixture, g, k, 15)) == theta_oracle(any_fixture, g, k, 15)


def test_theta_last_column_is_minus_first(tent):
    th = theta_all(tent, plus(F(1, 3)), 8)
    assert list(th[-1]) == [-c for c in th[0]]


def test_theta_constant_term_c0_is_half(any_fixture):
    # sigma(a+, c_0) = +1/2 for every system
    assert theta(any_fixture, plus(any_fixture.a), 0, 3)[0] == F(1, 2)


def test_tent_row_one():
    # c1+ -> 1- -> 0+ (fixed) with [sg] = 1, -1, 1, 1, ...
    # c1- -> 1- -> 0+ with [sg] = 1, 1, -1, -1, ...
    R = kneading_matrix(fixtures.tent(), 6)
    assert list(R[1, 1]) == [1, -1, -1, -1, -1, -1, -1]
    assert list(R[1, 0]) == [0, -1, 1, 1, 1, 1, 1]


def test_generating_unweighted_is_geometric(tent, golden):
    for sys in (tent, golden):
        assert list(generating(sys, plus(F(1, 7)), 10)) == [1] * 11


def test_generating_appendix_c():
    M = 9
    sys = fixtures.appendix_c(M)
    assert list(generating(sys, plus(F(5, 2)), 6)) == [1] + [M] * 6
    for g in sample_germs(sys, 5, random.Random(1), denominator=991):
        assert list(generating(sys, g, 12)) == generating_oracle(sys, g, 12)


@pytest.mark.parametrize("name", ["tent", "appendix_c", "discont_3_2"])
def test_gamma_dp_matches_preimage_enumeration(name):
    sys = fixtures.FIXTURES[name]()
    rng = random.Random(5)
    for _ in range(4):
        u, v = sample_germs(sys, 2, rng, denominator=1009)
        J = GermInterval(u, v)
        for j in range(1, sys.ell + 1):
            assert list(gamma(sys, sys.c(j), J, 9)) == list(gamma_direct(sys, sys.c(j), J, 9))


def _intervals(sys, rng, count):
    out = []
    for k in range(count):
        u, v = sample_germs(sys, 2, rng, denominator=1013)
        x, y = u.base, v.base
        if x == y:
            continue
        out.append([open_interval(x, y), closed_interval(x, y),
                    GermInterval(minus(x), minus(y)), GermInterval(plus(x), plus(y))][k % 4])
    out.append(singleton(sys.c(1)))
    return out


@pytest.mark.parametrize("name", ["tent", "golden", "appendix_c", "discont_3_2"])
def test_main_identity(name):
    sys = fixtures.FIXTURES[name]()
    R = kneading_matrix(sys, 12)
    for J in _intervals(sys, random.Random(11), 8):
        for r in mki_residual(sys, J, 12, R):
            assert r.max_abs() == 0


@pytest.mark.parametrize("name", ["tent", "appendix_c", "golden"])
def test_fast_identity(name):
    sys = fixtures.FIXTURES[name]()
    assert fr_residual(sys, 8).max_abs() == 0


def test_fast_matrix_first_column_is_half_sums(tent):
    # m_{c_0} = 1/2, so column 0 of F is sum_q t^q [sg]^{q+1} eps*/2 along the row germs
    F_ = f_matrix(tent, 5)
    assert F_[0, 0][0] == sum(
        eps * F(1, 2) * (tent.signs[tent.branch_of(g)] * tent.weights[tent.branch_of(g)])
        for g, eps in row_germs(tent, 0)
    )


@pytest.mark.parametrize("name", ["tent", "golden", "appendix_c", "discont_3_2"])
def test_classical_determinant_relations(name):
    sys = fixtures.FIXTURES[name]()
    rep = mt_relations(sys, 12, sample_germs(sys, 10, random.Random(2)))
    assert rep.key_residual == 0
    assert rep.mt_spread == 0
    assert rep.mt_vs_det == 0
    assert rep.relation_residual == 0
    assert boundary_column_residual(sys, 12) == 0


def test_appendix_c_boundary_factor():
    # det B = H det R with H = 1 - t(s_0 g_0 + s_2 g_2)/2 = 1 - t(1 + M)/2
    M = 5
    rep = mt_relations(fixtures.appendix_c(M), 10)
    assert list(rep.H)[:2] == [1, F(-(1 + M), 2)]
    assert all(c == 0 for c in list(rep.H)[2:])


@pytest.mark.parametrize("name", ["tent", "golden", "appendix_c"])
def test_scalar_matrix_matches_series(name):
    sys = fixtures.FIXTURES[name]()
    ev = ScalarKneading(sys)
    R = kneading_matrix(sys, 60)
    for t in (0.1, 0.25, 0.4):
        assert np.allclose(ev.matrix(t), R.eval(t).astype(float), atol=1e-12)


def test_float_mode_matches_exact():
    ex = fixtures.appendix_c(5)
    fl = fixtures.appendix_c(5, mode=FLOAT)
    De, Df = kneading_det(ex, 20), kneading_det(fl, 20)
    assert max(abs(float(a) - b) for a, b in zip(De, Df)) < 1e-12


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6))
def test_homological_relation(seed):
    # theta(v;c_k) - theta(u;c_k) = t s_j g_j (theta(fv;c_k) - theta(fu;c_k)) for u, v in one piece
    rng = random.Random(seed)
    sys = fixtures.random_affine(rng)
    j = rng.randrange(sys.ell + 1)
    lo, hi = sys.points[j], sys.points[j + 1]
    xs = sorted(lo + (hi - lo) * F(rng.randrange(1, 500), 500) for _ in range(2))
    u, v = plus(xs[0]), minus(xs[1]) if xs[0] != xs[1] else plus(xs[1])
    N = 10
    lhs = [a - b for a, b in zip(theta_all(sys, v, N), theta_all(sys, u, N))]
    fu, fv = germ_step(sys, u), germ_step(sys, v)
    rhs = [a - b for a, b in zip(theta_all(sys, fv, N), theta_all(sys, fu, N))]
    c = sys.signs[j] * sys.weights[j]
    for k in range(sys.ell + 1):
        assert list(lhs[k])[1:] == [c * x for x in list(rhs[k])[:-1]]
        # no cutting point lies between two germs of one piece
        assert lhs[k][0] == 0


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10**6))
def test_main_identity_random_systems(seed):
    rng = random.Random(seed)
    sys = fixtures.random_affine(rng)
    u, v = sample_germs(sys, 2, rng, denominator=997)
    if u.base == v.base:
        return
    for r in mki_residual(sys, GermInterval(u, v), 8):
        assert r.max_abs() == 0
