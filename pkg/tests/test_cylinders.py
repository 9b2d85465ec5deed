import csv
import random
from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import brute_cylinders, brute_fixed_points
from wkneading import fixtures
from wkneading.cylinders import (
    CylinderCapError,
    count_cylinders,
    enumerate_cylinders,
    expansiveness_probe,
    fixed_point_counts,
    iter_levels,
    norm_sequences,
    norms,
    norms_direct,
    pi_geometric,
    pi_weight,
    write_cylinders_csv,
    zeta_residual,
    zeta_series,
)
from wkneading.system import FLOAT

NAMES = ["tent", "golden", "appendix_c", "discont_3_2", "zero_weight"]


@pytest.mark.parametrize("name", NAMES)
@pytest.mark.parametrize("n", [1, 3, 5])
def test_enumeration_matches_refined_partition(name, n):
    sys = fixtures.FIXTURES[name]()
    got = [(c.word, c.u, c.v) for c in enumerate_cylinders(sys, n)]
    assert got == sorted(brute_cylinders(sys, n), key=lambda w: w[0])


@pytest.mark.parametrize("name", NAMES)
def test_counts_dp_match_enumeration(name):
    sys = fixtures.FIXTURES[name]()
    levels = iter_levels(sys, 7)
    assert count_cylinders(sys, 7) == [len(lv) for lv in levels]


def test_tent_cylinders_are_dyadic(tent):
    cyls = enumerate_cylinders(tent, 4)
    assert len(cyls) == 16
    assert all(c.diam == F(1, 16) for c in cyls)


@pytest.mark.parametrize("name", NAMES)
def test_norms_dp_match_direct(name):
    sys = fixtures.FIXTURES[name]()
    for n in (1, 4, 7):
        assert norms(sys, n) == norms_direct(sys, n)


def test_appendix_c_norm_closed_form():
    # 2^n tent cylinders of weight 1, plus 2^(n-1) cylinders starting in [2, 3] of weight M
    M = 5
    ones, sups = norm_sequences(fixtures.appendix_c(M), 10)
    assert ones[1:] == [2**n + M * 2 ** (n - 1) for n in range(1, 11)]
    assert sups[1:] == [M] * 10


def test_pi_combinatorial_equals_geometric():
    total = 0
    for name in NAMES:
        sys = fixtures.FIXTURES[name]()
        for level in iter_levels(sys, 8):
            for c in level:
                assert pi_weight(sys, c) == pi_geometric(sys, c), (name, c.word)
                total += 1
    assert total >= 500


@pytest.mark.parametrize("name", NAMES)
def test_fixed_points_match_chord_oracle(name):
    sys = fixtures.FIXTURES[name]()
    assert fixed_point_counts(sys, 7) == [brute_fixed_points(sys, n) for n in range(1, 8)]


def test_tent_fixed_points(tent):
    assert fixed_point_counts(tent, 12) == [2**n - 1 for n in range(1, 13)]


def test_fixed_points_float_mode():
    ex = fixed_point_counts(fixtures.appendix_c(5), 10)
    fl = fixed_point_counts(fixtures.appendix_c(5, mode=FLOAT), 10)
    assert [float(x) for x in ex] == fl


def test_zeta_series_closed_form():
    # counts 2^n - 1 give Z = (1 - t)/(1 - 2t) = 1 + t + 2t^2 + 4t^3 + ...
    Z = zeta_series([2**n - 1 for n in range(1, 9)])
    assert list(Z) == [1, 1, 2, 4, 8, 16, 32, 64, 128]


@pytest.mark.parametrize("name", NAMES)
def test_zeta_identity(name):
    res = zeta_residual(fixtures.FIXTURES[name](), 14)
    assert res.max_abs() == 0


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 10**6))
def test_zeta_identity_random(seed):
    sys = fixtures.random_affine(random.Random(seed), cylinder_budget=(12, 4000))
    assert zeta_residual(sys, 12).max_abs() == 0


def test_caps():
    with pytest.raises(CylinderCapError):
        enumerate_cylinders(fixtures.tent(), 25)
    with pytest.raises(CylinderCapError):
        enumerate_cylinders(fixtures.tent(), 12, max_count=1000)


def test_expansiveness_probe(tent, golden):
    probe = expansiveness_probe(tent, 8)
    assert probe.sup_diam[-1] == F(1, 256)
    assert probe.contracting
    assert probe.label == "heuristic"


def test_cylinder_csv(tmp_path, tent):
    path = tmp_path / "cylinders.csv"
    write_cylinders_csv(path, tent, enumerate_cylinders(tent, 2))
    lines = path.read_text().splitlines()
    assert lines[0].startswith("# cylinders v1")
    rows = list(csv.DictReader(lines[1:]))
    assert [r["word"] for r in rows] == ["00", "01", "10", "11"]
    assert sum(int(r["omega"]) for r in rows) == 3
