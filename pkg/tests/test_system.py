import random
from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wkneading import fixtures
from wkneading.system import (
    FLOAT,
    Germ,
    GermAmbiguityError,
    ValidationError,
    WeightedSystem,
    closed_interval,
    germ_orbit,
    germ_step,
    minus,
    open_interval,
    orbit,
    plus,
    preimages,
    sigma,
    singleton,
    validate_system,
)


def _raw(**kw):
    raw = {
        "interval": [0, 1],
        "cuts": ["1/2"],
        "branches": [
            {"slope": 2, "intercept": 0, "weight": 1},
            {"slope": -2, "intercept": 2, "weight": 1},
        ],
        "mode": "exact",
    }
    raw.update(kw)
    return raw


def test_validate_tent():
    sys = validate_system(_raw())
    assert sys.ell == 1
    assert sys.cuts == (F(1, 2),)
    assert sys.signs == (1, -1)


@pytest.mark.parametrize(
    "change, field",
    [
        ({"cuts": ["2/3", "1/3"]}, "cuts"),
        ({"cuts": ["1/2", "1/2"]}, "cuts"),
        ({"cuts": []}, "cuts"),
        ({"mode": "decimal"}, "mode"),
    ],
)
def test_validation_errors_name_field(change, field):
    with pytest.raises(ValidationError) as err:
        validate_system(_raw(**change))
    assert err.value.field == field


def test_validation_escape_names_branch():
    raw = _raw(branches=[{"slope": 2, "intercept": 0}, {"slope": -2, "intercept": 3}])
    with pytest.raises(ValidationError) as err:
        validate_system(raw)
    assert err.value.branch == 1
    assert "escapes" in str(err.value)


def test_validation_flat_branch():
    raw = _raw(branches=[{"slope": 0, "intercept": 0}, {"slope": -2, "intercept": 2}])
    with pytest.raises(ValidationError) as err:
        validate_system(raw)
    assert err.value.branch == 0


def test_germ_order():
    # (x,-1) < x < (x,+1) and germs at different points order by point
    x = F(1, 3)
    assert minus(x) < (x, 0) < plus(x)
    assert plus(x) < minus(F(1, 2))


def test_germ_interval_membership():
    J = open_interval(F(1, 4), F(1, 2))
    assert F(1, 3) in J
    assert F(1, 4) not in J and F(1, 2) not in J
    K = closed_interval(F(1, 4), F(1, 2))
    assert F(1, 4) in K and F(1, 2) in K
    assert singleton(F(1, 3)).is_point
    assert open_interval(F(1, 2), F(1, 2)).empty


def test_sigma_values():
    assert sigma(plus(F(1, 2)), F(1, 3)) == F(1, 2)
    assert sigma(minus(F(1, 2)), F(2, 3)) == F(-1, 2)
    assert sigma(plus(F(0)), F(0)) == F(1, 2)
    assert sigma(plus(F(1, 2)), F(1, 2)) == F(1, 2)
    assert sigma(minus(F(1, 2)), F(1, 2)) == F(-1, 2)


def test_germ_step_at_cut_uses_one_sided_branch(tent):
    # (1/2)^- runs on branch 0: 2x -> 1 from below; (1/2)^+ on branch 1: 2-2x -> 1 from below
    assert germ_step(tent, minus(F(1, 2))) == Germ(F(1), -1)
    assert germ_step(tent, plus(F(1, 2))) == Germ(F(1), -1)
    assert germ_step(tent, minus(F(1))) == Germ(F(0), 1)
    assert germ_step(tent, plus(F(0))) == Germ(F(0), 1)


def test_orbit_detects_cycle(tent):
    orb = orbit(tent, plus(F(1, 2)), 10)
    # 1/2+ -> 1- -> 0+ -> 0+
    assert orb.germs == [plus(F(1, 2)), minus(F(1)), plus(F(0))]
    assert orb.start == 2
    assert orb.germ(7) == plus(F(0))


def test_germ_orbit_weights_appendix_c():
    # (5/2)^+: weight M on the first step, then weight 1 inside [0, 2]
    sys = fixtures.appendix_c(7)
    rows = germ_orbit(sys, plus(F(5, 2)), 5)
    assert [g for *_, g in rows] == [1, 7, 7, 7, 7, 7]
    assert rows[1][0] == plus(F(1))


def test_preimages_tent():
    levels = preimages(fixtures.tent(), F(1, 2), 3)
    assert [len(lv) for lv in levels] == [1, 2, 4, 8]
    assert sorted(x for x, _ in levels[1]) == [F(1, 4), F(3, 4)]


def test_float_snap_and_ambiguity():
    sys = WeightedSystem.affine(0.0, 1.0, [0.5], [(2, 0, 1), (-2, 2, 1)], mode=FLOAT)
    assert sys.settle(0.5 + 1e-14) == 0.5
    with pytest.raises(GermAmbiguityError):
        sys.settle(0.5 + 1e-10)
    assert sys.settle(0.5 + 1e-6) == 0.5 + 1e-6


def test_float_orbit_hits_cut():
    # 0.1 * 2^k stays clear, 1/4 -> 1/2 exactly after snapping
    sys = WeightedSystem.affine(0.0, 1.0, [0.5], [(2, 0, 1), (-2, 2, 1)], mode=FLOAT)
    assert germ_step(sys, plus(0.25)) == plus(0.5)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6))
def test_orbits_stay_in_interval(seed):
    rng = random.Random(seed)
    sys = fixtures.random_affine(rng)
    x = Germ(F(rng.randrange(1, 999), 1000), rng.choice((-1, 1)))
    for g, _, _, _ in germ_orbit(sys, x, 20):
        assert sys.a <= g.base <= sys.b
        # boundary germs point inward
        assert not (g.base == sys.a and g.dir < 0)
        assert not (g.base == sys.b and g.dir > 0)
