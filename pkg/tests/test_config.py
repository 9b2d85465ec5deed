from fractions import Fraction as F

import pytest

from wkneading.config import ConfigError, RunConfig, load_text, parse_config, parse_param

TENT = """\
name: tent
interval: [0, 1]
cuts: ["1/2"]
branches:
  - {slope: 2, intercept: 0, weight: 1}
  - {slope: -2, intercept: 2, weight: 1}
mode: exact
"""


def test_tent_file():
    sys, cfg = parse_config("tent")
    assert sys.ell == 1 and sys.exact
    assert (cfg.N, cfg.N_id, cfg.depth_cap, cfg.tol) == (64, 12, 24, 1e-12)


def test_appendix_c_param_override():
    sys, _ = parse_config("appendix_c")
    assert sys.ell == 2 and sys.weights[2] == 5
    sys, cfg = parse_config("appendix_c", {"M": "100"})
    assert sys.weights[2] == 100
    assert cfg.params["M"] == "100"


def test_rational_strings():
    sys, _ = load_text(TENT)
    assert sys.cuts == (F(1, 2),)


def test_defaults_float_mode():
    sys, cfg = load_text(TENT.replace("mode: exact\n", ""))
    assert not sys.exact
    assert cfg.mode == "float"


@pytest.mark.parametrize(
    "text, field, line",
    [
        (TENT.replace('["1/2"]', '["2/3", "1/3"]'), "cuts[1]", 3),
        (TENT.replace("intercept: 2,", "intercept: 5,"), "branches[1]", 6),
        (TENT.replace("weight: 1}", "weight: K}", 1), "branches[0].weight", 5),
        (TENT.replace("slope: 2,", "slope: two2 x,"), "branches[0].slope", 5),
        (TENT + "colour: red\n", "colour", 8),
    ],
)
def test_errors_carry_field_and_line(text, field, line):
    with pytest.raises(ConfigError) as err:
        load_text(text, "x.yaml")
    assert err.value.field == field
    assert err.value.line == line
    assert "x.yaml" in str(err.value)


def test_yaml_syntax_error_has_line():
    with pytest.raises(ConfigError) as err:
        load_text("interval: [0, 1\ncuts: [1]\n", "bad.yaml")
    assert err.value.line is not None


def test_missing_file():
    with pytest.raises(ConfigError):
        parse_config("/nonexistent/system.yaml")


def test_run_config_checks():
    with pytest.raises(ConfigError):
        RunConfig(N=8, N_id=12).check()
    with pytest.raises(ConfigError):
        RunConfig(N=0).check()


@pytest.mark.parametrize("text, ok", [("M=5", True), ("M = 1/2", True), ("5=M", False), ("M", False)])
def test_parse_param(text, ok):
    if ok:
        name, value = parse_param(text)
        assert name == "M"
    else:
        with pytest.raises(ConfigError):
            parse_param(text)
