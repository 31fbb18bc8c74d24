import math

import pytest

from adaptalloc.scenarios import (
    FULL_GRID, PRESETS, ConfigParseError, ScenarioError, parse_config, preset, serialize,
)

MINIMAL = """\
# two normal arms
name = demo
family = normal
means = 0.8, 0.2
sds = 1, 0.8366600265340756
n_grid = 200, 400
"""


def test_round_trip():
    spec = parse_config(MINIMAL)
    assert spec.initial_m == 10 and spec.reps == 10_000 and spec.metrics == ("pcs", "n1")
    again = parse_config(serialize(spec))
    assert again == spec
    assert serialize(again) == serialize(spec)


@pytest.mark.parametrize("name", sorted(PRESETS))
def test_presets_round_trip(name):
    assert parse_config(serialize(PRESETS[name])) == PRESETS[name]


def test_descending_grid_rejected():
    with pytest.raises(ScenarioError, match="n_grid not ascending"):
        parse_config(MINIMAL.replace("200, 400", "300, 200"))


def test_unknown_key_reports_line():
    with pytest.raises(ConfigParseError) as e:
        parse_config(MINIMAL + "colour = blue\n")
    assert e.value.line == 7 and e.value.key == "colour"


@pytest.mark.parametrize("text, key", [
    (MINIMAL.replace("means = 0.8, 0.2", "means = 0.8, abc"), "means"),
    (MINIMAL.replace("name = demo\n", ""), "name"),
    (MINIMAL + "name = again\n", "name"),
    (MINIMAL.replace("sds = 1, 0.8366600265340756", "sds = 1"), "sds"),
    (MINIMAL + "reps = 1, 2\n", "reps"),
])
def test_parse_errors_name_field(text, key):
    with pytest.raises(ConfigParseError) as e:
        parse_config(text)
    assert e.value.key == key


@pytest.mark.parametrize("extra", ["metrics = pcs, bogus\n", "initial_m = 150\n", "reps = 0\n"])
def test_validation_errors(extra):
    with pytest.raises(ScenarioError):
        parse_config(MINIMAL + extra)


def test_bernoulli_rejects_sds():
    text = "name = b\nfamily = bernoulli\nmeans = 0.5, 0.2\nsds = 1, 1\nn_grid = 100\n"
    with pytest.raises(ConfigParseError):
        parse_config(text)


def test_inferior_metric_needs_unique_worst():
    text = "name = b\nfamily = bernoulli\nmeans = 0.5, 0.5\nn_grid = 100\nmetrics = pcs, inferior\n"
    with pytest.raises(ScenarioError):
        parse_config(text)


def test_table1_col2_preset():
    spec = preset("table1_col2")
    assert [a.mean for a in spec.arms] == [0.8, 0.2]
    assert [a.sd ** 2 for a in spec.arms] == pytest.approx([1.0, 0.7])
    assert spec.n_grid == FULL_GRID == (200, 300, 400, 800, 900, 1000, 1500, 2000, 2500, 3000, 3500)


def test_real_data_presets():
    preg = preset("pregabalin")
    assert [(a.mean, a.sd) for a in preg.arms] == [(-3.60, 2.25), (-5.29, 2.20)]
    fl = preset("fluoxetine")
    assert [a.mean for a in fl.arms] == [0.58, 0.36]
    assert preg.n_grid[-1] == fl.n_grid[-1] == 2000


def test_unknown_preset():
    with pytest.raises(ScenarioError):
        preset("table9")
