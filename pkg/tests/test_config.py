"""JSON configuration parsing, defaults, and round-tripping."""

import json

import pytest

from lcc import ConfigError, FollowerBrake, HeadSinusoid, SystemVariant
from lcc.config import (
    apply_overrides,
    axes_from_config,
    grid_from_config,
    load_config,
    parse_config,
    scenario_from_config,
    serialize_config,
    transfer_spec_from_config,
)


def test_minimal_config_fills_defaults():
    cfg = parse_config({"variant": "fd", "n": 2})
    assert cfg["dt"] == 0.01
    assert cfg["v_star"] == 15.0
    assert cfg["driver"]["alpha"] == 0.6
    assert cfg["controller"]["mode"] == "hdv-baseline"
    assert cfg["perturbation"] == {"kind": "none"}
    scenario = scenario_from_config(
        parse_config({"variant": "fd", "n": 2, "controller": {"mode": "explicit"}})
    )
    assert scenario.variant is SystemVariant.FD_LCC
    assert scenario.n == 2 and scenario.m == 0


def test_case_gains_config():
    cfg = parse_config(
        {
            "variant": "general",
            "m": 2,
            "n": 2,
            "gains": {"-2": [1, -1], "-1": [1, -1], "1": [-1, -1], "2": [-1, -1]},
        }
    )
    spec = transfer_spec_from_config(cfg)
    assert spec.gains.mu == {-2: 1, -1: 1, 1: -1, 2: -1}
    assert spec.gains.k == {-2: -1, -1: -1, 1: -1, 2: -1}


def test_round_trip(tmp_path):
    doc = {
        "variant": "cf",
        "n": 3,
        "gains": {"1": [-0.2, 0.05]},
        "perturbation": {"kind": "follower-brake", "vehicle": 1},
        "heterogeneity": {"delay_base": 0.3},
    }
    cfg = parse_config(doc)
    path = tmp_path / "cfg.json"
    path.write_text(serialize_config(cfg))
    again = load_config(path)
    assert again == cfg
    assert json.loads(serialize_config(again)) == json.loads(serialize_config(cfg))


def test_unknown_key_rejected():
    with pytest.raises(ConfigError) as err:
        parse_config({"variant": "fd", "bogus": 1})
    assert "bogus" in str(err.value)


def test_nested_error_names_path():
    with pytest.raises(ConfigError) as err:
        parse_config({"driver": {"alpha": -1.0}})
    assert "driver.alpha" in str(err.value)
    with pytest.raises(ConfigError) as err:
        parse_config({"scan": {"axis1": {"vehicle": 1}}})
    assert "scan" in str(err.value)


def test_bad_json_and_missing_file(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "absent.json")
    path = tmp_path / "broken.json"
    path.write_text("{not json")
    with pytest.raises(ConfigError):
        load_config(path)


def test_perturbation_defaults_by_kind():
    cfg = parse_config({"perturbation": {"kind": "head-sinusoid"}})
    scenario = scenario_from_config(parse_config({"variant": "cf", "n": 1,
                                                  "perturbation": {"kind": "head-sinusoid"}}))
    assert cfg["perturbation"]["amplitude"] == 2.0
    assert scenario.perturbation == HeadSinusoid(amplitude=2.0, period=10.0, start=20.0)
    scenario = scenario_from_config(
        parse_config(
            {
                "variant": "fd",
                "n": 4,
                "controller": {"mode": "explicit"},
                "perturbation": {"kind": "follower-brake", "decel": -3.0},
            }
        )
    )
    assert scenario.perturbation == FollowerBrake(vehicle=1, decel=-3.0, duration=1.0, start=20.0)


def test_scan_axes_and_grid():
    cfg = parse_config(
        {
            "variant": "general",
            "m": 2,
            "n": 2,
            "frequency": {"points": 200},
            "scan": {
                "axis1": {"vehicle": 1, "component": "mu", "lo": -5, "hi": 5, "points": 11},
                "axis2": {"vehicle": 1, "component": "k"},
            },
        }
    )
    ax1, ax2 = axes_from_config(cfg)
    assert ax1.points == 11 and ax1.lo == -5
    assert ax2.points == 101 and ax2.lo == -10 and ax2.hi == 10  # defaults
    assert grid_from_config(cfg).points == 200
    with pytest.raises(ConfigError):
        axes_from_config(parse_config({}))


def test_overrides():
    doc = apply_overrides({"variant": "fd"}, ["n=4", "driver.alpha=0.55", "controller.mode=explicit"])
    cfg = parse_config(doc)
    assert cfg["n"] == 4
    assert cfg["driver"]["alpha"] == 0.55
    assert cfg["controller"]["mode"] == "explicit"
    with pytest.raises(ConfigError):
        apply_overrides({}, ["no-equals-sign"])
    with pytest.raises(ConfigError):
        parse_config(apply_overrides({}, ["driver.unknown=1"]))


def test_schema_version_pinned():
    with pytest.raises(ConfigError):
        parse_config({"schema": 99})
