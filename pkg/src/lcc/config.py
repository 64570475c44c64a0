"""Declarative JSON configuration for scenarios, analyses, and scans.

One versioned document type covers every CLI command; each command reads
the sections it needs.  Documents are validated against a JSON schema
with unknown keys rejected, then merged over the documented defaults, so
a minimal file like ``{"variant": "fd", "n": 2}`` is complete.
"""

from __future__ import annotations

import copy
import json
from pathlib import Path
from typing import Tuple

import jsonschema

from .errors import ConfigError
from .sim import (
    CavController,
    FollowerBrake,
    HeadSinusoid,
    HeterogeneitySpec,
    Perturbation,
    ScenarioConfig,
)
from .stability import FrequencyGrid, GainAxis, TransferSpec
from .systems import FeedbackGains, SystemVariant
from .vehicles import DriverParams, equilibrium_spacing, linearize

__all__ = [
    "SCHEMA_VERSION",
    "DEFAULTS",
    "CONFIG_SCHEMA",
    "load_config",
    "parse_config",
    "serialize_config",
    "apply_overrides",
    "driver_from_config",
    "coeffs_from_config",
    "scenario_from_config",
    "transfer_spec_from_config",
    "grid_from_config",
    "axes_from_config",
]

SCHEMA_VERSION = 1

DEFAULTS = {
    "schema": SCHEMA_VERSION,
    "variant": "fd",
    "m": 0,
    "n": 2,
    "v_star": 15.0,
    "dt": 0.01,
    "horizon": 100.0,
    "seed": 0,
    "driver": {
        "alpha": 0.6,
        "beta": 0.9,
        "v_max": 30.0,
        "s_st": 5.0,
        "s_go": 35.0,
        "delay": 0.0,
    },
    "gains": {},
    "controller": {"mode": "hdv-baseline", "ovm_baseline": False},
    "perturbation": {"kind": "none"},
    "heterogeneity": None,
    "frequency": {"omega_min": 1e-2, "omega_max": 1e2, "points": 1000},
    "scan": None,
}

_AXIS_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["vehicle", "component"],
    "properties": {
        "vehicle": {"type": "integer"},
        "component": {"enum": ["mu", "k"]},
        "lo": {"type": "number"},
        "hi": {"type": "number"},
        "points": {"type": "integer", "minimum": 1},
    },
}

CONFIG_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "schema": {"const": SCHEMA_VERSION},
        "variant": {"enum": ["fd", "cf", "general", "ccc"]},
        "m": {"type": "integer", "minimum": 0},
        "n": {"type": "integer", "minimum": 0},
        "v_star": {"type": "number", "exclusiveMinimum": 0},
        "dt": {"type": "number", "exclusiveMinimum": 0},
        "horizon": {"type": "number", "exclusiveMinimum": 0},
        "seed": {"type": "integer"},
        "driver": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "alpha": {"type": "number", "exclusiveMinimum": 0},
                "beta": {"type": "number", "exclusiveMinimum": 0},
                "v_max": {"type": "number", "exclusiveMinimum": 0},
                "s_st": {"type": "number", "minimum": 0},
                "s_go": {"type": "number", "exclusiveMinimum": 0},
                "delay": {"type": "number", "minimum": 0},
            },
        },
        "gains": {
            "type": "object",
            "additionalProperties": False,
            "patternProperties": {
                "^-?[0-9]+$": {
                    "type": "array",
                    "items": {"type": "number"},
                    "minItems": 2,
                    "maxItems": 2,
                }
            },
        },
        "controller": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "mode": {"enum": ["hdv-baseline", "explicit"]},
                "ovm_baseline": {"type": "boolean"},
            },
        },
        "perturbation": {
            "type": "object",
            "additionalProperties": False,
            "required": ["kind"],
            "properties": {
                "kind": {"enum": ["none", "head-sinusoid", "follower-brake"]},
                "amplitude": {"type": "number"},
                "period": {"type": "number", "exclusiveMinimum": 0},
                "start": {"type": "number", "minimum": 0},
                "vehicle": {"type": "integer"},
                "decel": {"type": "number"},
                "duration": {"type": "number", "exclusiveMinimum": 0},
            },
        },
        "heterogeneity": {
            "oneOf": [
                {"type": "null"},
                {
                    "type": "object",
                    "additionalProperties": False,
                    "properties": {
                        "alpha_jitter": {"type": "number", "minimum": 0},
                        "beta_jitter": {"type": "number", "minimum": 0},
                        "s_go_jitter": {"type": "number", "minimum": 0},
                        "delay_base": {"type": "number", "minimum": 0},
                        "delay_jitter": {"type": "number", "minimum": 0},
                    },
                },
            ]
        },
        "frequency": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "omega_min": {"type": "number", "exclusiveMinimum": 0},
                "omega_max": {"type": "number", "exclusiveMinimum": 0},
                "points": {"type": "integer", "minimum": 2},
            },
        },
        "scan": {
            "oneOf": [
                {"type": "null"},
                {
                    "type": "object",
                    "additionalProperties": False,
                    "required": ["axis1", "axis2"],
                    "properties": {"axis1": _AXIS_SCHEMA, "axis2": _AXIS_SCHEMA},
                },
            ]
        },
    },
}

_PERTURBATION_DEFAULTS = {
    "head-sinusoid": {"amplitude": 2.0, "period": 10.0, "start": 20.0},
    "follower-brake": {"vehicle": 1, "decel": -5.0, "duration": 1.0, "start": 20.0},
}
_AXIS_DEFAULTS = {"lo": -10.0, "hi": 10.0, "points": 101}


def _deep_merge(base: dict, override: dict) -> dict:
    out = copy.deepcopy(base)
    for key, val in override.items():
        if isinstance(val, dict) and isinstance(out.get(key), dict):
            out[key] = _deep_merge(out[key], val)
        else:
            out[key] = copy.deepcopy(val)
    return out


def parse_config(doc: dict) -> dict:
    """Validate a raw document and fill in all defaults."""
    if not isinstance(doc, dict):
        raise ConfigError("configuration must be a JSON object")
    try:
        jsonschema.validate(doc, CONFIG_SCHEMA)
    except jsonschema.ValidationError as exc:
        raise ConfigError(f"invalid config at {exc.json_path}: {exc.message}") from exc
    cfg = _deep_merge(DEFAULTS, doc)
    kind = cfg["perturbation"]["kind"]
    if kind != "none":
        cfg["perturbation"] = _deep_merge(
            {"kind": kind, **_PERTURBATION_DEFAULTS[kind]}, cfg["perturbation"]
        )
    if cfg["scan"] is not None:
        cfg["scan"] = {
            axis: _deep_merge(_AXIS_DEFAULTS, cfg["scan"][axis])
            for axis in ("axis1", "axis2")
        }
    try:
        jsonschema.validate(cfg, CONFIG_SCHEMA)
    except jsonschema.ValidationError as exc:
        raise ConfigError(f"invalid config at {exc.json_path}: {exc.message}") from exc
    return cfg


def load_config(path) -> dict:
    """Read, validate, and default-fill a JSON config file."""
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON ({path}): {exc}") from exc
    return parse_config(doc)


def serialize_config(cfg: dict) -> str:
    """Canonical JSON form; load(serialize(load(x))) equals load(x)."""
    return json.dumps(cfg, indent=2, sort_keys=True) + "\n"


def apply_overrides(doc: dict, overrides) -> dict:
    """Apply dotted key=value pairs (values parsed as JSON when possible)."""
    doc = copy.deepcopy(doc)
    for item in overrides or ():
        if "=" not in item:
            raise ConfigError(f"override {item!r} is not of the form key=value")
        key, _, raw = item.partition("=")
        try:
            value = json.loads(raw)
        except json.JSONDecodeError:
            value = raw
        node = doc
        parts = key.split(".")
        for part in parts[:-1]:
            node = node.setdefault(part, {})
            if not isinstance(node, dict):
                raise ConfigError(f"override path {key!r} crosses a non-object value")
        node[parts[-1]] = value
    return doc


def variant_from_config(cfg: dict) -> SystemVariant:
    return {
        "fd": SystemVariant.FD_LCC,
        "cf": SystemVariant.CF_LCC,
        "general": SystemVariant.GENERAL_LCC,
        "ccc": SystemVariant.CCC,
    }[cfg["variant"]]


def driver_from_config(cfg: dict) -> DriverParams:
    return DriverParams(**cfg["driver"])


def coeffs_from_config(cfg: dict):
    p = driver_from_config(cfg)
    return linearize(equilibrium_spacing(cfg["v_star"], p), p)


def gains_from_config(cfg: dict) -> FeedbackGains:
    return FeedbackGains.from_pairs(
        {int(key): (pair[0], pair[1]) for key, pair in cfg["gains"].items()}
    )


def _perturbation_from_config(cfg: dict) -> Perturbation:
    pert = cfg["perturbation"]
    if pert["kind"] == "none":
        return None
    if pert["kind"] == "head-sinusoid":
        return HeadSinusoid(
            amplitude=pert["amplitude"], period=pert["period"], start=pert["start"]
        )
    return FollowerBrake(
        vehicle=pert["vehicle"],
        decel=pert["decel"],
        duration=pert["duration"],
        start=pert["start"],
    )


def scenario_from_config(cfg: dict) -> ScenarioConfig:
    het = cfg["heterogeneity"]
    return ScenarioConfig(
        variant=variant_from_config(cfg),
        m=cfg["m"],
        n=cfg["n"],
        v_star=cfg["v_star"],
        horizon=cfg["horizon"],
        dt=cfg["dt"],
        perturbation=_perturbation_from_config(cfg),
        base_params=driver_from_config(cfg),
        heterogeneity=HeterogeneitySpec(**het) if het is not None else None,
        cav=CavController(
            gains=gains_from_config(cfg),
            mode=cfg["controller"]["mode"],
            ovm_baseline=cfg["controller"]["ovm_baseline"],
        ),
        seed=cfg["seed"],
    )


def transfer_spec_from_config(cfg: dict) -> TransferSpec:
    return TransferSpec(
        m=cfg["m"], n=cfg["n"], coeffs=coeffs_from_config(cfg), gains=gains_from_config(cfg)
    )


def grid_from_config(cfg: dict) -> FrequencyGrid:
    f = cfg["frequency"]
    return FrequencyGrid(
        omega_min=f["omega_min"], omega_max=f["omega_max"], points=f["points"]
    )


def axes_from_config(cfg: dict) -> Tuple[GainAxis, GainAxis]:
    if cfg["scan"] is None:
        raise ConfigError("config has no 'scan' section")
    return tuple(GainAxis(**cfg["scan"][axis]) for axis in ("axis1", "axis2"))
