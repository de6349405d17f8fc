"""JSON run configuration: schema, validation and object construction."""

from __future__ import annotations

import json
from typing import Optional

import jsonschema

from .maps import MapSystem, base_n, f_lambda, gauss, indicator_potential, piecewise_linear
from .potentials import Potential

__all__ = [
    "SCHEMA",
    "ConfigError",
    "load_config",
    "validate_config",
    "build_map",
    "build_potentials",
    "build_potential",
]

_POTENTIAL = {
    "oneOf": [
        {
            "type": "object",
            "properties": {"indicator": {"type": "integer", "minimum": 1}, "scale": {"type": "number"}},
            "required": ["indicator"],
            "additionalProperties": False,
        },
        {
            "type": "object",
            "properties": {
                "order": {"type": "integer", "minimum": 1},
                "table": {"type": "object", "additionalProperties": {"type": "number"}},
                "default": {"type": "number"},
            },
            "required": ["order", "table"],
            "additionalProperties": False,
        },
    ]
}

SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "properties": {
        "schema": {"const": "1"},
        "family": {"enum": ["base_n", "gauss", "f_lambda", "piecewise_linear"]},
        "n": {"type": "integer", "minimum": 2},
        "lambda": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
        "branches": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "properties": {
                    "interval": {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2},
                    "slope": {"type": "number"},
                    "image": {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2},
                },
                "required": ["interval", "slope", "image"],
                "additionalProperties": False,
            },
        },
        "k": {"type": "integer", "minimum": 1},
        "n_max": {"type": "integer", "minimum": 2},
        "a": {"type": "integer", "minimum": 1},
        "potentials": {"type": "array", "items": _POTENTIAL},
        "potential": _POTENTIAL,
        "gamma": {"type": "array", "items": {"type": "number"}},
        "grid": {"type": "array", "items": {"type": "array", "items": {"type": "number"}}},
        "method": {"enum": ["auto", "alpha3", "alpha4"]},
        "delta_inf": {"type": "number"},
        "seed": {"type": "integer", "minimum": 0},
        "tolerances": {
            "type": "object",
            "properties": {
                "t_tol": {"type": "number", "exclusiveMinimum": 0},
                "dinkelbach": {"type": "number", "exclusiveMinimum": 0},
                "c_tol": {"type": "number", "exclusiveMinimum": 0},
            },
            "additionalProperties": False,
        },
    },
    "required": ["schema", "family"],
    "additionalProperties": False,
    "allOf": [
        {"if": {"properties": {"family": {"const": "base_n"}}}, "then": {"required": ["n"]}},
        {"if": {"properties": {"family": {"const": "f_lambda"}}}, "then": {"required": ["lambda"]}},
        {"if": {"properties": {"family": {"const": "piecewise_linear"}}}, "then": {"required": ["branches"]}},
    ],
}


class ConfigError(ValueError):
    """Schema violation; ``path`` locates the offending field."""

    def __init__(self, message: str, path: str = "$"):
        super().__init__(f"{path}: {message}")
        self.path = path


def _path(err) -> str:
    return "$" + "".join(f"[{p}]" if isinstance(p, int) else f".{p}" for p in err.absolute_path)


def validate_config(cfg: dict) -> dict:
    validator = jsonschema.Draft202012Validator(SCHEMA)
    errors = sorted(validator.iter_errors(cfg), key=lambda e: (len(e.absolute_path), e.message))
    if errors:
        e = errors[0]
        raise ConfigError(e.message, _path(e))
    return cfg


def load_config(path: str) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            cfg = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON ({exc.msg} at line {exc.lineno})") from None
    return validate_config(cfg)


def build_map(cfg: dict) -> MapSystem:
    fam = cfg["family"]
    if fam == "base_n":
        return base_n(int(cfg["n"]))
    if fam == "gauss":
        return gauss()
    if fam == "f_lambda":
        return f_lambda(float(cfg["lambda"]))
    try:
        return piecewise_linear(cfg["branches"])
    except ValueError as exc:
        raise ConfigError(str(exc), "$.branches") from None


def _potential(map_: MapSystem, spec: dict) -> Potential:
    if "indicator" in spec:
        p = indicator_potential(map_, int(spec["indicator"]))
        return p.scaled(float(spec.get("scale", 1.0)))
    order = int(spec["order"])
    default = float(spec.get("default", 0.0))
    table = {}
    for key, v in spec["table"].items():
        w = tuple(int(x) for x in key.split(","))
        if len(w) != order:
            raise ConfigError(f"word {key!r} does not have length {order}", "$.potentials")
        table[w] = float(v)
    return Potential(order, func=lambda w, t=table, d=default: t.get(tuple(w), d), name="table")


def build_potentials(map_: MapSystem, cfg: dict, n: Optional[int] = None) -> list:
    """Potentials listed in the config, or indicators of symbols ``1..n``."""
    if "potentials" in cfg:
        return [_potential(map_, s) for s in cfg["potentials"]]
    if n is None:
        raise ConfigError("no potentials given and no target length to infer them from", "$.potentials")
    return [indicator_potential(map_, i) for i in range(1, n + 1)]


def build_potential(map_: MapSystem, cfg: dict) -> Optional[Potential]:
    spec = cfg.get("potential")
    return None if spec is None else _potential(map_, spec)
