"""Run configuration: JSON schema, defaults, canonical hashing."""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field as dc_field

import jsonschema

from .errors import ConfigurationError

EXPERIMENT_KINDS = ["cell", "gain", "corrector-growth", "excess-decay",
                    "gamma-recovery", "extend-check"]

SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "domain": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "omega": {"type": "number", "exclusiveMinimum": 0, "maximum": 2 * math.pi + 1e-12},
                "outer_radius": {"type": "number", "exclusiveMinimum": 0},
            },
        },
        "mesh": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "h": {"type": ["number", "null"], "exclusiveMinimum": 0},
                "grading": {"type": "number", "minimum": 1},
            },
        },
        "coeff": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "kind": {"enum": ["constant", "rotated-periodic", "checkerboard"]},
                "kappa": {"type": "number"},
                "rotation": {"type": "number"},
                "epsilon": {"type": "number", "exclusiveMinimum": 0},
                "contrast": {"type": "number", "exclusiveMinimum": 1},
                "seed": {"type": "integer"},
                "normalization": {
                    "anyOf": [{"type": "number", "exclusiveMinimum": 0}, {"const": "auto"}],
                },
            },
        },
        "experiment": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "kind": {"enum": EXPERIMENT_KINDS},
                "epsilons": {"type": "array", "items": {"type": "number", "exclusiveMinimum": 0},
                             "minItems": 1},
                "shell_radii": {"type": "array", "items": {"type": "number", "exclusiveMinimum": 0}},
                "n_modes": {"type": "integer", "minimum": 0},
                "cell_grid": {"type": "integer", "minimum": 32},
                "h_per_epsilon": {"type": "number", "exclusiveMinimum": 0},
                "r0": {"type": "number", "exclusiveMinimum": 0},
                "mode_coefficients": {"type": "array", "items": {"type": "number"}},
                "n_theta": {"type": "integer", "minimum": 16},
                "dump_fields": {"type": "boolean"},
            },
        },
        "solver": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "tol": {"type": "number", "exclusiveMinimum": 0},
                "max_iter": {"type": ["integer", "null"], "minimum": 1},
                "preconditioner": {"enum": ["jacobi", "amg"]},
            },
        },
        "output": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"dir": {"type": "string"}},
        },
        "seed": {"type": "integer"},
        "threads": {"type": "integer", "minimum": 1},
    },
}

DEFAULTS = {
    "domain": {"omega": 1.95 * math.pi, "outer_radius": 1.0},
    "mesh": {"h": None, "grading": 2.0},
    "coeff": {"kind": "rotated-periodic", "kappa": 1.5, "rotation": 0.35,
              "epsilon": 0.05, "contrast": 4.0, "seed": 0, "normalization": "auto"},
    "experiment": {"kind": "gain", "epsilons": [0.2, 0.1, 0.05], "shell_radii": [],
                   "n_modes": 1, "cell_grid": 256, "h_per_epsilon": 0.125,
                   "r0": 0.35, "mode_coefficients": [1.0, 0.3, -0.7],
                   "n_theta": 4096, "dump_fields": False},
    "solver": {"tol": 1e-10, "max_iter": None, "preconditioner": "jacobi"},
    "output": {"dir": "runs"},
    "seed": 7,
    "threads": 1,
}


def _merge(defaults, override):
    out = {}
    for key, dval in defaults.items():
        if isinstance(dval, dict):
            out[key] = _merge(dval, override.get(key, {}) if override else {})
        else:
            out[key] = override.get(key, dval) if override else dval
    return out


@dataclass
class RunConfig:
    raw: dict = dc_field(default_factory=dict)

    @classmethod
    def from_dict(cls, data: dict, experiment_kind: str | None = None) -> "RunConfig":
        try:
            jsonschema.validate(data, SCHEMA)
        except jsonschema.ValidationError as exc:
            raise ConfigurationError(f"invalid config: {exc.message}") from exc
        resolved = _merge(DEFAULTS, data)
        if experiment_kind is not None:
            declared = data.get("experiment", {}).get("kind")
            if declared is not None and declared != experiment_kind:
                raise ConfigurationError(
                    f"config declares experiment {declared!r} but {experiment_kind!r} was requested")
            resolved["experiment"]["kind"] = experiment_kind
        return cls(raw=resolved)

    @classmethod
    def from_file(cls, path, experiment_kind: str | None = None) -> "RunConfig":
        with open(path) as fh:
            return cls.from_dict(json.load(fh), experiment_kind)

    def __getitem__(self, key):
        return self.raw[key]

    def canonical_json(self) -> str:
        return json.dumps(self.raw, sort_keys=True, separators=(",", ":"))

    @property
    def hash(self) -> str:
        return hashlib.sha256(self.canonical_json().encode()).hexdigest()[:12]
