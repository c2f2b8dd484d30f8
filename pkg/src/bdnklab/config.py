"""Run configuration: YAML loading, schema validation, object construction.

One config file drives every subcommand.  Blocks: ``model`` (equation of
state and transport coefficients), ``grid``, ``initial_data``, ``solver``,
``audit`` (randomized-suite sample counts, seeds, tolerances), and
``output_dir``.  Validation failures raise ConfigError with a field path.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import jsonschema
import yaml

from . import eos as _eos
from .errors import ConfigError
from .evolve import Fields, Grid, initial_fields

__all__ = ["RunConfig", "load_config", "CONFIG_SCHEMA"]

_NUMBER = {"type": "number"}
_POSITIVE = {"type": "number", "exclusiveMinimum": 0}
_COEFF = {
    "oneOf": [
        _POSITIVE,
        {"type": "array", "items": _NUMBER, "minItems": 2, "maxItems": 2},
    ]
}

CONFIG_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["model"],
    "properties": {
        "model": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "kind": {"enum": ["constant", "power-law"]},
                "cs2": _POSITIVE,
                "kappa": _POSITIVE,
                "gamma": _POSITIVE,
                "eta": _COEFF,
                "chi1": _COEFF,
                "chi2": _COEFF,
                "chi3": _COEFF,
                "chi4": _COEFF,
                "lam": _COEFF,
            },
        },
        "grid": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "dimension": {"type": "integer", "minimum": 1, "maximum": 3},
                "points": {
                    "oneOf": [{"type": "integer", "minimum": 8},
                              {"type": "array",
                               "items": {"type": "integer", "minimum": 8}}],
                },
                "length": {
                    "oneOf": [_POSITIVE, {"type": "array", "items": _POSITIVE}],
                },
            },
        },
        "initial_data": {
            "type": "object",
            "additionalProperties": False,
            "required": ["profile"],
            "properties": {
                "profile": {"enum": ["equilibrium", "sinusoid",
                                     "gaussian-pulse", "bump-pulse"]},
                "eps0": _POSITIVE,
                "amplitude": _NUMBER,
                "width": _POSITIVE,
                "wavenumber": {"type": "integer", "minimum": 1},
            },
        },
        "solver": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "order": {"enum": [2, 4]},
                "cfl": {"type": "number", "exclusiveMinimum": 0, "maximum": 1},
                "t_end": _POSITIVE,
                "output_every": {"type": "integer", "minimum": 0},
                "eps_floor": _POSITIVE,
                "magnitude_cap": _POSITIVE,
                "max_steps": {"type": "integer", "minimum": 1},
            },
        },
        "audit": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "samples": {"type": "integer", "minimum": 1},
                "seed": {"type": "integer", "minimum": 0},
                "eps_min": _POSITIVE,
                "eps_max": _POSITIVE,
                "eps_count": {"type": "integer", "minimum": 1},
                "boost_max": {"type": "number", "minimum": 0},
                "tolerance": _POSITIVE,
                "directions": {"type": "integer", "minimum": 1},
            },
        },
        "output_dir": {"type": "string"},
    },
}

_MODEL_DEFAULTS = {"kind": "constant"}
_GRID_DEFAULTS = {"dimension": 1, "points": 64, "length": 6.283185307179586}
_INITIAL_DEFAULTS = {"profile": "equilibrium"}
_SOLVER_DEFAULTS = {"order": 4, "cfl": 0.25, "t_end": 1.0, "output_every": 0,
                    "magnitude_cap": 1e6, "max_steps": 100000}
_AUDIT_DEFAULTS = {"samples": 200, "seed": 0, "eps_min": 0.5, "eps_max": 2.0,
                   "eps_count": 11, "boost_max": 0.5, "tolerance": 1e-6,
                   "directions": 16}


@dataclass(frozen=True)
class RunConfig:
    """Validated configuration plus the raw bytes it was read from."""

    model: dict
    grid: dict
    initial_data: dict
    solver: dict
    audit: dict
    output_dir: str | None
    sha256: str

    def build_model(self) -> _eos.TransportModel:
        block = dict(self.model)
        kind = block.pop("kind")
        if kind == "constant":
            return _eos.constant_transport_model(**block)
        kappa = block.pop("kappa", 1.0 / 3.0)
        gamma = block.pop("gamma", 1.0)
        block.pop("cs2", None)
        block = {k: (tuple(v) if isinstance(v, list) else v)
                 for k, v in block.items()}
        return _eos.power_law_transport_model(kappa, gamma, **block)

    def build_grid(self) -> Grid:
        g = self.grid
        return Grid.make(g["dimension"], g["points"], g["length"])

    def build_fields(self, grid: Grid) -> Fields:
        block = dict(self.initial_data)
        profile = block.pop("profile")
        return initial_fields(grid, profile, **block)


def _merged(block, defaults):
    out = dict(defaults)
    out.update(block or {})
    return out


def load_config(path) -> RunConfig:
    """Read, schema-validate, and default-fill a YAML config file."""
    try:
        with open(path, "rb") as fh:
            raw = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    try:
        data = yaml.safe_load(raw)
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: not valid YAML: {exc}") from exc
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be a mapping")
    try:
        jsonschema.validate(data, CONFIG_SCHEMA)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"{path}: at {where}: {exc.message}") from exc
    model = _merged(data.get("model"), _MODEL_DEFAULTS)
    if model["kind"] == "power-law" and "kappa" not in model:
        raise ConfigError(f"{path}: at model: power-law model requires kappa")
    audit = _merged(data.get("audit"), _AUDIT_DEFAULTS)
    if audit["eps_min"] >= audit["eps_max"]:
        raise ConfigError(f"{path}: at audit: eps_min must be < eps_max")
    return RunConfig(
        model=model,
        grid=_merged(data.get("grid"), _GRID_DEFAULTS),
        initial_data=_merged(data.get("initial_data"), _INITIAL_DEFAULTS),
        solver=_merged(data.get("solver"), _SOLVER_DEFAULTS),
        audit=audit,
        output_dir=data.get("output_dir"),
        sha256=hashlib.sha256(raw).hexdigest(),
    )
