"""Job configuration files: schema, loading and symbol construction."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import jsonschema

from .calculus import Sector
from .errors import ConfigError, ParseError
from .symbol import Component, SGClassicalSymbol, make_symbol

__all__ = ["SCHEMA", "JobConfig", "OracleConfig", "load_config", "parse_config", "component_json"]

_COMPONENT = {
    "type": "object",
    "required": ["expr"],
    "properties": {
        "expr": {"type": "string"},
        "imag": {"type": "string"},
    },
}


def _indexed(*keys):
    props = {k: {"type": "integer", "minimum": 0} for k in keys}
    props.update(_COMPONENT["properties"])
    return {"type": "object", "required": list(keys) + ["expr"], "properties": props,
            "additionalProperties": False}


SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["schema", "n", "order", "components"],
    "properties": {
        "schema": {"const": 1},
        "name": {"type": "string"},
        "description": {"type": "string"},
        "n": {"enum": [1, 2, 3]},
        "order": {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2},
        "depths": {
            "type": "object", "required": ["P", "Q"],
            "properties": {"P": {"type": "integer", "minimum": 1},
                           "Q": {"type": "integer", "minimum": 1}},
            "additionalProperties": False,
        },
        "components": {
            "type": "object",
            "properties": {
                "psi": {"type": "array", "items": _indexed("j")},
                "e": {"type": "array", "items": _indexed("k")},
                "corner": {"type": "array", "items": _indexed("j", "k")},
            },
            "additionalProperties": False,
        },
        "full": _COMPONENT,
        "angular_derivative": _COMPONENT,
        "oracle": {
            "type": "object",
            "required": ["p_expr", "L_ladder", "N_ladder", "lambda_max"],
            "properties": {
                "p_expr": {"type": "string"},
                "L_ladder": {"type": "array", "items": {"type": "number", "exclusiveMinimum": 0},
                             "minItems": 2},
                "N_ladder": {"type": "array", "items": {"type": "integer", "minimum": 3},
                             "minItems": 2},
                "lambda_max": {"type": "number", "exclusiveMinimum": 1},
            },
            "additionalProperties": False,
        },
        "sector": {
            "type": "object", "required": ["theta0", "theta"],
            "properties": {"theta0": {"type": "number"}, "theta": {"type": "number"}},
            "additionalProperties": False,
        },
    },
    "additionalProperties": False,
}


@dataclass
class OracleConfig:
    p_expr: str
    ladder: list
    lambda_max: float


@dataclass
class JobConfig:
    """Validated job description; ``symbol`` is built on demand."""

    raw: dict
    n: int
    order: tuple
    psi: dict
    e: dict
    corner: dict
    depths: tuple | None
    full: Component | None
    derivative: Component | None = None
    oracle: OracleConfig | None = None
    sector: Sector | None = None
    name: str = ""
    _symbol: SGClassicalSymbol | None = field(default=None, repr=False)

    def symbol(self, validate: bool = True) -> SGClassicalSymbol:
        if self._symbol is None or not validate:
            s = make_symbol(self.n, self.order, self.psi, self.e, self.corner,
                            depths=self.depths, full=self.full, validate=validate, name=self.name)
            if not validate:
                return s
            self._symbol = s
        return self._symbol


def _component(d: dict, n: int, where: str) -> Component:
    try:
        return Component.of({"re": d["expr"], "im": d.get("imag", "0")}, n)
    except ParseError as exc:
        raise ConfigError(f"{where}: {exc}") from exc


def component_json(c: Component) -> dict:
    """Inverse of the config component encoding."""
    v = c.to_json()
    return {"expr": v} if isinstance(v, str) else {"expr": v["re"], "imag": v["im"]}


def parse_config(data: dict) -> JobConfig:
    """Validate ``data`` against :data:`SCHEMA` and parse its expressions.

    Raises
    ------
    ConfigError
        On schema violations, parse errors, duplicate indices or an
        inconsistent oracle ladder.
    """
    try:
        jsonschema.validate(data, SCHEMA)
    except jsonschema.ValidationError as exc:
        path = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"schema violation at {path}: {exc.message}") from exc
    n = int(data["n"])
    comps = data["components"]
    maps = {}
    for kind, keys in (("psi", ("j",)), ("e", ("k",)), ("corner", ("j", "k"))):
        out = {}
        for item in comps.get(kind, []):
            key = tuple(item[k] for k in keys)
            key = key[0] if len(key) == 1 else key
            if key in out:
                raise ConfigError(f"duplicate {kind} index {key}")
            out[key] = _component(item, n, f"{kind}[{key}]")
        maps[kind] = out
    depths = None
    if "depths" in data:
        depths = (data["depths"]["P"], data["depths"]["Q"])
    full = _component(data["full"], n, "full") if "full" in data else None
    deriv = None
    if "angular_derivative" in data:
        deriv = _component(data["angular_derivative"], n, "angular_derivative")
    oracle = None
    if "oracle" in data:
        o = data["oracle"]
        if len(o["L_ladder"]) != len(o["N_ladder"]):
            raise ConfigError("oracle L_ladder and N_ladder must have equal length")
        if n != 1:
            raise ConfigError("the oracle supports n = 1 only")
        oracle = OracleConfig(o["p_expr"], list(zip(o["L_ladder"], o["N_ladder"])),
                              float(o["lambda_max"]))
    sector = None
    if "sector" in data:
        sector = Sector(float(data["sector"]["theta0"]), float(data["sector"]["theta"]))
    return JobConfig(data, n, tuple(data["order"]), maps["psi"], maps["e"], maps["corner"],
                     depths, full, deriv, oracle, sector, data.get("name", ""))


def load_config(path) -> JobConfig:
    """Read and validate a JSON config file."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from exc
    return parse_config(data)
