"""Preset job configurations shipped with the package."""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources

from .config import JobConfig, parse_config
from .symbol import SGClassicalSymbol, make_symbol

__all__ = [
    "list_presets", "preset_data", "load_preset", "preset_symbol", "preset_path",
    "Factor", "bracket_terms", "affine_factor", "separable_symbol",
]


def _dir():
    return resources.files("sgres") / "presets"


def list_presets() -> list:
    return sorted(p.name[:-5] for p in _dir().iterdir() if p.name.endswith(".json"))


def preset_path(name: str):
    """Filesystem path of a preset (usable as a CLI config argument)."""
    p = _dir() / f"{name}.json"
    if not p.is_file():
        raise KeyError(f"unknown preset {name!r}; available: {', '.join(list_presets())}")
    return p


def preset_data(name: str) -> dict:
    return json.loads(preset_path(name).read_text(encoding="utf-8"))


def load_preset(name: str) -> JobConfig:
    return parse_config(preset_data(name))


def preset_symbol(name: str, validate: bool = True) -> SGClassicalSymbol:
    return load_preset(name).symbol(validate)


# -- builders -------------------------------------------------------------------------

@dataclass(frozen=True)
class Factor:
    """One-variable factor ``f`` with its homogeneous expansion.

    ``terms[k]`` is the part of degree ``order - k`` on ``side``; ``full`` is
    the exact function.
    """

    side: str
    order: int
    terms: dict
    full: str


def bracket_terms(side: str, p: float, count: int) -> dict:
    """Expansion ``<u>^p = sum_l binom(p/2, l) |u|^(p - 2l)``, indices ``k = 2l < count``."""
    out = {}
    p = float(p)
    c = 1.0
    for l in range((count + 1) // 2):
        if 2 * l < count and c != 0.0:
            out[2 * l] = f"{c!r}*|{side}|^({p - 2 * l!r})"
        c *= (p / 2 - l) / (l + 1)
    return out


def affine_factor(side: str, alpha: float, beta: float, gamma: float, depth: int = 4) -> Factor:
    """``alpha <u> + beta u1 + gamma`` as an order-1 factor in one dimension."""
    alpha, beta, gamma = float(alpha), float(beta), float(gamma)
    terms = {k: f"{alpha!r}*({v})" for k, v in bracket_terms(side, 1.0, depth).items()}
    terms[0] = f"{terms[0]} + {beta!r}*{side}1"
    if depth > 1:
        terms[1] = repr(gamma)
    full = f"{alpha!r}*<{side}> + {beta!r}*{side}1 + {gamma!r}"
    return Factor(side, 1, terms, full)


def separable_symbol(fx: Factor, gxi: Factor, depths=(4, 4), validate: bool = True,
                     name: str = "") -> SGClassicalSymbol:
    """Symbol ``f(x) g(xi)`` in one dimension with product expansions."""
    if fx.side != "x" or gxi.side != "xi":
        raise ValueError("need an x-factor and a xi-factor")
    P, Q = depths
    mul = (lambda a, b: f"({a})*({b})")
    psi = {j: mul(fx.full, g) for j, g in gxi.terms.items() if j < P}
    e = {k: mul(f, gxi.full) for k, f in fx.terms.items() if k < Q}
    corner = {(j, k): mul(f, g) for j, g in gxi.terms.items() for k, f in fx.terms.items()
              if j < P and k < Q}
    return make_symbol(1, (gxi.order, fx.order), psi, e, corner, depths=depths,
                       full=mul(fx.full, gxi.full), validate=validate, name=name)
