"""Deterministic CSV/JSON/gnuplot writers and report figures."""

from __future__ import annotations

import io
import json
import math
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

__all__ = ["fmt", "to_jsonable", "dumps_json", "csv_text", "dat_text", "eigenvalue_csv",
           "write_text", "plot_weyl", "plot_spectrum"]


def fmt(v) -> str:
    """Full-precision, locale-independent text for one CSV cell."""
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, Fraction):
        return str(v)
    if isinstance(v, (float, np.floating)):
        return "%.17g" % float(v)
    return str(v)


def to_jsonable(obj):
    """Recursively convert numpy scalars/arrays, Fractions and tuples for json."""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [to_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, Fraction):
        return str(obj) if obj.denominator != 1 else int(obj)
    if isinstance(obj, (np.floating, float)):
        f = float(obj)
        return f if math.isfinite(f) else str(f)
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    if hasattr(obj, "to_dict"):
        return to_jsonable(obj.to_dict())
    return obj if obj is None or isinstance(obj, str) else str(obj)


def dumps_json(obj) -> str:
    # repr of a float is the shortest round-tripping form, so json output is exact
    return json.dumps(to_jsonable(obj), indent=2, sort_keys=True) + "\n"


def csv_text(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    buf = io.StringIO()
    buf.write(",".join(header) + "\n")
    for r in rows:
        buf.write(",".join(fmt(v) for v in r) + "\n")
    return buf.getvalue()


def dat_text(x, y, comment: str = "") -> str:
    """Two whitespace-separated columns for gnuplot."""
    lines = [f"# {comment}"] if comment else []
    lines += ["%.17g %.17g" % (a, b) for a, b in zip(np.asarray(x, float), np.asarray(y, float))]
    return "\n".join(lines) + "\n"


def eigenvalue_csv(eigs) -> str:
    """One eigenvalue per line at full double precision."""
    return "".join("%.17g\n" % v for v in np.asarray(eigs, dtype=float))


def write_text(path, text: str) -> Path:
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    with open(p, "w", encoding="utf-8", newline="\n") as f:
        f.write(text)
    return p


def _pyplot():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


def _save(fig, path):
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    meta = {"Software": None} if p.suffix == ".png" else {"Creator": None, "Date": None}
    fig.savefig(p, metadata=meta, dpi=120)
    return p


def plot_weyl(path, lam, n_oracle, n_pred, exponent: float, title: str = "") -> Path:
    """Counting function against the two-term prediction, plus the relative gap."""
    plt = _pyplot()
    lam = np.asarray(lam, float)
    fig, (ax, bx) = plt.subplots(2, 1, figsize=(6.4, 6.4), sharex=True,
                                 gridspec_kw={"height_ratios": [3, 1]})
    scale = lam ** (-exponent)
    if n_oracle is not None:
        ax.plot(lam, np.asarray(n_oracle, float) * scale, lw=1.0, label="oracle")
    ax.plot(lam, np.asarray(n_pred, float) * scale, lw=1.0, ls="--", label="prediction")
    ax.set_xscale("log")
    ax.set_ylabel(rf"$N(\lambda)\,\lambda^{{-{exponent:g}}}$")
    ax.legend()
    if title:
        ax.set_title(title)
    if n_oracle is not None:
        gap = (np.asarray(n_oracle, float) - np.asarray(n_pred, float)) / np.asarray(n_pred, float)
        bx.plot(lam, gap, lw=0.8)
    bx.axhline(0.0, color="0.5", lw=0.5)
    bx.set_xlabel(r"$\lambda$")
    bx.set_ylabel("relative gap")
    fig.tight_layout()
    out = _save(fig, path)
    plt.close(fig)
    return out


def plot_spectrum(path, rungs, trust: float) -> Path:
    """Counting functions of every ladder rung with the trust threshold."""
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    for r in rungs:
        ev = np.asarray(r.eigenvalues)
        ax.step(ev, np.arange(1, len(ev) + 1), where="post", lw=0.8, label=f"L={r.L:g}, N={r.N}")
    ax.axvline(trust, color="0.3", ls=":", lw=0.8, label="trust threshold")
    ax.set_xlabel(r"$\lambda$")
    ax.set_ylabel(r"$N(\lambda)$")
    ax.legend()
    fig.tight_layout()
    out = _save(fig, path)
    plt.close(fig)
    return out
