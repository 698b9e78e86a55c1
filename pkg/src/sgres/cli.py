"""Command-line front end: ``sgres validate|residue|weyl|zeta-poles CONFIG``.

CONFIG is a JSON job file or ``preset:NAME``. Exit codes: 0 success,
1 validation or math-contract failure, 2 oracle instability.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import report
from .calculus import check_ellipticity, check_lambda_ellipticity
from .config import JobConfig, load_config
from .errors import (
    CompatibilityError, EigenConvergenceError, HomogeneityError, OracleInstabilityError,
    SGResError,
)
from .oracle import convergence_study, fit_weyl
from .presets import load_preset
from .residues import residue_report, zeta_pole_structure
from .symbol import principal_triple
from .weyl import predict_N, weyl_constants

__all__ = ["main", "build_parser"]

EXIT_OK, EXIT_FAIL, EXIT_ORACLE = 0, 1, 2
FIT_SPAN = 64.0  # fit window [trust/FIT_SPAN, trust]
FIT_POINTS = 200
TABLE_POINTS = 64


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_FAIL, f"{self.prog}: error: {message}\n")


def _load(arg: str) -> JobConfig:
    if arg.startswith("preset:"):
        return load_preset(arg[len("preset:"):])
    return load_config(arg)


def _emit(args, text: str, name: str):
    sys.stdout.write(text)
    if args.output_dir:
        report.write_text(Path(args.output_dir) / name, text)


def _fail(msg: str, code: int = EXIT_FAIL) -> int:
    sys.stderr.write(f"sgres: {msg}\n")
    return code


# -- validate -------------------------------------------------------------------------

def _validate(cfg: JobConfig) -> tuple:
    out = {"name": cfg.name, "homogeneity": {"status": "not run"},
           "compatibility": {"status": "not run"}, "ellipticity": {"status": "not run"}}
    first = None
    try:
        s = cfg.symbol(validate=False)
        cfg.symbol(validate=True)
        out["homogeneity"] = {"status": "pass"}
        out["compatibility"] = {"status": "pass"}
    except HomogeneityError as exc:
        out["homogeneity"] = {"status": "fail", "detail": str(exc), "component": exc.component,
                              "measured_degree": exc.measured_degree}
        return out, str(exc)
    except CompatibilityError as exc:
        out["homogeneity"] = {"status": "pass"}
        out["compatibility"] = {"status": "fail", "detail": str(exc),
                                "index": exc.index, "deviation": exc.deviation}
        return out, str(exc)
    try:
        t = principal_triple(s)
        rep = check_ellipticity(t)
        out["ellipticity"] = rep.to_dict()
        if not rep.passed:
            first = f"ellipticity: certified-fail at {rep.witness}"
        if cfg.sector is not None:
            lrep = check_lambda_ellipticity(t, cfg.sector)
            out["lambda_ellipticity"] = lrep.to_dict()
            if not lrep.passed and first is None:
                first = f"lambda-ellipticity: certified-fail at {lrep.witness}"
    except SGResError as exc:
        out["ellipticity"] = {"status": "fail", "detail": str(exc)}
        first = str(exc)
    return out, first


def cmd_validate(args) -> int:
    cfg = _load(args.config)
    out, first = _validate(cfg)
    out["status"] = "fail" if first else "pass"
    if args.out == "csv":
        rows = [(k, out[k].get("verdict", out[k].get("status")),
                 out[k].get("detail", out[k].get("margin", "")))
                for k in ("homogeneity", "compatibility", "ellipticity", "lambda_ellipticity")
                if k in out]
        _emit(args, report.csv_text(["check", "status", "detail"], rows), "validate.csv")
    else:
        _emit(args, report.dumps_json(out), "validate.json")
    if first:
        return _fail(f"validation failed: {first}")
    return EXIT_OK


# -- residue --------------------------------------------------------------------------

def cmd_residue(args) -> int:
    cfg = _load(args.config)
    s = cfg.symbol()
    rep = residue_report(s, derivative=cfg.derivative)
    rep["name"] = cfg.name
    if args.out == "csv":
        keys = ["TR", "Tr_psi_hat", "Tr_e_hat", "angular", "TR_x_xi"]
        rows = [(k, rep[k], "available" if rep[k] is not None else "unavailable") for k in keys]
        rows += [("note", "", n) for n in rep["notes"]]
        _emit(args, report.csv_text(["functional", "value", "status"], rows), "residue.csv")
    else:
        _emit(args, report.dumps_json(rep), "residue.json")
    return EXIT_OK


# -- weyl -----------------------------------------------------------------------------

def cmd_weyl(args) -> int:
    cfg = _load(args.config)
    s = cfg.symbol()
    pred = weyl_constants(principal_triple(s))
    exponent = float(pred.exponent)
    summary = {"name": cfg.name, "case": pred.case, "exponent": exponent,
               "C_log_pred": float(pred.C_log), "C_power_pred": float(pred.C_power),
               "C_log_fit": None, "C_power_fit": None, "trust_lambda": None,
               "fit_residual": None, "fit_flagged": None, "prediction": pred.to_dict()}
    oracle = cfg.oracle if not args.no_oracle else None
    lam_max = args.lambda_max or (oracle.lambda_max if oracle else 1e4)
    study = None
    if oracle is not None:
        try:
            study = convergence_study(oracle.p_expr, lam_max, oracle.ladder)
        except (OracleInstabilityError, EigenConvergenceError) as exc:
            summary["oracle_error"] = str(exc)
            summary["disagreements"] = getattr(exc, "disagreements", [])
            sys.stdout.write(report.dumps_json(summary))
            return _fail(f"oracle instability: {exc}", EXIT_ORACLE)
        trust = study.trust_lambda
        fit = fit_weyl(study.counting, np.geomspace(trust / FIT_SPAN, trust, FIT_POINTS),
                       exponent, log_term=pred.case == "equal-orders")
        summary.update(C_log_fit=fit.C_log_hat, C_power_fit=fit.C_power_hat, trust_lambda=trust,
                       fit_residual=fit.residual, fit_flagged=fit.flagged,
                       rungs=[{"L": r.L, "N": r.N, "h": r.h, "wall": r.wall,
                               "count": len(r.eigenvalues)} for r in study.rungs],
                       lambda_max=lam_max)
        lam = np.geomspace(trust / FIT_SPAN, trust, TABLE_POINTS)
        n_or = study.counting(lam)
    else:
        lam = np.geomspace(max(lam_max / FIT_SPAN, 1.0 + 1e-9), lam_max, TABLE_POINTS)
        n_or = None
    n_pr = predict_N(pred, lam)
    rows = []
    for i, l in enumerate(lam):
        o = None if n_or is None else int(n_or[i])
        gap = None if o is None else (o - n_pr[i]) / n_pr[i]
        rows.append((l, o, n_pr[i], gap))
    table = report.csv_text(["lambda", "N_oracle", "N_predicted", "relative_gap"], rows)
    summary["table"] = [dict(zip(["lambda", "N_oracle", "N_predicted", "relative_gap"], r))
                        for r in rows]
    if args.out == "csv":
        _emit(args, table, "weyl.csv")
    else:
        _emit(args, report.dumps_json(summary), "weyl.json")
    if args.output_dir:
        d = Path(args.output_dir)
        if args.out == "csv":
            report.write_text(d / "weyl.json", report.dumps_json(summary))
        else:
            report.write_text(d / "weyl.csv", table)
        report.write_text(d / "predicted.dat", report.dat_text(lam, n_pr, "lambda N_predicted"))
        if study is not None:
            report.write_text(d / "oracle.dat", report.dat_text(lam, n_or, "lambda N_oracle"))
            report.write_text(d / "eigenvalues.csv", report.eigenvalue_csv(study.counting.eigenvalues))
        if not args.no_figures:
            report.plot_weyl(d / "weyl.png", lam, n_or, n_pr, exponent, cfg.name)
            if study is not None:
                report.plot_spectrum(d / "spectrum.png", study.rungs, study.trust_lambda)
    return EXIT_OK


# -- zeta-poles -----------------------------------------------------------------------

def cmd_zeta_poles(args) -> int:
    cfg = _load(args.config)
    z = zeta_pole_structure(cfg.order, cfg.n, args.j_max, args.k_max)
    if args.out == "json":
        out = {"order": list(cfg.order), "n": cfg.n, "holomorphy_bound": str(z.holomorphy_bound),
               "poles": [p.to_dict() for p in z.poles]}
        _emit(args, report.dumps_json(out), "zeta_poles.json")
    else:
        rows = [(str(p.location), p.order, p.family, p.j, p.k) for p in z.poles]
        _emit(args, report.csv_text(["location", "order", "family", "j", "k"], rows),
              "zeta_poles.csv")
    return EXIT_OK


# -- entry point ----------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="sgres", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, default_out):
        sp.add_argument("config", help="JSON config file or preset:NAME")
        sp.add_argument("--out", choices=["json", "csv"], default=default_out)
        sp.add_argument("--output-dir", help="also write outputs (and figures) here")

    common(sub.add_parser("validate", help="homogeneity, compatibility and ellipticity checks"),
           "json")
    common(sub.add_parser("residue", help="trace functionals"), "json")
    w = sub.add_parser("weyl", help="Weyl constants and oracle comparison")
    common(w, "json")
    w.add_argument("--lambda-max", type=float, default=None)
    w.add_argument("--no-oracle", action="store_true", help="prediction only")
    w.add_argument("--no-figures", action="store_true", help="skip PNG figures")
    z = sub.add_parser("zeta-poles", help="pole table of the spectral zeta function")
    common(z, "csv")
    z.add_argument("--j-max", type=int, default=4)
    z.add_argument("--k-max", type=int, default=4)
    return p


_COMMANDS = {"validate": cmd_validate, "residue": cmd_residue, "weyl": cmd_weyl,
             "zeta-poles": cmd_zeta_poles}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (OracleInstabilityError, EigenConvergenceError) as exc:
        return _fail(f"oracle instability: {exc}", EXIT_ORACLE)
    except SGResError as exc:
        return _fail(f"{type(exc).__name__}: {exc}")
    except (KeyError, ValueError) as exc:
        return _fail(f"{type(exc).__name__}: {exc}")


if __name__ == "__main__":
    sys.exit(main())
