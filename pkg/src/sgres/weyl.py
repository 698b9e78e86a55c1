"""Two-term Weyl asymptotics from zeta Laurent data."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .calculus import check_ellipticity, power_leading_triple, triple_samples, _values
from .errors import BranchError, NonEllipticError, NonIntegerOrderError
from .residues import LaurentData, angular_term, combine_tr_x_xi, tr_e_hat, tr_psi_hat, wres
from .symbol import OrderPair, PrincipalTriple, SGClassicalSymbol

__all__ = [
    "WeylPrediction", "laurent_from_functionals", "aramaki_counting",
    "weyl_constants", "predict_N", "powered_symbol",
]

REMAINDER_NOTE = ("remainder O(lambda^(exponent - delta)) for some unspecified delta > 0; "
                  "treated as unmodeled residual")


@dataclass
class WeylPrediction:
    """``N(lambda) ~ C_log lambda^exponent log lambda + C_power lambda^exponent``."""

    case: str
    exponent: object
    C_log: object
    C_power: object
    remainder_exponent_note: str = REMAINDER_NOTE
    functionals: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"case": self.case, "exponent": float(self.exponent),
                "C_log": float(self.C_log), "C_power": float(self.C_power),
                "remainder_exponent_note": self.remainder_exponent_note,
                "functionals": {k: (float(v) if isinstance(v, (int, float, Fraction)) else v)
                                for k, v in self.functionals.items()}}


def laurent_from_functionals(wres_val, trxxi_val, m, n) -> LaurentData:
    """Laurent data of zeta at ``z0 = -n/m``.

    ``A2 = wres/m^2`` and ``A1 = (n/m) trxxi``. Arithmetic follows the
    inputs, so Fractions stay exact.
    """
    if m <= 0:
        raise ValueError("m must be positive")
    if _exact(m, n):
        z0 = Fraction(-n) / Fraction(m)
    else:
        z0 = -n / m
    return LaurentData(z0, wres_val / (m * m), n * trxxi_val / m)


def _exact(*vals):
    return all(isinstance(v, (int, Fraction)) and not isinstance(v, bool) for v in vals)


def aramaki_counting(L: LaurentData) -> WeylPrediction:
    """Counting asymptotics from a pole of order <= 2 at ``z0 < 0``.

    With ``s = -z0``, inverting ``A2/(z-z0)^2 + A1/(z-z0)`` gives
    ``N(lambda) ~ (A2/s) lambda^s log lambda + (A1/s - A2/s^2) lambda^s``.
    """
    if not L.z0 < 0:
        raise ValueError("the pole must lie at z0 < 0")
    s = -L.z0
    C_log = L.A2 / s
    C_power = L.A1 / s - L.A2 / (s * s)
    case = "equal-orders" if L.A2 != 0 else "single-order"
    return WeylPrediction(case, s, C_log, C_power)


def predict_N(p: WeylPrediction, lam):
    """Evaluate the two-term prediction at ``lam`` (scalar or array)."""
    lam = np.asarray(lam, dtype=float)
    e = float(p.exponent)
    out = float(p.C_log) * lam ** e * np.log(lam) + float(p.C_power) * lam ** e
    return float(out) if out.ndim == 0 else out


def _check_positive(t: PrincipalTriple, grid_level: int):
    samples = triple_samples(t.n, grid_level)
    for name, c in (("sigma_psi", t.sigma_psi), ("sigma_e", t.sigma_e),
                    ("sigma_psie", t.sigma_psie)):
        if not c.is_real:
            raise BranchError(f"{name} must be real for a positive operator")
        x, xi = samples[name]
        v = _values(c, x, xi).real
        if np.any(~(v > 0)):
            i = int(np.argmax(~(v > 0)))
            raise BranchError(f"{name} is not positive at x={x[i].tolist()}, xi={xi[i].tolist()}")


def powered_symbol(t: PrincipalTriple, z) -> SGClassicalSymbol:
    """Symbol data of ``A^z`` that the functionals need: its leading triple."""
    p = power_leading_triple(t, z)
    return SGClassicalSymbol(t.n, p.order, {0: p.sigma_psi}, {0: p.sigma_e},
                             {(0, 0): p.sigma_psie}, (1, 1), None, name=f"A^({z})")


def weyl_constants(t: PrincipalTriple, order: OrderPair | None = None, n: int | None = None,
                   grid_level: int = 64) -> WeylPrediction:
    """Weyl constants of a positive SG-elliptic operator with principal triple ``t``.

    Equal orders ``(m, m)``: the triple of ``B = A^{-n/m}`` has order
    ``(-n, -n)``, so ``TR(B)`` and ``TR_x_xi(B)`` come from it alone and
    ``C_log = TR/(mn)``, ``C_power = TR_x_xi - TR/n^2``.

    Unequal orders: with ``m = min(m1, m2)`` only the psi- (m1 < m2) or
    e-trace (m1 > m2) of ``B = A^{-n/m}`` survives and
    ``C_power = TR_x_xi(B)``, ``C_log = 0``.
    """
    order = order or t.order
    order = order if isinstance(order, OrderPair) else OrderPair(*order)
    n = n or t.n
    if not order.is_integer or order.m1 <= 0 or order.m2 <= 0:
        raise NonIntegerOrderError(f"Weyl constants need positive integer orders, got {order}")
    report = check_ellipticity(t)
    if not report.passed:
        raise NonEllipticError(f"triple is not elliptic: {report.witness}")
    _check_positive(t, grid_level)
    m1, m2 = int(order.m1), int(order.m2)
    m = min(m1, m2)
    z = Fraction(-n, m)
    B = powered_symbol(t, z)
    notes: list = []
    psi_hat = tr_psi_hat(B, notes)
    e_hat = tr_e_hat(B, notes)
    ang = angular_term(B, notes=notes)
    T = combine_tr_x_xi(psi_hat, e_hat, ang, float(B.order.m1), float(B.order.m2))
    if m1 == m2:
        TR = wres(B, notes)
        L = laurent_from_functionals(TR, T, m, n)
        pred = aramaki_counting(L)
        pred.case = "equal-orders"
    else:
        TR = 0.0
        L = laurent_from_functionals(0.0, T, m, n)
        pred = aramaki_counting(L)
        pred.case = "psi-dominant" if m1 < m2 else "e-dominant"
        pred.C_log = 0.0
    pred.functionals = {"TR": TR, "Tr_psi_hat": psi_hat, "Tr_e_hat": e_hat,
                        "angular": ang, "TR_x_xi": T, "A2": L.A2, "A1": L.A1,
                        "z0": float(L.z0), "power": str(z), "notes": notes}
    return pred
