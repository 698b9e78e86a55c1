"""Brute-force spectral oracle for factored 1D model operators.

Operators ``u -> p (u - u'') p`` on ``[-L, L]`` with Dirichlet ends are
discretized on the N interior nodes ``x_i = -L + i h``, ``h = 2L/(N+1)``,
as ``P (I + T) P`` with ``T = tridiag(-1, 2, -1)/h^2``.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from numba import njit

from . import expr as ex
from .errors import (
    DomainError, EigenConvergenceError, FitError, OracleInstabilityError,
)

__all__ = [
    "DiscretizedOperator", "CountingFunction", "RungResult", "ConvergenceResult",
    "WeylFit", "discretize_1d", "harmonic_oscillator", "eigenvalues_symmetric",
    "sturm_count", "bisection_eigenvalues", "counting_function",
    "convergence_study", "fit_weyl", "worker_count",
]


@dataclass(frozen=True)
class DiscretizedOperator:
    """Symmetric tridiagonal matrix of a discretized 1D operator."""

    form: str
    L: float
    N: int
    h: float
    x: np.ndarray = field(repr=False)
    diag: np.ndarray = field(repr=False)
    off: np.ndarray = field(repr=False)
    wall: float = math.inf

    def dense(self) -> np.ndarray:
        return np.diag(self.diag) + np.diag(self.off, 1) + np.diag(self.off, -1)

    def norm_bound(self) -> float:
        """Gershgorin bound on the spectral norm."""
        a = np.abs(self.off)
        row = np.abs(self.diag).copy()
        row[:-1] += a
        row[1:] += a
        return float(row.max())


def _grid(L: float, N: int):
    if N < 3:
        raise ValueError("N must be at least 3")
    if L <= 0:
        raise ValueError("L must be positive")
    h = 2.0 * L / (N + 1)
    return h, -L + h * np.arange(1, N + 1)


def discretize_1d(p, L: float, N: int) -> DiscretizedOperator:
    """Matrix of ``u -> p (u - u'') p`` with Dirichlet ends at ``+-L``.

    Parameters
    ----------
    p : expression in x only
        Positive weight (text or :class:`~sgres.expr.Expr`).
    """
    p = ex.as_expr(p, 1)
    if ex.depends_on(p, ex.XI):
        raise ValueError("p must depend on x only")
    h, x = _grid(L, N)
    pv = np.broadcast_to(np.asarray(ex.evaluate(p, (x,), ()), dtype=float), x.shape)
    if np.any(~(pv > 0)):
        i = int(np.argmax(~(pv > 0)))
        raise DomainError(f"p is not positive at x={x[i]:.17g}", p)
    diag = pv * pv * (1.0 + 2.0 / h**2)
    off = -(pv[:-1] * pv[1:]) / h**2
    ends = np.asarray(ex.evaluate(p, (np.array([-L, L]),), ()), dtype=float)
    wall = float(np.min(np.broadcast_to(ends, (2,)) ** 2))
    return DiscretizedOperator(f"p(x)(1 - d^2/dx^2)p(x), p = {ex.to_text(p)}", float(L), int(N),
                               h, x, diag, off, wall)


def harmonic_oscillator(L: float, N: int) -> DiscretizedOperator:
    """``-u'' + x^2 u`` by the standard three-point scheme (self-test path)."""
    h, x = _grid(L, N)
    diag = 2.0 / h**2 + x * x
    off = np.full(N - 1, -1.0 / h**2)
    return DiscretizedOperator("-d^2/dx^2 + x^2", float(L), int(N), h, x, diag, off, L * L)


# -- eigensolver ----------------------------------------------------------------

@njit(cache=True, nogil=True)
def _tql(d, e, max_iter):
    """Implicit QL with Wilkinson shifts on a symmetric tridiagonal matrix.

    Overwrites ``d`` with the eigenvalues. Returns -1 on success or the index
    of the eigenvalue that failed to converge.
    """
    n = d.shape[0]
    ee = np.zeros(n)
    ee[: n - 1] = e
    eps = 2.220446049250313e-16
    total = 0
    for l in range(n):
        while True:
            m = l
            while m < n - 1:
                dd = abs(d[m]) + abs(d[m + 1])
                if abs(ee[m]) <= eps * dd:
                    break
                m += 1
            if m == l:
                break
            total += 1
            if total > max_iter:
                return l
            g = (d[l + 1] - d[l]) / (2.0 * ee[l])
            r = math.sqrt(g * g + 1.0)
            g = d[m] - d[l] + ee[l] / (g + math.copysign(r, g))
            s = 1.0
            c = 1.0
            p = 0.0
            i = m - 1
            deflated = False
            while i >= l:
                f = s * ee[i]
                b = c * ee[i]
                if abs(f) >= abs(g):
                    q = g / f
                    r = abs(f) * math.sqrt(1.0 + q * q)
                elif g != 0.0:
                    q = f / g
                    r = abs(g) * math.sqrt(1.0 + q * q)
                else:
                    r = 0.0
                ee[i + 1] = r
                if r == 0.0:
                    d[i + 1] -= p
                    ee[m] = 0.0
                    deflated = True
                    break
                s = f / r
                c = g / r
                g = d[i + 1] - p
                r = (d[i] - g) * s + 2.0 * c * b
                p = s * r
                d[i + 1] = g + p
                g = c * r - b
                i -= 1
            if deflated:
                continue
            d[l] -= p
            ee[l] = g
            ee[m] = 0.0
    return -1


def eigenvalues_symmetric(diag, off=None) -> np.ndarray:
    """All eigenvalues of a symmetric tridiagonal matrix, ascending.

    Parameters
    ----------
    diag : array or DiscretizedOperator
        Main diagonal, or an operator carrying both diagonals.
    off : array
        First off-diagonal (length ``len(diag) - 1``).

    Raises
    ------
    EigenConvergenceError
        If QL exceeds ``30 * N`` sweeps; the failing index is attached.
    """
    if isinstance(diag, DiscretizedOperator):
        diag, off = diag.diag, diag.off
    d = np.array(diag, dtype=float)
    e = np.zeros(0) if off is None else np.asarray(off, dtype=float)
    if e.shape[0] != max(d.shape[0] - 1, 0):
        raise ValueError("off-diagonal must have length N-1")
    if not (np.all(np.isfinite(d)) and np.all(np.isfinite(e))):
        raise ValueError("matrix entries must be finite")
    if d.shape[0] == 0:
        return d
    status = _tql(d, np.ascontiguousarray(e), 30 * d.shape[0])
    if status >= 0:
        raise EigenConvergenceError(f"QL did not converge for eigenvalue {status}", index=int(status))
    d.sort()
    return d


@njit(cache=True, nogil=True)
def _sturm(d, e2, lams, out):
    n = d.shape[0]
    tiny = 1e-300
    for t in range(lams.shape[0]):
        lam = lams[t]
        count = 0
        q = d[0] - lam
        if q == 0.0:
            q = -tiny
        if q < 0.0:
            count += 1
        for i in range(1, n):
            q = d[i] - lam - e2[i - 1] / q
            if q == 0.0:
                q = -tiny
            if q < 0.0:
                count += 1
        out[t] = count


def sturm_count(diag, off, lam):
    """Number of eigenvalues strictly below ``lam`` (negative LDL^T pivots)."""
    d = np.asarray(diag, dtype=float)
    e2 = np.asarray(off, dtype=float) ** 2
    lams = np.atleast_1d(np.asarray(lam, dtype=float))
    out = np.zeros(lams.shape[0], dtype=np.int64)
    _sturm(d, e2, lams, out)
    return int(out[0]) if np.ndim(lam) == 0 else out


def bisection_eigenvalues(diag, off, tol: float = 0.0) -> np.ndarray:
    """Eigenvalues by Sturm-sequence bisection (independent of QL).

    Each eigenvalue is bisected until its bracket cannot shrink further in
    floating point or is narrower than ``tol``.
    """
    d = np.asarray(diag, dtype=float)
    e = np.asarray(off, dtype=float)
    a = np.abs(e)
    rad = np.zeros_like(d)
    rad[:-1] += a
    rad[1:] += a
    lo0, hi0 = float(np.min(d - rad)), float(np.max(d + rad))
    out = np.empty(d.shape[0])
    for k in range(d.shape[0]):
        lo, hi = lo0, hi0
        while True:
            mid = 0.5 * (lo + hi)
            if mid <= lo or mid >= hi or hi - lo <= tol:
                break
            if sturm_count(d, e, mid) > k:
                hi = mid
            else:
                lo = mid
        out[k] = 0.5 * (lo + hi)
    return out


# -- counting -------------------------------------------------------------------------

@dataclass(frozen=True)
class CountingFunction:
    """``N(lam) = #{eigenvalues <= lam}`` (inclusive at ties)."""

    eigenvalues: np.ndarray

    def __call__(self, lam):
        lam_arr = np.asarray(lam, dtype=float)
        if np.any(np.isnan(lam_arr)):
            raise ValueError("N(lambda) is undefined for NaN")
        out = np.searchsorted(self.eigenvalues, lam_arr, side="right")
        return int(out) if out.ndim == 0 else out

    def __len__(self) -> int:
        return len(self.eigenvalues)


def counting_function(eigs) -> CountingFunction:
    """Sorted copy of ``eigs`` with an inclusive counting evaluator."""
    v = np.array(eigs, dtype=float).ravel()
    if np.any(np.isnan(v)):
        raise ValueError("eigenvalues must not be NaN")
    if not np.all(np.isfinite(v)):
        raise ValueError("eigenvalues must be finite")
    v.sort()
    v.setflags(write=False)
    return CountingFunction(v)


# -- convergence study ------------------------------------------------------------

@dataclass
class RungResult:
    L: float
    N: int
    h: float
    wall: float
    eigenvalues: np.ndarray = field(repr=False)


@dataclass
class ConvergenceResult:
    counting: CountingFunction
    trust_lambda: float
    rungs: list
    cap: float
    disagreements: list = field(default_factory=list)


def worker_count(requested: int | None = None) -> int:
    """Number of worker threads: ``requested`` capped by ``SGRES_THREADS``."""
    cap = os.environ.get("SGRES_THREADS")
    n = requested or (os.cpu_count() or 1)
    if cap:
        try:
            n = min(n, max(1, int(cap)))
        except ValueError:
            pass
    return max(1, n)


def _solve_rung(p, L, N, lambda_max):
    op = discretize_1d(p, L, N)
    ev = eigenvalues_symmetric(op)
    return RungResult(op.L, op.N, op.h, op.wall, ev[ev <= lambda_max].copy())


def convergence_study(p, lambda_max: float, ladder: Sequence, workers: int | None = None,
                      rtol: float = 0.005) -> ConvergenceResult:
    """Solve every ``(L, N)`` rung and find the trusted range.

    The trust threshold is the largest ``lam <= lambda_max`` below the
    potential wall ``min p(+-L)^2`` of every rung such that successive rungs
    agree on ``N(mu)`` within ``rtol`` (relative) for all sampled
    ``mu <= lam``. Counts are compared between consecutive eigenvalues of
    the finest rung so that ties do not matter.

    Raises
    ------
    OracleInstabilityError
        If no eigenvalue of the finest rung lies in a trusted range.
    """
    ladder = [(float(L), int(N)) for L, N in ladder]
    if len(ladder) < 2:
        raise ValueError("a convergence study needs at least two rungs")
    with ThreadPoolExecutor(max_workers=min(worker_count(workers), len(ladder))) as pool:
        rungs = list(pool.map(lambda r: _solve_rung(p, r[0], r[1], lambda_max), ladder))
    cap = min([lambda_max] + [r.wall for r in rungs])
    finest = rungs[-1]
    ev = finest.eigenvalues[finest.eigenvalues <= cap]
    grid = np.append(0.5 * (ev[:-1] + ev[1:]), cap) if len(ev) else np.array([cap])
    grid = grid[grid <= cap]
    counts = [np.searchsorted(r.eigenvalues, grid, side="right") for r in rungs]
    ok = np.ones(grid.shape, dtype=bool)
    disagreements = []
    for a, b, ra, rb in zip(counts[:-1], counts[1:], rungs[:-1], rungs[1:]):
        ref = np.maximum(np.maximum(a, b), 1)
        good = np.abs(a - b) <= rtol * ref
        ok &= good
        if not np.all(good):
            i = int(np.argmax(~good))
            disagreements.append({"rungs": [(ra.L, ra.N), (rb.L, rb.N)],
                                  "lambda": float(grid[i]), "counts": [int(a[i]), int(b[i])]})
    bad = np.flatnonzero(~ok)
    stop = bad[0] if len(bad) else len(grid)
    if stop == 0 or not np.any(counts[-1][:stop] > 0):
        raise OracleInstabilityError(
            f"no stable range below lambda={cap:.6g} (walls {[r.wall for r in rungs]})",
            disagreements)
    trust = float(grid[stop - 1])
    cf = counting_function(finest.eigenvalues[finest.eigenvalues <= trust])
    return ConvergenceResult(cf, trust, rungs, cap, disagreements)


# -- Weyl fit ------------------------------------------------------------------------

@dataclass
class WeylFit:
    C_log_hat: float
    C_power_hat: float
    residual: float
    flagged: bool
    exponent: float
    npoints: int

    def to_dict(self) -> dict:
        return {"C_log_hat": self.C_log_hat, "C_power_hat": self.C_power_hat,
                "residual": self.residual, "flagged": self.flagged,
                "exponent": self.exponent, "npoints": self.npoints}


def fit_weyl(cf, lam_grid, exponent: float, log_term: bool = True,
             flag_residual: float = 0.1) -> WeylFit:
    """Least-squares fit of ``N(lam)`` to the two-term model.

    Rows are scaled by ``lam^-exponent`` so every point carries relative
    weight; the residual is the RMS relative misfit. With ``log_term``
    false the basis is ``{lam^exponent}`` alone.

    Raises
    ------
    FitError
        If the design matrix is rank deficient for the grid.
    """
    lam = np.asarray(lam_grid, dtype=float)
    if np.any(lam <= 1.0):
        raise FitError("the fit grid must satisfy lambda > 1")
    y = np.asarray(cf(lam) if callable(cf) else cf, dtype=float)
    w = lam ** (-exponent)
    cols = [np.log(lam), np.ones_like(lam)] if log_term else [np.ones_like(lam)]
    A = np.column_stack(cols)
    if np.linalg.matrix_rank(A, tol=1e-10 * np.abs(A).max()) < A.shape[1]:
        raise FitError("rank-deficient fit: the lambda grid is too narrow")
    coef, *_ = np.linalg.lstsq(A, y * w, rcond=None)
    model = A @ coef
    scale = np.where(model != 0, np.abs(model), 1.0)
    rel = (model - y * w) / scale
    resid = float(np.sqrt(np.mean(rel * rel)))
    c_log, c_pow = (coef[0], coef[1]) if log_term else (0.0, coef[0])
    return WeylFit(float(c_log), float(c_pow), resid, resid > flag_residual, float(exponent), len(lam))
