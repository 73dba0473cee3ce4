"""Exact weighted quantile-regression solver.

The objective sum_i w_i * rho_tau(y_i - x_i' beta) is a linear program; an
optimal solution sits at a vertex interpolating p data points.  The hot
pivot loop that walks between such vertices lives in a compiled kernel
(``_fast``, Cython) with a pure numpy twin (``pure``) selected at import
time; set ``METAEMU_PURE_SOLVER=1`` to force the fallback.

Every pivot strictly decreases the objective (breakpoints along an edge
are strictly positive), so the walk cannot cycle.  At a degenerate vertex
(more than p zero residuals) edge tests alone cannot certify optimality;
the orchestrator then checks 0 in the subdifferential by solving a tiny
LP with scipy's HiGHS and, if a descent direction exists, moves along it
and resumes pivoting.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from . import pure

try:  # compiled kernel is optional
    from . import _fast
except ImportError:  # pragma: no cover - depends on build environment
    _fast = None

_FORCE_PURE = os.environ.get("METAEMU_PURE_SOLVER", "") not in ("", "0")

#: relative tolerance for classifying a residual as zero
ZERO_TOL = 1e-9

_MAX_OUTER_ROUNDS = 200


class SolverError(RuntimeError):
    """Base class for solver failures."""


class RankDeficientDesignError(SolverError):
    """Design matrix does not have full column rank."""


class InsufficientObservationsError(SolverError):
    """Fewer usable observations than parameters."""


class SolverConvergenceError(SolverError):
    """Pivot budget exhausted without reaching an optimal vertex."""


class SolverNumericalError(SolverError):
    """Numerical breakdown (singular basis, failed certificate LP)."""


@dataclass(frozen=True)
class QRSolution:
    """Optimal coefficients for one weighted quantile regression."""

    beta: np.ndarray
    loss: float
    basis: np.ndarray
    n_pivots: int
    backend: str


def available_backends() -> tuple[str, ...]:
    return ("compiled", "pure") if _fast is not None else ("pure",)


def active_backend() -> str:
    """Kernel chosen at import time (compiled when built, unless forced pure)."""
    if _fast is not None and not _FORCE_PURE:
        return "compiled"
    return "pure"


def _kernel(backend: str | None):
    name = backend or active_backend()
    if name == "compiled":
        if _fast is None:
            raise SolverError("compiled kernel requested but not built")
        return name, _fast
    if name == "pure":
        return name, pure
    raise ValueError(f"unknown solver backend: {backend!r}")


def pinball_value(residuals, tau, weights) -> float:
    """Weighted pinball objective sum_i w_i * r_i * (tau - 1[r_i < 0])."""
    r = np.asarray(residuals, dtype=float)
    w = np.asarray(weights, dtype=float)
    return float(np.sum(w * r * (tau - (r < 0))))


def solve_weighted_quantile(X, y, w, tau, *, backend: str | None = None,
                            max_pivots: int | None = None) -> QRSolution:
    """Minimize sum_i w_i * rho_tau(y_i - x_i' beta) exactly.

    The design matrix must contain any intercept column explicitly and all
    weights must be strictly positive (drop zero-weight rows first).
    Output is deterministic for a given input ordering: pricing takes the
    most negative edge, ties go to the lowest edge index, and the entering
    observation is the first breakpoint (lowest index on ties) at which
    the cumulative directional slope turns non-negative.
    """
    X = np.ascontiguousarray(X, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.float64)
    w = np.ascontiguousarray(w, dtype=np.float64)
    if X.ndim != 2:
        raise ValueError("X must be 2-D")
    n, p = X.shape
    if y.shape != (n,) or w.shape != (n,):
        raise ValueError("X, y, w shapes do not agree")
    if not 0.0 < tau < 1.0:
        raise ValueError(f"tau must be strictly inside (0, 1), got {tau}")
    if n == 0:
        raise InsufficientObservationsError("no observations")
    if np.any(w <= 0):
        raise ValueError("weights must be strictly positive inside the solver")
    if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))
            and np.all(np.isfinite(w))):
        raise ValueError("non-finite values in solver input")
    if n < p:
        raise InsufficientObservationsError(
            f"{n} observations for {p} parameters")

    col_scale = np.abs(X).max(axis=0)
    if np.any(col_scale == 0):
        dead = int(np.argmax(col_scale == 0))
        raise RankDeficientDesignError(f"design column {dead} is identically zero")
    Xs = X / col_scale
    ztol = ZERO_TOL * (1.0 + float(np.abs(y).max(initial=0.0)))
    if max_pivots is None:
        max_pivots = 100 * (n + p) + 1000

    basis = _initial_basis(Xs, y, w)
    name, kern = _kernel(backend)

    budget = max_pivots
    total_pivots = 0
    beta = None
    last_loss = np.inf
    for _ in range(_MAX_OUTER_ROUNDS):
        beta, basis, used, status = kern.run_pivots(Xs, y, w, tau, basis,
                                                    ztol, budget)
        total_pivots += used
        budget -= used
        if status == pure.SINGULAR_BASIS:
            raise SolverNumericalError("basis matrix became singular")
        if status == pure.UNBOUNDED:
            raise SolverNumericalError("unbounded descent direction")
        if status == pure.MAX_PIVOTS:
            raise SolverConvergenceError(
                f"pivot budget ({max_pivots}) exhausted")
        r = y - Xs @ beta
        if int(np.sum(np.abs(r) <= ztol)) <= p:
            break  # nondegenerate vertex: edge tests are a full certificate
        v = _certificate_direction(Xs, y, w, tau, r, ztol)
        if v is None:
            break
        moved = _move_along(Xs, y, w, tau, beta, r, v, ztol)
        if moved is None:
            break
        loss_now = pinball_value(y - Xs @ moved, tau, w)
        if loss_now >= last_loss - 1e-12 * (1.0 + abs(last_loss)):
            break  # progress below tolerance floor
        last_loss = loss_now
        beta, basis = _vertexify(Xs, y, w, tau, moved, ztol)
    else:  # pragma: no cover - defensive
        raise SolverConvergenceError("degenerate-vertex recovery did not settle")

    beta_out = beta / col_scale
    loss = pinball_value(y - Xs @ beta, tau, w)
    return QRSolution(beta=beta_out, loss=loss, basis=basis,
                      n_pivots=total_pivots, backend=name)


def _greedy_independent(X, order, p, limit=None):
    """First p rows of X, scanned in `order`, that are linearly independent."""
    picked = []
    Q = np.zeros((p, X.shape[1]))
    k = 0
    for i in order:
        x = X[i]
        v = x - Q[:k].T @ (Q[:k] @ x)
        v -= Q[:k].T @ (Q[:k] @ v)  # re-orthogonalize once for stability
        nv = np.linalg.norm(v)
        if nv > 1e-9 * (1.0 + np.linalg.norm(x)):
            Q[k] = v / nv
            picked.append(int(i))
            k += 1
            if k == p:
                return picked
        if limit is not None and len(picked) >= limit:
            return picked
    return picked


def _initial_basis(Xs, y, w):
    """Warm-start basis: p independent rows closest to the WLS fit."""
    n, p = Xs.shape
    sw = np.sqrt(w)
    beta0, _, rank, _ = np.linalg.lstsq(Xs * sw[:, None], y * sw, rcond=None)
    if rank < p:
        raise RankDeficientDesignError(
            f"design matrix has rank {rank} < {p} parameters")
    r0 = np.abs(y - Xs @ beta0)
    order = np.lexsort((np.arange(n), r0))
    picked = _greedy_independent(Xs, order, p)
    if len(picked) < p:
        raise RankDeficientDesignError(
            f"could only find {len(picked)} independent rows for {p} parameters")
    return np.asarray(picked, dtype=np.int64)


def _gradient_const(Xs, w, tau, pos, neg):
    """Gradient of the smooth part: d/dbeta of the nonzero-residual terms."""
    c = np.zeros(Xs.shape[1])
    if pos.any():
        c += -tau * (w[pos] @ Xs[pos])
    if neg.any():
        c += (1.0 - tau) * (w[neg] @ Xs[neg])
    return c


def _certificate_direction(Xs, y, w, tau, r, ztol):
    """Descent direction at a degenerate vertex, or None when optimal.

    Solves min_v c'v + sum_i max(w_i(1-tau) x_i'v, -w_i tau x_i'v) over the
    unit box; the optimum is negative iff 0 is outside the subdifferential.
    """
    from scipy.optimize import linprog

    n, p = Xs.shape
    zero = np.abs(r) <= ztol
    pos = r > ztol
    neg = r < -ztol
    c = _gradient_const(Xs, w, tau, pos, neg)
    # zero-residual points with identical covariate rows contribute
    # (sum w) * phi(x'v) jointly, so merge them; keeps the LP small even
    # when thousands of tied records share the vertex
    Z, inverse = np.unique(Xs[zero], axis=0, return_inverse=True)
    wz = np.bincount(inverse, weights=w[zero])
    m = Z.shape[0]
    scaled = wz[:, None] * Z
    c_lp = np.concatenate([c, np.ones(m)])
    eye = np.eye(m)
    A_ub = np.vstack([
        np.hstack([(1.0 - tau) * scaled, -eye]),
        np.hstack([-tau * scaled, -eye]),
    ])
    b_ub = np.zeros(2 * m)
    bounds = [(-1.0, 1.0)] * p + [(None, None)] * m
    res = linprog(c_lp, A_ub=A_ub, b_ub=b_ub, bounds=bounds, method="highs")
    if not res.success:  # pragma: no cover - HiGHS failure is unexpected here
        raise SolverNumericalError(
            f"optimality-certificate LP failed: {res.message}")
    tol = 1e-9 * (1.0 + float(np.abs(c).sum()) + float(wz.sum()))
    if res.fun < -tol:
        return res.x[:p]
    return None


def _slope_along(Xs, w, tau, r, g, ztol):
    """Directional derivative of the objective along residual rates g."""
    zero = np.abs(r) <= ztol
    pos = r > ztol
    neg = r < -ztol
    out = 0.0
    if pos.any():
        out += -tau * float(w[pos] @ g[pos])
    if neg.any():
        out += (1.0 - tau) * float(w[neg] @ g[neg])
    gz = g[zero]
    out += float(w[zero] @ np.maximum((1.0 - tau) * gz, -tau * gz))
    return out


def _move_along(Xs, y, w, tau, beta, r, v, ztol):
    """Step to the objective minimizer along direction v (None if no descent)."""
    g = Xs @ v
    slope0 = _slope_along(Xs, w, tau, r, g, ztol)
    if slope0 >= 0.0:
        return None
    pos = r > ztol
    neg = r < -ztol
    blocking = (pos & (g > 0)) | (neg & (g < 0))
    idx = np.nonzero(blocking)[0]
    if idx.size == 0:  # pragma: no cover - precluded by coercivity
        raise SolverNumericalError("unbounded certificate direction")
    t = r[idx] / g[idx]
    order = np.lexsort((idx, t))
    ordered = idx[order]
    cum = slope0 + np.cumsum(w[ordered] * np.abs(g[ordered]))
    stop = int(np.argmax(cum >= 0.0))
    if cum[stop] < 0.0:
        stop = ordered.size - 1
    return beta + t[order][stop] * v


def _vertexify(Xs, y, w, tau, beta, ztol):
    """Walk (without increasing the objective) to a vertex near beta."""
    n, p = Xs.shape
    for _ in range(p + 1):
        r = y - Xs @ beta
        zero_idx = np.nonzero(np.abs(r) <= ztol)[0]
        order = zero_idx[np.lexsort((zero_idx, np.abs(r[zero_idx])))]
        picked = _greedy_independent(Xs, order, p)
        if len(picked) == p:
            return beta, np.asarray(picked, dtype=np.int64)
        A = Xs[picked] if picked else np.zeros((0, p))
        _, s, vh = np.linalg.svd(A, full_matrices=True) if A.size else (
            None, np.zeros(0), np.eye(p))
        rank = int(np.sum(s > 1e-10 * (1 + (s[0] if s.size else 0.0))))
        u = vh[rank]
        lead = np.nonzero(np.abs(u) > 1e-12)[0]
        if lead.size and u[lead[0]] < 0:
            u = -u
        pos = r > ztol
        neg = r < -ztol
        c = _gradient_const(Xs, w, tau, pos, neg)
        if float(c @ u) > 0:
            u = -u
        beta_step = _first_breakpoint_step(Xs, r, u, pos, neg)
        if beta_step is None:
            u = -u
            beta_step = _first_breakpoint_step(Xs, r, u, pos, neg)
        if beta_step is None:  # pragma: no cover - requires Xu = 0
            raise SolverNumericalError("no breakpoint while restoring a vertex")
        beta = beta + beta_step * u
    raise SolverConvergenceError(  # pragma: no cover - defensive
        "failed to restore a vertex")


def _first_breakpoint_step(Xs, r, u, pos, neg):
    g = Xs @ u
    blocking = (pos & (g > 0)) | (neg & (g < 0))
    idx = np.nonzero(blocking)[0]
    if idx.size == 0:
        return None
    t = r[idx] / g[idx]
    order = np.lexsort((idx, t))
    return float(t[order][0])
