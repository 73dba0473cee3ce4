"""Weighted quantile regression over a percentile grid, plus the mean fit.

Quantile fits minimize the weighted pinball objective exactly (see
``metaemu.solver``); the optional left-censoring iterates refits on the
subsample with fitted values above the bound until the active set
stabilizes.  The mean column is weighted least squares with classical
standard errors; quantile-fit standard errors come from a cluster
bootstrap that resamples papers.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from metaemu.core import MEAN_TAU, EstimateRecord, ImpactKind, QuantileFit
from metaemu.solver import (
    InsufficientObservationsError,
    RankDeficientDesignError,
    SolverError,
    pinball_value,
    solve_weighted_quantile,
)
from metaemu.weighted import weighted_quantile

DEFAULT_TAU_GRID = tuple(i / 20 for i in range(1, 20))

ASSUMPTION_COVARIATES = ("prtp", "emuc", "impact", "growth_impact")
DUMMY_COVARIATES = ("level_dummy", "growth_dummy")
COVARIATE_CHOICES = ASSUMPTION_COVARIATES + ("year",) + DUMMY_COVARIATES

DEFAULT_N_BOOT = 1000
MIN_N_BOOT = 100
CENSOR_MAX_ITER = 50


class BootstrapError(RuntimeError):
    """Cluster bootstrap could not produce enough usable resamples."""


@dataclass(frozen=True)
class DesignSpec:
    """Covariate selection, censoring bound, and percentile grid for fits."""

    covariates: tuple[str, ...]
    tau_grid: tuple[float, ...] = DEFAULT_TAU_GRID
    censor_bound: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "covariates", tuple(self.covariates))
        object.__setattr__(self, "tau_grid",
                           tuple(float(t) for t in self.tau_grid))
        if len(set(self.covariates)) != len(self.covariates):
            raise ValueError("covariate names must be distinct")
        unknown = [c for c in self.covariates if c not in COVARIATE_CHOICES]
        if unknown:
            raise ValueError(f"unknown covariates {unknown}; "
                             f"choose from {list(COVARIATE_CHOICES)}")
        for t in self.tau_grid:
            if not 0.0 < t < 1.0:
                raise ValueError(f"tau must be strictly inside (0, 1): {t}")
        for a, b in zip(self.tau_grid, self.tau_grid[1:]):
            if not a < b:
                raise ValueError("tau_grid must be strictly increasing")


@dataclass(frozen=True)
class DesignData:
    """Numeric design extracted from records for one spec."""

    X: np.ndarray  # (n, k+1), intercept column last
    y: np.ndarray
    w: np.ndarray
    papers: np.ndarray
    n_dropped: int  # positively weighted records missing a covariate


def covariate_value(record: EstimateRecord, name: str) -> float | None:
    if name == "year":
        return float(record.year)
    if name == "level_dummy":
        return 1.0 if record.impact_kind is ImpactKind.LEVEL else 0.0
    if name == "growth_dummy":
        return 1.0 if record.impact_kind is ImpactKind.GROWTH else 0.0
    return getattr(record, name)


def design_matrix(records: Sequence[EstimateRecord],
                  spec: DesignSpec) -> DesignData:
    """Numeric design for one covariate spec, minus zero weights and missing values."""
    rows, ys, ws, papers = [], [], [], []
    n_dropped = 0
    for rec in records:
        if not rec.usable:
            continue
        values = [covariate_value(rec, c) for c in spec.covariates]
        if any(v is None for v in values):
            n_dropped += 1
            continue
        rows.append(values + [1.0])
        ys.append(rec.scc)
        ws.append(rec.weight)
        papers.append(rec.paper_id)
    X = np.asarray(rows, dtype=float).reshape(len(rows), len(spec.covariates) + 1)
    return DesignData(X=X, y=np.asarray(ys, dtype=float),
                      w=np.asarray(ws, dtype=float),
                      papers=np.asarray(papers, dtype=object),
                      n_dropped=n_dropped)


def pinball_loss(residuals, tau: float, weights=None) -> float:
    """Weighted check loss: sum_i w_i * r_i * (tau - 1[r_i < 0])."""
    r = np.asarray(residuals, dtype=float)
    if weights is None:
        weights = np.ones_like(r)
    w = np.asarray(weights, dtype=float)
    if r.shape != w.shape:
        raise ValueError("residuals and weights must have equal length")
    if not 0.0 < tau < 1.0:
        raise ValueError(f"tau must be strictly inside (0, 1), got {tau}")
    return pinball_value(r, tau, w)


def _censored_loss(X, y, w, tau, beta, bound):
    fitted = np.maximum(bound, X @ beta)
    return pinball_value(y - fitted, tau, w)


def _fit_censored(X, y, w, tau, bound, backend):
    """Left-censored quantile fit: iterate refits on x'beta > bound.

    The censored objective is non-convex; the iteration keeps the best
    censored loss among visited coefficient vectors and stops when the
    active set repeats or after CENSOR_MAX_ITER rounds.
    """
    p = X.shape[1]
    sol = solve_weighted_quantile(X, y, w, tau, backend=backend)
    best_beta = sol.beta
    best_loss = _censored_loss(X, y, w, tau, sol.beta, bound)
    seen: set[bytes] = set()
    beta = sol.beta
    for _ in range(CENSOR_MAX_ITER):
        active = np.nonzero(X @ beta > bound)[0]
        key = active.tobytes()
        if key in seen:
            break
        seen.add(key)
        if active.size <= p:
            break
        sol = solve_weighted_quantile(X[active], y[active], w[active], tau,
                                      backend=backend)
        beta = sol.beta
        loss = _censored_loss(X, y, w, tau, beta, bound)
        if loss < best_loss:
            best_loss = loss
            best_beta = beta
    return best_beta, best_loss


def _quantile_beta(X, y, w, tau, censor_bound, backend):
    if censor_bound is not None:
        return _fit_censored(X, y, w, tau, censor_bound, backend)
    sol = solve_weighted_quantile(X, y, w, tau, backend=backend)
    beta, loss = sol.beta, sol.loss
    if X.shape[1] == 1 and np.all(X[:, 0] == 1.0):
        # intercept-only optima can be an interval; canonicalize to the
        # smallest weighted tau-quantile (left endpoint), the same value
        # empirical_quantiles reports
        q = weighted_quantile(y, w, tau)
        q_loss = pinball_value(y - q, tau, w)
        if q_loss <= loss + 1e-9 * (1.0 + abs(loss)):
            beta, loss = np.array([q]), q_loss
    return beta, loss


def fit_quantile(records: Sequence[EstimateRecord], spec: DesignSpec,
                 tau: float, *, n_boot: int = 0, seed: int = 0,
                 backend: str | None = None) -> QuantileFit:
    """Weighted quantile regression at one percentile.

    Records with zero weight or a missing covariate are dropped (the drop
    count is reported on the fit).  Standard errors are attached only when
    ``n_boot`` > 0, via :func:`bootstrap_se`.  Intercept-only fits return
    the smallest weighted tau-quantile when the optimum is an interval.
    """
    if not 0.0 < tau < 1.0:
        raise ValueError(f"tau must be strictly inside (0, 1), got {tau}")
    dd = design_matrix(records, spec)
    n, p = dd.X.shape
    if n <= p:
        raise InsufficientObservationsError(
            f"{n} usable observations for {p} parameters")
    beta, loss = _quantile_beta(dd.X, dd.y, dd.w, tau, spec.censor_bound,
                                backend)
    se = None
    if n_boot:
        se = bootstrap_se(records, spec, tau, n_boot=n_boot, seed=seed,
                          backend=backend)
    return QuantileFit(tau=tau, covariates=spec.covariates,
                       beta=tuple(beta), se=None if se is None else tuple(se),
                       n_obs=n, loss=loss, n_dropped=dd.n_dropped)


def _wls_solution(X, y, w):
    # scale columns to O(1) before forming the normal equations; raw
    # columns like calendar year square an already-large condition number
    scale = np.abs(X).max(axis=0)
    if np.any(scale == 0):
        raise RankDeficientDesignError("singular normal equations "
                                       "(zero design column)")
    Xs = X / scale
    XtW = Xs.T * w
    gram = XtW @ Xs
    try:
        beta = np.linalg.solve(gram, XtW @ y) / scale
    except np.linalg.LinAlgError:
        raise RankDeficientDesignError("singular normal equations") from None
    # scale-invariant singularity guard: solve() only rejects exact zeros
    cond = np.linalg.cond(gram)
    if not np.isfinite(cond) or cond > 1e14:
        raise RankDeficientDesignError(
            f"singular normal equations (condition number {cond:.3g})")
    return beta, scale


def fit_wls(records: Sequence[EstimateRecord],
            spec: DesignSpec) -> QuantileFit:
    """Weighted least squares (the table's "mean" column).

    Censoring never applies here.  Classical standard errors come from the
    weighted normal equations with weights normalized to mean one, so they
    are invariant to uniform weight rescaling; loss is the weighted SSR
    under the raw weights.
    """
    dd = design_matrix(records, spec)
    n, p = dd.X.shape
    if n <= p:
        raise InsufficientObservationsError(
            f"{n} usable observations for {p} parameters")
    beta, scale = _wls_solution(dd.X, dd.y, dd.w)
    resid = dd.y - dd.X @ beta
    wn = dd.w * (n / dd.w.sum())
    sigma2 = float(wn @ resid**2) / (n - p)
    Xs = dd.X / scale
    gram_n = (Xs.T * wn) @ Xs
    cov = sigma2 * np.linalg.inv(gram_n)
    se = np.sqrt(np.clip(np.diag(cov), 0.0, None)) / scale
    ybar = float(wn @ dd.y) / n
    sst = float(wn @ (dd.y - ybar) ** 2)
    r2 = 1.0 - float(wn @ resid**2) / sst if sst > 0 else 1.0
    return QuantileFit(tau=MEAN_TAU, covariates=spec.covariates,
                       beta=tuple(beta), se=tuple(se), n_obs=n,
                       loss=float(dd.w @ resid**2), r_squared=r2,
                       n_dropped=dd.n_dropped)


@dataclass(frozen=True)
class GridResult:
    """Per-tau fits plus the failures that did not abort the other taus."""

    fits: tuple[QuantileFit, ...]
    failures: tuple[tuple[float | str, str], ...]

    def by_tau(self):
        return {fit.tau: fit for fit in self.fits}


def fit_grid(records: Sequence[EstimateRecord], spec: DesignSpec, *,
             n_boot: int = 0, seed: int = 0, include_mean: bool = True,
             backend: str | None = None) -> GridResult:
    """One independent quantile fit per grid tau, plus the mean (WLS) fit."""
    if not spec.tau_grid:
        raise ValueError("tau_grid must be non-empty")
    fits: list[QuantileFit] = []
    failures: list[tuple[float | str, str]] = []
    seeds = np.random.SeedSequence(seed).generate_state(len(spec.tau_grid) + 1)
    for i, tau in enumerate(spec.tau_grid):
        try:
            fits.append(fit_quantile(records, spec, tau, n_boot=n_boot,
                                     seed=int(seeds[i]), backend=backend))
        except (SolverError, ValueError) as exc:
            failures.append((tau, str(exc)))
    if include_mean:
        try:
            fits.append(fit_wls(records, spec))
        except (SolverError, ValueError) as exc:
            failures.append((MEAN_TAU, str(exc)))
    return GridResult(fits=tuple(fits), failures=tuple(failures))


def _paper_groups(papers: np.ndarray):
    """Row indices per paper, papers in sorted order (deterministic)."""
    uniq = np.unique(papers.astype(str))
    return [np.nonzero(papers.astype(str) == pid)[0] for pid in uniq]


def bootstrap_se(records: Sequence[EstimateRecord], spec: DesignSpec,
                 tau: float | str, n_boot: int = DEFAULT_N_BOOT,
                 seed: int = 0, backend: str | None = None) -> np.ndarray:
    """Cluster-bootstrap standard errors, resampling papers with replacement.

    Degenerate resamples (rank-deficient design or too few rows) are
    redrawn, with a hard cap of 10 * n_boot total draws; the draw sequence
    is fixed by the seed, so repeated calls are bit-identical.
    """
    if n_boot < MIN_N_BOOT:
        raise ValueError(f"n_boot must be at least {MIN_N_BOOT}, got {n_boot}")
    dd = design_matrix(records, spec)
    n, p = dd.X.shape
    if n <= p:
        raise InsufficientObservationsError(
            f"{n} usable observations for {p} parameters")
    groups = _paper_groups(dd.papers)
    n_papers = len(groups)
    rng = np.random.default_rng(seed)
    draws = np.empty((n_boot, p))
    done = 0
    attempts = 0
    while done < n_boot:
        attempts += 1
        if attempts > 10 * n_boot:
            raise BootstrapError(
                f"exceeded {10 * n_boot} resampling attempts "
                f"({done}/{n_boot} usable)")
        chosen = rng.integers(0, n_papers, size=n_papers)
        idx = np.concatenate([groups[j] for j in chosen])
        Xb, yb, wb = dd.X[idx], dd.y[idx], dd.w[idx]
        try:
            if tau == MEAN_TAU:
                beta, _ = _wls_solution(Xb, yb, wb)
            else:
                beta, _ = _quantile_beta(Xb, yb, wb, tau, spec.censor_bound,
                                         backend)
        except SolverError:
            continue
        draws[done] = beta
        done += 1
    return np.std(draws, axis=0, ddof=1)
