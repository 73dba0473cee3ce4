"""Shift observed SCC quantiles under alternative assumption distributions.

The shift at percentile tau for one assumption is

    shift = beta_tau * sum_s (F_s - P_s) * X_s

where F is the literature's observed frequency over the support X and P
the alternative view, and its variance is

    var = sigma_tau^2 * sum_s (F_s - P_s)^2 * X_s^2

with sigma_tau the standard error of the assumption's coefficient.  Joint
alterations add shifts; their variance defaults to the independence sum,
with an optional correlation matrix or a cluster-bootstrap joint variance
for callers who want one.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from metaemu.core import (
    Assumption,
    AssumptionDistribution,
    BiasSummary,
    EmulationResult,
    EstimateRecord,
    QuantileFit,
    z_value,
)
from metaemu.weighted import weighted_quantile_grid


class SupportMismatchError(ValueError):
    """F and P must live on one common support."""

    def __init__(self, assumption, support_f, support_p):
        self.support_f = tuple(support_f)
        self.support_p = tuple(support_p)
        super().__init__(
            f"support mismatch for {assumption}: "
            f"observed side has {list(self.support_f)}, "
            f"alternative side has {list(self.support_p)}")


class MissingCoefficientError(ValueError):
    """Fit lacks a coefficient (or standard error) for the assumption."""


class QuantileCrossingWarning(UserWarning):
    """Emulated quantiles are not monotone across percentiles."""


@dataclass(frozen=True)
class Alteration:
    """One assumption plus the (from, to) pair of views on it."""

    assumption: Assumption
    observed: AssumptionDistribution     # F: frequencies in the literature
    alternative: AssumptionDistribution  # P: the alternative view

    def __post_init__(self):
        object.__setattr__(self, "assumption", Assumption(self.assumption))
        for side, dist in (("observed", self.observed),
                           ("alternative", self.alternative)):
            if dist.assumption is not self.assumption:
                raise ValueError(
                    f"{side} distribution is for {dist.assumption.value!r}, "
                    f"not {self.assumption.value!r}")
        if self.observed.support != self.alternative.support:
            raise SupportMismatchError(self.assumption.value,
                                       self.observed.support,
                                       self.alternative.support)


def empirical_quantiles(records: Sequence[EstimateRecord],
                        tau_grid: Sequence[float]) -> list[tuple[float, float]]:
    """Weighted quantiles of scc over records with positive weight."""
    usable = [r for r in records if r.usable]
    if not usable:
        raise ValueError("no records with positive weight")
    values = [r.scc for r in usable]
    weights = [r.weight for r in usable]
    qs = weighted_quantile_grid(values, weights, tau_grid)
    return [(float(t), float(q)) for t, q in zip(tau_grid, qs)]


def _coefficient(fit: QuantileFit, assumption: Assumption) -> float:
    try:
        return fit.coefficient(assumption.value)
    except KeyError:
        raise MissingCoefficientError(
            f"fit at tau={fit.tau} has no coefficient for "
            f"{assumption.value!r}; covariates: {list(fit.covariates)}"
        ) from None


def _stderr(fit: QuantileFit, assumption: Assumption) -> float:
    if fit.se is None:
        raise MissingCoefficientError(
            f"fit at tau={fit.tau} has no standard errors attached")
    try:
        return fit.stderr(assumption.value)
    except KeyError:
        raise MissingCoefficientError(
            f"fit at tau={fit.tau} has no coefficient for "
            f"{assumption.value!r}") from None


def emulate_shift(fit: QuantileFit, assumption: Assumption,
                  observed: AssumptionDistribution,
                  alternative: AssumptionDistribution) -> float:
    """Quantile shift beta * sum_s (F_s - P_s) X_s for one assumption.

    This is the regression's prediction under the literature's observed
    frequencies minus its prediction under the alternative view: a
    NEGATIVE shift means the alternative view implies a higher social
    cost of carbon (the literature underestimates it under that view).
    """
    alt = Alteration(assumption, observed, alternative)
    beta = _coefficient(fit, alt.assumption)
    gaps = (np.asarray(alt.observed.probability)
            - np.asarray(alt.alternative.probability))
    return float(beta * float(gaps @ np.asarray(alt.observed.support)))


def shift_variance(fit: QuantileFit, assumption: Assumption,
                   observed: AssumptionDistribution,
                   alternative: AssumptionDistribution) -> float:
    """Variance of the shift: sigma^2 * sum_s (F_s - P_s)^2 * X_s^2."""
    alt = Alteration(assumption, observed, alternative)
    sigma = _stderr(fit, alt.assumption)
    gaps = (np.asarray(alt.observed.probability)
            - np.asarray(alt.alternative.probability))
    support = np.asarray(alt.observed.support)
    return float(sigma**2 * float((gaps**2) @ (support**2)))


def _joint_variance(variances, ses, correlation):
    if correlation is None:
        return float(np.sum(variances))
    C = np.asarray(correlation, dtype=float)
    k = len(ses)
    if C.shape != (k, k):
        raise ValueError(f"correlation matrix must be {k}x{k}, got {C.shape}")
    if not np.allclose(C, C.T, atol=1e-12):
        raise ValueError("correlation matrix must be symmetric")
    if not np.allclose(np.diag(C), 1.0, atol=1e-12):
        raise ValueError("correlation matrix must have unit diagonal")
    if np.any(np.abs(C) > 1.0 + 1e-12):
        raise ValueError("correlations must be within [-1, 1]")
    s = np.asarray(ses, dtype=float)
    var = float(s @ C @ s)
    if var < -1e-12:
        raise ValueError("correlation matrix produced a negative variance")
    return max(var, 0.0)


def emulate_cdf(fits: Sequence[QuantileFit],
                observed: Sequence[tuple[float, float]],
                alterations: Sequence[Alteration],
                ci_level: float = 0.95,
                correlation=None,
                rearrange: bool = False) -> list[EmulationResult]:
    """Emulated CDF: per-tau total shift, standard error, and CI.

    ``observed`` holds (tau, observed quantile) pairs; ``fits`` must cover
    every tau in it.  With several alterations the shifts add and the
    default variance is the independence sum; pass a correlation matrix
    (one row/column per alteration, in order) to override.  Quantile
    crossing in the emulated CDF is reported as a warning; with
    ``rearrange=True`` the emulated quantiles are sorted instead
    (monotone rearrangement), which reassigns shifts across taus.
    """
    by_tau = {}
    for fit in fits:
        if not fit.is_mean:
            by_tau[round(float(fit.tau), 10)] = fit
    z = z_value(ci_level)
    results = []
    for tau, scc_obs in observed:
        fit = by_tau.get(round(float(tau), 10))
        if fit is None:
            raise ValueError(f"no fit covers tau={tau}")
        shifts = [emulate_shift(fit, a.assumption, a.observed, a.alternative)
                  for a in alterations]
        variances = [shift_variance(fit, a.assumption, a.observed,
                                    a.alternative)
                     for a in alterations]
        ses = [math.sqrt(v) for v in variances]
        total_var = _joint_variance(variances, ses, correlation) \
            if alterations else 0.0
        results.append(EmulationResult.from_shift(
            tau, scc_obs, sum(shifts), math.sqrt(total_var),
            ci_level=ci_level, z=z))
    emulated = [r.scc_emulated for r in results]
    if any(b < a for a, b in zip(emulated, emulated[1:])):
        if rearrange:
            rearranged = sorted(emulated)
            results = [EmulationResult.from_shift(
                r.tau, r.scc_observed, q - r.scc_observed, r.se,
                ci_level=ci_level, z=z)
                for r, q in zip(results, rearranged)]
        else:
            warnings.warn("emulated quantiles cross (not monotone in tau); "
                          "pass rearrange=True to sort them",
                          QuantileCrossingWarning, stacklevel=2)
    return results


def combine_biases(inputs: Sequence[tuple[str, float, float]],
                   tau: float) -> BiasSummary:
    """Precision-weighted pooling of bias estimates at one percentile.

    Combined variance is the harmonic mean variance
    1/sigma_c^2 = sum_i 1/sigma_i^2 and the combined mean the rescaled
    weighted mean mu_c = sigma_c^2 * sum_i mu_i / sigma_i^2.
    """
    if not inputs:
        raise ValueError("at least one input is required")
    for label, _, sigma in inputs:
        if not sigma > 0:
            raise ValueError(f"zero or negative sigma for {label!r}: {sigma}")
    if len(inputs) == 1:
        label, mu, sigma = inputs[0]
        return BiasSummary(tau=float(tau), mu_combined=float(mu),
                           sigma_combined=float(sigma),
                           inputs=((str(label), float(mu), float(sigma)),))
    precisions = [1.0 / (s * s) for _, _, s in inputs]
    var_c = 1.0 / math.fsum(precisions)
    mu_c = var_c * math.fsum(m * p for (_, m, _), p in zip(inputs, precisions))
    return BiasSummary(tau=float(tau), mu_combined=mu_c,
                       sigma_combined=math.sqrt(var_c),
                       inputs=tuple((str(l), float(m), float(s))
                                    for l, m, s in inputs))


def combine_grids(sources: Sequence[tuple[str, Sequence[EmulationResult]]]
                  ) -> list[BiasSummary]:
    """Combine several emulation runs tau by tau.

    All sources must share the identical tau grid; each tau pools the
    per-source (shift, se) pairs with :func:`combine_biases`.
    """
    if not sources:
        raise ValueError("at least one source is required")
    grids = [tuple(round(r.tau, 10) for r in results)
             for _, results in sources]
    if any(g != grids[0] for g in grids[1:]):
        raise ValueError(
            "mismatched tau grids across inputs: "
            + "; ".join(f"{label}: {list(g)}"
                        for (label, _), g in zip(sources, grids)))
    out = []
    for i, tau in enumerate(grids[0]):
        entries = [(label, results[i].shift, results[i].se)
                   for label, results in sources]
        out.append(combine_biases(entries, tau))
    return out


def bootstrap_joint_se(records, spec, observed, alterations,
                       n_boot: int = 200, seed: int = 0,
                       backend: str | None = None) -> dict[float, float]:
    """Opt-in joint-shift standard errors from a cluster bootstrap.

    Refits the regression on paper resamples and recomputes the total
    shift per tau each time, capturing whatever correlation the
    independence default ignores.  Returns {tau: se}.
    """
    from metaemu.regression import _paper_groups, _quantile_beta, design_matrix
    from metaemu.solver import SolverError

    dd = design_matrix(records, spec)
    groups = _paper_groups(dd.papers)
    n_papers = len(groups)
    rng = np.random.default_rng(seed)
    taus = [tau for tau, _ in observed]
    gaps = {}
    for a in alterations:
        g = (np.asarray(a.observed.probability)
             - np.asarray(a.alternative.probability))
        gaps[a] = float(g @ np.asarray(a.observed.support))
    cols = {a: spec.covariates.index(a.assumption.value) for a in alterations}
    draws = np.empty((n_boot, len(taus)))
    done = 0
    attempts = 0
    while done < n_boot:
        attempts += 1
        if attempts > 10 * n_boot:
            raise RuntimeError("exceeded joint-bootstrap attempt cap")
        chosen = rng.integers(0, n_papers, size=n_papers)
        idx = np.concatenate([groups[j] for j in chosen])
        try:
            for ti, tau in enumerate(taus):
                beta, _ = _quantile_beta(dd.X[idx], dd.y[idx], dd.w[idx],
                                         tau, spec.censor_bound, backend)
                draws[done, ti] = sum(beta[cols[a]] * gaps[a]
                                      for a in alterations)
        except SolverError:
            continue
        done += 1
    ses = np.std(draws, axis=0, ddof=1)
    return {tau: float(se) for tau, se in zip(taus, ses)}
