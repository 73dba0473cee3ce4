"""Shared domain types for estimates, distributions, fits, and emulation output.

Every type here is immutable after construction and safe to share across
concurrent readers.  Units follow the estimates database convention: social
cost of carbon in 2024 USD per metric tonne of carbon, for 2025 emissions;
assumption units are percent per year (prtp), dimensionless (emuc), percent
of GDP at 2.5 degrees warming (impact, negative = damage) and percentage
points of growth per degree (growth_impact).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Mapping, Sequence

YEAR_MIN = 1980
YEAR_MAX = 2035

# z for the default 95% confidence level, pinned so default output is
# byte-stable regardless of the installed scipy.
Z_95 = 1.959964

# tolerance on sum(probability) at construction time
PROB_SUM_TOL = 1e-9

MEAN_TAU = "mean"


class Assumption(str, Enum):
    """Assumptions whose distribution the emulator can alter."""

    PRTP = "prtp"
    EMUC = "emuc"
    IMPACT = "impact"
    GROWTH_IMPACT = "growth_impact"


class ImpactKind(str, Enum):
    """How an estimate models the economic impact of warming."""

    LEVEL = "level"
    GROWTH = "growth"
    UNSPECIFIED = "unspecified"


class RecordValidationError(ValueError):
    """Raised with the complete list of violations for one record."""

    def __init__(self, errors: Sequence[str]):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


def z_value(ci_level: float) -> float:
    """Two-sided normal critical value for a confidence level in (0, 1)."""
    if not 0.0 < ci_level < 1.0:
        raise ValueError(f"ci_level must be in (0, 1), got {ci_level}")
    if abs(ci_level - 0.95) < 1e-12:
        return Z_95
    from scipy.stats import norm

    return float(norm.ppf(0.5 * (1.0 + ci_level)))


def _finite(x: float) -> bool:
    return isinstance(x, (int, float)) and math.isfinite(x)


def _record_violations(scc, year, weight, prtp, emuc, impact, growth_impact,
                       impact_kind) -> list[str]:
    errors = []
    if not _finite(scc):
        errors.append("scc must be a finite number")
    if not isinstance(year, int):
        errors.append("year must be an integer")
    elif not YEAR_MIN <= year <= YEAR_MAX:
        errors.append(f"year out of range [{YEAR_MIN}, {YEAR_MAX}]: {year}")
    if not _finite(weight):
        errors.append("weight must be a finite number")
    elif weight < 0:
        errors.append(f"weight >= 0 violated: {weight}")
    for name, value in (("prtp", prtp), ("emuc", emuc), ("impact", impact),
                        ("growth_impact", growth_impact)):
        if value is not None and not _finite(value):
            errors.append(f"{name} must be a finite number if present")
    if impact_kind is ImpactKind.GROWTH and growth_impact is None:
        errors.append("impact_kind = growth requires growth_impact present")
    return errors


@dataclass(frozen=True)
class EstimateRecord:
    """One published SCC estimate with its assumptions and quality weight.

    A weight of zero means the estimate is disregarded: it is kept in
    memory but excluded from every fit and summary statistic.  scc may be
    negative (about 1% of published estimates point to a benefit).
    """

    scc: float
    year: int
    weight: float
    paper_id: str = ""
    prtp: float | None = None
    emuc: float | None = None
    impact: float | None = None
    growth_impact: float | None = None
    impact_kind: ImpactKind = ImpactKind.UNSPECIFIED

    def __post_init__(self):
        errors = _record_violations(self.scc, self.year, self.weight,
                                    self.prtp, self.emuc, self.impact,
                                    self.growth_impact, self.impact_kind)
        if errors:
            raise RecordValidationError(errors)

    @property
    def usable(self) -> bool:
        """True when the record participates in fits (positive weight)."""
        return self.weight > 0

    def assumption_value(self, assumption: Assumption) -> float | None:
        return getattr(self, assumption.value)


def _parse_float(raw, name, errors, required=False):
    if raw is None or (isinstance(raw, str) and raw.strip() == ""):
        if required:
            errors.append(f"missing required field: {name}")
        return None
    try:
        return float(raw)
    except (TypeError, ValueError):
        errors.append(f"{name} is not a number: {raw!r}")
        return None


def _parse_year(raw, errors):
    if raw is None or (isinstance(raw, str) and raw.strip() == ""):
        errors.append("missing required field: year")
        return None
    try:
        as_float = float(raw)
    except (TypeError, ValueError):
        errors.append(f"year is not a number: {raw!r}")
        return None
    if as_float != int(as_float):
        errors.append(f"year must be an integer: {raw!r}")
        return None
    return int(as_float)


def validate_record(raw: Mapping[str, object]) -> EstimateRecord:
    """Build a typed record from raw ingestion fields.

    Collects the complete list of violations rather than stopping at the
    first, and raises :class:`RecordValidationError` carrying all of them.
    Empty strings count as missing values.
    """
    errors: list[str] = []
    scc = _parse_float(raw.get("scc"), "scc", errors, required=True)
    year = _parse_year(raw.get("year"), errors)
    weight = _parse_float(raw.get("weight"), "weight", errors, required=True)
    prtp = _parse_float(raw.get("prtp"), "prtp", errors)
    emuc = _parse_float(raw.get("emuc"), "emuc", errors)
    impact = _parse_float(raw.get("impact"), "impact", errors)
    growth_impact = _parse_float(raw.get("growth_impact"), "growth_impact",
                                 errors)

    kind_raw = raw.get("impact_kind")
    if kind_raw is None or (isinstance(kind_raw, str) and kind_raw.strip() == ""):
        impact_kind = ImpactKind.UNSPECIFIED
    else:
        try:
            impact_kind = ImpactKind(str(kind_raw).strip().lower())
        except ValueError:
            errors.append(f"unknown impact_kind: {kind_raw!r}")
            impact_kind = ImpactKind.UNSPECIFIED

    paper_id = str(raw.get("paper_id") or "")

    # semantic checks on whatever parsed, so one pass reports everything
    if year is not None and not YEAR_MIN <= year <= YEAR_MAX:
        errors.append(f"year out of range [{YEAR_MIN}, {YEAR_MAX}]: {year}")
    if weight is not None and weight < 0:
        errors.append(f"weight >= 0 violated: {weight}")
    if (impact_kind is ImpactKind.GROWTH and growth_impact is None
            and not any("growth_impact" in e for e in errors)):
        errors.append("impact_kind = growth requires growth_impact present")
    if errors:
        raise RecordValidationError(errors)
    return EstimateRecord(scc=scc, year=year, weight=weight, paper_id=paper_id,
                          prtp=prtp, emuc=emuc, impact=impact,
                          growth_impact=growth_impact, impact_kind=impact_kind)


@dataclass(frozen=True)
class AssumptionDistribution:
    """Discrete probability distribution over support values of one assumption.

    Both the literature's observed frequencies and any alternative view
    (expert survey, meta-analysis) are instances of this one type.
    """

    assumption: Assumption
    support: tuple[float, ...]
    probability: tuple[float, ...]
    label: str = ""

    def __post_init__(self):
        object.__setattr__(self, "assumption", Assumption(self.assumption))
        object.__setattr__(self, "support", tuple(float(s) for s in self.support))
        object.__setattr__(self, "probability",
                           tuple(float(p) for p in self.probability))
        if len(self.support) == 0:
            raise ValueError("support must be non-empty")
        if len(self.support) != len(self.probability):
            raise ValueError("support and probability must have equal length")
        for a, b in zip(self.support, self.support[1:]):
            if not a < b:
                raise ValueError(
                    f"support values must be strictly increasing: {a} !< {b}")
        for p in self.probability:
            if not math.isfinite(p) or p < 0:
                raise ValueError(f"negative probability: {p}")
        total = math.fsum(self.probability)
        if abs(total - 1.0) > PROB_SUM_TOL:
            raise ValueError(
                f"probabilities do not sum to 1 (got {total!r})")

    @classmethod
    def normalized(cls, assumption, support, probability, label="",
                   tol: float = 1e-6) -> "AssumptionDistribution":
        """Construct after rescaling, provided the raw sum is within tol of 1.

        Sums already inside the construction tolerance are used untouched,
        so writing and re-reading a distribution is bit-exact.
        """
        probability = [float(p) for p in probability]
        for p in probability:
            if not math.isfinite(p) or p < 0:
                raise ValueError(f"negative probability: {p}")
        total = math.fsum(probability)
        if abs(total - 1.0) > tol:
            raise ValueError(
                f"probabilities do not sum to 1 (got {total!r}, tolerance {tol})")
        if abs(total - 1.0) > PROB_SUM_TOL:
            probability = [p / total for p in probability]
        return cls(assumption=assumption, support=tuple(support),
                   probability=tuple(probability), label=label)


@dataclass(frozen=True)
class QuantileFit:
    """Coefficients and standard errors for one percentile (or the mean).

    ``tau`` is a percentile strictly inside (0, 1), or the sentinel
    ``"mean"`` for the weighted-least-squares column.  ``beta`` and ``se``
    hold one entry per covariate plus the intercept, intercept last.
    ``se`` is None until standard errors are attached (bootstrap for
    quantile fits, analytic for the mean fit).
    """

    tau: float | str
    covariates: tuple[str, ...]
    beta: tuple[float, ...]
    se: tuple[float, ...] | None
    n_obs: int
    loss: float
    r_squared: float | None = None
    n_dropped: int = 0

    def __post_init__(self):
        object.__setattr__(self, "covariates", tuple(self.covariates))
        object.__setattr__(self, "beta", tuple(float(b) for b in self.beta))
        if isinstance(self.tau, str):
            if self.tau != MEAN_TAU:
                raise ValueError(f"tau must be in (0,1) or 'mean', got {self.tau!r}")
        elif not 0.0 < self.tau < 1.0:
            raise ValueError(f"tau must be strictly inside (0, 1), got {self.tau}")
        if len(self.beta) != len(self.covariates) + 1:
            raise ValueError("beta must have one entry per covariate plus intercept")
        if self.se is not None:
            se = tuple(float(s) for s in self.se)
            object.__setattr__(self, "se", se)
            if len(se) != len(self.beta):
                raise ValueError("se must match beta length")
            for s in se:
                if s < 0 or not math.isfinite(s):
                    raise ValueError(f"standard errors must be non-negative: {s}")

    @property
    def is_mean(self) -> bool:
        return self.tau == MEAN_TAU

    def coefficient(self, name: str) -> float:
        """Coefficient for a covariate by name; "intercept" is accepted."""
        if name == "intercept":
            return self.beta[-1]
        try:
            return self.beta[self.covariates.index(name)]
        except ValueError:
            raise KeyError(f"fit has no coefficient for {name!r}; "
                           f"covariates: {list(self.covariates)}") from None

    def stderr(self, name: str) -> float:
        if self.se is None:
            raise ValueError("fit has no standard errors attached")
        if name == "intercept":
            return self.se[-1]
        try:
            return self.se[self.covariates.index(name)]
        except ValueError:
            raise KeyError(f"fit has no coefficient for {name!r}") from None


@dataclass(frozen=True)
class EmulationResult:
    """Per-percentile observed quantile, emulated quantile, shift, and CI.

    The shift is the regression's prediction under the literature's
    observed assumption frequencies minus its prediction under the
    alternative view, so scc_emulated = scc_observed + shift.  Direction:
    a NEGATIVE shift means the alternative view implies a higher social
    cost of carbon, i.e. the literature underestimates it under that view.
    """

    tau: float
    scc_observed: float
    scc_emulated: float
    shift: float
    se: float
    ci_low: float
    ci_high: float
    ci_level: float = 0.95

    def __post_init__(self):
        if self.scc_emulated != self.scc_observed + self.shift:
            raise ValueError("scc_emulated must equal scc_observed + shift")
        if not self.ci_low <= self.shift <= self.ci_high:
            raise ValueError("confidence interval must contain the shift")
        if self.se < 0:
            raise ValueError("se must be non-negative")

    @classmethod
    def from_shift(cls, tau, scc_observed, shift, se, ci_level=0.95,
                   z: float | None = None) -> "EmulationResult":
        if z is None:
            z = z_value(ci_level)
        return cls(tau=float(tau), scc_observed=float(scc_observed),
                   scc_emulated=float(scc_observed) + float(shift),
                   shift=float(shift), se=float(se),
                   ci_low=float(shift) - z * float(se),
                   ci_high=float(shift) + z * float(se),
                   ci_level=float(ci_level))


@dataclass(frozen=True)
class BiasSummary:
    """Precision-weighted combination of several bias estimates at one tau.

    Precision pooling never widens: sigma_combined cannot exceed the
    narrowest input sigma, and a single input passes through unchanged.
    """

    tau: float
    mu_combined: float
    sigma_combined: float
    inputs: tuple[tuple[str, float, float], ...] = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(
            self, "inputs",
            tuple((str(l), float(m), float(s)) for l, m, s in self.inputs))
        if self.inputs:
            narrowest = min(s for _, _, s in self.inputs)
            if self.sigma_combined > narrowest * (1.0 + 1e-12):
                raise ValueError(
                    f"sigma_combined {self.sigma_combined} exceeds the "
                    f"narrowest input sigma {narrowest}")
            if len(self.inputs) == 1:
                _, mu, sigma = self.inputs[0]
                if self.mu_combined != mu or self.sigma_combined != sigma:
                    raise ValueError(
                        "a single input must pass through unchanged")
