"""Load, validate, and summarize estimates and assumption-distribution files.

Estimates arrive as comma-delimited text with a header row of exact
lowercase names (scc, year, prtp, emuc, impact, growth_impact,
impact_kind, weight, paper_id); empty fields are missing values.  Extra
columns are ignored, since the published database carries many more
fields than the handful used here.  Distribution files are either
two-column delimited text (support, probability) or a JSON object
{assumption, label, support, probability}.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from metaemu.core import (
    Assumption,
    AssumptionDistribution,
    EstimateRecord,
    RecordValidationError,
    validate_record,
)
from metaemu.weighted import weighted_quantile_grid

MANDATORY_COLUMNS = ("scc", "year", "weight")
RECORD_COLUMNS = ("scc", "year", "prtp", "emuc", "impact", "growth_impact",
                  "impact_kind", "weight", "paper_id")

SUMMARY_TAU_GRID = tuple(i / 20 for i in range(1, 20))


class EstimatesLoadError(ValueError):
    """File-level failure while loading the estimates database."""


class RowErrors(EstimatesLoadError):
    """All per-row validation failures, with 1-based data row numbers."""

    def __init__(self, rows: Sequence[tuple[int, list[str]]]):
        self.rows = list(rows)
        lines = [f"row {n}: {'; '.join(errs)}" for n, errs in self.rows]
        super().__init__(f"{len(self.rows)} invalid rows:\n" + "\n".join(lines))


@dataclass(frozen=True)
class DatasetSummary:
    """Weighted overview of a loaded estimates file."""

    n_records: int
    n_papers: int
    scc_quantiles: tuple[tuple[float, float], ...]
    coverage: tuple[tuple[str, int], ...]

    def coverage_for(self, name: str) -> int:
        return dict(self.coverage)[name]


def summarize(records: Sequence[EstimateRecord]) -> DatasetSummary:
    """Weighted summary; zero-weight records count toward totals only."""
    n_records = len(records)
    n_papers = len({r.paper_id for r in records})
    usable = [r for r in records if r.usable]
    if usable:
        qs = weighted_quantile_grid([r.scc for r in usable],
                                    [r.weight for r in usable],
                                    SUMMARY_TAU_GRID)
        quantiles = tuple((float(t), float(q))
                          for t, q in zip(SUMMARY_TAU_GRID, qs))
    else:
        quantiles = ()
    coverage = tuple(
        (a.value, sum(1 for r in usable
                      if r.assumption_value(a) is not None))
        for a in Assumption)
    return DatasetSummary(n_records=n_records, n_papers=n_papers,
                          scc_quantiles=quantiles, coverage=coverage)


def load_estimates(path) -> tuple[list[EstimateRecord], DatasetSummary]:
    """Read and validate an estimates CSV.

    Zero-weight rows are retained (they are "disregarded", not deleted);
    every fit downstream excludes them.  Any invalid row fails the whole
    load, with all row numbers and violations reported together.
    """
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise EstimatesLoadError(f"{path}: empty file, header row required")
        missing = [c for c in MANDATORY_COLUMNS if c not in reader.fieldnames]
        if missing:
            raise EstimatesLoadError(
                f"{path}: missing mandatory column(s): {', '.join(missing)}")
        records: list[EstimateRecord] = []
        errors: list[tuple[int, list[str]]] = []
        for n, row in enumerate(reader, start=1):
            try:
                records.append(validate_record(row))
            except RecordValidationError as exc:
                errors.append((n, exc.errors))
    if errors:
        raise RowErrors(errors)
    return records, summarize(records)


def write_estimates(path, records: Iterable[EstimateRecord]) -> None:
    """Write records in the same schema load_estimates reads (round-trips)."""
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(RECORD_COLUMNS)
        for r in records:
            writer.writerow([
                repr(r.scc), r.year,
                "" if r.prtp is None else repr(r.prtp),
                "" if r.emuc is None else repr(r.emuc),
                "" if r.impact is None else repr(r.impact),
                "" if r.growth_impact is None else repr(r.growth_impact),
                r.impact_kind.value, repr(r.weight), r.paper_id,
            ])


def load_distribution(path, assumption: Assumption | str | None = None,
                      label: str | None = None) -> AssumptionDistribution:
    """Read a distribution file (two-column CSV or JSON object).

    Probabilities are decimals; they are rescaled to sum to one when the
    raw sum is within 1e-6 of one, and rejected otherwise.  For CSV files
    the assumption must be supplied by the caller; JSON files carry it.
    """
    path = Path(path)
    text = path.read_text()
    if path.suffix.lower() == ".json" or text.lstrip().startswith("{"):
        payload = json.loads(text)
        return distribution_from_payload(payload, assumption=assumption,
                                         label=label)
    rows = list(csv.reader(text.splitlines()))
    if not rows:
        raise ValueError(f"{path}: empty distribution file")
    header = [c.strip().lower() for c in rows[0]]
    if header[:2] != ["support", "probability"]:
        raise ValueError(f"{path}: expected header 'support,probability', "
                         f"got {rows[0]!r}")
    if assumption is None:
        raise ValueError(f"{path}: two-column files need an explicit "
                         "assumption (prtp, emuc, impact, growth_impact)")
    support, probability = [], []
    for row in rows[1:]:
        if not row or all(not c.strip() for c in row):
            continue
        support.append(float(row[0]))
        probability.append(float(row[1]))
    return _build_distribution(assumption, support, probability,
                               label if label is not None else path.stem)


def distribution_from_payload(payload: Mapping,
                              assumption=None, label=None
                              ) -> AssumptionDistribution:
    """Build a distribution from a parsed JSON object."""
    assumption = payload.get("assumption", assumption)
    if assumption is None:
        raise ValueError("distribution payload lacks an assumption")
    label = label if label is not None else payload.get("label", "")
    return _build_distribution(assumption, payload.get("support", ()),
                               payload.get("probability", ()), label)


def distribution_to_payload(dist: AssumptionDistribution) -> dict:
    return {"assumption": dist.assumption.value, "label": dist.label,
            "support": list(dist.support),
            "probability": list(dist.probability)}


def _build_distribution(assumption, support, probability, label):
    support = [float(s) for s in support]
    probability = [float(p) for p in probability]
    if not support or len(support) != len(probability):
        raise ValueError("support and probability must be non-empty "
                         "and equally long")
    for a, b in zip(support, support[1:]):
        if not a < b:
            raise ValueError(f"support values must be strictly increasing "
                             f"({a} followed by {b})")
    return AssumptionDistribution.normalized(
        Assumption(assumption), support, probability, label=label)


def write_distribution(path, dist: AssumptionDistribution) -> None:
    path = Path(path)
    if path.suffix.lower() == ".json":
        path.write_text(json.dumps(distribution_to_payload(dist), indent=2)
                        + "\n")
        return
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["support", "probability"])
        for s, p in zip(dist.support, dist.probability):
            writer.writerow([repr(s), repr(p)])


def coarsen(samples: Iterable[tuple[float, float]], bin_edges,
            assumption: Assumption | str, label: str = "",
            clip: bool = False) -> AssumptionDistribution:
    """Bin weighted samples onto midpoints of the given edges.

    Bins are right-closed except the first: [e0, e1], (e1, e2], ...
    Samples outside [first, last] edge are an error unless ``clip`` moves
    them to the nearest edge.
    """
    edges = np.asarray([float(e) for e in bin_edges])
    if edges.size < 2 or np.any(np.diff(edges) <= 0):
        raise ValueError("bin_edges must be at least 2 strictly increasing values")
    samples = list(samples)
    if not samples:
        raise ValueError("empty sample list")
    values = np.asarray([float(v) for v, _ in samples])
    weights = np.asarray([float(w) for _, w in samples])
    if np.any(weights < 0):
        raise ValueError("sample weights must be non-negative")
    if not weights.sum() > 0:
        raise ValueError("all sample weights are zero")
    if clip:
        values = np.clip(values, edges[0], edges[-1])
    elif np.any((values < edges[0]) | (values > edges[-1])):
        off = values[(values < edges[0]) | (values > edges[-1])][0]
        raise ValueError(f"sample {off} outside [{edges[0]}, {edges[-1]}] "
                         "(enable clip to clamp)")
    bins = np.maximum(np.searchsorted(edges, values, side="left") - 1, 0)
    mass = np.bincount(bins, weights=weights, minlength=edges.size - 1)
    mass = mass / mass.sum()
    mids = (edges[:-1] + edges[1:]) / 2.0
    return AssumptionDistribution(assumption=Assumption(assumption),
                                  support=tuple(mids),
                                  probability=tuple(mass), label=label)


def snap_to_support(value: float, support: Sequence[float]) -> float:
    """Nearest support point; exact midpoints go to the lower point."""
    support = list(support)
    idx = int(np.searchsorted(support, value, side="left"))
    if idx == 0:
        return support[0]
    if idx == len(support):
        return support[-1]
    lo, hi = support[idx - 1], support[idx]
    return lo if value - lo <= hi - value else hi


def empirical_frequency(records: Sequence[EstimateRecord],
                        assumption: Assumption | str,
                        support: Sequence[float],
                        label: str = "literature") -> AssumptionDistribution:
    """Observed weighted frequency of an assumption on a discrete support.

    Each record's value snaps to the nearest support point (ties to the
    lower point); probabilities are normalized record weights, so they
    are invariant to uniform weight rescaling.
    """
    assumption = Assumption(assumption)
    support = [float(s) for s in support]
    if not support:
        raise ValueError("support must be non-empty")
    for a, b in zip(support, support[1:]):
        if not a < b:
            raise ValueError("support values must be strictly increasing")
    mass = {s: 0.0 for s in support}
    total = 0.0
    for rec in records:
        if not rec.usable:
            continue
        value = rec.assumption_value(assumption)
        if value is None:
            continue
        mass[snap_to_support(value, support)] += rec.weight
        total += rec.weight
    if total <= 0:
        raise ValueError(f"no usable records carry {assumption.value!r}")
    return AssumptionDistribution(
        assumption=assumption, support=tuple(support),
        probability=tuple(mass[s] / total for s in support), label=label)
