#!/usr/bin/env python3
"""Generate the bundled demo database and assumption presets.

The published estimates database and the survey datasets are distributed
separately; this script builds a seeded synthetic stand-in with the same
schema and qualitatively similar shapes (right-skewed SCC with mode
between $75 and $100/tC, assumption bunching on coarse grids), plus the
preset distribution files the service bundles.  The "literature" presets
are recomputed from the generated database with empirical_frequency, so
the two stay consistent by construction.

Run from the repository root:  python scripts/make_demo_data.py
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import numpy as np

ROOT = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(ROOT / "src"))

from metaemu.core import Assumption  # noqa: E402
from metaemu.ingest import (  # noqa: E402
    distribution_to_payload,
    empirical_frequency,
    load_estimates,
)

SEED = 20240501
N_PAPERS = 130

PRTP_GRID = [0.0, 0.5, 1.0, 1.5, 2.0, 3.0]
PRTP_LIT_WEIGHTS = [0.26, 0.06, 0.24, 0.20, 0.05, 0.19]  # bunching 0/1/1.5/3
EMUC_GRID = [0.0, 0.5, 1.0, 1.5, 2.0, 3.0]
EMUC_LIT_WEIGHTS = [0.02, 0.08, 0.26, 0.40, 0.16, 0.08]  # pronounced mode 1.5
IMPACT_GRID = [-10.0, -5.0, -2.5, -1.3, 0.0, 2.5]
GROWTH_GRID = [-3.0, -1.5, -0.5, -0.1, 0.0, 0.5]

# illustrative alternative views (the real survey data is public; drop the
# files onto the same supports to replace these)
SURVEY_PRESETS = {
    "prtp_drupp": (Assumption.PRTP, PRTP_GRID,
                   [0.21, 0.19, 0.24, 0.16, 0.12, 0.08],
                   "PRTP: Drupp survey (illustrative)"),
    "prtp_nesje": (Assumption.PRTP, PRTP_GRID,
                   [0.28, 0.25, 0.22, 0.13, 0.08, 0.04],
                   "PRTP: Nesje survey (illustrative)"),
    "prtp_matousek": (Assumption.PRTP, PRTP_GRID,
                      [0.35, 0.27, 0.18, 0.11, 0.06, 0.03],
                      "PRTP: Matousek meta-analysis (illustrative)"),
    "emuc_drupp": (Assumption.EMUC, EMUC_GRID,
                   [0.05, 0.15, 0.35, 0.25, 0.15, 0.05],
                   "EMUC: Drupp survey (illustrative)"),
    "emuc_nesje": (Assumption.EMUC, EMUC_GRID,
                   [0.06, 0.18, 0.38, 0.22, 0.12, 0.04],
                   "EMUC: Nesje survey (illustrative)"),
    "emuc_havranek": (Assumption.EMUC, EMUC_GRID,
                      [0.30, 0.20, 0.15, 0.13, 0.12, 0.10],
                      "EMUC: Havranek meta-analysis (illustrative)"),
    "impact_survey": (Assumption.IMPACT, IMPACT_GRID,
                      [0.08, 0.15, 0.22, 0.30, 0.15, 0.10],
                      "Impact: impact-literature survey (illustrative)"),
    "growth_impact_survey": (Assumption.GROWTH_IMPACT, GROWTH_GRID,
                             [0.10, 0.18, 0.25, 0.22, 0.15, 0.10],
                             "Growth impact: growth-literature survey "
                             "(illustrative)"),
}

LITERATURE_PRESETS = {
    "prtp_literature": (Assumption.PRTP, PRTP_GRID,
                        "PRTP: literature frequencies (demo database)"),
    "emuc_literature": (Assumption.EMUC, EMUC_GRID,
                        "EMUC: literature frequencies (demo database)"),
    "impact_literature": (Assumption.IMPACT, IMPACT_GRID,
                          "Impact: literature frequencies (demo database)"),
    "growth_impact_literature": (
        Assumption.GROWTH_IMPACT, GROWTH_GRID,
        "Growth impact: literature frequencies (demo database)"),
}

B_PRTP = -66.0
B_EMUC = -45.0
B_IMPACT = -18.0
B_YEAR = 3.0


def simulate_rows(rng: np.random.Generator) -> list[dict]:
    rows = []
    for paper in range(N_PAPERS):
        paper_id = f"P{paper:03d}"
        n_est = int(rng.integers(4, 28))
        year = int(np.clip(rng.normal(2012, 9), 1985, 2024))
        quality = float(rng.choice([0.5, 1.0, 1.0, 2.0, 3.0]))
        kind = rng.choice(["level", "growth", "unspecified"],
                          p=[0.72, 0.06, 0.22])
        paper_prtp = rng.choice(PRTP_GRID, p=PRTP_LIT_WEIGHTS)
        paper_emuc = rng.choice(EMUC_GRID, p=EMUC_LIT_WEIGHTS)
        for _ in range(n_est):
            prtp = float(paper_prtp if rng.random() < 0.7
                         else rng.choice(PRTP_GRID, p=PRTP_LIT_WEIGHTS))
            emuc = float(paper_emuc if rng.random() < 0.7
                         else rng.choice(EMUC_GRID, p=EMUC_LIT_WEIGHTS))
            prtp = float(np.clip(prtp + rng.normal(0, 0.05), 0, None))
            emuc = float(np.clip(emuc + rng.normal(0, 0.05), 0, None))
            impact = growth = None
            if kind == "level":
                impact = float(np.clip(rng.normal(-1.3, 1.0), -9.5, 2.4))
            elif kind == "growth":
                growth = float(np.clip(rng.normal(-0.3, 0.6), -2.9, 0.45))
            level = (420.0 + B_PRTP * prtp + B_EMUC * emuc
                     + B_YEAR * (year - 2000)
                     + (B_IMPACT * impact if impact is not None else 0.0)
                     + (-250.0 * growth if growth is not None else 0.0))
            level = max(level, 40.0)
            # multiplicative right-skewed spread: mean 1, mode exp(-1.5 s^2)
            sigma = 0.9
            scc = level * rng.lognormal(-0.5 * sigma**2, sigma)
            if rng.random() < 0.012:  # the rare "emissions are a benefit" rows
                scc = -0.15 * scc
            weight = quality * float(rng.choice([0.5, 1.0, 1.0, 2.0]))
            if rng.random() < 0.02:  # implausible estimates: disregarded
                weight = 0.0
            row = {
                "scc": round(scc, 2),
                "year": year,
                "prtp": round(prtp, 2) if rng.random() > 0.06 else None,
                "emuc": round(emuc, 2) if rng.random() > 0.10 else None,
                "impact": None if impact is None else round(impact, 2),
                "growth_impact": None if growth is None else round(growth, 2),
                "impact_kind": kind,
                "weight": weight,
                "paper_id": paper_id,
            }
            if kind == "growth" and row["growth_impact"] is None:
                row["growth_impact"] = round(growth, 2)
            rows.append(row)
    return rows


def write_csv(path: Path, rows: list[dict]) -> None:
    cols = ["scc", "year", "prtp", "emuc", "impact", "growth_impact",
            "impact_kind", "weight", "paper_id"]
    lines = [",".join(cols)]
    for row in rows:
        lines.append(",".join(
            "" if row[c] is None else str(row[c]) for c in cols))
    path.write_text("\n".join(lines) + "\n")


def main() -> None:
    rng = np.random.default_rng(SEED)
    rows = simulate_rows(rng)
    data_dir = ROOT / "src" / "metaemu" / "data"
    presets_dir = data_dir / "presets"
    presets_dir.mkdir(parents=True, exist_ok=True)
    csv_path = data_dir / "demo_estimates.csv"
    write_csv(csv_path, rows)

    records, summary = load_estimates(csv_path)
    print(f"demo database: {summary.n_records} records, "
          f"{summary.n_papers} papers")

    usable = [r for r in records if r.usable]
    values = np.array([r.scc for r in usable])
    weights = np.array([r.weight for r in usable])
    edges = np.arange(np.floor(values.min() / 25) * 25,
                      values.max() + 25, 25)
    hist, _ = np.histogram(values, bins=edges, weights=weights)
    mode_bin = edges[int(np.argmax(hist))]
    mean = float(weights @ values / weights.sum())
    print(f"scc histogram mode bin: [{mode_bin}, {mode_bin + 25}), "
          f"weighted mean: {mean:.1f}, share negative: "
          f"{float(weights[values < 0].sum() / weights.sum()):.3f}")

    for stem, (assumption, grid, label) in LITERATURE_PRESETS.items():
        dist = empirical_frequency(records, assumption, grid, label=label)
        (presets_dir / f"{stem}.json").write_text(
            json.dumps(distribution_to_payload(dist), indent=2) + "\n")
    for stem, (assumption, grid, probs, label) in SURVEY_PRESETS.items():
        payload = {"assumption": assumption.value, "label": label,
                   "support": grid, "probability": probs}
        (presets_dir / f"{stem}.json").write_text(
            json.dumps(payload, indent=2) + "\n")
    print(f"wrote {len(LITERATURE_PRESETS) + len(SURVEY_PRESETS)} presets")


if __name__ == "__main__":
    main()
