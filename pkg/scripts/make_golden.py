#!/usr/bin/env python3
"""Capture golden service payloads for the web UI test suite.

Fits the bundled demo database on the default 19-tau grid (with bootstrap
standard errors), then records real responses from the HTTP service into
frontend/tests/fixtures/.  The UI tests replay these instead of spinning
up a live server, so the DOM-vs-payload traceability checks run against
genuine service output.

Run from the repository root:  python scripts/make_golden.py
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(ROOT / "src"))

from fastapi.testclient import TestClient  # noqa: E402

from metaemu import artifacts, emulator  # noqa: E402
from metaemu.ingest import load_estimates  # noqa: E402
from metaemu.regression import DesignSpec, fit_grid  # noqa: E402
from metaemu.service import create_app  # noqa: E402

FIXTURES = ROOT / "frontend" / "tests" / "fixtures"
SEED = 20240615


def main() -> None:
    FIXTURES.mkdir(parents=True, exist_ok=True)
    records, _ = load_estimates(ROOT / "src/metaemu/data/demo_estimates.csv")
    spec = DesignSpec(covariates=("prtp", "emuc", "impact", "year"))
    grid = fit_grid(records, spec, n_boot=200, seed=SEED)
    assert not grid.failures, grid.failures
    observed = emulator.empirical_quantiles(records, spec.tau_grid)
    artifact = artifacts.FitArtifact(covariates=spec.covariates,
                                     censor_bound=None, ci_level=0.95,
                                     fits=grid.fits,
                                     observed=tuple(observed))
    model_path = FIXTURES / "fits.json"
    artifacts.write_fit_artifact(model_path, artifact)

    client = TestClient(create_app(model_path=model_path))

    def save(name, response):
        (FIXTURES / name).write_text(
            json.dumps(response.json(), indent=2) + "\n")
        print(f"{name}: {response.status_code}")

    presets = client.get("/presets")
    save("presets.json", presets)
    save("model.json", client.get("/model"))

    by_label = {p["label"]: p for p in presets.json()["presets"]}
    lit = by_label["PRTP: literature frequencies (demo database)"]
    drupp = by_label["PRTP: Drupp survey (illustrative)"]
    nesje = by_label["PRTP: Nesje survey (illustrative)"]

    save("emulate_zero.json", client.post("/emulate", json={
        "alterations": [{"assumption": "prtp", "F": lit, "P": lit}]}))
    drupp_resp = client.post("/emulate", json={
        "alterations": [{"assumption": "prtp", "F": lit, "P": drupp}]})
    save("emulate_drupp.json", drupp_resp)
    nesje_resp = client.post("/emulate", json={
        "alterations": [{"assumption": "prtp", "F": lit, "P": nesje}]})
    save("emulate_nesje.json", nesje_resp)

    save("combine_drupp_nesje.json", client.post("/combine", json={
        "inputs": [
            {"label": "Drupp", "results": drupp_resp.json()["results"]},
            {"label": "Nesje", "results": nesje_resp.json()["results"]},
        ]}))

    bad = dict(drupp)
    bad["support"] = [s + 0.25 for s in bad["support"]]
    save("error_mismatch.json", client.post("/emulate", json={
        "alterations": [{"assumption": "prtp", "F": lit, "P": bad}]}))


if __name__ == "__main__":
    main()
