from pathlib import Path

import pytest

from metaemu import artifacts, emulator
from metaemu.core import EstimateRecord, ImpactKind
from metaemu.ingest import load_estimates
from metaemu.regression import DesignSpec, fit_grid

REPO_ROOT = Path(__file__).resolve().parents[1]
DEMO_CSV = str(REPO_ROOT / "src" / "metaemu" / "data" / "demo_estimates.csv")
PRESETS_DIR = REPO_ROOT / "src" / "metaemu" / "data" / "presets"


def make_record(scc=100.0, year=2015, weight=1.0, paper_id="P0", **kw):
    return EstimateRecord(scc=scc, year=year, weight=weight,
                          paper_id=paper_id, **kw)


def synthetic_records(rng, n=300, n_papers=20):
    """Linear-model records with all assumption fields present."""
    records = []
    for i in range(n):
        prtp = float(rng.choice([0.0, 0.5, 1.0, 1.5, 3.0]))
        emuc = float(rng.choice([0.5, 1.0, 1.5, 2.0]))
        impact = float(rng.normal(-1.3, 1.0))
        year = int(rng.integers(1990, 2025))
        scc = (300.0 - 66.0 * prtp - 40.0 * emuc - 15.0 * impact
               + 2.0 * (year - 2000) + float(rng.normal(0, 60)))
        records.append(EstimateRecord(
            scc=scc, year=year, weight=float(rng.choice([0.5, 1.0, 2.0])),
            paper_id=f"P{int(rng.integers(0, n_papers)):03d}",
            prtp=prtp, emuc=emuc, impact=impact,
            impact_kind=ImpactKind.LEVEL))
    return records


@pytest.fixture(scope="session")
def demo_loaded():
    return load_estimates(DEMO_CSV)


@pytest.fixture(scope="session")
def demo_records(demo_loaded):
    return demo_loaded[0]


@pytest.fixture(scope="session")
def fitted_artifact(demo_records):
    """Small fitted grid with bootstrap SEs, shared across tests."""
    spec = DesignSpec(covariates=("prtp", "emuc", "impact", "year"),
                      tau_grid=(0.25, 0.5, 0.75))
    grid = fit_grid(demo_records, spec, n_boot=100, seed=42)
    assert not grid.failures
    observed = emulator.empirical_quantiles(demo_records, spec.tau_grid)
    return artifacts.FitArtifact(covariates=spec.covariates,
                                 censor_bound=None, ci_level=0.95,
                                 fits=grid.fits, observed=tuple(observed))


@pytest.fixture()
def artifact_path(fitted_artifact, tmp_path):
    path = tmp_path / "fits.json"
    artifacts.write_fit_artifact(path, fitted_artifact)
    return path
