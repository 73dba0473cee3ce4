"""HTTP facade over a pre-fitted model.

Fitting happens offline (CLI); the service loads a fit artifact at
startup and serves emulations from it, so requests are pure functions of
(loaded model, body).  The model swap on reload is a single attribute
assignment, atomic under the GIL; presets and artifacts are immutable.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from fastapi import FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware
from pydantic import BaseModel

from metaemu import emulator
from metaemu.artifacts import (
    FitArtifact,
    artifact_to_dict,
    bias_summary_to_dict,
    emulation_result_from_dict,
    emulation_result_to_dict,
    read_fit_artifact,
)
from metaemu.core import Assumption, AssumptionDistribution
from metaemu.ingest import distribution_from_payload, distribution_to_payload

SERVICE_SCHEMA = "metaemu.service/1"


class DistributionPayload(BaseModel):
    assumption: Assumption
    support: list[float]
    probability: list[float]
    label: str = ""


class AlterationPayload(BaseModel):
    assumption: Assumption
    F: DistributionPayload  # frequencies observed in the literature
    P: DistributionPayload  # the alternative view


class EmulateRequest(BaseModel):
    alterations: list[AlterationPayload]
    ci_level: float = 0.95


class ResultPayload(BaseModel):
    tau: float
    scc_observed: float
    scc_emulated: float
    shift: float
    se: float
    ci_low: float
    ci_high: float
    ci_level: float = 0.95


class CombineSource(BaseModel):
    label: str
    results: list[ResultPayload]


class CombineRequest(BaseModel):
    inputs: list[CombineSource]


@dataclass(frozen=True)
class ServiceModel:
    artifact: FitArtifact


def load_presets(directory=None) -> tuple[AssumptionDistribution, ...]:
    """Bundled assumption distributions, in filename order."""
    if directory is None:
        root = resources.files("metaemu") / "data" / "presets"
        names = sorted(p.name for p in root.iterdir()
                       if p.name.endswith(".json"))
        payloads = [(root / n).read_text() for n in names]
    else:
        paths = sorted(Path(directory).glob("*.json"))
        payloads = [p.read_text() for p in paths]
    import json

    return tuple(distribution_from_payload(json.loads(text))
                 for text in payloads)


def _field_error(field: str, message: str) -> HTTPException:
    return HTTPException(status_code=400,
                         detail={"errors": [{"field": field,
                                             "message": message}]})


def _build_alteration(i: int, payload: AlterationPayload) -> emulator.Alteration:
    dists = {}
    for side in ("F", "P"):
        dp: DistributionPayload = getattr(payload, side)
        try:
            dists[side] = distribution_from_payload({
                "assumption": payload.assumption.value,
                "support": dp.support,
                "probability": dp.probability,
                "label": dp.label,
            })
        except ValueError as exc:
            raise _field_error(f"alterations[{i}].{side}", str(exc)) from None
    try:
        return emulator.Alteration(assumption=payload.assumption,
                                   observed=dists["F"],
                                   alternative=dists["P"])
    except emulator.SupportMismatchError as exc:
        raise _field_error(f"alterations[{i}]", str(exc)) from None
    except ValueError as exc:
        raise _field_error(f"alterations[{i}]", str(exc)) from None


def create_app(model_path=None, presets_dir=None,
               cors_origins=("*",)) -> FastAPI:
    app = FastAPI(title="SCC meta-emulator",
                  description="Emulate the social-cost-of-carbon "
                              "distribution under alternative assumptions.")
    app.add_middleware(CORSMiddleware, allow_origins=list(cors_origins),
                       allow_methods=["*"], allow_headers=["*"])
    app.state.model = None
    app.state.presets = load_presets(presets_dir)
    if model_path is not None:
        load_model(app, model_path)

    def _model() -> ServiceModel:
        model = app.state.model
        if model is None:
            raise HTTPException(status_code=503, detail="model not loaded")
        return model

    @app.get("/health")
    def health():
        _model()
        return {"status": "ok"}

    @app.get("/model")
    def model_info():
        model = _model()
        payload = artifact_to_dict(model.artifact)
        payload["schema"] = SERVICE_SCHEMA
        payload["n_fits"] = len(model.artifact.fits)
        return payload

    @app.get("/presets")
    def presets():
        return {"schema": SERVICE_SCHEMA,
                "presets": [distribution_to_payload(d)
                            for d in app.state.presets]}

    @app.post("/emulate")
    def emulate(req: EmulateRequest):
        model = _model()
        alterations = [_build_alteration(i, a)
                       for i, a in enumerate(req.alterations)]
        caught: list[str] = []
        with warnings.catch_warnings(record=True) as wlist:
            warnings.simplefilter("always")
            try:
                results = emulator.emulate_cdf(
                    model.artifact.quantile_fits(),
                    model.artifact.observed, alterations,
                    ci_level=req.ci_level)
            except emulator.MissingCoefficientError as exc:
                raise _field_error("alterations", str(exc)) from None
            except ValueError as exc:
                raise _field_error("ci_level", str(exc)) from None
            caught = [str(w.message) for w in wlist]
        return {"schema": SERVICE_SCHEMA,
                "results": [emulation_result_to_dict(r) for r in results],
                "warnings": caught}

    @app.post("/combine")
    def combine(req: CombineRequest):
        sources = []
        for src in req.inputs:
            sources.append((src.label,
                            [emulation_result_from_dict(r.model_dump())
                             for r in src.results]))
        try:
            summaries = emulator.combine_grids(sources)
        except ValueError as exc:
            raise _field_error("inputs", str(exc)) from None
        return {"schema": SERVICE_SCHEMA,
                "results": [bias_summary_to_dict(s) for s in summaries]}

    return app


def load_model(app: FastAPI, path) -> None:
    """Read a fit artifact and swap it in atomically."""
    artifact = read_fit_artifact(path)
    app.state.model = ServiceModel(artifact=artifact)
