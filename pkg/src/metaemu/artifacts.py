"""Fit artifacts and result tables.

A fit artifact is a versioned JSON file holding the fitted grid plus the
observed weighted quantiles it was computed from; the service loads it at
startup and the emulate command reuses it.  Emulation and combination
results are flat CSV tables; floats are written with repr so parsing them
back is exact.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from metaemu.core import MEAN_TAU, BiasSummary, EmulationResult, QuantileFit

FIT_SCHEMA = "metaemu.fits/1"
EMULATION_COLUMNS = ("tau", "scc_observed", "scc_emulated", "shift", "se",
                     "ci_low", "ci_high")
COMBINE_COLUMNS = ("tau", "mu_combined", "sigma_combined")


@dataclass(frozen=True)
class FitArtifact:
    """A fitted grid, its observed quantiles, and how it was configured."""

    covariates: tuple[str, ...]
    censor_bound: float | None
    ci_level: float
    fits: tuple[QuantileFit, ...]
    observed: tuple[tuple[float, float], ...]

    def quantile_fits(self) -> list[QuantileFit]:
        return [f for f in self.fits if not f.is_mean]

    def mean_fit(self) -> QuantileFit | None:
        for f in self.fits:
            if f.is_mean:
                return f
        return None

    def tau_grid(self) -> list[float]:
        return [f.tau for f in self.quantile_fits()]


def fit_to_dict(fit: QuantileFit) -> dict:
    return {
        "tau": fit.tau,
        "covariates": list(fit.covariates),
        "beta": list(fit.beta),
        "se": None if fit.se is None else list(fit.se),
        "n_obs": fit.n_obs,
        "loss": fit.loss,
        "r_squared": fit.r_squared,
        "n_dropped": fit.n_dropped,
    }


def fit_from_dict(payload: dict) -> QuantileFit:
    return QuantileFit(
        tau=payload["tau"],
        covariates=tuple(payload["covariates"]),
        beta=tuple(payload["beta"]),
        se=None if payload.get("se") is None else tuple(payload["se"]),
        n_obs=int(payload["n_obs"]),
        loss=float(payload["loss"]),
        r_squared=payload.get("r_squared"),
        n_dropped=int(payload.get("n_dropped", 0)),
    )


def artifact_to_dict(artifact: FitArtifact) -> dict:
    return {
        "schema": FIT_SCHEMA,
        "covariates": list(artifact.covariates),
        "censor_bound": artifact.censor_bound,
        "ci_level": artifact.ci_level,
        "observed": [{"tau": t, "scc": q} for t, q in artifact.observed],
        "fits": [fit_to_dict(f) for f in artifact.fits],
    }


def artifact_from_dict(payload: dict) -> FitArtifact:
    schema = payload.get("schema")
    if schema != FIT_SCHEMA:
        raise ValueError(f"unsupported fit artifact schema: {schema!r} "
                         f"(expected {FIT_SCHEMA!r})")
    return FitArtifact(
        covariates=tuple(payload["covariates"]),
        censor_bound=payload.get("censor_bound"),
        ci_level=float(payload.get("ci_level", 0.95)),
        fits=tuple(fit_from_dict(f) for f in payload["fits"]),
        observed=tuple((float(o["tau"]), float(o["scc"]))
                       for o in payload["observed"]),
    )


def write_fit_artifact(path, artifact: FitArtifact) -> None:
    Path(path).write_text(json.dumps(artifact_to_dict(artifact), indent=2)
                          + "\n")


def read_fit_artifact(path) -> FitArtifact:
    return artifact_from_dict(json.loads(Path(path).read_text()))


def fits_to_rows(fits: Sequence[QuantileFit]) -> list[dict]:
    """Flat per-coefficient rows (covariate, beta, se, n_obs, loss)."""
    rows = []
    for fit in fits:
        names = list(fit.covariates) + ["intercept"]
        for i, name in enumerate(names):
            rows.append({
                "tau": fit.tau,
                "covariate": name,
                "beta": fit.beta[i],
                "se": None if fit.se is None else fit.se[i],
                "n_obs": fit.n_obs,
                "loss": fit.loss,
            })
    return rows


def write_fit_rows(path, fits: Sequence[QuantileFit]) -> None:
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["tau", "covariate", "beta", "se", "n_obs", "loss"])
        for row in fits_to_rows(fits):
            writer.writerow([
                row["tau"], row["covariate"], repr(row["beta"]),
                "" if row["se"] is None else repr(row["se"]),
                row["n_obs"], repr(row["loss"]),
            ])


def emulation_to_rows(results: Sequence[EmulationResult]) -> list[list[str]]:
    return [[repr(float(r.tau)), repr(r.scc_observed), repr(r.scc_emulated),
             repr(r.shift), repr(r.se), repr(r.ci_low), repr(r.ci_high)]
            for r in results]


def write_emulation_csv(path_or_file, results: Sequence[EmulationResult]) -> None:
    if hasattr(path_or_file, "write"):
        _write_emulation(path_or_file, results)
    else:
        with Path(path_or_file).open("w", newline="") as fh:
            _write_emulation(fh, results)


def _write_emulation(fh, results):
    writer = csv.writer(fh)
    writer.writerow(EMULATION_COLUMNS)
    writer.writerows(emulation_to_rows(results))


def read_emulation_csv(path, ci_level: float = 0.95) -> list[EmulationResult]:
    with Path(path).open(newline="") as fh:
        reader = csv.DictReader(fh)
        missing = [c for c in EMULATION_COLUMNS
                   if c not in (reader.fieldnames or [])]
        if missing:
            raise ValueError(f"{path}: missing column(s) {missing}")
        out = []
        for row in reader:
            out.append(EmulationResult(
                tau=float(row["tau"]),
                scc_observed=float(row["scc_observed"]),
                scc_emulated=float(row["scc_emulated"]),
                shift=float(row["shift"]),
                se=float(row["se"]),
                ci_low=float(row["ci_low"]),
                ci_high=float(row["ci_high"]),
                ci_level=ci_level,
            ))
    return out


def write_combine_csv(path_or_file, summaries: Sequence[BiasSummary]) -> None:
    rows = [[repr(float(s.tau)), repr(s.mu_combined), repr(s.sigma_combined)]
            for s in summaries]
    if hasattr(path_or_file, "write"):
        writer = csv.writer(path_or_file)
        writer.writerow(COMBINE_COLUMNS)
        writer.writerows(rows)
    else:
        with Path(path_or_file).open("w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(COMBINE_COLUMNS)
            writer.writerows(rows)


def emulation_result_to_dict(r: EmulationResult) -> dict:
    return {"tau": r.tau, "scc_observed": r.scc_observed,
            "scc_emulated": r.scc_emulated, "shift": r.shift, "se": r.se,
            "ci_low": r.ci_low, "ci_high": r.ci_high, "ci_level": r.ci_level}


def emulation_result_from_dict(payload: dict) -> EmulationResult:
    return EmulationResult(
        tau=float(payload["tau"]),
        scc_observed=float(payload["scc_observed"]),
        scc_emulated=float(payload["scc_emulated"]),
        shift=float(payload["shift"]),
        se=float(payload["se"]),
        ci_low=float(payload["ci_low"]),
        ci_high=float(payload["ci_high"]),
        ci_level=float(payload.get("ci_level", 0.95)),
    )


def bias_summary_to_dict(s: BiasSummary) -> dict:
    return {"tau": s.tau, "mu_combined": s.mu_combined,
            "sigma_combined": s.sigma_combined,
            "inputs": [{"label": l, "mu": m, "sigma": sg}
                       for l, m, sg in s.inputs]}


def table_text(fits: Sequence[QuantileFit]) -> str:
    """Human-readable coefficient table: mean column first, then taus.

    Mirrors the published layout: one row per covariate with the
    standard errors in brackets underneath.
    """
    if not fits:
        return "(no fits)\n"
    ordered = sorted(fits, key=lambda f: (-1.0 if f.is_mean else f.tau))
    names = list(ordered[0].covariates) + ["intercept"]
    heads = [MEAN_TAU if f.is_mean else f"{f.tau:g}" for f in ordered]
    width = max(10, max(len(h) for h in heads) + 2)
    label_w = max(len(n) for n in names) + 2
    lines = ["".join([" " * label_w] + [h.rjust(width) for h in heads])]
    for i, name in enumerate(names):
        cells = [f"{f.beta[i]:.2f}".rjust(width) for f in ordered]
        lines.append(name.ljust(label_w) + "".join(cells))
        if any(f.se is not None for f in ordered):
            ses = ["" if f.se is None else f"({f.se[i]:.4g})" for f in ordered]
            lines.append(" " * label_w + "".join(s.rjust(width) for s in ses))
    meta = [f"n_obs={ordered[0].n_obs}"]
    mean = [f for f in ordered if f.is_mean]
    if mean and mean[0].r_squared is not None:
        meta.append(f"R2(mean)={mean[0].r_squared:.3f}")
    if ordered[0].n_dropped:
        meta.append(f"dropped(missing covariates)={ordered[0].n_dropped}")
    lines.append("  ".join(meta))
    return "\n".join(lines) + "\n"
