"""Command-line front door: fit, emulate, combine, plotdata, serve.

Exit codes: 0 success, 1 input error, 2 numerical failure.  All bootstrap
randomness sits behind --seed (default fixed; the METAEMU_SEED environment
variable overrides the default, an explicit flag wins over both), so
output is byte-deterministic for a given invocation.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from metaemu import artifacts, emulator, ingest, regression
from metaemu.core import Assumption
from metaemu.regression import DesignSpec
from metaemu.solver import SolverError

DEFAULT_SEED = 1234
DEFAULT_TAUS = "0.05:0.95:0.05"

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_NUMERIC = 2


class InputError(ValueError):
    """User-facing input problem (exit code 1)."""


def default_seed() -> int:
    env = os.environ.get("METAEMU_SEED")
    if env:
        try:
            return int(env)
        except ValueError:
            raise InputError(f"METAEMU_SEED must be an integer, got {env!r}")
    return DEFAULT_SEED


def parse_taus(text: str) -> tuple[float, ...]:
    """Grid syntax: start:stop:step, or a comma-separated list."""
    text = text.strip()
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise InputError(f"tau grid must be start:stop:step, got {text!r}")
        start, stop, step = (float(p) for p in parts)
        if step <= 0:
            raise InputError("tau grid step must be positive")
        taus = []
        k = 0
        while True:
            t = round(start + k * step, 10)
            if t > stop + 1e-12:
                break
            taus.append(t)
            k += 1
        return tuple(taus)
    return tuple(float(p) for p in text.split(",") if p.strip())


def _load_estimates(path: str):
    try:
        return ingest.load_estimates(path)
    except FileNotFoundError:
        raise InputError(f"file not found: {path}") from None


def _open_out(args):
    return Path(args.out).open("w", newline="") if args.out else sys.stdout


def cmd_fit(args) -> int:
    records, summary = _load_estimates(args.data)
    taus = parse_taus(args.taus)
    spec = DesignSpec(covariates=tuple(c.strip() for c in
                                       args.covariates.split(",") if c.strip()),
                      tau_grid=taus, censor_bound=args.censor_at)
    grid = regression.fit_grid(records, spec, n_boot=args.bootstrap,
                               seed=args.seed, backend=args.backend)
    observed = emulator.empirical_quantiles(records, taus)
    artifact = artifacts.FitArtifact(
        covariates=spec.covariates, censor_bound=spec.censor_bound,
        ci_level=args.ci_level, fits=grid.fits,
        observed=tuple(observed))
    artifacts.write_fit_artifact(args.out, artifact)
    if args.rows:
        artifacts.write_fit_rows(args.rows, grid.fits)
    if args.format == "structured":
        sys.stdout.write(json.dumps(artifacts.artifact_to_dict(artifact),
                                    indent=2) + "\n")
    else:
        sys.stdout.write(f"fitted {len(grid.fits)} columns on "
                         f"{summary.n_records} records "
                         f"({summary.n_papers} papers); artifact: {args.out}\n")
        sys.stdout.write(artifacts.table_text(grid.fits))
    for tau, message in grid.failures:
        sys.stderr.write(f"fit failed at tau={tau}: {message}\n")
    return EXIT_NUMERIC if grid.failures else EXIT_OK


def _parse_assume(value: str) -> emulator.Alteration:
    parts = value.split(":")
    if len(parts) != 3:
        raise InputError(
            f"--assume takes assumption:from_file:to_file, got {value!r}")
    name, from_path, to_path = parts
    try:
        assumption = Assumption(name.strip())
    except ValueError:
        raise InputError(f"unknown assumption {name!r}; choose from "
                         f"{[a.value for a in Assumption]}") from None
    try:
        observed = ingest.load_distribution(from_path, assumption=assumption)
        alternative = ingest.load_distribution(to_path, assumption=assumption)
    except FileNotFoundError as exc:
        raise InputError(f"file not found: {exc.filename}") from None
    return emulator.Alteration(assumption=assumption, observed=observed,
                               alternative=alternative)


def cmd_emulate(args) -> int:
    try:
        artifact = artifacts.read_fit_artifact(args.fit)
    except FileNotFoundError:
        raise InputError(f"file not found: {args.fit}") from None
    taus = artifact.tau_grid()
    if args.data:
        records, _ = _load_estimates(args.data)
        observed = emulator.empirical_quantiles(records, taus)
    else:
        observed = list(artifact.observed)
    alterations = [_parse_assume(a) for a in args.assume]
    ci_level = args.ci_level if args.ci_level is not None else artifact.ci_level
    results = emulator.emulate_cdf(artifact.quantile_fits(), observed,
                                   alterations, ci_level=ci_level,
                                   rearrange=args.rearrange)
    out = _open_out(args)
    try:
        if args.format == "structured":
            artifacts.write_emulation_csv(out, results)
        else:
            header = ("tau", "observed", "emulated", "shift", "se",
                      "ci_low", "ci_high")
            out.write("".join(h.rjust(12) for h in header) + "\n")
            for r in results:
                cells = (f"{r.tau:g}", f"{r.scc_observed:.2f}",
                         f"{r.scc_emulated:.2f}", f"{r.shift:.2f}",
                         f"{r.se:.2f}", f"{r.ci_low:.2f}", f"{r.ci_high:.2f}")
                out.write("".join(c.rjust(12) for c in cells) + "\n")
    finally:
        if out is not sys.stdout:
            out.close()
    return EXIT_OK


def cmd_combine(args) -> int:
    sources = []
    labels = (args.labels.split(",") if args.labels else
              [Path(p).stem for p in args.inputs])
    if len(labels) != len(args.inputs):
        raise InputError("--labels must match the number of inputs")
    for label, path in zip(labels, args.inputs):
        try:
            sources.append((label, artifacts.read_emulation_csv(path)))
        except FileNotFoundError:
            raise InputError(f"file not found: {path}") from None
    try:
        summaries = emulator.combine_grids(sources)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    out = _open_out(args)
    try:
        if args.format == "structured":
            artifacts.write_combine_csv(out, summaries)
        else:
            out.write("".join(h.rjust(14) for h in
                              ("tau", "mu_combined", "sigma_combined")) + "\n")
            for s in summaries:
                out.write(f"{s.tau:>14g}{s.mu_combined:>14.2f}"
                          f"{s.sigma_combined:>14.2f}\n")
    finally:
        if out is not sys.stdout:
            out.close()
    return EXIT_OK


def _plot_rows_from_data(args):
    records, _ = _load_estimates(args.data)
    usable = [r for r in records if r.usable]
    if args.year_min is not None:
        usable = [r for r in usable if r.year >= args.year_min]
    if args.year_max is not None:
        usable = [r for r in usable if r.year <= args.year_max]
    if not usable:
        raise InputError("no records")
    values = np.array([r.scc for r in usable])
    weights = np.array([r.weight for r in usable])
    if args.kind == "hist":
        width = args.bin_width
        start = np.floor(values.min() / width) * width
        nbins = int(np.ceil((values.max() - start) / width)) or 1
        edges = start + width * np.arange(nbins + 1)
        bins = np.clip(np.searchsorted(edges, values, side="left") - 1,
                       0, nbins - 1)
        mass = np.bincount(bins, weights=weights, minlength=nbins)
        mass = mass / mass.sum()
        mids = (edges[:-1] + edges[1:]) / 2
        return ("support", "probability"), list(zip(mids, mass))
    order = np.lexsort((np.arange(values.size), values))
    v, w = values[order], weights[order]
    cum = np.cumsum(w) / w.sum()
    keep = np.nonzero(np.append(v[1:] != v[:-1], True))[0]  # last of each tie
    return ("x", "cumulative"), list(zip(v[keep], cum[keep]))


def _plot_rows_from_dist(args):
    try:
        dist = ingest.load_distribution(args.dist, assumption=args.assumption)
    except FileNotFoundError:
        raise InputError(f"file not found: {args.dist}") from None
    if args.kind == "hist":
        return ("support", "probability"), list(zip(dist.support,
                                                    dist.probability))
    return ("x", "cumulative"), list(zip(dist.support,
                                         np.cumsum(dist.probability)))


def cmd_plotdata(args) -> int:
    if bool(args.data) == bool(args.dist):
        raise InputError("give exactly one of --data or --dist")
    header, rows = (_plot_rows_from_data(args) if args.data
                    else _plot_rows_from_dist(args))
    out = _open_out(args)
    try:
        if args.format == "structured":
            out.write(",".join(header) + "\n")
            for x, yv in rows:
                out.write(f"{float(x)!r},{float(yv)!r}\n")
        else:
            out.write("".join(h.rjust(16) for h in header) + "\n")
            for x, yv in rows:
                out.write(f"{x:>16g}{yv:>16.6f}\n")
    finally:
        if out is not sys.stdout:
            out.close()
    return EXIT_OK


def cmd_serve(args) -> int:
    import uvicorn

    from metaemu.service import create_app

    app = create_app(model_path=args.model)
    uvicorn.run(app, host=args.host, port=args.port)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="metaemu",
        description="Fit SCC quantile regressions and emulate distribution "
                    "shifts under alternative assumptions.")
    sub = parser.add_subparsers(dest="command", required=True)

    fit = sub.add_parser("fit", help="fit the percentile grid and mean column")
    fit.add_argument("--data", required=True, help="estimates CSV")
    fit.add_argument("--covariates", required=True,
                     help="comma-separated covariate names")
    fit.add_argument("--taus", default=DEFAULT_TAUS,
                     help="start:stop:step or comma list (default %(default)s)")
    fit.add_argument("--censor-at", type=float, default=None,
                     help="left-censoring bound on the response")
    fit.add_argument("--bootstrap", type=int, default=0, metavar="N",
                     help="bootstrap replicates for standard errors "
                          "(0 = no SEs; paper-style tables use 1000)")
    fit.add_argument("--seed", type=int, default=None)
    fit.add_argument("--ci-level", type=float, default=0.95)
    fit.add_argument("--backend", choices=("compiled", "pure"), default=None)
    fit.add_argument("--out", default="fits.json")
    fit.add_argument("--rows", default=None, metavar="CSV",
                     help="also export flat per-coefficient rows "
                          "(covariate, beta, se, n_obs, loss)")
    fit.add_argument("--format", choices=("text", "structured"),
                     default="text")
    fit.set_defaults(func=cmd_fit)

    emu = sub.add_parser("emulate", help="shift the CDF under alternative views")
    emu.add_argument("--fit", required=True, help="fit artifact (JSON)")
    emu.add_argument("--data", default=None,
                     help="recompute observed quantiles from this CSV "
                          "(default: use the artifact's)")
    emu.add_argument("--assume", action="append", required=True,
                     metavar="ASSUMPTION:FROM:TO",
                     help="assumption:literature_file:alternative_file "
                          "(repeatable)")
    emu.add_argument("--ci-level", type=float, default=None)
    emu.add_argument("--rearrange", action="store_true",
                     help="sort emulated quantiles if they cross")
    emu.add_argument("--out", default=None)
    emu.add_argument("--format", choices=("text", "structured"),
                     default="text")
    emu.set_defaults(func=cmd_emulate)

    comb = sub.add_parser("combine",
                          help="precision-weighted combination of runs")
    comb.add_argument("inputs", nargs="+", help="emulation result CSVs")
    comb.add_argument("--labels", default=None,
                      help="comma-separated labels (default: file stems)")
    comb.add_argument("--out", default=None)
    comb.add_argument("--format", choices=("text", "structured"),
                      default="text")
    comb.set_defaults(func=cmd_combine)

    plot = sub.add_parser("plotdata", help="histogram / CDF export")
    plot.add_argument("--data", default=None, help="estimates CSV")
    plot.add_argument("--dist", default=None, help="distribution file")
    plot.add_argument("--assumption", default=None,
                      help="assumption for two-column --dist files")
    plot.add_argument("--kind", choices=("hist", "cdf"), default="hist")
    plot.add_argument("--bin-width", type=float, default=25.0)
    plot.add_argument("--year-min", type=int, default=None)
    plot.add_argument("--year-max", type=int, default=None)
    plot.add_argument("--out", default=None)
    plot.add_argument("--format", choices=("text", "structured"),
                      default="structured")
    plot.set_defaults(func=cmd_plotdata)

    serve = sub.add_parser("serve", help="run the HTTP service")
    serve.add_argument("--model", required=True, help="fit artifact (JSON)")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8000)
    serve.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if getattr(args, "seed", None) is None and hasattr(args, "seed"):
            args.seed = default_seed()
        return args.func(args)
    except (SolverError, regression.BootstrapError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_NUMERIC
    except (InputError, ingest.EstimatesLoadError, ValueError, KeyError,
            OSError, json.JSONDecodeError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
