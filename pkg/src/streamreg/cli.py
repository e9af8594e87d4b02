"""Command-line front door for the streaming regression engines.

Subcommands
-----------
select-stream   stream a file in blocks, score all submodels, pick the best
dnc             fit logistic blocks independently and combine them
blb             bag-of-little-bootstraps uncertainty for mean or OLS
glm             chunked IRLS fit (gaussian or binomial)
simulate        selection study over synthetic streams
airline-prep    raw flight schedule -> engineered modeling table

Every subcommand takes --format {table,machine} and --out; machine output
is canonical JSON. Exit codes: 0 success, 2 configuration error, 3 data
error, 4 numerical failure.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import airline, report
from .blb import BlbConfig, blb_run, mean_estimator, ols_estimator
from .chunkglm import GlmConfig, fit_glm_chunked
from .dnc import combine, fit_block_logistic, load_block_fit
from .errors import (
    DomainError,
    EstimatorFailure,
    HeaderMismatch,
    NonConvergence,
    NotPositiveDefinite,
    SeparationDetected,
    StreamRegError,
)
from .ingest import DelimitedSource, drop_nonfinite
from .onlinesel import StreamState, load_snapshot, save_snapshot
from .simharness import SimScenario, run_scenario
from .suffstats import BlockStats, accumulate_chunk

_CONFIG_ERRORS = (HeaderMismatch,)
_NUMERICAL_ERRORS = (
    NotPositiveDefinite,
    NonConvergence,
    SeparationDetected,
    EstimatorFailure,
    DomainError,
)


def _csv_list(text: str) -> list[str]:
    items = [part.strip() for part in text.split(",") if part.strip()]
    if not items:
        raise argparse.ArgumentTypeError("expected a comma-separated list")
    return items


def _float_list(text: str) -> list[float]:
    try:
        return [float(part) for part in text.split(",")]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc))


def _int_list(text: str) -> list[int]:
    try:
        return [int(part) for part in text.split(",")]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="streamreg", description=__doc__,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--format", choices=("table", "machine"), default="table")
        p.add_argument("--out", default=None, help="report destination (default stdout)")

    sel = sub.add_parser("select-stream", help="streaming all-subsets selection")
    sel.add_argument("--input", required=True)
    sel.add_argument("--response", required=True)
    sel.add_argument("--covariates", required=True, type=_csv_list)
    sel.add_argument("--block-size", type=int, default=100)
    sel.add_argument("--save-state", default=None)
    sel.add_argument("--load-state", default=None)
    common(sel)

    dnc = sub.add_parser("dnc", help="divide-and-conquer logistic regression")
    dnc.add_argument("--input", default=None)
    dnc.add_argument("--response", default=None)
    dnc.add_argument("--covariates", type=_csv_list, default=None)
    dnc.add_argument("--blocks", type=int, default=10)
    dnc.add_argument("--fits", nargs="+", default=None,
                     help="combine these saved block-fit files instead of fitting")
    common(dnc)

    blb = sub.add_parser("blb", help="bag of little bootstraps")
    blb.add_argument("--input", required=True)
    blb.add_argument("--estimator", choices=("mean", "ols"), default="mean")
    blb.add_argument("--response", required=True)
    blb.add_argument("--covariates", type=_csv_list, default=None)
    blb.add_argument("--gamma", type=float, default=0.7)
    blb.add_argument("--s", type=int, default=20)
    blb.add_argument("--r", type=int, default=100)
    blb.add_argument("--seed", type=int, default=0)
    blb.add_argument("--ci-level", type=float, default=0.95)
    common(blb)

    glm = sub.add_parser("glm", help="chunked IRLS")
    glm.add_argument("--input", required=True)
    glm.add_argument("--family", default="gaussian-identity")
    glm.add_argument("--response", required=True)
    glm.add_argument("--covariates", required=True, type=_csv_list)
    glm.add_argument("--chunk-size", type=int, default=500_000)
    glm.add_argument("--max-iter", type=int, default=25)
    glm.add_argument("--tol", type=float, default=1e-8)
    glm.add_argument("--use-qr", action="store_true")
    common(glm)

    sim = sub.add_parser("simulate", help="synthetic selection study")
    sim.add_argument("--beta", required=True, type=_float_list,
                     help="5 comma-separated coefficients, intercept first")
    sim.add_argument("--dependence", choices=("independent", "ar1"),
                     default="independent")
    sim.add_argument("--replicates", type=int, default=1000)
    sim.add_argument("--checkpoints", type=_int_list, default=[2, 25, 100])
    sim.add_argument("--block-size", type=int, default=100)
    sim.add_argument("--noise-var", type=float, default=100.0)
    sim.add_argument("--seed", type=int, default=0)
    sim.add_argument("--workers", type=int, default=1)
    common(sim)

    prep = sub.add_parser("airline-prep", help="engineer flight-delay features")
    prep.add_argument("--input", required=True)
    prep.add_argument("--out-data", required=True,
                      help="destination for the engineered CSV")
    common(prep)

    return parser


def _read_all(source: DelimitedSource) -> tuple[np.ndarray, np.ndarray, int]:
    xs, ys, dropped = [], [], 0
    reset = True
    while True:
        x, y = source.next_chunk(reset=reset)
        reset = False
        if x.shape[0] == 0:
            break
        x, y, bad = drop_nonfinite(x, y)
        dropped += bad
        if x.shape[0]:
            xs.append(x)
            ys.append(y)
    if not xs:
        raise StreamRegError("input yielded no usable rows")
    return np.vstack(xs), np.concatenate(ys), dropped


def _cmd_select_stream(args) -> tuple[dict, str]:
    source = DelimitedSource(
        args.input,
        response=args.response,
        covariates=args.covariates,
        chunk_size=args.block_size,
    )
    state = load_snapshot(args.load_state) if args.load_state else StreamState(
        len(args.covariates)
    )
    dropped = 0
    reset = True
    while True:
        x, y = source.next_chunk(reset=reset)
        reset = False
        if x.shape[0] == 0:
            break
        x, y, bad = drop_nonfinite(x, y)
        dropped += bad
        if x.shape[0] == 0:
            continue
        stats = BlockStats.empty(state.p)
        accumulate_chunk(stats, x, y)
        state.update(stats)
    if args.save_state:
        save_snapshot(state, args.save_state)
    crit = state.criteria()
    extra = {
        "dropped_rows": dropped,
        "malformed_rows": source.n_malformed,
        "covariates": args.covariates,
    }
    betas = {mask: state.model_state(mask).beta for mask in crit.masks}
    return (
        report.criteria_payload(crit, extra, names=args.covariates, betas=betas),
        report.criteria_table(crit, names=args.covariates),
    )


def _cmd_dnc(args) -> tuple[dict, str]:
    if args.fits:
        fits = [load_block_fit(path) for path in args.fits]
        columns = [f"b{i}" for i in range(fits[0].beta.shape[0])]
    else:
        if not (args.input and args.response and args.covariates):
            raise HeaderMismatch(
                "dnc needs either --fits or --input with --response/--covariates"
            )
        source = DelimitedSource(
            args.input, response=args.response, covariates=args.covariates
        )
        x, y, _ = _read_all(source)
        if args.blocks < 1:
            raise ValueError(f"--blocks must be positive, got {args.blocks}")
        bounds = np.linspace(0, x.shape[0], args.blocks + 1).astype(int)
        fits = [
            fit_block_logistic(x[a:b], y[a:b])
            for a, b in zip(bounds[:-1], bounds[1:])
            if b > a
        ]
        columns = ["intercept"] + args.covariates
    combined = combine(fits)
    return (
        report.dnc_payload(combined, columns),
        report.dnc_table(combined, columns),
    )


def _cmd_blb(args) -> tuple[dict, str]:
    cfg = BlbConfig(
        gamma=args.gamma, s=args.s, r=args.r, seed=args.seed, ci_level=args.ci_level
    )
    if args.estimator == "ols":
        if not args.covariates:
            raise ValueError("--estimator ols needs --covariates")
        source = DelimitedSource(
            args.input, response=args.response, covariates=args.covariates
        )
        x, y, _ = _read_all(source)
        data = np.hstack([x, y[:, None]])
        estimator = ols_estimator()
        columns = ["intercept"] + args.covariates
    else:
        source = DelimitedSource(
            args.input,
            response=args.response,
            covariates=[args.response],
            add_intercept=False,
        )
        _, y, _ = _read_all(source)
        data = y
        estimator = mean_estimator()
        columns = [args.response]
    result = blb_run(data, estimator, cfg)
    extra = {"gamma": cfg.gamma, "seed": cfg.seed, "ci_level": cfg.ci_level}
    return (
        report.blb_payload(result, columns, extra),
        report.blb_table(result, columns),
    )


def _cmd_glm(args) -> tuple[dict, str, bool]:
    cfg = GlmConfig(
        family=args.family,
        max_iter=args.max_iter,
        tol=args.tol,
        chunk_size=args.chunk_size,
        use_qr=args.use_qr,
    )
    source = DelimitedSource(
        args.input,
        response=args.response,
        covariates=args.covariates,
        chunk_size=cfg.chunk_size,
    )
    fit = fit_glm_chunked(source, cfg)
    columns = ["intercept"] + args.covariates
    extra = {"malformed_rows": source.n_malformed}
    return (
        report.glm_payload(fit, cfg.family, columns, extra),
        report.glm_table(fit, cfg.family, columns),
        fit.converged,
    )


def _cmd_simulate(args) -> tuple[dict, str]:
    if len(args.beta) != 5:
        raise ValueError(f"--beta needs 5 values, got {len(args.beta)}")
    scenario = SimScenario(
        beta_true=tuple(args.beta),
        dependence=args.dependence,
        noise_var=args.noise_var,
        n_k=args.block_size,
        checkpoints=tuple(args.checkpoints),
        replicates=args.replicates,
        seed=args.seed,
    )
    tally = run_scenario(scenario, workers=args.workers)
    return report.sim_payload(scenario, tally), report.sim_table(scenario, tally)


def _cmd_airline_prep(args) -> tuple[dict, str]:
    summary = airline.airline_prep(args.input, args.out_data)
    return (
        report.airline_payload(summary, args.out_data),
        report.airline_table(summary, args.out_data),
    )


def _emit(args, payload: dict, table: str) -> None:
    text = report.machine_report(payload) if args.format == "machine" else table
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    exit_code = 0
    try:
        if args.command == "select-stream":
            payload, table = _cmd_select_stream(args)
        elif args.command == "dnc":
            payload, table = _cmd_dnc(args)
        elif args.command == "blb":
            payload, table = _cmd_blb(args)
        elif args.command == "glm":
            payload, table, converged = _cmd_glm(args)
            if not converged:
                exit_code = 4
        elif args.command == "simulate":
            payload, table = _cmd_simulate(args)
        else:
            payload, table = _cmd_airline_prep(args)
    except _CONFIG_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except _NUMERICAL_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    except StreamRegError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    _emit(args, payload, table)
    return exit_code


if __name__ == "__main__":
    sys.exit(main())
