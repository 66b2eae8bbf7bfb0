"""Command-line entry point: one subcommand per figure-data experiment."""
from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import sys

from .channel import ChannelParams
from .experiments import (
    FIGURES,
    ExperimentSpec,
    SweepSpec,
    default_paper_config,
    default_spec,
    run_experiment,
)
from .geometry import NetworkConfig

_QUICK_RUNS = 1000

_CONFIG_KEYS = {"lambda_l", "lambda_s", "R_a", "K", "M", "seed"}
_PARAM_KEYS = {"f_c", "alpha", "P_t", "sigma2", "lambda_g", "eta"}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pinchloc",
        description="Experiments for antenna-on-waveguide RSS localization analysis.",
    )
    parser.add_argument("-v", "--verbose", action="store_true",
                        help="log progress to stderr")
    sub = parser.add_subparsers(dest="figure", required=True)
    for figure in FIGURES:
        p = sub.add_parser(figure.replace("_", "-"),
                           help=f"emit the {figure} data table")
        p.add_argument("--config", type=str, default=None,
                       help="JSON file overriding network/channel parameters")
        p.add_argument("--seed", type=int, default=0, help="master RNG seed")
        p.add_argument("--runs", type=int, default=None,
                       help="Monte Carlo replications (default per figure)")
        p.add_argument("--out", type=str, required=True,
                       help="output CSV path (JSON sidecar written alongside)")
        p.add_argument("--quick", action="store_true",
                       help=f"smoke-test mode: {_QUICK_RUNS} replications")
        p.add_argument("--sweep", type=float, nargs=3, default=None,
                       metavar=("MIN", "MAX", "POINTS"),
                       help="override the sweep axis bounds and point count")
        p.add_argument("--sigma-p-source", choices=("mc", "analytic"), default="mc",
                       help="how the RSS noise variance is calibrated")
        if figure == "localizability":
            p.add_argument("--k-values", type=int, nargs="+", default=[3, 5, 8],
                           help="anchor counts to sweep")
            p.add_argument("--tau-unit", choices=("db", "linear"), default="db",
                           help="unit of the threshold sweep bounds")
    return parser


def _load_overrides(path: str | None) -> dict:
    if path is None:
        return {}
    with open(path) as fh:
        data = json.load(fh)
    unknown = set(data) - _CONFIG_KEYS - _PARAM_KEYS
    if unknown:
        raise SystemExit(f"unknown config keys: {sorted(unknown)}")
    return data


def spec_from_args(args: argparse.Namespace) -> ExperimentSpec:
    figure = args.figure.replace("-", "_")
    overrides = _load_overrides(args.config)
    config, params = default_paper_config(seed=args.seed)
    cfg_kwargs = dataclasses.asdict(config) | {
        k: v for k, v in overrides.items() if k in _CONFIG_KEYS
    }
    cfg_kwargs["seed"] = args.seed
    par_kwargs = dataclasses.asdict(params) | {
        k: v for k, v in overrides.items() if k in _PARAM_KEYS
    }
    if "f_c" in overrides and "eta" not in overrides:
        par_kwargs.pop("eta")  # re-derive from the new carrier
        par_kwargs.pop("lambda_g", None)
    config = NetworkConfig(**cfg_kwargs)
    params = ChannelParams(**par_kwargs)

    kwargs: dict = {"output_path": args.out, "sigma_p_source": args.sigma_p_source}
    if figure == "localizability":
        kwargs["k_values"] = tuple(args.k_values)
    n_runs = args.runs
    if args.quick:
        n_runs = _QUICK_RUNS if n_runs is None else min(n_runs, _QUICK_RUNS)
        kwargs["sinr_runs"] = 10 * _QUICK_RUNS
    if n_runs is None:
        n_runs = 10_000 if figure == "mse_vs_k" else 100_000
    kwargs["n_runs"] = n_runs

    spec = default_spec(figure, config, params, **kwargs)
    if args.sweep is not None:
        lo, hi, points = args.sweep
        if figure == "localizability" and args.tau_unit == "linear":
            import math

            lo, hi = 10.0 * math.log10(lo), 10.0 * math.log10(hi)
        spec = dataclasses.replace(
            spec, sweep=SweepSpec(spec.sweep.variable, lo, hi, int(points),
                                  spec.sweep.scale)
        )
    return spec


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(asctime)s %(name)s %(levelname)s %(message)s",
        stream=sys.stderr,
    )
    spec = spec_from_args(args)
    run_experiment(spec)
    return 0


if __name__ == "__main__":
    sys.exit(main())
