"""Command-line interface.

Subcommands: simulate, split, band, coverage, diagnostics, drift-check.
Exit codes: 0 success, 1 config error, 2 numeric failure, 3 acceptance
failure. The RB_SEED environment variable overrides any base seed.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import fileio
from .band import BandConfig, build_band
from .chain import drift_check
from .errors import ArgumentError, RegenbootError
from .estimation import estimate_transition_density
from .harness import (
    ExperimentConfig,
    _build_model,
    run_coverage_experiment,
    run_diagnostics,
    simulate,
)
from .seeds import derive_seed
from .splitting import approximate_split, exact_split, extract_blocks

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_NUMERIC = 2
EXIT_ACCEPTANCE = 3


def _seed(value: int) -> int:
    env = os.environ.get("RB_SEED")
    return int(env) if env else value


def _load_config(path, overrides: dict) -> dict:
    with open(path) as fh:
        data = json.load(fh)
    for key, value in overrides.items():
        if value is not None:
            data[key] = value
    return data


def _cmd_simulate(args) -> int:
    model = _build_model(args.model)
    x0 = args.x0 if args.x0 is not None else (0 if model.kind == "finite" else 0.5)
    if model.kind == "finite":
        x0 = int(x0)
    traj = simulate(model, args.n, x0, _seed(args.seed))
    fileio.dump_trajectory(traj, args.out)
    print(f"wrote {args.n} samples to {args.out}")
    return EXIT_OK


def _cmd_split(args) -> int:
    model = _build_model(args.model)
    traj = fileio.load_trajectory(args.traj)
    seed = _seed(args.seed)
    if args.mode == "exact":
        split = exact_split(traj, model, seed)
    else:
        p_hat = estimate_transition_density(
            traj, bandwidth=args.p_hat_bandwidth, theta=None
        )
        if args.estimate_out:
            fileio.dump_estimate(p_hat, args.estimate_out)
        split = approximate_split(
            traj, p_hat, p_hat.small_set, p_hat.theta, p_hat.nu_density, seed
        )
    decomp = extract_blocks(split)
    fileio.dump_blocks(decomp, args.out)
    print(
        f"{decomp.block_count} blocks (beta_hat = {decomp.beta_hat:.4f}) "
        f"written to {args.out}"
    )
    if args.diagnostics_out:
        from .splitting import regeneration_diagnostics

        report = regeneration_diagnostics(decomp)
        fileio.dump_json(report, args.diagnostics_out)
    return EXIT_OK


def _cmd_band(args) -> int:
    model = _build_model(args.model)
    seed = _seed(args.seed)
    if args.traj:
        traj = fileio.load_trajectory(args.traj)
    else:
        traj = simulate(model, args.n, 0.5, derive_seed(seed, 1))
    p_hat = estimate_transition_density(traj, bandwidth=args.p_hat_bandwidth)
    config = BandConfig(
        alpha=args.alpha,
        kernel_name=args.kernel,
        bandwidth_exponent=args.bandwidth_exponent,
        bootstrap_reps=args.bootstrap_reps,
    )
    cb = build_band(traj, p_hat, config, seed=derive_seed(seed, 2))
    fileio.dump_band(cb, args.out, args.summary_out)
    print(
        f"band on {cb.grid.shape[0]} points: c_hat = {cb.c_hat:.4f}, "
        f"i_n_hat = {cb.block_count}, written to {args.out}"
    )
    return EXIT_OK


def _cmd_coverage(args) -> int:
    overrides = {
        "replications": args.reps,
        "base_seed": args.seed,
        "workers": args.workers,
        "out_dir": args.out,
    }
    data = _load_config(args.config, overrides)
    if os.environ.get("RB_SEED"):
        data["base_seed"] = int(os.environ["RB_SEED"])
    config = ExperimentConfig.from_dict(data)
    report = run_coverage_experiment(config)
    print(
        f"coverage {report.coverage_rate:.4f} over "
        f"{len(report.records) - report.n_failed} replications "
        f"(Wilson 95%: [{report.wilson_low:.4f}, {report.wilson_high:.4f}], "
        f"{report.n_failed} failed)"
    )
    if args.expect:
        lo, hi = (float(v) for v in args.expect.split(","))
        if not (lo <= report.coverage_rate <= hi):
            print(f"ACCEPTANCE FAIL: coverage outside [{lo}, {hi}]")
            return EXIT_ACCEPTANCE
        print(f"acceptance ok: coverage within [{lo}, {hi}]")
    return EXIT_OK


def _cmd_diagnostics(args) -> int:
    overrides = {"base_seed": args.seed}
    data = _load_config(args.config, overrides)
    if os.environ.get("RB_SEED"):
        data["base_seed"] = int(os.environ["RB_SEED"])
    report = run_diagnostics(
        data.get("model", "two-state"),
        n=int(data["n"]),
        base_seed=int(data.get("base_seed", 0)),
        delta_n_list=tuple(data.get("delta_n_list", ())),
        delta_seeds=int(data.get("delta_seeds", 0)),
        delta_oracle_blocks=int(data.get("delta_oracle_blocks", 200_000)),
    )
    if args.out:
        fileio.dump_json(report, args.out)
    print(json.dumps(report, indent=2, default=fileio._json_default))
    return EXIT_OK


def _cmd_drift_check(args) -> int:
    model = _build_model(args.model)
    v_const = args.v_const

    def v(x):
        if np.isscalar(x):
            return v_const
        return np.full_like(np.asarray(x, dtype=np.float64), v_const)

    report = drift_check(model, v, c=args.c, b_const=args.b)
    print(
        f"drift condition {'holds' if report.holds else 'fails'} "
        f"(max margin {report.max_margin:.3e}, tol {report.tol:.1e})"
    )
    if args.require and not report.holds:
        return EXIT_ACCEPTANCE
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="regenboot",
        description="Regenerative-block inference for Harris recurrent Markov chains",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="simulate a chain and dump a trajectory CSV")
    p.add_argument("--model", required=True, help="preset name or model JSON path")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--x0", type=float, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_simulate)

    p = sub.add_parser("split", help="split a trajectory into regenerative blocks")
    p.add_argument("--model", required=True)
    p.add_argument("--traj", required=True)
    p.add_argument("--mode", choices=["exact", "approximate"], default="exact")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--p-hat-bandwidth", type=float, default=None)
    p.add_argument("--estimate-out", default=None)
    p.add_argument("--diagnostics-out", default=None)
    p.set_defaults(fn=_cmd_split)

    p = sub.add_parser("band", help="build a uniform confidence band")
    p.add_argument("--model", required=True)
    p.add_argument("--traj", default=None, help="trajectory CSV (else simulate --n)")
    p.add_argument("--n", type=int, default=5000)
    p.add_argument("--alpha", type=float, default=0.1)
    p.add_argument("--kernel", default="triangular")
    p.add_argument("--bandwidth-exponent", type=float, default=0.22)
    p.add_argument("--bootstrap-reps", type=int, default=2000)
    p.add_argument("--p-hat-bandwidth", type=float, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="band CSV path")
    p.add_argument("--summary-out", default=None, help="summary JSON path")
    p.set_defaults(fn=_cmd_band)

    p = sub.add_parser("coverage", help="run a seeded Monte Carlo coverage experiment")
    p.add_argument("--config", required=True, help="experiment JSON")
    p.add_argument("--reps", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--out", default=None)
    p.add_argument("--expect", default=None, help="LO,HI acceptance range")
    p.set_defaults(fn=_cmd_coverage)

    p = sub.add_parser("diagnostics", help="regeneration diagnostics on a preset")
    p.add_argument("--config", required=True)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(fn=_cmd_diagnostics)

    p = sub.add_parser("drift-check", help="check the geometric drift condition")
    p.add_argument("--model", required=True)
    p.add_argument("--c", type=float, required=True)
    p.add_argument("--b", type=float, required=True)
    p.add_argument("--v-const", type=float, default=1.0)
    p.add_argument("--require", action="store_true",
                   help="exit 3 when the condition fails")
    p.set_defaults(fn=_cmd_drift_check)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code not in (0, None) else EXIT_OK
    try:
        return args.fn(args)
    except (ArgumentError, FileNotFoundError, json.JSONDecodeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (RegenbootError, Exception) as exc:  # noqa: BLE001
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
