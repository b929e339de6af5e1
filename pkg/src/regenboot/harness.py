"""Experiment configuration and seeded Monte Carlo drivers.

Replication r always uses seed base_seed + r, so experiments are
reproducible and mergeable regardless of worker count or execution order.
"""

from __future__ import annotations

import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import fileio
from .band import BandConfig, build_band, coverage_check
from .chain import MarkovModel, preset, simulate_chain, simulate_reflected_diffusion
from .errors import ArgumentError, NumericError
from .estimation import FunctionTable, estimate_transition_density
from .seeds import derive_seed
from .splitting import (
    atom_mean_return_time,
    exact_split,
    extract_blocks,
    independent_block_counts,
    regeneration_diagnostics,
)

CONCENTRATION_ENVELOPE = 10.0


@dataclass(frozen=True)
class ExperimentConfig:
    """One coverage or diagnostics experiment, JSON-serializable."""

    model: object  # preset name or model dict
    n: int
    band: BandConfig
    replications: int = 1
    base_seed: int = 0
    workers: int = 1
    out_dir: str | None = None
    truth_mode: str = "analytic"
    p_hat_bandwidth: float | None = None
    x0: float = 0.5

    def __post_init__(self):
        if self.n < 2:
            raise ArgumentError("n must be >= 2")
        if self.replications < 1:
            raise ArgumentError("replications must be >= 1")
        if self.workers < 1:
            raise ArgumentError("workers must be >= 1")
        if self.truth_mode not in ("analytic", "self"):
            raise ArgumentError("truth_mode must be 'analytic' or 'self'")

    def build_model(self) -> MarkovModel:
        return _build_model(self.model)

    def to_dict(self) -> dict:
        return {
            "model": self.model,
            "n": self.n,
            "band": self.band.to_dict(),
            "replications": self.replications,
            "base_seed": self.base_seed,
            "workers": self.workers,
            "out_dir": self.out_dir,
            "truth_mode": self.truth_mode,
            "p_hat_bandwidth": self.p_hat_bandwidth,
            "x0": self.x0,
        }

    @staticmethod
    def from_dict(data: dict) -> "ExperimentConfig":
        if "band" not in data:
            raise ArgumentError("experiment config needs a 'band' section")
        return ExperimentConfig(
            model=data.get("model", "reflected-bm"),
            n=int(data["n"]),
            band=BandConfig.from_dict(data["band"]),
            replications=int(data.get("replications", 1)),
            base_seed=int(data.get("base_seed", 0)),
            workers=int(data.get("workers", 1)),
            out_dir=data.get("out_dir"),
            truth_mode=data.get("truth_mode", "analytic"),
            p_hat_bandwidth=data.get("p_hat_bandwidth"),
            x0=float(data.get("x0", 0.5)),
        )


def _build_model(spec) -> MarkovModel:
    if isinstance(spec, MarkovModel):
        return spec
    if isinstance(spec, str):
        if spec.endswith(".json"):
            return MarkovModel.load(spec)
        return preset(spec)
    if isinstance(spec, dict):
        return MarkovModel.from_dict(spec)
    raise ArgumentError(f"cannot build a model from {type(spec)}")


def simulate(model: MarkovModel, n: int, x0, seed: int):
    """Kind-dispatching simulator used by the drivers."""
    if model.kind == "diffusion":
        return simulate_reflected_diffusion(model.diffusion, n, x0, seed)
    return simulate_chain(model, n, x0, seed)


@dataclass(frozen=True)
class RepRecord:
    rep: int
    covered: bool | None
    c_hat: float | None
    block_count: int | None
    beta_hat: float | None
    runtime: float
    error: str | None = None


@dataclass(frozen=True)
class ExperimentReport:
    records: tuple
    coverage_rate: float
    wilson_low: float
    wilson_high: float
    n_failed: int
    config: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "replications": len(self.records),
            "coverage_rate": self.coverage_rate,
            "wilson_low": self.wilson_low,
            "wilson_high": self.wilson_high,
            "n_failed": self.n_failed,
            "config": self.config,
        }


def wilson_interval(successes: int, total: int, z: float = 1.96) -> tuple[float, float]:
    if total == 0:
        return (0.0, 1.0)
    p = successes / total
    denom = 1.0 + z**2 / total
    center = (p + z**2 / (2 * total)) / denom
    half = z * np.sqrt(p * (1 - p) / total + z**2 / (4 * total**2)) / denom
    return (float(center - half), float(center + half))


def _coverage_rep(config_data: dict, rep: int) -> dict:
    config = ExperimentConfig.from_dict(config_data)
    start = time.perf_counter()
    try:
        model = config.build_model()
        rep_seed = config.base_seed + rep
        traj = simulate(model, config.n, config.x0, derive_seed(rep_seed, 1))
        p_hat = estimate_transition_density(
            traj, bandwidth=config.p_hat_bandwidth
        )
        cb = build_band(traj, p_hat, config.band, seed=derive_seed(rep_seed, 2))
        if config.truth_mode == "self":
            truth = cb.estimate
        else:
            truth = model.stationary_values(cb.grid)
        covered = coverage_check(cb, truth)
        return {
            "rep": rep,
            "covered": covered,
            "c_hat": cb.c_hat,
            "block_count": cb.block_count,
            "beta_hat": cb.beta_hat,
            "runtime": time.perf_counter() - start,
            "error": None,
        }
    except Exception as exc:  # per-rep isolation: record, do not abort
        return {
            "rep": rep,
            "covered": None,
            "c_hat": None,
            "block_count": None,
            "beta_hat": None,
            "runtime": time.perf_counter() - start,
            "error": f"{type(exc).__name__}: {exc}",
        }


def run_coverage_experiment(config: ExperimentConfig) -> ExperimentReport:
    """R independent replications of simulate -> estimate -> band -> check.

    Per-rep errors are recorded, not fatal; more than 10% failed
    replications fails the whole experiment. Output files (when out_dir is
    set) are byte-identical for any worker count.
    """
    data = config.to_dict()
    reps = range(config.replications)
    if config.workers > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            results = list(pool.map(_coverage_rep, [data] * config.replications, reps))
    else:
        results = [_coverage_rep(data, r) for r in reps]
    results.sort(key=lambda r: r["rep"])
    records = tuple(RepRecord(**r) for r in results)
    failed = sum(1 for r in records if r.error is not None)
    if failed > 0.1 * config.replications:
        raise NumericError(
            f"experiment failed: {failed} of {config.replications} replications errored; "
            f"first error: {next(r.error for r in records if r.error)}"
        )
    done = [r for r in records if r.error is None]
    successes = sum(1 for r in done if r.covered)
    rate = successes / len(done) if done else float("nan")
    low, high = wilson_interval(successes, len(done))
    report = ExperimentReport(
        records=records,
        coverage_rate=rate,
        wilson_low=low,
        wilson_high=high,
        n_failed=failed,
        config=data,
    )
    if config.out_dir:
        _write_report(report, Path(config.out_dir))
    return report


def _write_report(report: ExperimentReport, out_dir: Path) -> None:
    # report.csv holds only deterministic columns so outputs stay
    # byte-identical across worker counts; wall times go to timings.csv.
    out_dir.mkdir(parents=True, exist_ok=True)
    import csv

    with open(out_dir / "report.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["rep", "covered", "c_hat", "i_n_hat", "beta_hat", "error"])
        for r in report.records:
            writer.writerow(
                [
                    r.rep,
                    "" if r.covered is None else int(r.covered),
                    "" if r.c_hat is None else repr(float(r.c_hat)),
                    "" if r.block_count is None else r.block_count,
                    "" if r.beta_hat is None else repr(float(r.beta_hat)),
                    r.error or "",
                ]
            )
    with open(out_dir / "timings.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["rep", "runtime"])
        for r in report.records:
            writer.writerow([r.rep, repr(round(float(r.runtime), 6))])
    fileio.dump_json(report.to_dict(), out_dir / "summary.json")


# ---------------------------------------------------------------------------
# diagnostics driver


class _LabelFunction:
    """State function on finite labels given by a value per label (picklable)."""

    def __init__(self, values):
        self.values = np.asarray(values, dtype=np.float64)

    def __call__(self, s):
        return self.values[np.asarray(s, dtype=np.int64)]


def _reference_beta(model: MarkovModel) -> float:
    if model.kind == "finite":
        return atom_mean_return_time(model)
    # Kac: 1 / (theta pi(S)); presets use S = [0, 1] where pi(S) = 1
    return 1.0 / model.theta


def run_diagnostics(
    config_model,
    n: int,
    base_seed: int = 0,
    delta_n_list: tuple = (),
    delta_seeds: int = 0,
    delta_oracle_blocks: int = 200_000,
) -> dict:
    """Regeneration health report for an analytic preset with known pi, beta.

    Emits the block-mean identity check, the block-count concentration
    scale, KS/correlation regeneration diagnostics, and (when requested)
    the covariance-diagnostic decay table over delta_n_list.
    """
    model = _build_model(config_model)
    beta = _reference_beta(model)
    traj = simulate(model, n, 0 if model.kind == "finite" else 0.5,
                    derive_seed(base_seed, 1))
    split = exact_split(traj, model, derive_seed(base_seed, 2))
    decomp = extract_blocks(split)

    report: dict = {
        "model": model.tag,
        "n": n,
        "beta_ref": beta,
        "block_count": decomp.block_count,
        "beta_hat": decomp.beta_hat,
    }

    # block-mean identity E[fs(B)] = beta * pi f
    if model.kind == "finite":
        f = _LabelFunction(np.eye(model.n_states)[0])
        pi_f = float(model.stationary_values(0))
        f_name = "indicator(state 0)"
    else:
        def f(s):
            return np.asarray(s, dtype=np.float64)
        from scipy.integrate import simpson

        grid = model.grid
        pi_f = float(simpson(grid * model.stationary_values(grid), x=grid))
        f_name = "identity"
    table = FunctionTable.from_callables([f])
    from .estimation import block_sums_matrix

    sums = block_sums_matrix(decomp, table)[0]
    target = beta * pi_f
    se = float(sums.std(ddof=1) / np.sqrt(decomp.block_count))
    report["block_mean"] = {
        "function": f_name,
        "mean": float(sums.mean()),
        "target": target,
        "se": se,
        "z": float((sums.mean() - target) / se) if se > 0 else 0.0,
        "pass": bool(abs(sums.mean() - target) <= 3 * se),
    }

    # block-count concentration
    scale = abs(decomp.block_count - n / beta) / np.sqrt(n)
    report["concentration"] = {
        "scale": float(scale),
        "envelope": CONCENTRATION_ENVELOPE,
        "pass": bool(scale <= CONCENTRATION_ENVELOPE),
    }

    nu_density = None if model.kind == "finite" else model.nu_density
    report["regeneration"] = regeneration_diagnostics(
        decomp, nu_density=nu_density, beta_ref=beta
    )

    if delta_n_list and delta_seeds:
        report["delta_decay"] = _delta_decay_table(
            model, delta_n_list, delta_seeds, base_seed, delta_oracle_blocks
        )
    return report


def finite_delta_table(
    model: MarkovModel,
) -> tuple[FunctionTable, np.ndarray, np.ndarray]:
    """Default function table, pi f centers, and raw values for Delta."""
    if model.kind != "finite":
        raise ArgumentError("the Delta diagnostic needs a finite analytic model")
    k = model.n_states
    pi = np.asarray([float(model.stationary_values(s)) for s in range(k)])
    rows = [np.eye(k)[s] for s in range(k)]
    rows.append(np.arange(k, dtype=np.float64))
    rows.append(np.arange(k, dtype=np.float64) * 2.0 - 0.5)
    values = np.stack(rows)
    table = FunctionTable.from_callables([_LabelFunction(v) for v in values])
    centers = values @ pi
    return table, centers, values


def oracle_block_covariance(
    model: MarkovModel, values: np.ndarray, centers: np.ndarray,
    n_blocks: int, seed: int,
) -> np.ndarray:
    """Cov of centered block sums from independently regenerated blocks."""
    counts, lengths = independent_block_counts(model, n_blocks, seed)
    sums = counts.astype(np.float64) @ values.T  # (blocks, funcs)
    centered = sums - np.outer(lengths.astype(np.float64), centers)
    return centered.T @ centered / n_blocks


def _delta_decay_table(model, n_list, seeds, base_seed, oracle_blocks) -> dict:
    table, centers, values = finite_delta_table(model)
    beta = atom_mean_return_time(model)
    oracle = oracle_block_covariance(
        model, values, centers, oracle_blocks, derive_seed(base_seed, 90)
    )
    from .estimation import delta_diagnostic

    rows = []
    for n in n_list:
        deltas = []
        for s in range(seeds):
            t = simulate_chain(model, n, 0, derive_seed(base_seed, 91, n, s))
            d = extract_blocks(exact_split(t, model, derive_seed(base_seed, 92, n, s)))
            if d.block_count == 0:
                continue
            deltas.append(
                delta_diagnostic(d, table, oracle, beta, centering=centers)
            )
        rows.append({"n": int(n), "median_delta": float(np.median(deltas)),
                     "seeds": len(deltas)})
    medians = [r["median_delta"] for r in rows]
    ratios = [medians[i + 1] / medians[i] for i in range(len(medians) - 1)]
    return {
        "rows": rows,
        "monotone_decreasing": bool(all(b < a for a, b in zip(medians, medians[1:]))),
        "ratios": ratios,
    }
