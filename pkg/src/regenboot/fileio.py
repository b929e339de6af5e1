"""CSV and JSON serialization of trajectories, blocks, estimates, and bands.

Floats are written with shortest round-trip repr so outputs are
byte-identical across runs and worker counts.
"""

from __future__ import annotations

import csv
import json

import numpy as np

from .band import ConfidenceBand
from .bootstrap import BootstrapDraws, SupStatistic
from .chain import Trajectory
from .errors import ArgumentError
from .estimation import TransitionDensityEstimate
from .splitting import BlockDecomposition


def _fmt(v) -> str:
    return repr(float(v))


def dump_trajectory(traj: Trajectory, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t", "x"])
        if np.issubdtype(traj.samples.dtype, np.integer):
            for t, x in enumerate(traj.samples):
                writer.writerow([t, int(x)])
        else:
            for t, x in enumerate(traj.samples):
                writer.writerow([t, _fmt(x)])


def load_trajectory(path, seed: int = -1, model_tag: str = "") -> Trajectory:
    data = np.genfromtxt(path, delimiter=",", names=True)
    if data.dtype.names != ("t", "x"):
        raise ArgumentError(f"{path}: expected CSV header 't,x'")
    samples = np.atleast_1d(data["x"])
    if np.all(samples == np.round(samples)) and np.abs(samples).max() < 2**31:
        as_int = samples.astype(np.int64)
        if np.array_equal(as_int.astype(np.float64), samples):
            samples = as_int
    return Trajectory(samples, seed=seed, model_tag=model_tag)


def dump_blocks(decomp: BlockDecomposition, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["block_id", "start", "end", "length"])
        for i, b in enumerate(decomp.blocks, start=1):
            writer.writerow([i, b.start_index, b.end_index, b.length])


def dump_estimate(est: TransitionDensityEstimate, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["x", "y", "p_hat"])
        for i, x in enumerate(est.grid):
            for j, y in enumerate(est.grid):
                writer.writerow([_fmt(x), _fmt(y), _fmt(est.values[i, j])])


def dump_draws(draws: BootstrapDraws, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["rep", "function_index", "value"])
        for r in range(draws.values.shape[0]):
            for j in range(draws.values.shape[1]):
                writer.writerow([r, j, _fmt(draws.values[r, j])])


def dump_sup(sup: SupStatistic, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["rep", "sup"])
        for r, v in enumerate(sup.values):
            writer.writerow([r, _fmt(v)])


def dump_band(cb: ConfidenceBand, csv_path, summary_path=None) -> None:
    with open(csv_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["x", "estimate", "sigma_hat", "lower", "upper"])
        for i in range(cb.grid.shape[0]):
            writer.writerow(
                [
                    _fmt(cb.grid[i]),
                    _fmt(cb.estimate[i]),
                    _fmt(cb.sigma_hat[i]),
                    _fmt(cb.lower[i]),
                    _fmt(cb.upper[i]),
                ]
            )
    if summary_path is not None:
        summary = {
            "alpha": cb.alpha,
            "c_hat": cb.c_hat,
            "i_n_hat": cb.block_count,
            "beta_hat": cb.beta_hat,
            "n": cb.n,
            "h": cb.h,
        }
        with open(summary_path, "w") as fh:
            json.dump(summary, fh, indent=2)


def dump_json(obj, path) -> None:
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, default=_json_default)


def _json_default(v):
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (np.floating,)):
        return float(v)
    if isinstance(v, np.ndarray):
        return v.tolist()
    if isinstance(v, (np.bool_,)):
        return bool(v)
    raise TypeError(f"not JSON serializable: {type(v)}")
