"""Gaussian wild regenerative block bootstrap.

Replication r multiplies the centered block sums by a fresh iid standard
normal vector drawn from its own RNG substream, so any replication is
reproducible independently of the total count and replications can run in
any order.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ArgumentError, InsufficientRepsError, NoBlocksError
from .estimation import FunctionTable, block_sums_matrix
from .splitting import BlockDecomposition

_EIGEN_FLOOR = 1e-8


@dataclass(frozen=True)
class BootstrapDraws:
    """Multiplier bootstrap statistics, one row per replication."""

    values: np.ndarray  # shape (reps, functions)
    seed: int
    centering: np.ndarray  # per-function centering used (pi_hat f)

    def __post_init__(self):
        for name in ("values", "centering"):
            arr = np.asarray(getattr(self, name), dtype=np.float64)
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)

    @property
    def reps(self) -> int:
        return self.values.shape[0]


@dataclass(frozen=True)
class SupStatistic:
    """Per-replication supremum over the function table."""

    values: np.ndarray
    mode: str

    def __post_init__(self):
        if self.mode not in ("signed", "abs"):
            raise ArgumentError("sup mode must be 'signed' or 'abs'")
        arr = np.asarray(self.values, dtype=np.float64)
        arr.flags.writeable = False
        object.__setattr__(self, "values", arr)

    @property
    def reps(self) -> int:
        return self.values.shape[0]


def wild_bootstrap_draws(
    decomp: BlockDecomposition,
    f_table: FunctionTable,
    pi_hat,
    reps: int,
    seed: int,
) -> BootstrapDraws:
    """Evaluate n^{-1/2} sum_i zeta_i {fs(B_i) - len(B_i) pi_hat f} per rep.

    ``pi_hat`` holds the per-function empirical means computed from the same
    trajectory. Conditional on the data each entry is exactly centered
    Gaussian with covariance equal to the pi_hat-centered block covariance.
    """
    if decomp.block_count == 0:
        raise NoBlocksError("cannot bootstrap an empty decomposition")
    if reps < 1:
        raise ArgumentError("need at least one replication")
    pi_hat = np.asarray(pi_hat, dtype=np.float64)
    sums = block_sums_matrix(decomp, f_table)
    if pi_hat.shape[0] != sums.shape[0]:
        raise ArgumentError("one pi_hat value per table function is required")
    centered = (sums - np.outer(pi_hat, decomp.lengths)).T / np.sqrt(decomp.n)
    n_blocks = centered.shape[0]
    out = np.empty((reps, sums.shape[0]))
    children = np.random.SeedSequence(seed).spawn(reps)
    for r in range(reps):
        zeta = np.random.default_rng(children[r]).standard_normal(n_blocks)
        out[r] = zeta @ centered
    return BootstrapDraws(values=out, seed=seed, centering=pi_hat)


def sup_statistic(draws: BootstrapDraws, mode: str = "abs") -> SupStatistic:
    """Per-replication supremum: signed max or max of absolute values."""
    if draws.values.shape[1] < 1:
        raise ArgumentError("sup statistic needs at least one function")
    if mode == "signed":
        vals = draws.values.max(axis=1)
    elif mode == "abs":
        vals = np.abs(draws.values).max(axis=1)
    else:
        raise ArgumentError("sup mode must be 'signed' or 'abs'")
    return SupStatistic(values=vals, mode=mode)


def bootstrap_quantile(sup: SupStatistic, alpha: float) -> float:
    """Smallest draw z with #{draws > z} / reps <= alpha.

    This is the strict-inequality convention of the quantile
    inf{z : P(sup >= z) <= alpha}; common library quantiles use >= and can
    differ by one order statistic.
    """
    if not (0.0 < alpha < 1.0):
        raise ArgumentError("alpha must lie in (0, 1)")
    b = sup.reps
    if b < 1.0 / alpha:
        raise InsufficientRepsError(
            f"need at least {int(np.ceil(1.0 / alpha))} replications for "
            f"alpha = {alpha}, have {b}"
        )
    ordered = np.sort(sup.values)
    idx = b - 1 - int(np.floor(alpha * b + 1e-9))
    return float(ordered[idx])


def gaussian_oracle_sup(
    cov: np.ndarray, reps: int, seed: int, mode: str = "signed"
) -> SupStatistic:
    """Supremum draws of a centered Gaussian vector with the given covariance.

    Sampling goes through a symmetric eigendecomposition; tiny negative
    eigenvalues (within -1e-8 * trace) are clipped to zero, anything worse is
    rejected. Used by tests and the coverage harness as the reference
    Gaussian process on a finite function table.
    """
    cov = np.asarray(cov, dtype=np.float64)
    if cov.ndim != 2 or cov.shape[0] != cov.shape[1]:
        raise ArgumentError("covariance must be a square matrix")
    scale = max(np.abs(cov).max(), 1.0)
    if np.abs(cov - cov.T).max() > 1e-10 * scale:
        raise ArgumentError("invalid covariance: not symmetric")
    eigvals, eigvecs = np.linalg.eigh((cov + cov.T) / 2.0)
    floor = -_EIGEN_FLOOR * max(np.trace(cov), 0.0)
    if eigvals.min() < floor:
        raise ArgumentError(
            f"invalid covariance: eigenvalue {eigvals.min():.3e} below "
            f"tolerance {floor:.3e}"
        )
    root = eigvecs * np.sqrt(np.clip(eigvals, 0.0, None))
    rng = np.random.default_rng(seed)
    draws = rng.standard_normal((reps, cov.shape[0])) @ root.T
    if mode == "signed":
        vals = draws.max(axis=1)
    elif mode == "abs":
        vals = np.abs(draws).max(axis=1)
    else:
        raise ArgumentError("sup mode must be 'signed' or 'abs'")
    return SupStatistic(values=vals, mode=mode)


def kolmogorov_distance(a: np.ndarray, b: np.ndarray) -> float:
    """Two-sample sup-CDF distance between draw collections."""
    a = np.sort(np.asarray(a, dtype=np.float64))
    b = np.sort(np.asarray(b, dtype=np.float64))
    pooled = np.concatenate([a, b])
    ca = np.searchsorted(a, pooled, side="right") / a.shape[0]
    cb = np.searchsorted(b, pooled, side="right") / b.shape[0]
    return float(np.abs(ca - cb).max())
