"""Nummelin splitting and regenerative block extraction.

Flags are drawn conditionally on the observed path: Bern(theta nu(x_{t+1}) /
p(x_t, x_{t+1})) when x_t lies in the small set and Bern(theta) otherwise.
A regeneration is a visit to the atom S x {1}, i.e. a time t with x_t in S
and flag 1; off-S coin successes never cut blocks. Flags run over
t = 0..n-2 since the flag at t needs x_{t+1}.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import stats

from .chain import MarkovModel, Trajectory, finite_stationary
from .errors import (
    ArgumentError,
    ImpossibleTransitionError,
    MinorizationError,
    RegenbootError,
)

CLAMP_TOL = 1e-9


class ClippingViolationError(RegenbootError, ValueError):
    """The estimated transition density was non-positive at an observed pair."""


@dataclass(frozen=True)
class SplitTrajectory:
    """Observed states plus regeneration flags (exact or approximate)."""

    samples: np.ndarray
    flags: np.ndarray
    in_small_set: np.ndarray
    mode: str
    seed: int | None = None

    def __post_init__(self):
        samples = np.asarray(self.samples)
        flags = np.asarray(self.flags, dtype=bool)
        in_s = np.asarray(self.in_small_set, dtype=bool)
        if flags.shape[0] > samples.shape[0]:
            raise ArgumentError("flags may not outnumber samples")
        if in_s.shape[0] < flags.shape[0]:
            raise ArgumentError("need small-set membership for every flagged index")
        for name, arr in (("samples", samples), ("flags", flags), ("in_small_set", in_s)):
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)

    @property
    def n(self) -> int:
        return self.samples.shape[0]

    def atom_flags(self) -> np.ndarray:
        """Regeneration indicator: flag 1 at a small-set state."""
        m = self.flags.shape[0]
        return self.flags & self.in_small_set[:m]


@dataclass(frozen=True)
class Block:
    """One regenerative block: a contiguous slice of the parent trajectory."""

    values: np.ndarray
    start_index: int
    end_index: int

    @property
    def length(self) -> int:
        return self.end_index - self.start_index + 1


@dataclass(frozen=True)
class BlockDecomposition:
    """Head, complete blocks, and tail of a split trajectory."""

    samples: np.ndarray
    head: np.ndarray
    blocks: tuple
    tail: np.ndarray
    block_count: int
    beta_hat: float
    regeneration_times: np.ndarray

    @property
    def n(self) -> int:
        return self.samples.shape[0]

    @property
    def degenerate(self) -> bool:
        return self.block_count == 0

    @property
    def starts(self) -> np.ndarray:
        """First sample index of each complete block."""
        return self.regeneration_times[:-1] + 1

    @property
    def ends(self) -> np.ndarray:
        """Last sample index (inclusive) of each complete block."""
        return self.regeneration_times[1:]

    @property
    def lengths(self) -> np.ndarray:
        return self.ends - self.starts + 1

    def block_values(self) -> np.ndarray:
        """All samples belonging to complete blocks, concatenated."""
        if self.block_count == 0:
            return self.samples[:0]
        return self.samples[self.starts[0] : self.ends[-1] + 1]


def _success_probabilities(theta, nu_y, p_xy, in_s, estimated):
    p_xy = np.asarray(p_xy, dtype=np.float64)
    bad = p_xy <= 0.0
    if np.any(bad):
        t = int(np.flatnonzero(bad)[0])
        if estimated:
            raise ClippingViolationError(
                f"estimated transition density non-positive at observed pair t={t}"
            )
        raise ImpossibleTransitionError(
            f"transition density vanishes at observed pair t={t}"
        )
    probs = np.where(in_s, theta * nu_y / p_xy, theta)
    over = probs > 1.0 + CLAMP_TOL
    if np.any(over):
        t = int(np.flatnonzero(over)[0])
        raise MinorizationError(
            f"success probability {probs[t]:.6g} > 1 at t={t}: "
            "minorization (or the clipping condition) is violated"
        )
    return np.minimum(probs, 1.0)


def exact_split(traj: Trajectory, model: MarkovModel, seed: int) -> SplitTrajectory:
    """Draw regeneration flags using the model's true transition density."""
    if model.m != 1:
        raise ArgumentError("exact splitting is implemented for m = 1 only")
    if not model.has_transition_density():
        raise ArgumentError(
            "exact splitting needs a transition density; use approximate_split"
        )
    x = traj.samples[:-1]
    y = traj.samples[1:]
    in_s = model.in_small_set(x)
    p = model.transition_density(x, y)
    nu_y = model.nu_density(y)
    probs = _success_probabilities(model.theta, nu_y, p, in_s, estimated=False)
    u = np.random.default_rng(seed).random(x.shape[0])
    flags = u < probs
    return SplitTrajectory(
        samples=traj.samples,
        flags=flags,
        in_small_set=np.concatenate([in_s, model.in_small_set(traj.samples[-1:])]),
        mode="exact",
        seed=seed,
    )


def approximate_split(
    traj: Trajectory,
    p_hat,
    small_set: tuple,
    theta: float,
    nu_density: Callable | None,
    seed: int,
) -> SplitTrajectory:
    """Draw regeneration flags using an estimated, clipped transition density.

    ``p_hat`` must expose ``evaluate(x, y)``; ``nu_density`` defaults to the
    uniform density on the small set. Shares the exact_split sampler and RNG
    stream, so feeding the true density reproduces exact_split bit for bit.
    """
    lo, hi = float(small_set[0]), float(small_set[1])
    if nu_density is None:
        def nu_density(y):
            y = np.asarray(y, dtype=np.float64)
            return np.where((y >= lo) & (y <= hi), 1.0 / (hi - lo), 0.0)
    x = traj.samples[:-1]
    y = traj.samples[1:]
    in_s = (x >= lo) & (x <= hi)
    p = p_hat.evaluate(x, y)
    nu_y = np.asarray(nu_density(y), dtype=np.float64)
    probs = _success_probabilities(theta, nu_y, p, in_s, estimated=True)
    u = np.random.default_rng(seed).random(x.shape[0])
    flags = u < probs
    last_in_s = (traj.samples[-1:] >= lo) & (traj.samples[-1:] <= hi)
    return SplitTrajectory(
        samples=traj.samples,
        flags=flags,
        in_small_set=np.concatenate([in_s, last_in_s]),
        mode="approximate",
        seed=seed,
    )


def extract_blocks(split: SplitTrajectory) -> BlockDecomposition:
    """Cut the trajectory at regeneration times into head, blocks, and tail.

    With regeneration times sigma(0) < sigma(1) < ... the head is
    X_0..X_{sigma(0)}, block i spans X_{sigma(i-1)+1}..X_{sigma(i)}, and the
    tail is everything after the last regeneration. Zero regenerations give
    an all-head decomposition with block_count 0 (flagged, not an error).
    """
    samples = split.samples
    n = samples.shape[0]
    sigma = np.flatnonzero(split.atom_flags())
    if sigma.shape[0] == 0:
        return BlockDecomposition(
            samples=samples,
            head=samples,
            blocks=(),
            tail=samples[:0],
            block_count=0,
            beta_hat=float("nan"),
            regeneration_times=sigma,
        )
    head = samples[: sigma[0] + 1]
    tail = samples[sigma[-1] + 1 :]
    blocks = tuple(
        Block(values=samples[s : e + 1], start_index=int(s), end_index=int(e))
        for s, e in zip(sigma[:-1] + 1, sigma[1:])
    )
    count = sigma.shape[0] - 1
    return BlockDecomposition(
        samples=samples,
        head=head,
        blocks=blocks,
        tail=tail,
        block_count=count,
        beta_hat=n / count if count > 0 else float("nan"),
        regeneration_times=sigma,
    )


def regeneration_diagnostics(
    decomp: BlockDecomposition,
    nu_density: Callable | None = None,
    nu_support: tuple = (0.0, 1.0),
    beta_ref: float | None = None,
    min_blocks: int = 30,
) -> dict:
    """Distributional health checks of a block decomposition.

    Reports the KS test of block first-components against nu (continuous
    state spaces only), the lag-1 correlation of block lengths (0 by
    convention for constant lengths), the block-count concentration scale
    |i_n - n/beta_ref| / sqrt(n) when a reference beta is supplied, and the
    block-length histogram. Distributional entries need >= min_blocks blocks.
    """
    report: dict = {
        "block_count": int(decomp.block_count),
        "beta_hat": float(decomp.beta_hat),
        "available": bool(decomp.block_count >= min_blocks),
    }
    if beta_ref is not None:
        report["concentration"] = float(
            abs(decomp.block_count - decomp.n / beta_ref) / np.sqrt(decomp.n)
        )
    if decomp.block_count > 0:
        lengths = decomp.lengths
        uniq, cnts = np.unique(lengths, return_counts=True)
        report["length_histogram"] = {int(k): int(v) for k, v in zip(uniq, cnts)}
    if not report["available"]:
        report["ks_statistic"] = None
        report["ks_pvalue"] = None
        report["length_lag1_correlation"] = None
        report["unavailable_reason"] = (
            f"need at least {min_blocks} blocks, have {decomp.block_count}"
        )
        return report
    lengths = decomp.lengths.astype(np.float64)
    if lengths.std() == 0.0 or lengths[:-1].std() == 0.0 or lengths[1:].std() == 0.0:
        report["length_lag1_correlation"] = 0.0
    else:
        report["length_lag1_correlation"] = float(
            np.corrcoef(lengths[:-1], lengths[1:])[0, 1]
        )
    first = decomp.samples[decomp.starts]
    if np.issubdtype(first.dtype, np.integer):
        report["ks_statistic"] = None
        report["ks_pvalue"] = None
        report["ks_note"] = "KS unavailable on a discrete state space"
    else:
        lo, hi = nu_support
        if nu_density is None:
            res = stats.kstest(first, "uniform", args=(lo, hi - lo))
        else:
            grid = np.linspace(lo, hi, 2049)
            dens = np.asarray(nu_density(grid), dtype=np.float64)
            cdf_vals = np.concatenate(
                [[0.0], np.cumsum((dens[1:] + dens[:-1]) / 2.0 * np.diff(grid))]
            )
            cdf_vals /= cdf_vals[-1]
            res = stats.kstest(first, lambda q: np.interp(q, grid, cdf_vals))
        report["ks_statistic"] = float(res.statistic)
        report["ks_pvalue"] = float(res.pvalue)
    return report


# ---------------------------------------------------------------------------
# split-chain analytics for finite models (used by oracles and diagnostics)


def _stripped_kernel(model: MarkovModel):
    """Regeneration probability r(x) and post-no-regeneration kernel rows."""
    k = model.n_states
    p = model.matrix
    nu = model.nu_values
    theta = model.theta
    in_s = np.array([s in model.small_set for s in range(k)])
    r = np.where(in_s, theta, 0.0)
    q = np.array(p, dtype=np.float64)
    for s in range(k):
        if in_s[s]:
            if theta >= 1.0:
                q[s] = nu  # unused: regeneration is certain from s
            else:
                q[s] = (p[s] - theta * nu) / (1.0 - theta)
    return r, q


def atom_mean_return_time(model: MarkovModel) -> float:
    """E[tau] of the split chain's atom by first-step analysis (finite models)."""
    if model.kind != "finite":
        raise ArgumentError("first-step analysis needs a finite model")
    r, q = _stripped_kernel(model)
    k = model.n_states
    # h(x) = (1 - r(x)) (1 + sum_y q(x,y) h(y)); expected steps to next regen.
    a = np.eye(k) - (1.0 - r)[:, None] * q
    h = np.linalg.solve(a, 1.0 - r)
    return 1.0 + float(model.nu_values @ h)


def kac_mean_return_time(model: MarkovModel) -> float:
    """E[tau] via Kac's theorem: 1 / (theta pi(S)) for m = 1."""
    if model.kind != "finite":
        raise ArgumentError("Kac cross-check needs a finite model")
    pi = finite_stationary(model.matrix)
    mass = sum(pi[s] for s in model.small_set)
    return 1.0 / (model.theta * mass)


def block_functional_mean(model: MarkovModel, f_values) -> float:
    """E[sum of f over one block] by first-step analysis (finite models)."""
    if model.kind != "finite":
        raise ArgumentError("first-step analysis needs a finite model")
    f = np.asarray(f_values, dtype=np.float64)
    r, q = _stripped_kernel(model)
    k = model.n_states
    # w(x) = f(x) + (1 - r(x)) sum_y q(x,y) w(y)
    a = np.eye(k) - (1.0 - r)[:, None] * q
    w = np.linalg.solve(a, f)
    return float(model.nu_values @ w)


def independent_block_counts(
    model: MarkovModel, n_blocks: int, seed: int, chunk: int = 1 << 20
) -> tuple[np.ndarray, np.ndarray]:
    """State-occupancy counts of iid regenerative blocks (finite models, m=1).

    Simulates the split chain started from the regeneration law nu, so every
    segment between consecutive atom visits (including the first) is a
    complete block. Returns (counts, lengths) with counts of shape
    (n_blocks, n_states).
    """
    if model.kind != "finite":
        raise ArgumentError("independent block sampling needs a finite model")
    from .kernels import finite_chain_chunk

    k = model.n_states
    rng = np.random.default_rng(seed)
    cum = np.cumsum(model.matrix, axis=1)
    cum[:, -1] = 1.0
    cum = np.ascontiguousarray(cum)
    in_s = np.array([s in model.small_set for s in range(k)])
    # success probability per observed pair (x, y)
    with np.errstate(divide="ignore", invalid="ignore"):
        q_table = np.where(
            in_s[:, None],
            np.minimum(model.theta * model.nu_values[None, :] / model.matrix, 1.0),
            model.theta,
        )
    q_table = np.nan_to_num(q_table, nan=0.0, posinf=0.0)
    counts = np.empty((n_blocks, k), dtype=np.int64)
    lengths = np.empty(n_blocks, dtype=np.int64)
    carry = np.zeros(k, dtype=np.int64)
    prev = int(np.searchsorted(np.cumsum(model.nu_values), rng.random(), side="right"))
    collected = 0
    states_buf = np.empty(chunk, dtype=np.int64)
    while collected < n_blocks:
        last = finite_chain_chunk(cum, prev, rng.random(chunk), states_buf)
        seq = np.empty(chunk + 1, dtype=np.int64)
        seq[0] = prev
        seq[1:] = states_buf
        probs = q_table[seq[:-1], seq[1:]]
        atom = (rng.random(chunk) < probs) & in_s[seq[:-1]]
        stream = seq[:chunk]
        pos = np.flatnonzero(atom)
        if pos.shape[0] > 0:
            cs = np.cumsum(stream[:, None] == np.arange(k)[None, :], axis=0)
            at_pos = cs[pos]
            seg_counts = np.diff(at_pos, axis=0, prepend=np.zeros((1, k), dtype=np.int64))
            seg_counts[0] += carry
            take = min(pos.shape[0], n_blocks - collected)
            counts[collected : collected + take] = seg_counts[:take]
            lengths[collected : collected + take] = seg_counts[:take].sum(axis=1)
            collected += pos.shape[0]
            carry = cs[-1] - at_pos[-1]
        else:
            carry = carry + np.bincount(stream, minlength=k)
        prev = int(last)
    return counts, lengths
