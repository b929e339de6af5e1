"""Uniform confidence band for the stationary density of a reflected diffusion.

Pipeline: approximate split -> blocks -> per-location KDE and studentizer ->
studentized kernel table -> wild bootstrap -> abs-sup quantile -> envelopes.
The studentizer makes the band's quantile scale-free across locations, and
the expected block mass cancels, so beta never enters the band itself.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bootstrap import bootstrap_quantile, sup_statistic, wild_bootstrap_draws
from .errors import ArgumentError, DegenerateStudentizerError, NoBlocksError
from .estimation import FunctionTable, KernelSpec, empirical_covariance, kde
from .seeds import derive_seed
from .splitting import BlockDecomposition, approximate_split, extract_blocks

MIN_BLOCKS = 30


@dataclass(frozen=True)
class BandConfig:
    """Evaluation grid, kernel, and bootstrap settings for one band.

    The bandwidth is h = n^{-bandwidth_exponent}; the default exponent
    undersmooths (1/5 + 0.02) so KDE bias is negligible next to the band
    width. When ``eval_grid`` is omitted it is built with margin
    support * h from the boundary and spacing h / grid_spacing_factor
    (kernel Lipschitz continuity keeps the off-grid sup gap small).
    """

    alpha: float
    kernel_name: str = "triangular"
    bandwidth_exponent: float = 0.22
    bootstrap_reps: int = 2000
    eval_grid: np.ndarray | None = None
    grid_spacing_factor: float = 5.0
    sigma_floor: float = 1e-8
    min_blocks: int = MIN_BLOCKS

    def __post_init__(self):
        if not (0.0 < self.alpha < 1.0):
            raise ArgumentError("alpha must lie in (0, 1)")
        if self.bootstrap_reps < 1:
            raise ArgumentError("bootstrap_reps must be positive")
        if self.eval_grid is not None:
            arr = np.asarray(self.eval_grid, dtype=np.float64)
            arr.flags.writeable = False
            object.__setattr__(self, "eval_grid", arr)

    def bandwidth(self, n: int) -> float:
        return float(n) ** (-self.bandwidth_exponent)

    def resolve(self, n: int) -> tuple[KernelSpec, np.ndarray]:
        """Kernel (with bandwidth for this n) and validated evaluation grid."""
        h = self.bandwidth(n)
        kernel = KernelSpec(self.kernel_name, h=h)
        margin = kernel.support * h
        if self.eval_grid is not None:
            grid = self.eval_grid
        else:
            if 1.0 - 2.0 * margin <= 0:
                raise ArgumentError("bandwidth too large: no interior grid remains")
            count = int(np.ceil((1.0 - 2.0 * margin) / (h / self.grid_spacing_factor))) + 1
            grid = np.linspace(margin, 1.0 - margin, count)
        if grid.min() < margin - 1e-12 or grid.max() > 1.0 - margin + 1e-12:
            raise ArgumentError(
                "evaluation grid must stay inside [0, 1] with margin >= "
                "kernel support times bandwidth"
            )
        return kernel, grid

    def to_dict(self) -> dict:
        out = {
            "alpha": self.alpha,
            "kernel": self.kernel_name,
            "bandwidth_exponent": self.bandwidth_exponent,
            "bootstrap_reps": self.bootstrap_reps,
            "grid_spacing_factor": self.grid_spacing_factor,
            "sigma_floor": self.sigma_floor,
            "min_blocks": self.min_blocks,
        }
        if self.eval_grid is not None:
            out["eval_grid"] = self.eval_grid.tolist()
        return out

    @staticmethod
    def from_dict(data: dict) -> "BandConfig":
        return BandConfig(
            alpha=float(data["alpha"]),
            kernel_name=data.get("kernel", "triangular"),
            bandwidth_exponent=float(data.get("bandwidth_exponent", 0.22)),
            bootstrap_reps=int(data.get("bootstrap_reps", 2000)),
            eval_grid=data.get("eval_grid"),
            grid_spacing_factor=float(data.get("grid_spacing_factor", 5.0)),
            sigma_floor=float(data.get("sigma_floor", 1e-8)),
            min_blocks=int(data.get("min_blocks", MIN_BLOCKS)),
        )


@dataclass(frozen=True)
class ConfidenceBand:
    """Per-location estimate, studentizer, and envelopes, plus the quantile."""

    grid: np.ndarray
    estimate: np.ndarray
    sigma_hat: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    c_hat: float
    alpha: float
    n: int
    h: float
    block_count: int
    beta_hat: float
    seed: int | None = None

    def __post_init__(self):
        for name in ("grid", "estimate", "sigma_hat", "lower", "upper"):
            arr = np.asarray(getattr(self, name), dtype=np.float64)
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)

    def half_width(self) -> np.ndarray:
        return self.c_hat * self.sigma_hat / np.sqrt(self.n)

    def sup_studentized_error(self, true_density) -> float:
        """sup_x sqrt(n) |estimate(x) - pi(x)| / sigma_hat(x)."""
        true_density = _aligned(self, true_density)
        return float(
            (np.sqrt(self.n) * np.abs(self.estimate - true_density) / self.sigma_hat).max()
        )


def _aligned(band: ConfidenceBand, true_density) -> np.ndarray:
    arr = np.asarray(true_density, dtype=np.float64)
    if arr.shape != band.grid.shape:
        raise ArgumentError(
            f"grid mismatch: band has {band.grid.shape[0]} locations, "
            f"density has {arr.shape}"
        )
    return arr


def sigma_hat(
    decomp: BlockDecomposition, kernel: KernelSpec, x: float, kde_value: float,
    sigma_floor: float = 0.0,
) -> float:
    """Pointwise studentizer at one location.

    The square root of n^{-1} sum_i {ws(B_i) - len(B_i) * kde_value}^2 where
    ws is the block sum of the location kernel; identical to the matching
    diagonal entry of the pi_hat-centered empirical block covariance.
    """
    if decomp.block_count == 0:
        raise NoBlocksError("sigma_hat needs at least one block")
    table = FunctionTable.from_kernel(kernel, np.array([float(x)]))
    gamma = empirical_covariance(decomp, table, centering=np.array([float(kde_value)]))
    value = float(np.sqrt(gamma[0, 0]))
    if value < sigma_floor:
        raise DegenerateStudentizerError(
            f"studentizer {value:.3e} below floor {sigma_floor:.3e} at x = {x}"
        )
    return value


def build_band(traj, p_hat, config: BandConfig, seed: int) -> ConfidenceBand:
    """Assemble the uniform confidence band from one trajectory.

    ``p_hat`` is the clipped transition density estimate driving the
    approximate split; its (theta, nu, S) are reused for the split so the
    clipping condition guarantees valid success probabilities.
    """
    n = traj.n
    kernel, grid = config.resolve(n)
    split = approximate_split(
        traj,
        p_hat,
        small_set=p_hat.small_set,
        theta=p_hat.theta,
        nu_density=p_hat.nu_density,
        seed=derive_seed(seed, 0),
    )
    decomp = extract_blocks(split)
    if decomp.block_count < config.min_blocks:
        raise NoBlocksError(
            f"too few blocks: have {decomp.block_count}, need >= {config.min_blocks}"
        )
    table = FunctionTable.from_kernel(kernel, grid)
    estimates = np.asarray(kde(traj, kernel, grid), dtype=np.float64)
    gamma = empirical_covariance(decomp, table, centering=estimates)
    sigmas = np.sqrt(np.clip(np.diag(gamma), 0.0, None))
    if sigmas.min() < config.sigma_floor:
        bad = grid[int(np.argmin(sigmas))]
        raise DegenerateStudentizerError(
            f"studentizer below floor {config.sigma_floor:.3e} at x = {bad:.4f}"
        )
    studentized = table.studentized(sigmas)
    draws = wild_bootstrap_draws(
        decomp,
        studentized,
        pi_hat=estimates / sigmas,
        reps=config.bootstrap_reps,
        seed=derive_seed(seed, 1),
    )
    c_hat = bootstrap_quantile(sup_statistic(draws, "abs"), config.alpha)
    half = c_hat * sigmas / np.sqrt(n)
    return ConfidenceBand(
        grid=grid,
        estimate=estimates,
        sigma_hat=sigmas,
        lower=estimates - half,
        upper=estimates + half,
        c_hat=c_hat,
        alpha=config.alpha,
        n=n,
        h=kernel.h,
        block_count=decomp.block_count,
        beta_hat=decomp.beta_hat,
        seed=seed,
    )


def coverage_check(band: ConfidenceBand, true_density) -> bool:
    """True iff lower(x) <= pi(x) <= upper(x) at every grid location."""
    pi = _aligned(band, true_density)
    return bool(np.all((band.lower <= pi) & (pi <= band.upper)))
