"""Nonparametric estimators feeding the splitting and bootstrap pipelines.

Covers the clipped transition-density estimator used by approximate
splitting, kernel density estimation, block functionals, empirical means,
and empirical block covariances.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.integrate import simpson

from .chain import Trajectory, _bilinear, uniform_grid
from .errors import ArgumentError, NoBlocksError, NumericError
from .splitting import Block, BlockDecomposition

_POSITIVITY_FLOOR = 1e-12


# ---------------------------------------------------------------------------
# kernels


def _triangular(u):
    return np.maximum(0.0, 1.0 - np.abs(u))


def _epanechnikov(u):
    return 0.75 * np.maximum(0.0, 1.0 - np.asarray(u) ** 2)


_BASE_KERNELS = {
    "triangular": (_triangular, 1.0, 1.0, 1.0),
    "epanechnikov": (_epanechnikov, 1.0, 1.5, 0.75),
}


@dataclass(frozen=True)
class KernelSpec:
    """A symmetric, Lipschitz base kernel scaled by a bandwidth h."""

    name: str
    h: float
    fn: Callable = field(repr=False, default=None)
    support: float = 1.0
    lipschitz: float = 1.0
    sup: float = 1.0

    def __post_init__(self):
        if self.h <= 0:
            raise ArgumentError("bandwidth must be positive")
        if self.fn is None:
            try:
                fn, support, lipschitz, sup = _BASE_KERNELS[self.name]
            except KeyError:
                raise ArgumentError(
                    f"unknown kernel {self.name!r}; built-ins: {sorted(_BASE_KERNELS)}"
                ) from None
            object.__setattr__(self, "fn", fn)
            object.__setattr__(self, "support", support)
            object.__setattr__(self, "lipschitz", lipschitz)
            object.__setattr__(self, "sup", sup)

    def __call__(self, u):
        return self.fn(u)

    def scaled(self, x: float) -> Callable:
        """The location-x, bandwidth-h kernel w_{x,h}(.) = w((. - x)/h)/h."""
        h = self.h

        def w(s):
            return self.fn((np.asarray(s, dtype=np.float64) - x) / h) / h

        return w

    def validate(self, tol: float = 1e-6, points: int = 2049):
        u = np.linspace(-self.support, self.support, points)
        vals = self.fn(u)
        if np.abs(vals - self.fn(-u)).max() > 1e-12:
            raise ArgumentError("kernel must be symmetric")
        if vals.min() < 0:
            raise ArgumentError("kernel must be nonnegative")
        mass = simpson(vals, x=u)
        if abs(mass - 1.0) > tol:
            raise ArgumentError(f"kernel integrates to {mass:.8f}, expected 1")
        if not np.isfinite(vals).all():
            raise ArgumentError("kernel must be bounded")

    def to_dict(self) -> dict:
        return {"kernel": self.name, "h": self.h}

    @staticmethod
    def from_dict(data: dict) -> "KernelSpec":
        return KernelSpec(name=data["kernel"], h=float(data["h"]))


def default_bandwidth(n: int, exponent: float = 1.0 / 6.0) -> float:
    return float(n) ** (-exponent)


# ---------------------------------------------------------------------------
# function tables


@dataclass(frozen=True)
class FunctionTable:
    """A finite family of state functions, evaluable as a matrix.

    For kernel tables the rows are w_{x,h} for x on ``locations``; ``scales``
    divides each row (studentization). ``envelope`` dominates |f| pointwise
    for every f in the table.
    """

    functions: tuple
    locations: np.ndarray | None = None
    kernel: KernelSpec | None = None
    scales: np.ndarray | None = None
    envelope: Callable | None = None

    @property
    def size(self) -> int:
        if self.kernel is not None:
            return self.locations.shape[0]
        return len(self.functions)

    @staticmethod
    def from_callables(functions, envelope: Callable | None = None) -> "FunctionTable":
        return FunctionTable(functions=tuple(functions), envelope=envelope)

    @staticmethod
    def from_kernel(kernel: KernelSpec, locations) -> "FunctionTable":
        locations = np.asarray(locations, dtype=np.float64)

        def envelope(s):
            return np.full_like(np.asarray(s, dtype=np.float64), kernel.sup / kernel.h)

        return FunctionTable(
            functions=(), locations=locations, kernel=kernel, envelope=envelope
        )

    def studentized(self, scales) -> "FunctionTable":
        """Divide every table function by its per-function scale."""
        scales = np.asarray(scales, dtype=np.float64)
        if scales.shape[0] != self.size:
            raise ArgumentError("one scale per table function is required")
        if self.scales is not None:
            scales = scales * self.scales
        return FunctionTable(
            functions=self.functions,
            locations=self.locations,
            kernel=self.kernel,
            scales=scales,
            envelope=self.envelope,
        )

    def evaluate(self, samples) -> np.ndarray:
        """Matrix of f_j(X_t) values, shape (size, len(samples))."""
        samples = np.asarray(samples)
        if self.kernel is not None:
            h = self.kernel.h
            u = (samples[None, :] - self.locations[:, None]) / h
            vals = self.kernel.fn(u) / h
        else:
            vals = np.stack(
                [np.asarray(f(samples), dtype=np.float64) for f in self.functions]
            )
        if self.scales is not None:
            vals = vals / self.scales[:, None]
        if not np.isfinite(vals).all():
            raise NumericError("non-finite function value in table evaluation")
        return vals


# ---------------------------------------------------------------------------
# block functionals and empirical moments


def block_sum(f: Callable, block: Block) -> float:
    """Sum of f over the states of one block."""
    vals = np.asarray(f(block.values), dtype=np.float64)
    if not np.isfinite(vals).all():
        t = int(np.flatnonzero(~np.isfinite(vals))[0])
        raise NumericError(
            f"non-finite value of f at block position {t} "
            f"(sample index {block.start_index + t})"
        )
    return float(vals.sum())


def empirical_mean(traj, f: Callable) -> float:
    """Sample mean n^{-1} sum f(X_i) over the whole trajectory."""
    samples = traj.samples if isinstance(traj, Trajectory) else np.asarray(traj)
    if samples.shape[0] < 1:
        raise ArgumentError("empirical mean needs at least one sample")
    vals = np.asarray(f(samples), dtype=np.float64)
    if not np.isfinite(vals).all():
        raise NumericError("non-finite value of f in empirical mean")
    return float(vals.mean())


def block_sums_matrix(decomp: BlockDecomposition, table: FunctionTable) -> np.ndarray:
    """Block sums of every table function: shape (size, block_count)."""
    if decomp.block_count == 0:
        raise NoBlocksError("the decomposition contains no complete blocks")
    region = decomp.block_values()
    vals = table.evaluate(region)
    offsets = (decomp.starts - decomp.starts[0]).astype(np.intp)
    return np.add.reduceat(vals, offsets, axis=1)


def _gram(c: np.ndarray, n: int) -> np.ndarray:
    g = c @ c.T / n
    return (g + g.T) / 2.0


def empirical_covariance(
    decomp: BlockDecomposition,
    f_table: FunctionTable,
    centering=None,
) -> np.ndarray:
    """Empirical block covariance Gamma_hat over all table-function pairs.

    Gamma_hat(f, g) = n^{-1} sum_i fs(B_i) gs(B_i) where fs(B) is the block
    sum of f, replaced by fs(B) - len(B) * center(f) when per-function
    centering values (pi_hat f or pi f) are supplied.
    """
    sums = block_sums_matrix(decomp, f_table)
    if centering is not None:
        centering = np.asarray(centering, dtype=np.float64)
        if centering.shape[0] != sums.shape[0]:
            raise ArgumentError("one centering value per table function is required")
        sums = sums - np.outer(centering, decomp.lengths)
    return _gram(sums, decomp.n)


def kde(traj, kernel: KernelSpec, x) -> float | np.ndarray:
    """Kernel density estimate n^{-1} sum w_{x,h}(X_i) at one or many x."""
    samples = traj.samples if isinstance(traj, Trajectory) else np.asarray(traj)
    x_arr = np.atleast_1d(np.asarray(x, dtype=np.float64))
    u = (samples[None, :] - x_arr[:, None]) / kernel.h
    vals = kernel.fn(u).mean(axis=1) / kernel.h
    return float(vals[0]) if np.isscalar(x) or np.asarray(x).ndim == 0 else vals


def delta_diagnostic(
    decomp: BlockDecomposition,
    f_table: FunctionTable,
    oracle_cov: np.ndarray,
    beta: float,
    centering=None,
) -> float:
    """Max entrywise gap between beta^{-1} oracle covariance and Gamma_hat.

    The oracle covariance is Cov(fs(B), gs(B)) over the centered table
    functions; ``centering`` holds the matching per-function centers
    (pi f values) applied to the empirical side.
    """
    oracle_cov = np.asarray(oracle_cov, dtype=np.float64)
    gamma = empirical_covariance(decomp, f_table, centering=centering)
    if oracle_cov.shape != gamma.shape:
        raise ArgumentError(
            f"oracle covariance shape {oracle_cov.shape} does not match "
            f"table dimension {gamma.shape}"
        )
    return float(np.abs(oracle_cov / beta - gamma).max())


# ---------------------------------------------------------------------------
# transition density estimation


@dataclass(frozen=True)
class TransitionDensityEstimate:
    """Grid-valued clipped transition density estimate on [0, 1]^2.

    Satisfies values >= theta * nu on small-set rows, values <= clip_cap
    everywhere, and strict positivity at every grid point. Evaluation off
    the grid is bilinear.
    """

    grid: np.ndarray
    values: np.ndarray
    bandwidth: float
    theta: float
    clip_floor: np.ndarray
    clip_cap: float
    n_source: int
    small_set: tuple = (0.0, 1.0)
    boundary_correction: str = "reflection"

    def __post_init__(self):
        for name in ("grid", "values", "clip_floor"):
            arr = np.asarray(getattr(self, name), dtype=np.float64)
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)

    def evaluate(self, x, y) -> np.ndarray:
        return _bilinear(self.grid, self.values, x, y)

    def nu_density(self, y) -> np.ndarray:
        """The clip-floor density nu (floor / theta) interpolated in y."""
        return np.interp(
            np.asarray(y, dtype=np.float64), self.grid, self.clip_floor / self.theta
        )


def _reflected_kernel_matrix(grid: np.ndarray, data: np.ndarray, h: float) -> np.ndarray:
    """Triangular kernel weights with reflection at 0 and 1, shape (G, N)."""
    g = grid[:, None]
    out = _triangular((g - data[None, :]) / h)
    out += _triangular((g + data[None, :]) / h)
    out += _triangular((g - 2.0 + data[None, :]) / h)
    return out / h


def estimate_transition_density(
    traj,
    bandwidth: float | None = None,
    theta: float | None = None,
    nu_density: Callable | None = None,
    R: float | None = None,
    small_set: tuple = (0.0, 1.0),
    grid_points: int = 101,
) -> TransitionDensityEstimate:
    """Clipped Nadaraya-Watson estimate of the transition density on [0, 1]^2.

    The raw estimate is the ratio of a reflection-corrected pair KDE to the
    matching marginal KDE (product triangular kernel, default bandwidth
    n^{-1/6}). Rows with x in the small set are clipped below by
    theta * nu(y); everything is capped at R and floored at a tiny positive
    constant so splitting probabilities stay well defined.

    When ``theta`` is omitted it defaults to 0.9 times the grid minimum of
    the raw estimate, which keeps the clipping inactive while guaranteeing
    the minorization floor; ``nu_density`` defaults to uniform on S.
    """
    samples = traj.samples if isinstance(traj, Trajectory) else np.asarray(traj)
    n = samples.shape[0]
    if n < 50:
        raise ArgumentError("transition density estimation needs n >= 50")
    if bandwidth is None:
        bandwidth = default_bandwidth(n)
    if bandwidth <= 0:
        raise ArgumentError("bandwidth must be positive")
    grid = uniform_grid(grid_points)
    x_data = samples[:-1]
    y_data = samples[1:]
    n_pairs = n - 1
    kx = _reflected_kernel_matrix(grid, x_data, bandwidth)
    ky = _reflected_kernel_matrix(grid, y_data, bandwidth)
    joint = kx @ ky.T / n_pairs
    marginal = kx.mean(axis=1)
    if marginal.min() <= _POSITIVITY_FLOOR:
        bad = grid[int(np.argmin(marginal))]
        raise NumericError(f"degenerate marginal: KDE vanishes near x = {bad:.4f}")
    raw = joint / marginal[:, None]
    if theta is None:
        theta = 0.9 * float(raw.min())
        if theta <= 0:
            theta = _POSITIVITY_FLOOR
    lo, hi = float(small_set[0]), float(small_set[1])
    if nu_density is None:
        nu_vals = np.where((grid >= lo) & (grid <= hi), 1.0 / (hi - lo), 0.0)
    else:
        nu_vals = np.asarray(nu_density(grid), dtype=np.float64)
    floor = theta * nu_vals
    if R is None:
        R = 1.05 * float(max(raw.max(), floor.max() + _POSITIVITY_FLOOR))
    if R <= floor.max():
        raise ArgumentError(
            f"invalid cap: R = {R:.6g} must exceed sup theta*nu = {floor.max():.6g}"
        )
    values = np.array(raw)
    in_s = (grid >= lo) & (grid <= hi)
    values[in_s] = np.maximum(values[in_s], floor[None, :])
    values = np.clip(values, _POSITIVITY_FLOOR, R)
    return TransitionDensityEstimate(
        grid=grid,
        values=values,
        bandwidth=float(bandwidth),
        theta=float(theta),
        clip_floor=floor,
        clip_cap=float(R),
        n_source=n,
        small_set=(lo, hi),
    )
