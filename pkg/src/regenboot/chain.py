"""Markov chain models and simulators.

Three model kinds are supported: finite-state chains given by a transition
matrix, continuous chains on [0, 1] given by a transition density tabulated
on a grid, and reflected diffusions on [0, 1] sampled at a fixed interval.
Every model carries a minorization triple (small set S, theta, nu) so it can
be fed to the splitting machinery.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.integrate import cumulative_simpson, simpson

from .errors import ArgumentError, NumericError
from .kernels import finite_chain_chunk, grid_chain_chunk, reflected_em_chunk

DEFAULT_GRID_POINTS = 1025  # 1024 Simpson intervals
_EM_TABLE_POINTS = 4097
_CHUNK_SUBSTEPS = 1 << 20


def uniform_grid(points: int = DEFAULT_GRID_POINTS) -> np.ndarray:
    return np.linspace(0.0, 1.0, points)


def _frozen(a) -> np.ndarray:
    out = np.asarray(a, dtype=np.float64)
    out.flags.writeable = False
    return out


# ---------------------------------------------------------------------------
# trajectories


@dataclass(frozen=True)
class Trajectory:
    """Observed states X_0..X_{n-1} of one simulated chain."""

    samples: np.ndarray
    seed: int
    model_tag: str = ""

    def __post_init__(self):
        samples = np.asarray(self.samples)
        samples.flags.writeable = False
        object.__setattr__(self, "samples", samples)

    def __len__(self) -> int:
        return self.samples.shape[0]

    @property
    def n(self) -> int:
        return self.samples.shape[0]


# ---------------------------------------------------------------------------
# diffusion parameters

_B_PRESETS: dict[str, Callable] = {
    "zero": lambda x: np.zeros_like(np.asarray(x, dtype=np.float64)),
}

_RHO_PRESETS: dict[str, Callable] = {
    "one": lambda x: np.ones_like(np.asarray(x, dtype=np.float64)),
    "poly-bump": lambda x: 1.0 + np.asarray(x) ** 2 * (1.0 - np.asarray(x)) ** 2,
}


@dataclass(frozen=True)
class DiffusionParams:
    """Coefficients and sampling scheme of a reflected diffusion on [0, 1].

    ``delta`` is the time between recorded observations; each observation
    interval is integrated with ``substeps`` Euler substeps. ``b_bar`` caps
    the sup norms of b, b', rho, rho', rho''; ``rho_floor`` lower-bounds
    rho^2. Boundary conditions b(0)=b(1)=0 and rho'(0)=rho'(1)=0 are
    verified by finite differences.
    """

    b: Callable
    rho: Callable
    delta: float
    substeps: int = 100
    b_bar: float = 2.0
    rho_floor: float = 1.0
    b_kind: str | None = None
    rho_kind: str | None = None

    def __post_init__(self):
        if self.delta <= 0:
            raise ArgumentError("sampling interval delta must be positive")
        if self.substeps < 1:
            raise ArgumentError("substeps must be >= 1")
        self.validate()

    def validate(self, tol: float = 1e-6, points: int = DEFAULT_GRID_POINTS):
        x = uniform_grid(points)
        bv = np.asarray(self.b(x), dtype=np.float64)
        rv = np.asarray(self.rho(x), dtype=np.float64)
        if not (np.all(np.isfinite(bv)) and np.all(np.isfinite(rv))):
            bad = x[~(np.isfinite(bv) & np.isfinite(rv))][0]
            raise NumericError(f"non-finite drift/dispersion at state {bad!r}")
        for endpoint in (0.0, 1.0):
            if abs(float(self.b(endpoint))) > tol:
                raise ArgumentError(f"drift must vanish at {endpoint}")
        eps = 1e-5
        for endpoint, sgn in ((0.0, 1.0), (1.0, -1.0)):
            d = (
                -3.0 * float(self.rho(endpoint))
                + 4.0 * float(self.rho(endpoint + sgn * eps))
                - float(self.rho(endpoint + 2 * sgn * eps))
            ) / (2 * eps * sgn)
            if abs(d) > tol:
                raise ArgumentError(f"dispersion slope must vanish at {endpoint}")
        h = x[1] - x[0]
        db = np.gradient(bv, h)
        dr = np.gradient(rv, h)
        d2r = np.gradient(dr, h)
        sup = max(
            np.abs(bv).max(), np.abs(db).max(), np.abs(rv).max(),
            np.abs(dr).max(), np.abs(d2r).max(),
        )
        if sup > self.b_bar + tol:
            raise ArgumentError(
                f"coefficient bound violated: sup-norm {sup:.6g} exceeds {self.b_bar}"
            )
        if (rv**2).min() < self.rho_floor - tol or (rv**2).min() <= 0:
            raise ArgumentError("dispersion squared falls below its floor")

    def tabulate(self, points: int = _EM_TABLE_POINTS) -> tuple[np.ndarray, np.ndarray]:
        x = uniform_grid(points)
        bv = np.ascontiguousarray(self.b(x), dtype=np.float64)
        rv = np.ascontiguousarray(self.rho(x), dtype=np.float64)
        if not (np.all(np.isfinite(bv)) and np.all(np.isfinite(rv))):
            bad = x[~(np.isfinite(bv) & np.isfinite(rv))][0]
            raise NumericError(f"non-finite drift/dispersion at state {bad!r}")
        return bv, rv


# ---------------------------------------------------------------------------
# models


@dataclass(frozen=True)
class MarkovModel:
    """A chain plus the minorization data (S, theta, nu) used for splitting.

    kind = "finite": states are labels 0..K-1, ``matrix`` is the row-stochastic
    transition matrix, ``small_set`` a frozenset of labels and ``nu_values``
    a pmf supported on it.

    kind = "grid": states live on [0, 1]; ``p_values[i, j] = p(grid[i], grid[j])``
    with rows integrating to one; ``small_set`` an interval (lo, hi) and
    ``nu_values`` a density tabulated on ``grid`` and supported on S.

    kind = "diffusion": sampled through ``simulate_reflected_diffusion``;
    ``transition`` optionally holds the analytic observation-interval
    transition density when one is known (it is for driftless constant-
    dispersion diffusions), enabling exact splitting.
    """

    kind: str
    theta: float
    m: int = 1
    matrix: np.ndarray | None = None
    grid: np.ndarray | None = None
    p_values: np.ndarray | None = None
    diffusion: DiffusionParams | None = None
    small_set: object = None
    nu_values: np.ndarray | None = None
    transition: Callable | None = None
    stationary: object = None
    tag: str = ""

    def __post_init__(self):
        if self.kind not in ("finite", "grid", "diffusion"):
            raise ArgumentError(f"unknown model kind {self.kind!r}")
        if not (0.0 < self.theta <= 1.0):
            raise ArgumentError("theta must lie in (0, 1]")
        if self.m != 1:
            raise ArgumentError("sampling is supported only for m = 1")
        for name in ("matrix", "grid", "p_values", "nu_values"):
            v = getattr(self, name)
            if v is not None:
                object.__setattr__(self, name, _frozen(v))

    # -- state space helpers ------------------------------------------------

    @property
    def n_states(self) -> int:
        if self.kind != "finite":
            raise ArgumentError("n_states is defined for finite models only")
        return self.matrix.shape[0]

    def in_small_set(self, x) -> np.ndarray:
        if self.kind == "finite":
            labels = np.asarray(sorted(self.small_set))
            return np.isin(np.asarray(x), labels)
        lo, hi = self.small_set
        x = np.asarray(x, dtype=np.float64)
        return (x >= lo) & (x <= hi)

    def nu_density(self, y) -> np.ndarray:
        if self.kind == "finite":
            return self.nu_values[np.asarray(y, dtype=np.int64)]
        return np.interp(np.asarray(y, dtype=np.float64), self.grid, self.nu_values)

    def transition_density(self, x, y) -> np.ndarray:
        """p(x, y) evaluated elementwise on broadcast arrays."""
        if self.kind == "finite":
            return self.matrix[np.asarray(x, dtype=np.int64), np.asarray(y, dtype=np.int64)]
        if self.kind == "grid":
            return _bilinear(self.grid, self.p_values, x, y)
        if self.transition is not None:
            return self.transition(x, y)
        raise ArgumentError(
            "no transition density available for this diffusion model; "
            "use approximate splitting with an estimated density"
        )

    def has_transition_density(self) -> bool:
        return self.kind in ("finite", "grid") or self.transition is not None

    def stationary_values(self, x) -> np.ndarray:
        """Analytic stationary pmf/density, when the model carries one."""
        if self.stationary is None:
            raise ArgumentError(f"model {self.tag!r} has no analytic stationary law")
        if callable(self.stationary):
            return np.asarray(self.stationary(x), dtype=np.float64)
        return np.asarray(self.stationary)[np.asarray(x, dtype=np.int64)]

    # -- invariants ----------------------------------------------------------

    def validate(self, tol: float = 1e-6):
        """Check row normalization, the minorization inequality, and nu."""
        if self.kind == "finite":
            rows = self.matrix.sum(axis=1)
            if np.abs(rows - 1.0).max() > 1e-12:
                raise ArgumentError("transition matrix rows must sum to 1")
            if self.nu_values.shape != (self.n_states,):
                raise ArgumentError("nu must give one mass per state")
            if abs(self.nu_values.sum() - 1.0) > 1e-12:
                raise ArgumentError("nu must sum to 1")
            off_support = [s for s in range(self.n_states)
                           if s not in self.small_set and self.nu_values[s] > 0]
            if off_support:
                raise ArgumentError("nu must be supported on the small set")
            for s in self.small_set:
                if np.any(self.matrix[s] < self.theta * self.nu_values - 1e-12):
                    raise ArgumentError(f"minorization fails at state {s}")
            return
        if self.kind == "grid":
            for i in range(self.grid.shape[0]):
                mass = simpson(self.p_values[i], x=self.grid)
                if abs(mass - 1.0) > tol:
                    raise ArgumentError(
                        f"row {i} integrates to {mass:.8f}, expected 1"
                    )
            nu_mass = simpson(self.nu_values, x=self.grid)
            if abs(nu_mass - 1.0) > tol:
                raise ArgumentError("nu must integrate to 1 over the small set")
            in_s = self.in_small_set(self.grid)
            floor = self.theta * self.nu_values[None, :]
            bad = (self.p_values[in_s] < floor - 1e-12).any()
            if bad:
                raise ArgumentError("minorization fails on the evaluation grid")
            return
        # diffusion: coefficient checks live on DiffusionParams; check the
        # minorization against the analytic density when one is present.
        if self.transition is not None:
            g = uniform_grid(257)
            p = self.transition(g[:, None], g[None, :])
            nu = self.nu_density(g)
            if np.any(p < self.theta * nu[None, :] - 1e-9):
                raise ArgumentError("minorization fails on the evaluation grid")

    # -- serialization --------------------------------------------------------

    def to_dict(self) -> dict:
        out = {
            "kind": self.kind,
            "theta": self.theta,
            "m": self.m,
            "tag": self.tag,
        }
        if self.kind == "finite":
            out["matrix"] = self.matrix.tolist()
            out["small_set"] = sorted(self.small_set)
            out["nu"] = self.nu_values.tolist()
        elif self.kind == "grid":
            out["grid"] = self.grid.tolist()
            out["p_values"] = self.p_values.tolist()
            out["small_set"] = list(self.small_set)
            out["nu"] = self.nu_values.tolist()
        else:
            d = self.diffusion
            if d.b_kind is None or d.rho_kind is None:
                raise ArgumentError(
                    "only preset drift/dispersion diffusions are serializable"
                )
            out["diffusion"] = {
                "b_kind": d.b_kind,
                "rho_kind": d.rho_kind,
                "delta": d.delta,
                "substeps": d.substeps,
            }
            out["small_set"] = list(self.small_set)
            out["nu"] = "uniform"
        return out

    @staticmethod
    def from_dict(data: dict) -> "MarkovModel":
        kind = data.get("kind")
        if kind == "finite":
            return MarkovModel(
                kind="finite",
                theta=float(data["theta"]),
                m=int(data.get("m", 1)),
                matrix=np.asarray(data["matrix"], dtype=np.float64),
                small_set=frozenset(int(s) for s in data["small_set"]),
                nu_values=np.asarray(data["nu"], dtype=np.float64),
                tag=data.get("tag", ""),
            )
        if kind == "grid":
            return MarkovModel(
                kind="grid",
                theta=float(data["theta"]),
                m=int(data.get("m", 1)),
                grid=np.asarray(data["grid"], dtype=np.float64),
                p_values=np.asarray(data["p_values"], dtype=np.float64),
                small_set=tuple(float(v) for v in data["small_set"]),
                nu_values=np.asarray(data["nu"], dtype=np.float64),
                tag=data.get("tag", ""),
            )
        if kind == "diffusion":
            spec = data["diffusion"]
            return diffusion_model(
                b_kind=spec["b_kind"],
                rho_kind=spec["rho_kind"],
                delta=float(spec["delta"]),
                substeps=int(spec["substeps"]),
                theta=data.get("theta"),
                tag=data.get("tag", ""),
            )
        raise ArgumentError(f"unknown model kind {kind!r}")

    def save(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=2)

    @staticmethod
    def load(path) -> "MarkovModel":
        with open(path) as fh:
            return MarkovModel.from_dict(json.load(fh))


def _bilinear(grid: np.ndarray, values: np.ndarray, x, y) -> np.ndarray:
    """Bilinear interpolation of a (G, G) table on a uniform grid."""
    g = grid.shape[0]
    inv = (g - 1) / (grid[-1] - grid[0])
    xs = (np.asarray(x, dtype=np.float64) - grid[0]) * inv
    ys = (np.asarray(y, dtype=np.float64) - grid[0]) * inv
    xs, ys = np.broadcast_arrays(xs, ys)
    i = np.clip(xs.astype(np.int64), 0, g - 2)
    j = np.clip(ys.astype(np.int64), 0, g - 2)
    fx = xs - i
    fy = ys - j
    v00 = values[i, j]
    v01 = values[i, j + 1]
    v10 = values[i + 1, j]
    v11 = values[i + 1, j + 1]
    return (
        v00 * (1 - fx) * (1 - fy)
        + v01 * (1 - fx) * fy
        + v10 * fx * (1 - fy)
        + v11 * fx * fy
    )


# ---------------------------------------------------------------------------
# simulators


def simulate_chain(model: MarkovModel, n: int, x0, seed: int) -> Trajectory:
    """Simulate X_0 = x0 and X_{t+1} ~ p(X_t, .) for finite or grid models."""
    if n < 1:
        raise ArgumentError("n must be >= 1")
    if model.kind == "diffusion":
        raise ArgumentError(
            "no sampler: diffusion models are sampled with simulate_reflected_diffusion"
        )
    rng = np.random.default_rng(seed)
    if model.kind == "finite":
        x0 = int(x0)
        if not (0 <= x0 < model.n_states):
            raise ArgumentError(f"x0 {x0} outside the label set")
        out = np.empty(n, dtype=np.int64)
        out[0] = x0
        if n > 1:
            cum = np.cumsum(model.matrix, axis=1)
            cum[:, -1] = 1.0
            cum = np.ascontiguousarray(cum)
            finite_chain_chunk(cum, x0, rng.random(n - 1), out[1:])
        return Trajectory(out, seed=seed, model_tag=model.tag)
    # grid model
    x0 = float(x0)
    lo, hi = float(model.grid[0]), float(model.grid[-1])
    if not (lo <= x0 <= hi):
        raise ArgumentError(f"x0 {x0} outside the state space [{lo}, {hi}]")
    out = np.empty(n, dtype=np.float64)
    out[0] = x0
    if n > 1:
        dy = float(model.grid[1] - model.grid[0])
        inv_dx = (model.grid.shape[0] - 1) / (hi - lo)
        p = np.ascontiguousarray(model.p_values)
        grid_chain_chunk(p, dy, inv_dx, x0, rng.random(n - 1), out[1:])
    return Trajectory(out, seed=seed, model_tag=model.tag)


def simulate_reflected_diffusion(
    params: DiffusionParams, n: int, x0: float, seed: int
) -> Trajectory:
    """Euler-Maruyama with mirror reflection at {0, 1}, every substeps-th point kept."""
    if n < 1:
        raise ArgumentError("n must be >= 1")
    x0 = float(x0)
    if not (0.0 <= x0 <= 1.0):
        raise ArgumentError(f"x0 {x0} outside [0, 1]")
    b_vals, r_vals = params.tabulate()
    m = params.substeps
    dt = params.delta / m
    sqrt_dt = np.sqrt(dt)
    inv_dx = float(b_vals.shape[0] - 1)
    out = np.empty(n, dtype=np.float64)
    out[0] = x0
    rng = np.random.default_rng(seed)
    total = (n - 1) * m
    chunk = max(m, (_CHUNK_SUBSTEPS // m) * m)
    x = x0
    filled = 1
    done = 0
    while done < total:
        take = min(chunk, total - done)
        z = rng.standard_normal(take)
        x = reflected_em_chunk(
            x, z, dt, sqrt_dt, b_vals, r_vals, inv_dx, m, out, filled
        )
        filled += take // m
        done += take
    if not np.all(np.isfinite(out)):
        bad = out[~np.isfinite(out)]
        raise NumericError(f"non-finite state produced by the Euler scheme: {bad[0]!r}")
    return Trajectory(out, seed=seed, model_tag="diffusion")


# ---------------------------------------------------------------------------
# stationary density of the reflected diffusion


def stationary_density(
    b: Callable, rho: Callable, grid: np.ndarray
) -> tuple[np.ndarray, float]:
    """Closed-form stationary density on the grid and its normalizer.

    pi(x) = (C0 rho^2(x))^{-1} exp(int_0^x 2 b / rho^2), with C0 fixing
    int_0^1 pi = 1 by composite Simpson quadrature.
    """
    grid = np.asarray(grid, dtype=np.float64)
    rv = np.asarray(rho(grid), dtype=np.float64)
    bv = np.asarray(b(grid), dtype=np.float64)
    r2 = rv**2
    if r2.min() <= 0:
        raise NumericError("singular dispersion: rho vanishes on the grid")
    exponent = cumulative_simpson(2.0 * bv / r2, x=grid, initial=0.0)
    unnorm = np.exp(exponent) / r2
    c0 = float(simpson(unnorm, x=grid))
    values = unnorm / c0
    if values.min() <= 0 or not np.all(np.isfinite(values)):
        raise NumericError("stationary density is not strictly positive")
    return values, c0


# ---------------------------------------------------------------------------
# geometric drift condition checker


@dataclass(frozen=True)
class DriftReport:
    """Pointwise audit of exp(-V) P(exp V) <= exp(-2/c + b * 1_S)."""

    holds: bool
    max_margin: float
    margins: np.ndarray
    states: np.ndarray
    tol: float

    def __post_init__(self):
        object.__setattr__(self, "margins", _frozen(self.margins))


def drift_check(
    model: MarkovModel,
    V: Callable,
    c: float,
    b_const: float,
    grid: np.ndarray | None = None,
    tol: float = 1e-6,
) -> DriftReport:
    """Check the geometric drift inequality on every grid state.

    The margin at x is exp(-V(x)) P(exp V)(x) - exp(-2/c + b_const 1_S(x));
    the condition holds when the largest margin is <= tol (quadrature noise
    for grid-based models; finite chains are exact and pass tol=0).
    """
    if c <= 0 or b_const <= 0:
        raise ArgumentError("c and b_const must be positive")
    # evaluate exp(-V(x)) P(exp V)(x) as sum_y p(x,y) exp(V(y) - V(x)) so a
    # constant V cancels exactly instead of leaving one-ulp rounding noise
    if model.kind == "finite":
        states = np.arange(model.n_states)
        vx = np.asarray([float(V(s)) for s in states])
        lhs = (model.matrix * np.exp(vx[None, :] - vx[:, None])).sum(axis=1)
    else:
        if grid is None:
            grid = model.grid if model.grid is not None else uniform_grid(257)
        states = np.asarray(grid, dtype=np.float64)
        vx = np.asarray(V(states), dtype=np.float64)
        if vx.shape != states.shape:
            vx = np.full_like(states, float(vx))
        if model.kind == "grid":
            p = model.p_values
            ygrid = model.grid
            vy = vx if grid is model.grid else np.asarray(V(ygrid), dtype=np.float64)
            if vy.shape != ygrid.shape:
                vy = np.full_like(ygrid, float(vy))
        else:
            if model.transition is None:
                raise ArgumentError(
                    "drift check on a diffusion requires an analytic transition density"
                )
            p = model.transition(states[:, None], states[None, :])
            ygrid = states
            vy = vx
        lhs = simpson(p * np.exp(vy[None, :] - vx[:, None]), x=ygrid, axis=1)
    if not np.all(np.isfinite(lhs)):
        raise NumericError("quadrature of P(exp V) is not finite")
    ind_s = model.in_small_set(states).astype(np.float64)
    rhs = np.exp(-2.0 / c + b_const * ind_s)
    margins = lhs - rhs
    max_margin = float(margins.max())
    return DriftReport(
        holds=bool(max_margin <= tol),
        max_margin=max_margin,
        margins=margins,
        states=states,
        tol=tol,
    )


# ---------------------------------------------------------------------------
# analytic helpers and presets


def finite_stationary(matrix: np.ndarray) -> np.ndarray:
    """Stationary probability vector of a row-stochastic matrix."""
    matrix = np.asarray(matrix, dtype=np.float64)
    k = matrix.shape[0]
    a = np.vstack([matrix.T - np.eye(k), np.ones(k)])
    rhs = np.zeros(k + 1)
    rhs[-1] = 1.0
    pi, *_ = np.linalg.lstsq(a, rhs, rcond=None)
    return pi


def reflected_bm_transition(delta: float, sigma: float = 1.0) -> Callable:
    """Analytic transition density of reflected Brownian motion on [0, 1].

    Spectral (Neumann cosine) expansion, truncated once the coefficients
    drop below 1e-17; valid for zero drift and constant dispersion sigma.
    """
    coefs = []
    j = 1
    while True:
        c = np.exp(-(j**2) * np.pi**2 * sigma**2 * delta / 2.0)
        if c < 1e-17 or j > 512:
            break
        coefs.append(c)
        j += 1
    return _ReflectedBMDensity(np.asarray(coefs))


class _ReflectedBMDensity:
    """Cosine-series transition density; a class so models stay picklable."""

    def __init__(self, coefs: np.ndarray):
        self.coefs = coefs

    def __call__(self, x, y):
        x = np.asarray(x, dtype=np.float64)
        y = np.asarray(y, dtype=np.float64)
        out = np.ones(np.broadcast_shapes(x.shape, y.shape))
        for j, c in enumerate(self.coefs, start=1):
            out = out + 2.0 * c * np.cos(j * np.pi * x) * np.cos(j * np.pi * y)
        return out


def two_state_model(a: float = 0.3, b: float = 0.1, theta: float = 0.5) -> MarkovModel:
    """Analytic two-state reference chain with atom support on state 0."""
    if not (0 < a < 1 and 0 < b < 1):
        raise ArgumentError("transition rates must be in (0, 1)")
    if theta > 1 - a:
        raise ArgumentError("theta must not exceed p(0,0) = 1 - a")
    matrix = np.array([[1 - a, a], [b, 1 - b]])
    return MarkovModel(
        kind="finite",
        theta=theta,
        matrix=matrix,
        small_set=frozenset({0}),
        nu_values=np.array([1.0, 0.0]),
        stationary=np.array([b / (a + b), a / (a + b)]),
        tag="two-state",
    )


def iid_uniform_model(points: int = 257, theta: float = 1.0) -> MarkovModel:
    """Chain whose transitions ignore the current state: X_{t+1} ~ U[0, 1]."""
    grid = uniform_grid(points)
    return MarkovModel(
        kind="grid",
        theta=theta,
        grid=grid,
        p_values=np.ones((points, points)),
        small_set=(0.0, 1.0),
        nu_values=np.ones(points),
        stationary=_InterpDensity(grid, np.ones(points)),
        tag="iid-uniform",
    )


def diffusion_model(
    b_kind: str = "zero",
    rho_kind: str = "one",
    delta: float = 0.5,
    substeps: int = 100,
    theta: float | None = None,
    tag: str = "",
) -> MarkovModel:
    """Reflected diffusion preset with S = [0, 1] and uniform nu.

    For b = 0 and constant rho the analytic transition density is attached
    (enabling exact splitting) and theta defaults to its grid minimum K'.
    Other presets carry no analytic density and require approximate splitting;
    their default theta is a conservative 0.5.
    """
    if b_kind not in _B_PRESETS:
        raise ArgumentError(f"unknown drift preset {b_kind!r}")
    if rho_kind not in _RHO_PRESETS:
        raise ArgumentError(f"unknown dispersion preset {rho_kind!r}")
    params = DiffusionParams(
        b=_B_PRESETS[b_kind],
        rho=_RHO_PRESETS[rho_kind],
        delta=delta,
        substeps=substeps,
        b_kind=b_kind,
        rho_kind=rho_kind,
    )
    transition = None
    if b_kind == "zero" and rho_kind == "one":
        transition = reflected_bm_transition(delta)
        if theta is None:
            g = uniform_grid(513)
            theta = float(transition(g[:, None], g[None, :]).min())
    elif theta is None:
        theta = 0.5
    grid = uniform_grid()
    values, _ = stationary_density(params.b, params.rho, grid)
    stationary = _InterpDensity(grid, values)
    return MarkovModel(
        kind="diffusion",
        theta=theta,
        diffusion=params,
        small_set=(0.0, 1.0),
        nu_values=np.ones(DEFAULT_GRID_POINTS),
        grid=grid,
        transition=transition,
        stationary=stationary,
        tag=tag or f"diffusion-{b_kind}-{rho_kind}",
    )


class _InterpDensity:
    """Picklable linear-interpolation wrapper for tabulated densities."""

    def __init__(self, grid: np.ndarray, values: np.ndarray):
        self.grid = np.asarray(grid, dtype=np.float64)
        self.values = np.asarray(values, dtype=np.float64)

    def __call__(self, x):
        return np.interp(np.asarray(x, dtype=np.float64), self.grid, self.values)


_PRESET_BUILDERS = {
    "two-state": two_state_model,
    "iid-uniform": iid_uniform_model,
    "reflected-bm": lambda: diffusion_model("zero", "one", tag="reflected-bm"),
    "reflected-bump": lambda: diffusion_model("zero", "poly-bump", tag="reflected-bump"),
}


def preset(name: str) -> MarkovModel:
    try:
        builder = _PRESET_BUILDERS[name]
    except KeyError:
        raise ArgumentError(
            f"unknown preset {name!r}; available: {sorted(_PRESET_BUILDERS)}"
        ) from None
    return builder()
