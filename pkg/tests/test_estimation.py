import numpy as np
import pytest
from scipy.integrate import simpson

from regenboot import chain, estimation, splitting
from regenboot.errors import ArgumentError, NumericError
from regenboot.estimation import (
    FunctionTable,
    KernelSpec,
    block_sum,
    delta_diagnostic,
    empirical_covariance,
    empirical_mean,
    estimate_transition_density,
    kde,
)
from regenboot.splitting import Block, SplitTrajectory, extract_blocks


class LabelFn:
    def __init__(self, values):
        self.values = np.asarray(values, dtype=np.float64)

    def __call__(self, s):
        return self.values[np.asarray(s, dtype=np.int64)]


def _decomp_from_flags(samples, flags):
    return extract_blocks(
        SplitTrajectory(
            np.asarray(samples, dtype=np.float64),
            np.asarray(flags, dtype=bool),
            np.ones(len(samples), dtype=bool),
            mode="exact",
        )
    )


# ---------------------------------------------------------------------------
# kernels


def test_kernel_specs_validate():
    for name in ("triangular", "epanechnikov"):
        KernelSpec(name, h=0.1).validate()


def test_kernel_errors():
    with pytest.raises(ArgumentError):
        KernelSpec("gaussianish", h=0.1)
    with pytest.raises(ArgumentError):
        KernelSpec("triangular", h=0.0)
    bad = KernelSpec("triangular", h=0.1, fn=lambda u: np.maximum(0, 1 - np.abs(u)) * 2)
    with pytest.raises(ArgumentError, match="integrates"):
        bad.validate()


def test_kernel_serialization_roundtrip():
    spec = KernelSpec("epanechnikov", h=0.07)
    again = KernelSpec.from_dict(spec.to_dict())
    assert again.name == spec.name and again.h == spec.h


# ---------------------------------------------------------------------------
# transition density estimate


def test_iid_uniform_estimate_close_to_one(iid_uniform):
    traj = chain.simulate_chain(iid_uniform, 10_000, 0.5, seed=42)
    est = estimate_transition_density(traj)  # h defaults to n^{-1/6}
    assert est.bandwidth == pytest.approx(10_000 ** (-1 / 6))
    assert np.abs(est.values - 1.0).max() <= 0.15
    assert est.n_source == traj.n
    assert est.boundary_correction == "reflection"


def test_clip_floor_applied(bm_traj):
    # a large user theta forces the floor to bind somewhere
    est = estimate_transition_density(bm_traj, theta=0.95)
    floor = est.clip_floor  # theta * nu(y), uniform nu
    assert np.all(est.values >= floor[None, :] - 1e-15)
    assert np.any(est.values == floor[None, :])


def test_clip_cap_applied(bm_traj):
    est = estimate_transition_density(bm_traj, theta=0.5, R=1.01)
    assert est.values.max() <= 1.01
    assert np.any(est.values == 1.01)
    assert est.values.min() > 0.0


def test_invalid_cap(bm_traj):
    with pytest.raises(ArgumentError, match="invalid cap"):
        estimate_transition_density(bm_traj, theta=0.9, R=0.5)


def test_degenerate_marginal():
    clustered = chain.Trajectory(np.full(100, 0.5), seed=0)
    with pytest.raises(NumericError, match="degenerate marginal"):
        estimate_transition_density(clustered, bandwidth=0.01)


def test_needs_enough_samples():
    with pytest.raises(ArgumentError):
        estimate_transition_density(chain.Trajectory(np.linspace(0, 1, 10), seed=0))


def test_estimate_against_reflected_bm_truth(reflected_bm, bm_traj):
    # nontrivial truth: analytic reflected-BM density, sup error on a grid
    est = estimate_transition_density(bm_traj, theta=reflected_bm.theta)
    g = np.linspace(0.05, 0.95, 19)
    truth = reflected_bm.transition(g[:, None], g[None, :])
    err = np.abs(est.evaluate(*np.meshgrid(g, g, indexing="ij")) - truth).max()
    assert err <= 0.25


# ---------------------------------------------------------------------------
# block functionals


def test_block_sum_length_and_identity():
    block = Block(values=np.array([0.2, 0.3]), start_index=4, end_index=5)
    assert block_sum(lambda x: np.ones_like(x), block) == block.length == 2
    assert block_sum(lambda x: x, block) == pytest.approx(0.5)


def test_block_sum_linearity():
    rng = np.random.default_rng(3)
    vals = rng.normal(size=11)
    block = Block(values=vals, start_index=0, end_index=10)
    f = lambda x: np.sin(x)
    g = lambda x: x**2
    lhs = block_sum(lambda x: 2.0 * f(x) + 3.0 * g(x), block)
    assert lhs == pytest.approx(2.0 * block_sum(f, block) + 3.0 * block_sum(g, block))


def test_block_sum_nonfinite():
    block = Block(values=np.array([0.0, 1.0]), start_index=7, end_index=8)
    with pytest.raises(NumericError, match="position 1"):
        block_sum(lambda x: np.where(x > 0.5, np.inf, 1.0), block)


def test_empirical_mean():
    t = chain.Trajectory(np.array([0.0, 1.0, 2.0, 3.0]), seed=0)
    assert empirical_mean(t, lambda x: np.ones_like(x)) == 1.0
    assert empirical_mean(t, lambda x: x) == 1.5


def test_empirical_mean_two_state(two_state, two_state_traj):
    # stationary mass of state 0 is 0.25; mixing inflates the MC variance by
    # (1 + rho) / (1 - rho) with rho = 1 - a - b = 0.6
    f = LabelFn([1.0, 0.0])
    n = two_state_traj.n
    se = np.sqrt(0.25 * 0.75 * 4.0 / n)
    assert abs(empirical_mean(two_state_traj, f) - 0.25) <= 3 * se


# ---------------------------------------------------------------------------
# empirical covariance


def test_covariance_single_block():
    d = _decomp_from_flags([5.0, 2.0, 3.0, 4.0], [1, 0, 0, 1])
    assert d.block_count == 1
    table = FunctionTable.from_callables([lambda x: x])
    gamma = empirical_covariance(d, table)
    f_b = 2.0 + 3.0 + 4.0
    assert gamma[0, 0] == pytest.approx(f_b**2 / 4.0)


def test_covariance_diag_nonnegative_psd(two_state, two_state_traj):
    d = extract_blocks(splitting.exact_split(two_state_traj, two_state, seed=5))
    table = FunctionTable.from_callables(
        [LabelFn([1.0, 0.0]), LabelFn([0.0, 1.0]), LabelFn([-1.0, 2.0])]
    )
    centers = np.array([0.25, 0.75, 0.25 * -1 + 0.75 * 2])
    gamma = empirical_covariance(d, table, centering=centers)
    assert np.all(np.diag(gamma) >= 0)
    assert np.abs(gamma - gamma.T).max() == 0.0
    assert np.linalg.eigvalsh(gamma).min() >= -1e-10 * np.trace(gamma)


def test_covariance_vs_independent_block_oracle(two_state, two_state_traj):
    # oracle: beta^{-1} Var of the centered block sum, from independently
    # regenerated blocks (1e6), against Gamma_hat from one long trajectory
    d = extract_blocks(splitting.exact_split(two_state_traj, two_state, seed=6))
    table = FunctionTable.from_callables([LabelFn([1.0, 0.0])])
    gamma = empirical_covariance(d, table, centering=[0.25])
    counts, lengths = splitting.independent_block_counts(two_state, 1_000_000, seed=7)
    centered = counts[:, 0] - lengths * 0.25
    oracle = float((centered**2).mean()) / 8.0
    assert abs(gamma[0, 0] - oracle) / oracle <= 0.1


def test_covariance_requires_blocks():
    d = _decomp_from_flags(np.arange(4.0), [0, 0, 0, 0])
    from regenboot.errors import NoBlocksError

    with pytest.raises(NoBlocksError):
        empirical_covariance(d, FunctionTable.from_callables([lambda x: x]))


def test_covariance_centering_mismatch(two_state, two_state_traj):
    d = extract_blocks(splitting.exact_split(two_state_traj, two_state, seed=8))
    with pytest.raises(ArgumentError):
        empirical_covariance(
            d, FunctionTable.from_callables([LabelFn([1, 0])]), centering=[0.1, 0.2]
        )


# ---------------------------------------------------------------------------
# kde


def test_kde_point_mass():
    k = KernelSpec("triangular", h=0.2)
    t = chain.Trajectory(np.full(50, 0.4), seed=0)
    assert kde(t, k, 0.4) == pytest.approx(k.fn(0.0) / k.h)


def test_kde_uniform_interior():
    rng = np.random.default_rng(12)
    t = chain.Trajectory(rng.random(100_000), seed=12)
    k = KernelSpec("triangular", h=0.05)
    vals = kde(t, k, np.linspace(0.1, 0.9, 9))
    assert np.abs(vals - 1.0).max() <= 0.05


def test_kde_far_from_support():
    k = KernelSpec("triangular", h=0.01)
    t = chain.Trajectory(np.full(10, 0.2), seed=0)
    assert kde(t, k, 0.8) == 0.0


def test_kde_integrates_to_one(bm_traj):
    k = KernelSpec("triangular", h=0.05)
    ext = np.linspace(-0.06, 1.06, 1121)
    vals = kde(bm_traj, k, ext)
    assert abs(simpson(vals, x=ext) - 1.0) <= 0.02


# ---------------------------------------------------------------------------
# delta diagnostic


def test_delta_zero_for_matched_oracle(two_state, two_state_traj):
    d = extract_blocks(splitting.exact_split(two_state_traj, two_state, seed=9))
    table = FunctionTable.from_callables([LabelFn([1.0, 0.0]), LabelFn([0.5, 2.0])])
    centers = np.array([0.25, 0.5 * 0.25 + 2.0 * 0.75])
    gamma = empirical_covariance(d, table, centering=centers)
    beta = 8.0
    assert delta_diagnostic(d, table, beta * gamma, beta, centering=centers) == 0.0


def test_delta_zero_function_table(two_state, two_state_traj):
    d = extract_blocks(splitting.exact_split(two_state_traj, two_state, seed=10))
    table = FunctionTable.from_callables([LabelFn([0.0, 0.0])])
    assert delta_diagnostic(d, table, np.zeros((1, 1)), 8.0, centering=[0.0]) == 0.0


def test_delta_dimension_mismatch(two_state, two_state_traj):
    d = extract_blocks(splitting.exact_split(two_state_traj, two_state, seed=11))
    table = FunctionTable.from_callables([LabelFn([1.0, 0.0])])
    with pytest.raises(ArgumentError, match="does not match"):
        delta_diagnostic(d, table, np.zeros((3, 3)), 8.0, centering=[0.25])


def test_delta_shrinks_with_n(two_state):
    # n^{-1/2} trend: the median over seeds roughly halves per 4x n
    from regenboot.harness import finite_delta_table, oracle_block_covariance
    from regenboot.seeds import derive_seed

    table, centers, values = finite_delta_table(two_state)
    oracle = oracle_block_covariance(two_state, values, centers, 300_000, seed=1)
    medians = []
    for n in (2500, 10_000):
        deltas = []
        for s in range(15):
            t = chain.simulate_chain(two_state, n, 0, derive_seed(88, n, s, 0))
            d = extract_blocks(
                splitting.exact_split(t, two_state, derive_seed(88, n, s, 1))
            )
            deltas.append(delta_diagnostic(d, table, oracle, 8.0, centering=centers))
        medians.append(np.median(deltas))
    assert medians[1] < medians[0]
    assert 0.25 <= medians[1] / medians[0] <= 0.85


# ---------------------------------------------------------------------------
# function tables


def test_function_table_kernel_matches_manual(bm_traj):
    k = KernelSpec("triangular", h=0.1)
    locs = np.array([0.3, 0.6])
    table = FunctionTable.from_kernel(k, locs)
    vals = table.evaluate(bm_traj.samples[:100])
    manual = np.stack([k.scaled(x)(bm_traj.samples[:100]) for x in locs])
    assert np.allclose(vals, manual, atol=1e-15)
    env = table.envelope(bm_traj.samples[:100])
    assert np.all(env + 1e-12 >= np.abs(vals))


def test_function_table_studentized():
    k = KernelSpec("triangular", h=0.1)
    table = FunctionTable.from_kernel(k, np.array([0.5]))
    scaled = table.studentized(np.array([4.0]))
    x = np.array([0.5, 0.52])
    assert np.allclose(scaled.evaluate(x), table.evaluate(x) / 4.0)
    with pytest.raises(ArgumentError):
        table.studentized(np.array([1.0, 2.0]))
