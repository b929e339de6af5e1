import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from regenboot import chain, splitting
from regenboot.errors import ImpossibleTransitionError, MinorizationError
from regenboot.splitting import (
    ClippingViolationError,
    SplitTrajectory,
    approximate_split,
    atom_mean_return_time,
    block_functional_mean,
    exact_split,
    extract_blocks,
    independent_block_counts,
    kac_mean_return_time,
    regeneration_diagnostics,
)


class ExactDensityAdapter:
    """Duck-typed p_hat exposing the model's true transition density."""

    def __init__(self, model):
        self.model = model

    def evaluate(self, x, y):
        return self.model.transition_density(x, y)


# ---------------------------------------------------------------------------
# flag laws


def test_iid_theta_one_all_flags_one(iid_uniform):
    # p(x, y) = nu(y) and theta = 1 make every success probability exactly 1
    traj = chain.simulate_chain(iid_uniform, 300, 0.5, seed=2)
    split = exact_split(traj, iid_uniform, seed=3)
    assert split.flags.all()
    assert split.flags.shape[0] == traj.n - 1


def test_off_small_set_theta_one_flag_one():
    # off S the flag is Bern(theta); with theta = 1 it is always 1
    model = chain.MarkovModel(
        kind="finite",
        theta=1.0,
        matrix=np.array([[1.0, 0.0], [0.5, 0.5]]),
        small_set=frozenset({0}),
        nu_values=np.array([1.0, 0.0]),
    )
    traj = chain.simulate_chain(model, 60, 1, seed=5)
    split = exact_split(traj, model, seed=6)
    off_s = traj.samples[:-1] == 1
    assert split.flags[off_s].all()


def test_two_state_flag_rate(two_state, two_state_traj):
    # enumeration over the 2x2 transition cases: conditional on X_t = 0 the
    # success probability averages to sum_y p(0,y) theta nu(y)/p(0,y) = theta,
    # and off S it is theta outright, so the marginal flag rate is theta.
    p = two_state.matrix
    nu = two_state.nu_values
    pi = chain.finite_stationary(p)
    rate_on_s = sum(p[0, y] * two_state.theta * nu[y] / p[0, y] for y in range(2))
    analytic = pi[0] * rate_on_s + pi[1] * two_state.theta
    assert abs(analytic - two_state.theta) < 1e-12
    split = exact_split(two_state_traj, two_state, seed=21)
    n = two_state_traj.n
    se = np.sqrt(analytic * (1 - analytic) / n)
    assert abs(split.flags.mean() - analytic) <= 4 * se
    # atom visits (regenerations) happen at rate pi_0 * theta
    atom_rate = split.atom_flags().mean()
    target = pi[0] * two_state.theta
    assert abs(atom_rate - target) <= 4 * np.sqrt(target * (1 - target) / n)


def test_approximate_matches_exact_bit_for_bit(reflected_bm, bm_traj):
    exact = exact_split(bm_traj, reflected_bm, seed=99)
    approx = approximate_split(
        bm_traj,
        ExactDensityAdapter(reflected_bm),
        small_set=(0.0, 1.0),
        theta=reflected_bm.theta,
        nu_density=reflected_bm.nu_density,
        seed=99,
    )
    assert np.array_equal(exact.flags, approx.flags)
    assert exact.mode == "exact" and approx.mode == "approximate"


def test_clipped_to_floor_gives_success_one(bm_traj):
    # p_hat identically theta * nu on S x S drives the Bernoulli ratio to 1
    theta = 0.6

    class FloorDensity:
        def evaluate(self, x, y):
            return np.full(np.broadcast_shapes(np.shape(x), np.shape(y)), theta)

    split = approximate_split(
        bm_traj, FloorDensity(), (0.0, 1.0), theta, None, seed=11
    )
    assert split.flags.all()


def test_impossible_transition_error():
    model = chain.MarkovModel(
        kind="finite",
        theta=0.5,
        matrix=np.array([[1.0, 0.0], [0.5, 0.5]]),
        small_set=frozenset({0}),
        nu_values=np.array([1.0, 0.0]),
    )
    traj = chain.Trajectory(np.array([0, 1, 0]), seed=0)  # 0 -> 1 has p = 0
    with pytest.raises(ImpossibleTransitionError, match="t=0"):
        exact_split(traj, model, seed=1)


def test_minorization_violation_error(two_state_traj):
    bad = chain.MarkovModel(
        kind="finite",
        theta=0.9,  # exceeds p(0,0) = 0.7: ratio > 1 beyond float noise
        matrix=np.array([[0.7, 0.3], [0.1, 0.9]]),
        small_set=frozenset({0}),
        nu_values=np.array([1.0, 0.0]),
    )
    with pytest.raises(MinorizationError):
        exact_split(two_state_traj, bad, seed=2)


def test_clipping_violation_error(bm_traj):
    class BrokenDensity:
        def evaluate(self, x, y):
            out = np.ones(np.broadcast_shapes(np.shape(x), np.shape(y)))
            out.flat[0] = 0.0
            return out

    with pytest.raises(ClippingViolationError):
        approximate_split(bm_traj, BrokenDensity(), (0.0, 1.0), 0.5, None, seed=3)


# ---------------------------------------------------------------------------
# block extraction


def test_extract_blocks_hand_trace():
    # flags [1,0,0,1,0] over x0..x4: head=(x0), one block (x1,x2,x3), tail=(x4)
    split = SplitTrajectory(
        samples=np.array([10.0, 11.0, 12.0, 13.0, 14.0]),
        flags=np.array([1, 0, 0, 1, 0], dtype=bool),
        in_small_set=np.ones(5, dtype=bool),
        mode="exact",
    )
    d = extract_blocks(split)
    assert d.head.tolist() == [10.0]
    assert d.block_count == 1
    assert d.blocks[0].values.tolist() == [11.0, 12.0, 13.0]
    assert (d.blocks[0].start_index, d.blocks[0].end_index) == (1, 3)
    assert d.tail.tolist() == [14.0]


def test_all_flags_one():
    n = 9
    split = SplitTrajectory(
        samples=np.arange(n, dtype=np.float64),
        flags=np.ones(n, dtype=bool),
        in_small_set=np.ones(n, dtype=bool),
        mode="exact",
    )
    d = extract_blocks(split)
    assert d.block_count == n - 1
    assert np.all(d.lengths == 1)
    assert [b.values.tolist() for b in d.blocks] == [[float(i)] for i in range(1, n)]
    assert d.beta_hat == pytest.approx(n / (n - 1))
    assert d.tail.shape[0] == 0


def test_all_flags_zero():
    n = 7
    split = SplitTrajectory(
        samples=np.arange(n, dtype=np.float64),
        flags=np.zeros(n, dtype=bool),
        in_small_set=np.ones(n, dtype=bool),
        mode="exact",
    )
    d = extract_blocks(split)
    assert d.degenerate
    assert d.block_count == 0
    assert d.head.shape[0] == n
    assert np.isnan(d.beta_hat)


@settings(max_examples=300, deadline=None)
@given(
    n=st.integers(min_value=1, max_value=200),
    seed=st.integers(min_value=0, max_value=2**31),
)
def test_reassembly_property(n, seed):
    rng = np.random.default_rng(seed)
    samples = rng.normal(size=n)
    flags = rng.random(max(n - 1, 0)) < rng.uniform(0.05, 0.9)
    in_s = rng.random(n) < 0.8
    split = SplitTrajectory(samples, flags, in_s, mode="exact")
    d = extract_blocks(split)
    total = d.lengths.sum() if d.block_count else 0
    assert total + d.head.shape[0] + d.tail.shape[0] == n
    rebuilt = np.concatenate(
        [d.head] + [b.values for b in d.blocks] + [d.tail]
    )
    assert np.array_equal(rebuilt, samples)


# ---------------------------------------------------------------------------
# block-law identities against analytic oracles


def test_mean_return_time_oracles_agree(two_state):
    # first-step analysis on the split chain vs Kac's theorem
    assert atom_mean_return_time(two_state) == pytest.approx(8.0, abs=1e-9)
    assert kac_mean_return_time(two_state) == pytest.approx(8.0, abs=1e-9)


def test_block_mean_identity(two_state, two_state_traj):
    beta = 8.0  # = 1 / (theta pi_0) = 1 / (0.5 * 0.25)
    d = extract_blocks(exact_split(two_state_traj, two_state, seed=77))
    assert d.block_count >= 10_000
    for f_vals, pi_f in (([1.0, 1.0], 1.0), ([0.0, 1.0], 0.75)):  # f = 1, identity
        sums = np.asarray(f_vals)[d.samples[d.starts[0] : d.ends[-1] + 1]]
        per_block = np.add.reduceat(sums, (d.starts - d.starts[0]))
        if f_vals == [1.0, 1.0]:
            assert np.array_equal(per_block, d.lengths)  # 1-sums are the lengths
        se = per_block.std(ddof=1) / np.sqrt(d.block_count)
        assert abs(per_block.mean() - beta * pi_f) <= 3 * se


def test_block_functional_mean_matches_identity(two_state):
    # first-step block functional vs beta * pi f for several functions
    pi = chain.finite_stationary(two_state.matrix)
    beta = atom_mean_return_time(two_state)
    for f_vals in ([1.0, 0.0], [0.0, 1.0], [2.0, -1.0]):
        direct = block_functional_mean(two_state, f_vals)
        assert direct == pytest.approx(beta * float(np.dot(f_vals, pi)), rel=1e-10)


def test_block_count_concentration(two_state):
    # loose envelope: |i_n - n/beta| <= 10 sqrt(n) over 200 seeded runs
    n = 10_000
    beta = 8.0
    worst = 0.0
    for seed in range(200):
        traj = chain.simulate_chain(two_state, n, 0, seed=10_000 + seed)
        d = extract_blocks(exact_split(traj, two_state, seed=20_000 + seed))
        worst = max(worst, abs(d.block_count - n / beta))
    assert worst <= 10 * np.sqrt(n)


def test_independent_blocks_match_first_step_oracle(two_state):
    counts, lengths = independent_block_counts(two_state, 200_000, seed=4)
    assert lengths.min() >= 1
    assert np.array_equal(counts.sum(axis=1), lengths)
    se = lengths.std(ddof=1) / np.sqrt(lengths.shape[0])
    assert abs(lengths.mean() - 8.0) <= 3 * se
    se0 = counts[:, 0].std(ddof=1) / np.sqrt(counts.shape[0])
    assert abs(counts[:, 0].mean() - 2.0) <= 3 * se0  # beta * pi_0


# ---------------------------------------------------------------------------
# diagnostics


def test_diagnostics_iid_unit_blocks(iid_uniform):
    traj = chain.simulate_chain(iid_uniform, 2000, 0.5, seed=8)
    d = extract_blocks(exact_split(traj, iid_uniform, seed=9))
    rep = regeneration_diagnostics(d, nu_density=None, beta_ref=1.0)
    assert set(rep["length_histogram"]) == {1}
    assert rep["length_lag1_correlation"] == 0.0  # constant lengths convention
    # flags cover t = 0..n-2, so n-1 regenerations and n-2 complete blocks
    assert d.block_count == traj.n - 2


def test_diagnostics_two_state_mean_length(two_state):
    traj = chain.simulate_chain(two_state, 100_000, 0, seed=31)
    d = extract_blocks(exact_split(traj, two_state, seed=32))
    lengths = d.lengths.astype(float)
    se = lengths.std(ddof=1) / np.sqrt(d.block_count)
    assert abs(lengths.mean() - 8.0) <= 3 * se
    rep = regeneration_diagnostics(d, beta_ref=8.0)
    assert rep["available"]
    assert abs(rep["length_lag1_correlation"]) <= 0.05
    assert rep["ks_statistic"] is None  # discrete state space


def test_diagnostics_diffusion_ks(reflected_bm, bm_traj):
    d = extract_blocks(exact_split(bm_traj, reflected_bm, seed=41))
    rep = regeneration_diagnostics(d, nu_density=None, beta_ref=1 / reflected_bm.theta)
    assert rep["ks_pvalue"] is not None
    assert rep["ks_pvalue"] > 0.01
    assert rep["concentration"] <= 10.0


def test_diagnostics_too_few_blocks(two_state):
    traj = chain.simulate_chain(two_state, 40, 0, seed=3)
    d = extract_blocks(exact_split(traj, two_state, seed=4))
    rep = regeneration_diagnostics(d)
    assert not rep["available"]
    assert rep["ks_statistic"] is None
    assert "unavailable_reason" in rep
