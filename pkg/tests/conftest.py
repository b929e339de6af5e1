import numpy as np
import pytest

from regenboot import chain


@pytest.fixture(scope="session")
def two_state():
    return chain.two_state_model()  # a=0.3, b=0.1, theta=0.5


@pytest.fixture(scope="session")
def iid_uniform():
    return chain.iid_uniform_model()


@pytest.fixture(scope="session")
def reflected_bm():
    return chain.preset("reflected-bm")


@pytest.fixture(scope="session")
def reflected_bump():
    return chain.preset("reflected-bump")


@pytest.fixture(scope="session")
def bm_traj(reflected_bm):
    return chain.simulate_reflected_diffusion(
        reflected_bm.diffusion, 10000, 0.5, seed=1234
    )


@pytest.fixture(scope="session")
def two_state_traj(two_state):
    return chain.simulate_chain(two_state, 100000, 0, seed=555)


def tv_against_density(samples, density_fn, bins=50):
    """Total variation between a histogram and a density on [0, 1]."""
    hist, edges = np.histogram(samples, bins=bins, range=(0.0, 1.0))
    emp = hist / samples.shape[0]
    fine = np.linspace(0.0, 1.0, 4001)
    dens = np.asarray(density_fn(fine), dtype=np.float64)
    cdf = np.concatenate(
        [[0.0], np.cumsum((dens[1:] + dens[:-1]) / 2.0 * np.diff(fine))]
    )
    cdf /= cdf[-1]
    probs = np.diff(np.interp(edges, fine, cdf))
    return 0.5 * np.abs(emp - probs).sum()
