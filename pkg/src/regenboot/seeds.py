"""Deterministic seed derivation for pipeline stages and replications."""

import numpy as np


def derive_seed(base: int, *path: int) -> int:
    """A 64-bit child seed for a labelled stage, stable across runs."""
    ss = np.random.SeedSequence((int(base),) + tuple(int(p) for p in path))
    lo, hi = ss.generate_state(2)
    return int(lo) | (int(hi) << 32)
