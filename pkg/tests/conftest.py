"""Shared fixtures and random-instance generators."""

import numpy as np
import pytest

from ssrank.zpq import SparseTreeVector


def random_node(rng, max_depth=3, max_entry=3):
    depth = int(rng.integers(0, max_depth + 1))
    return tuple(int(rng.integers(1, max_entry + 1)) for _ in range(depth))


def random_vector(rng, max_nodes=6, max_closure=10, max_depth=3,
                  max_entry=3, nonzero=False):
    """A random sparse vector whose support closure has <= max_closure
    nodes (the brute-force oracle guard)."""
    from ssrank.nodes import closure
    while True:
        n = int(rng.integers(1 if nonzero else 0, max_nodes + 1))
        entries = {}
        for _ in range(n):
            entries[random_node(rng, max_depth, max_entry)] = float(
                rng.normal())
        z = SparseTreeVector(entries)
        if nonzero and not len(z):
            continue
        if not len(z) or len(closure(z.support)) <= max_closure:
            return z


PQ_GRID = [(1.0, 1.0), (1.0, 1.5), (1.0, 2.0), (1.0, 4.0),
           (1.5, 1.5), (1.5, 2.0), (1.5, 4.0),
           (2.0, 2.0), (2.0, 4.0)]


@pytest.fixture
def rng():
    return np.random.default_rng(0)
