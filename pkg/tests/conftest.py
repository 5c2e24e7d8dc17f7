import numpy as np
import pytest

from opinion_shift.graph import WeightedDigraph


def random_digraph(rng, n, density=0.3, weighted=True):
    """Strongly connected digraph: a random Hamiltonian cycle plus extra arcs."""
    order = rng.permutation(n)
    arcs = {(int(order[i]), int(order[(i + 1) % n])) for i in range(n)}
    for u in range(n):
        for v in range(n):
            if u != v and rng.random() < density:
                arcs.add((u, v))
    edges = [(u, v, float(rng.uniform(0.5, 2.0)) if weighted else 1.0) for u, v in sorted(arcs)]
    return WeightedDigraph(n, edges)


def random_undirected(rng, n, density=0.3, weighted=True):
    """Connected undirected graph: a random spanning tree plus extra edges."""
    order = rng.permutation(n)
    pairs = {tuple(sorted((int(order[i]), int(order[rng.integers(i)])))) for i in range(1, n)}
    for u in range(n):
        for v in range(u + 1, n):
            if rng.random() < density:
                pairs.add((u, v))
    edges = [(u, v, float(rng.uniform(0.5, 2.0)) if weighted else 1.0) for u, v in sorted(pairs)]
    return WeightedDigraph.from_undirected(n, edges)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
