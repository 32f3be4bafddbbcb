"""Random graph/function generators shared by the test modules."""

from __future__ import annotations

import numpy as np

from polylap.graph import SystemState, VertexFunction, WeightedGraph


def random_graph(
    rng: np.random.Generator,
    n_min: int = 3,
    n_max: int = 9,
    extra_edge_prob: float = 0.35,
    mu_range: tuple[float, float] = (0.5, 3.0),
    w_range: tuple[float, float] = (0.5, 2.0),
) -> WeightedGraph:
    """Connected random graph: a random spanning tree plus extra edges."""
    n = int(rng.integers(n_min, n_max + 1))
    ids = tuple(f"x{i}" for i in range(n))
    mu = rng.uniform(*mu_range, size=n)
    edges: list[tuple[int, int]] = []
    present: set[tuple[int, int]] = set()
    order = rng.permutation(n)
    for pos in range(1, n):
        a = int(order[pos])
        b = int(order[int(rng.integers(0, pos))])
        key = (min(a, b), max(a, b))
        edges.append(key)
        present.add(key)
    for i in range(n):
        for j in range(i + 1, n):
            if (i, j) not in present and rng.uniform() < extra_edge_prob:
                edges.append((i, j))
                present.add((i, j))
    omega = rng.uniform(*w_range, size=len(edges))
    return WeightedGraph(ids, mu, tuple(edges), omega)


def random_function(
    rng: np.random.Generator, g: WeightedGraph, scale: float = 1.0
) -> VertexFunction:
    return VertexFunction(g, rng.uniform(-scale, scale, size=g.n))


def random_positive_function(
    rng: np.random.Generator, g: WeightedGraph, lo: float = 0.2, hi: float = 3.0
) -> VertexFunction:
    return VertexFunction(g, rng.uniform(lo, hi, size=g.n))


def random_state(
    rng: np.random.Generator, g: WeightedGraph, scale: float = 1.0
) -> SystemState:
    return SystemState(random_function(rng, g, scale), random_function(rng, g, scale))


def two_vertex_graph(mu=(1.0, 1.0), omega=1.0) -> WeightedGraph:
    return WeightedGraph(("a", "b"), np.array(mu, dtype=float), ((0, 1),), np.array([omega]))


def single_vertex_graph(mu: float = 1.0) -> WeightedGraph:
    return WeightedGraph(("a",), np.array([mu]), (), np.array([]))
