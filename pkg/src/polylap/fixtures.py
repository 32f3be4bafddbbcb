"""Bundled desk-scale fixtures used by the verification command and tests.

The bundled graph has seven vertices and ten edges with measures
(2, 1, 3, 3, 5, 5, 6), total measure 25.  Only the degree of ``x1`` (six)
is pinned by the reference data, not the individual weights; the fixture
assigns 1.5 to the four edges at ``x1`` and 1.0 elsewhere, one of many
assignments with that degree.

The direct-input baseline reproduces the reference constants verbatim:
its gradient-norm power 15/68 is the published arithmetic, which differs
from the definition-evaluated value 6/68 on any weight assignment with
degree six at ``x1`` (see ``verify-example`` output).  The graph-computed
baseline uses the definitions.
"""

from __future__ import annotations

import math

import numpy as np

from .bounds import BaselinePair
from .energy import Problem, SystemParams
from .graph import SystemState, VertexFunction, WeightedGraph, parse_graph
from .nonlinearity import builtin_example51, builtin_example52

EXAMPLE51_GRAPH_TEXT = """\
# bundled 7-vertex fixture; degree(x1) = 6
vertex x1 2
vertex x2 1
vertex x3 3
vertex x4 3
vertex x5 5
vertex x6 5
vertex x7 6
edge x1 x2 1.5
edge x1 x3 1.5
edge x1 x4 1.5
edge x1 x5 1.5
edge x2 x3 1.0
edge x2 x6 1.0
edge x3 x4 1.0
edge x4 x7 1.0
edge x5 x6 1.0
edge x5 x7 1.0
"""


def example51_graph() -> WeightedGraph:
    return parse_graph(EXAMPLE51_GRAPH_TEXT)


def example51_params(g: WeightedGraph, lam: float) -> SystemParams:
    return SystemParams(
        m1=1, m2=1, p1=2.0, p2=2.0, h1=g.constant(1.0), h2=g.constant(1.0), lam=lam
    )


def example51_problem(
    lam: float, variant: str = "superlinear", graph: WeightedGraph | None = None
) -> Problem:
    g = graph if graph is not None else example51_graph()
    return Problem(
        graph=g, params=example51_params(g, lam), f=builtin_example51(), variant=variant
    )


def example51_anchor(prob: Problem) -> SystemState:
    """Anchor pair: scaled indicators of ``x1`` with sup norm <= delta/2.

    The scale is ``delta sqrt(mu_min h_min) / (2 sqrt(17) sqrt(max(1, h_max)))``
    per component.
    """
    g = prob.graph
    delta = prob.f.delta
    mu_min = float(np.min(g.mu))

    def scaled(h: VertexFunction) -> VertexFunction:
        h_min = float(np.min(h.values))
        h_max = float(np.max(h.values))
        scale = delta * math.sqrt(mu_min * h_min) / (
            2.0 * math.sqrt(17.0) * math.sqrt(max(1.0, h_max))
        )
        values = np.zeros(g.n)
        values[g.vertex_index("x1")] = scale
        return VertexFunction(g, values)

    return SystemState(scaled(prob.params.h1), scaled(prob.params.h2))


def example51_direct_baseline() -> BaselinePair:
    """The reference norm powers: gradient 15/68 and L^2 power 1/34 per component."""
    return BaselinePair(15.0 / 68.0, 1.0 / 34.0, 15.0 / 68.0, 1.0 / 34.0, "direct-input")


def example51_graph_baseline(prob: Problem) -> BaselinePair:
    return BaselinePair.from_state(prob.params, example51_anchor(prob))


def example52_params(g: WeightedGraph, lam: float) -> SystemParams:
    return SystemParams(
        m1=1, m2=1, p1=2.0, p2=3.0, h1=g.constant(1.0), h2=g.constant(1.0), lam=lam
    )


def example52_problem(
    lam: float, variant: str = "sublinear", graph: WeightedGraph | None = None
) -> Problem:
    g = graph if graph is not None else example51_graph()
    return Problem(
        graph=g, params=example52_params(g, lam), f=builtin_example52(), variant=variant
    )
