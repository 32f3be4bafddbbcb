"""Finite weighted graphs and real-valued vertex functions.

A :class:`WeightedGraph` is a finite vertex set with a positive measure
``mu`` on vertices and positive symmetric weights ``omega`` on undirected
edges.  The declaration order of the vertices is fixed at construction and
defines the coordinate system shared by every :class:`VertexFunction`
built on the graph; all measure integrals sum in that order, which keeps
results bit-reproducible.

Graph files are UTF-8 and line oriented::

    # comment
    vertex <id> <mu>
    edge <id1> <id2> <omega>

Fields are whitespace separated, reals may use decimal or scientific
notation, and ``#`` starts a comment anywhere on a line.  Vertex ``id``s
are opaque strings; the order of the ``vertex`` lines fixes the vertex
ordering.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np


class GraphError(ValueError):
    """Malformed graph or function data (file syntax or invariant violation)."""


def _require_positive_real(value: float, what: str, context: str = "") -> float:
    value = float(value)
    if not math.isfinite(value) or value <= 0.0:
        where = f" ({context})" if context else ""
        raise GraphError(f"{what} must be a positive finite real, got {value!r}{where}")
    return value


@dataclass(frozen=True, eq=False)
class WeightedGraph:
    """Immutable finite graph with vertex measure and edge weights.

    ``edges`` stores index pairs ``(i, j)`` with ``i < j`` into the vertex
    ordering; ``omega`` is aligned with ``edges``.  Instances are safe to
    share between threads: every derived structure is built once here and
    all operations elsewhere are pure.
    """

    vertices: tuple[str, ...]
    mu: np.ndarray
    edges: tuple[tuple[int, int], ...]
    omega: np.ndarray

    def __post_init__(self) -> None:
        if not self.vertices:
            raise GraphError("no vertices")
        n = len(self.vertices)
        mu = np.asarray(self.mu, dtype=float).copy()
        if mu.shape != (n,):
            raise GraphError(f"mu has shape {mu.shape}, expected ({n},)")
        for vid, m in zip(self.vertices, mu):
            _require_positive_real(m, "mu", f"vertex {vid!r}")
        omega = np.asarray(self.omega, dtype=float).copy()
        if omega.shape != (len(self.edges),):
            raise GraphError(f"omega has shape {omega.shape}, expected ({len(self.edges)},)")
        seen: set[tuple[int, int]] = set()
        for (i, j), w in zip(self.edges, omega):
            if not (0 <= i < n and 0 <= j < n):
                raise GraphError(f"edge ({i}, {j}) has an endpoint outside the vertex range")
            if i == j:
                raise GraphError(f"self-loop at vertex {self.vertices[i]!r}")
            if i > j:
                raise GraphError(f"edge ({i}, {j}) must be stored with i < j")
            if (i, j) in seen:
                raise GraphError(
                    f"duplicate edge {self.vertices[i]!r} -- {self.vertices[j]!r}"
                )
            seen.add((i, j))
            _require_positive_real(
                w, "omega", f"edge {self.vertices[i]!r} -- {self.vertices[j]!r}"
            )
        index = {vid: k for k, vid in enumerate(self.vertices)}
        if len(index) != n:
            raise GraphError("duplicate vertex identifiers")

        mu.setflags(write=False)
        omega.setflags(write=False)
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "omega", omega)
        object.__setattr__(self, "_index", index)

        ei = np.fromiter((e[0] for e in self.edges), dtype=np.intp, count=len(self.edges))
        ej = np.fromiter((e[1] for e in self.edges), dtype=np.intp, count=len(self.edges))
        object.__setattr__(self, "_ei", ei)
        object.__setattr__(self, "_ej", ej)

        # Incident edge index lists per vertex, in edge declaration order.
        incident: list[list[int]] = [[] for _ in range(n)]
        for e, (i, j) in enumerate(self.edges):
            incident[i].append(e)
            incident[j].append(e)
        object.__setattr__(
            self, "_incident", tuple(tuple(lst) for lst in incident)
        )

        degrees = np.zeros(n)
        for x in range(n):
            total = 0.0
            for e in incident[x]:
                total += omega[e]
            degrees[x] = total
        degrees.setflags(write=False)
        object.__setattr__(self, "degrees", degrees)

        lap = np.zeros((n, n))
        for e, (i, j) in enumerate(self.edges):
            lap[i, j] = omega[e] / mu[i]
            lap[j, i] = omega[e] / mu[j]
        lap[np.arange(n), np.arange(n)] = -degrees / mu
        lap.setflags(write=False)
        object.__setattr__(self, "_laplacian", lap)
        object.__setattr__(self, "_vidx", np.arange(n))

        if self.component_count() > 1:
            warnings.warn(
                f"graph has {self.component_count()} connected components",
                stacklevel=2,
            )

    # ------------------------------------------------------------------
    # basic queries
    # ------------------------------------------------------------------

    @property
    def n(self) -> int:
        return len(self.vertices)

    @property
    def laplacian_matrix(self) -> np.ndarray:
        """Dense operator matrix ``L`` with ``(L @ phi)(x) = laplacian(phi)(x)``."""
        return self._laplacian

    def vertex_index(self, vid: str) -> int:
        try:
            return self._index[vid]
        except KeyError:
            raise GraphError(f"unknown vertex {vid!r}") from None

    def component_count(self) -> int:
        n = self.n
        seen = [False] * n
        count = 0
        for start in range(n):
            if seen[start]:
                continue
            count += 1
            stack = [start]
            seen[start] = True
            while stack:
                x = stack.pop()
                for e in self._incident[x]:
                    i, j = self.edges[e]
                    y = j if i == x else i
                    if not seen[y]:
                        seen[y] = True
                        stack.append(y)
        return count

    # ------------------------------------------------------------------
    # vertex function constructors
    # ------------------------------------------------------------------

    def function(self, values: Sequence[float] | np.ndarray) -> "VertexFunction":
        return VertexFunction(self, np.asarray(values, dtype=float))

    def constant(self, value: float) -> "VertexFunction":
        return VertexFunction(self, np.full(self.n, float(value)))

    def zeros(self) -> "VertexFunction":
        return VertexFunction(self, np.zeros(self.n))

    def indicator(self, vid: str) -> "VertexFunction":
        values = np.zeros(self.n)
        values[self.vertex_index(vid)] = 1.0
        return VertexFunction(self, values)

    def function_from_map(
        self, mapping: Mapping[str, float], default: float = 0.0
    ) -> "VertexFunction":
        values = np.full(self.n, float(default))
        for vid, val in mapping.items():
            values[self.vertex_index(vid)] = float(val)
        return VertexFunction(self, values)

    def serialize(self) -> str:
        lines = []
        for vid, m in zip(self.vertices, self.mu):
            lines.append(f"vertex {vid} {m:.17g}")
        for (i, j), w in zip(self.edges, self.omega):
            lines.append(f"edge {self.vertices[i]} {self.vertices[j]} {w:.17g}")
        return "\n".join(lines) + "\n"


@dataclass(frozen=True, eq=False)
class VertexFunction:
    """A real-valued function on the vertices of one graph.

    Values are stored in the graph's vertex order and frozen; every value
    must be finite.
    """

    graph: WeightedGraph
    values: np.ndarray

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=float).copy()
        if values.shape != (self.graph.n,):
            raise GraphError(
                f"function has {values.shape} values, graph has {self.graph.n} vertices"
            )
        if not np.all(np.isfinite(values)):
            raise GraphError("function values must be finite")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    def __len__(self) -> int:
        return self.graph.n

    def __call__(self, vid: str) -> float:
        return float(self.values[self.graph.vertex_index(vid)])


@dataclass(frozen=True, eq=False)
class SystemState:
    """A pair of vertex functions on one shared graph."""

    u: VertexFunction
    v: VertexFunction

    def __post_init__(self) -> None:
        if self.u.graph is not self.v.graph:
            raise GraphError("both components of a state must share one graph")

    @property
    def graph(self) -> WeightedGraph:
        return self.u.graph


@dataclass(frozen=True)
class GraphStats:
    mu_min: float
    total_measure: float
    vertex_count: int
    edge_count: int


# ----------------------------------------------------------------------
# module-level operations
# ----------------------------------------------------------------------


def degree(g: WeightedGraph, vid: str) -> float:
    """Sum of edge weights incident to ``vid`` (0 for isolated vertices)."""
    x = g.vertex_index(vid)
    total = 0.0
    for e in g._incident[x]:
        total += g.omega[e]
    return float(total)


def graph_stats(g: WeightedGraph) -> GraphStats:
    """Minimum measure, total measure, and counts; sums in vertex order."""
    mu_min = float(g.mu[0])
    total = 0.0
    for m in g.mu:
        total += m
        if m < mu_min:
            mu_min = float(m)
    return GraphStats(mu_min, float(total), g.n, len(g.edges))


def _parse_real(token: str, lineno: int, what: str) -> float:
    try:
        value = float(token)
    except ValueError:
        raise GraphError(f"line {lineno}: invalid {what} {token!r}") from None
    if not math.isfinite(value):
        raise GraphError(f"line {lineno}: {what} must be finite, got {token!r}")
    return value


def _content_lines(text: str) -> Iterable[tuple[int, list[str]]]:
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        yield lineno, line.split()


def parse_graph(text: str) -> WeightedGraph:
    """Parse the graph file format into a validated :class:`WeightedGraph`.

    Endpoints of every ``edge`` record must already be declared.  Raises
    :class:`GraphError` with the offending line number for syntax errors,
    non-positive ``mu``/``omega``, unknown endpoints, self-loops and
    duplicate declarations.
    """
    ids: list[str] = []
    mus: list[float] = []
    index: dict[str, int] = {}
    edge_items: list[tuple[int, int]] = []
    omegas: list[float] = []
    seen_edges: set[tuple[int, int]] = set()
    for lineno, fields in _content_lines(text):
        kind = fields[0]
        if kind == "vertex":
            if len(fields) != 3:
                raise GraphError(f"line {lineno}: expected 'vertex <id> <mu>'")
            vid = fields[1]
            if vid in index:
                raise GraphError(f"line {lineno}: duplicate vertex {vid!r}")
            m = _parse_real(fields[2], lineno, "mu")
            if m <= 0:
                raise GraphError(f"line {lineno}: mu must be positive, got {m!r}")
            index[vid] = len(ids)
            ids.append(vid)
            mus.append(m)
        elif kind == "edge":
            if len(fields) != 4:
                raise GraphError(f"line {lineno}: expected 'edge <id1> <id2> <omega>'")
            a, b = fields[1], fields[2]
            if a not in index:
                raise GraphError(f"line {lineno}: unknown endpoint {a!r}")
            if b not in index:
                raise GraphError(f"line {lineno}: unknown endpoint {b!r}")
            ia, ib = index[a], index[b]
            if ia == ib:
                raise GraphError(f"line {lineno}: self-loop at vertex {a!r}")
            key = (min(ia, ib), max(ia, ib))
            if key in seen_edges:
                raise GraphError(f"line {lineno}: duplicate edge {a!r} -- {b!r}")
            seen_edges.add(key)
            w = _parse_real(fields[3], lineno, "omega")
            if w <= 0:
                raise GraphError(f"line {lineno}: omega must be positive, got {w!r}")
            edge_items.append(key)
            omegas.append(w)
        else:
            raise GraphError(
                f"line {lineno}: unknown record {kind!r} (expected 'vertex' or 'edge')"
            )
    if not ids:
        raise GraphError("no vertices")
    return WeightedGraph(tuple(ids), np.array(mus), tuple(edge_items), np.array(omegas))


def serialize_graph(g: WeightedGraph) -> str:
    return g.serialize()


def parse_vertex_function(g: WeightedGraph, text: str) -> VertexFunction:
    """Parse ``value <vertex-id> <real>`` lines; missing vertices default to 0."""
    values = np.zeros(g.n)
    seen: set[int] = set()
    for lineno, fields in _content_lines(text):
        if fields[0] != "value" or len(fields) != 3:
            raise GraphError(f"line {lineno}: expected 'value <vertex-id> <real>'")
        vid = fields[1]
        if vid not in g._index:
            raise GraphError(f"line {lineno}: unknown vertex {vid!r}")
        x = g._index[vid]
        if x in seen:
            raise GraphError(f"line {lineno}: duplicate value for vertex {vid!r}")
        seen.add(x)
        values[x] = _parse_real(fields[2], lineno, "value")
    return VertexFunction(g, values)


def serialize_vertex_function(phi: VertexFunction) -> str:
    g = phi.graph
    lines = [f"value {vid} {val:.17g}" for vid, val in zip(g.vertices, phi.values)]
    return "\n".join(lines) + "\n"
