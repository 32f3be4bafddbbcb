"""Energy functionals, their exact gradients, and weak-solution residuals.

A :class:`Problem` couples a graph, the left-hand-side data
(:class:`SystemParams`), and a nonlinearity in one of three variants:

* ``original``    -- the raw term ``F`` (requires a globally defined C^1 F);
* ``superlinear`` -- ``F`` spliced with its superlinear power tail;
* ``sublinear``   -- ``F`` spliced with its sublinear power tail.

The functional is

    energy(u, v) = (1/p1) ||u||_{m1,p1}^p1 + (1/p2) ||v||_{m2,p2}^p2
                   - lambda * integral(F(x, u, v))

and its gradient pair is assembled exactly, term by term:

    G_u = poly_laplacian(m1, p1, u) + h1 |u|^(p1-2) u - lambda F_t(x, u, v)

(similarly ``G_v``), so that ``mu(x) G_u(x)`` is the coordinate derivative
of the energy.  A state is a weak solution exactly when the gradient pair
vanishes.

Problem files are UTF-8 key-value lines::

    graph <path>
    m1 <int>        m2 <int>
    p1 <real>       p2 <real>
    h1 const <real>   (or: h1 file <path>)
    h2 const <real>
    lambda <real>
    nonlinearity <name>
    variant <original|superlinear|sublinear>
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .calculus import (
    _integral_arr,
    _ordered_sum,
    _poly_arr,
    _power_factor,
    _sobolev_power_arr,
    sup_norm_pair,
)
from .graph import (
    SystemState,
    VertexFunction,
    WeightedGraph,
    parse_graph,
    parse_vertex_function,
)
from .nonlinearity import (
    NonlinearityDef,
    get_builtin,
    modify_sublinear,
    modify_superlinear,
)

VARIANTS = ("original", "superlinear", "sublinear")


class ProblemError(ValueError):
    """Malformed problem file."""


@dataclass(frozen=True, eq=False)
class SystemParams:
    """Left-hand-side data: orders, exponents, potentials, and the parameter."""

    m1: int
    m2: int
    p1: float
    p2: float
    h1: VertexFunction
    h2: VertexFunction
    lam: float

    def __post_init__(self) -> None:
        for name in ("m1", "m2"):
            m = getattr(self, name)
            if isinstance(m, bool) or not isinstance(m, (int, np.integer)) or m < 1:
                raise ValueError(f"{name} must be an integer >= 1, got {m!r}")
        for name in ("p1", "p2"):
            p = getattr(self, name)
            if not (math.isfinite(p) and p > 1.0):
                raise ValueError(f"{name} must be > 1, got {p!r}")
        if not (math.isfinite(self.lam) and self.lam > 0.0):
            raise ValueError(f"lambda must be positive, got {self.lam!r}")
        if self.h1.graph is not self.h2.graph:
            raise ValueError("h1 and h2 must live on the same graph")
        for name in ("h1", "h2"):
            h = getattr(self, name)
            if not np.all(h.values > 0.0):
                raise ValueError(f"{name} must be positive at every vertex")

    @property
    def graph(self) -> WeightedGraph:
        return self.h1.graph

    def with_lambda(self, lam: float) -> "SystemParams":
        return SystemParams(self.m1, self.m2, self.p1, self.p2, self.h1, self.h2, lam)


@dataclass(frozen=True, eq=False)
class Problem:
    """A graph, system parameters, and a nonlinearity variant, ready to evaluate."""

    graph: WeightedGraph
    params: SystemParams
    f: NonlinearityDef
    variant: str

    def __post_init__(self) -> None:
        if self.variant not in VARIANTS:
            raise ValueError(f"variant must be one of {VARIANTS}, got {self.variant!r}")
        if self.params.graph is not self.graph:
            raise ValueError("params are not defined on the problem graph")
        self.f.growth.validate_for(self.params.p1, self.params.p2)
        if self.variant == "superlinear":
            eff = modify_superlinear(self.f)
        elif self.variant == "sublinear":
            eff = modify_sublinear(self.f)
        else:
            if not self.f.global_domain:
                raise ValueError(
                    "the original variant needs a globally defined C^1 nonlinearity; "
                    "use a spliced variant instead"
                )
            eff = self.f
        object.__setattr__(self, "effective", eff)

    def with_lambda(self, lam: float) -> "Problem":
        return Problem(self.graph, self.params.with_lambda(lam), self.f, self.variant)

    # array-level kernels used by the solver ---------------------------------

    def energy_arrays(self, u: np.ndarray, v: np.ndarray) -> float:
        P = self.params
        g = self.graph
        quad = (
            _sobolev_power_arr(g, P.m1, P.p1, P.h1.values, u) / P.p1
            + _sobolev_power_arr(g, P.m2, P.p2, P.h2.values, v) / P.p2
        )
        fvals = np.asarray(self.effective.fn(g._vidx, u, v))
        return quad - P.lam * _integral_arr(g, fvals)

    def gradient_arrays(self, u: np.ndarray, v: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        P = self.params
        g = self.graph
        eff = self.effective
        gu = (
            _poly_arr(g, P.m1, P.p1, u)
            + P.h1.values * _power_factor(np.abs(u), P.p1 - 2.0) * u
            - P.lam * np.asarray(eff.d_t(g._vidx, u, v))
        )
        gv = (
            _poly_arr(g, P.m2, P.p2, v)
            + P.h2.values * _power_factor(np.abs(v), P.p2 - 2.0) * v
            - P.lam * np.asarray(eff.d_s(g._vidx, u, v))
        )
        return gu, gv

    def w_norm(self, u: np.ndarray, v: np.ndarray) -> float:
        """``||u||_{m1,p1} + ||v||_{m2,p2}``, the product-space norm."""
        P = self.params
        g = self.graph
        n1 = _sobolev_power_arr(g, P.m1, P.p1, P.h1.values, u) ** (1.0 / P.p1)
        n2 = _sobolev_power_arr(g, P.m2, P.p2, P.h2.values, v) ** (1.0 / P.p2)
        return n1 + n2


@dataclass(frozen=True)
class ResidualNorms:
    sup: float
    l2: float


def _check_state(prob: Problem, state: SystemState) -> None:
    if state.graph is not prob.graph:
        raise ValueError("state is not defined on the problem graph")


def eval_energy(prob: Problem, state: SystemState) -> float:
    """Value of the variant's functional at ``state``."""
    _check_state(prob, state)
    return prob.energy_arrays(state.u.values, state.v.values)


def gradient(prob: Problem, state: SystemState) -> SystemState:
    """Exact gradient pair; zero exactly at weak solutions."""
    _check_state(prob, state)
    gu, gv = prob.gradient_arrays(state.u.values, state.v.values)
    g = prob.graph
    return SystemState(VertexFunction(g, gu), VertexFunction(g, gv))


def residual_norms(prob: Problem, state: SystemState) -> ResidualNorms:
    """Sup and L^2(mu) norms of the gradient pair."""
    _check_state(prob, state)
    gu, gv = prob.gradient_arrays(state.u.values, state.v.values)
    sup = float(np.max(np.hypot(gu, gv)))
    l2 = math.sqrt(_integral_arr(prob.graph, gu**2 + gv**2))
    return ResidualNorms(sup, l2)


def transfers_to_original(prob: Problem, state: SystemState, delta: float | None = None) -> bool:
    """Whether a spliced-problem solution is small enough to solve the original.

    True iff the pair sup norm is at most ``delta / 2`` -- on that ball the
    spliced term coincides with the raw one.
    """
    _check_state(prob, state)
    if delta is None:
        delta = prob.f.delta
    return sup_norm_pair(state) <= float(delta) / 2.0


# ----------------------------------------------------------------------
# problem files
# ----------------------------------------------------------------------

_REQUIRED_KEYS = ("graph", "m1", "m2", "p1", "p2", "h1", "h2", "lambda", "nonlinearity", "variant")


def parse_problem(text: str, base_dir: str | Path = ".") -> Problem:
    """Parse a problem file; relative paths resolve against ``base_dir``."""
    base = Path(base_dir)
    entries: dict[str, list[str]] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        fields = line.split()
        key = fields[0]
        if key not in _REQUIRED_KEYS:
            raise ProblemError(f"line {lineno}: unknown key {key!r}")
        if key in entries:
            raise ProblemError(f"line {lineno}: duplicate key {key!r}")
        entries[key] = fields[1:]
    missing = [k for k in _REQUIRED_KEYS if k not in entries]
    if missing:
        raise ProblemError(f"missing keys: {', '.join(missing)}")

    def one(key: str) -> str:
        if len(entries[key]) != 1:
            raise ProblemError(f"key {key!r} takes exactly one value")
        return entries[key][0]

    def as_int(key: str) -> int:
        try:
            return int(one(key))
        except ValueError:
            raise ProblemError(f"key {key!r} must be an integer") from None

    def as_real(key: str) -> float:
        try:
            return float(one(key))
        except ValueError:
            raise ProblemError(f"key {key!r} must be a real number") from None

    graph_path = base / one("graph")
    try:
        g = parse_graph(graph_path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ProblemError(f"cannot read graph file {graph_path}: {exc}") from None

    def potential(key: str) -> VertexFunction:
        fields = entries[key]
        if len(fields) != 2:
            raise ProblemError(f"key {key!r} expects 'const <value>' or 'file <path>'")
        kind, arg = fields
        if kind == "const":
            try:
                return g.constant(float(arg))
            except ValueError:
                raise ProblemError(f"key {key!r}: bad constant {arg!r}") from None
        if kind == "file":
            path = base / arg
            try:
                return parse_vertex_function(g, path.read_text(encoding="utf-8"))
            except OSError as exc:
                raise ProblemError(f"cannot read {key} file {path}: {exc}") from None
        raise ProblemError(f"key {key!r}: unknown mode {kind!r}")

    params = SystemParams(
        m1=as_int("m1"),
        m2=as_int("m2"),
        p1=as_real("p1"),
        p2=as_real("p2"),
        h1=potential("h1"),
        h2=potential("h2"),
        lam=as_real("lambda"),
    )
    variant = one("variant")
    if variant not in VARIANTS:
        raise ProblemError(f"variant must be one of {VARIANTS}, got {variant!r}")
    f = get_builtin(one("nonlinearity"))
    return Problem(graph=g, params=params, f=f, variant=variant)
