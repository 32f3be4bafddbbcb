"""Discrete differential operators and norms on finite weighted graphs.

Everything here is a pure function of immutable inputs.  The operators are

* ``integral``      -- measure integral, a mu-weighted sum in vertex order;
* ``gamma``         -- pointwise gradient form (carre du champ)
  ``gamma(f, g)(x) = (1/(2 mu(x))) sum_{y~x} omega_xy (f(y)-f(x)) (g(y)-g(x))``;
* ``grad_len``      -- gradient length ``sqrt(gamma(phi, phi))``;
* ``laplacian``     -- ``(1/mu(x)) sum_{y~x} omega_xy (phi(y)-phi(x))``;
* ``m_grad_len``    -- iterated-Laplacian gradient length of order ``m``:
  ``|laplacian^(m/2) phi|`` for even ``m``, ``grad_len(laplacian^((m-1)/2) phi)``
  for odd ``m``;
* ``p_laplacian``   -- the nonlinear operator dual to
  ``phi -> integral(grad_len^(p-2) * gamma(phi, .))``;
* ``poly_laplacian``-- the order-``m`` generalization, computed as the exact
  coordinate derivative of the energy ``(1/p) integral(m_grad_len^p)``
  divided by ``mu``; for ``p = 2`` it reduces to ``(-laplacian)^m`` and for
  ``m = 1`` to ``-p_laplacian``.

Degenerate-gradient rule: wherever a factor ``grad_len^(p-2)`` (or
``|.|^(p-2)``) appears with ``p < 2`` and a vanishing base, the factor is
taken as 0.  This is the continuous extension of the products it multiplies
and keeps the operators finite; the weak-form duality tests apply the same
rule on both sides.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graph import SystemState, VertexFunction, WeightedGraph


def _check_on(g: WeightedGraph, phi: VertexFunction, name: str = "function") -> None:
    if phi.graph is not g:
        raise ValueError(f"{name} is not defined on this graph")


def _check_p(p: float) -> float:
    p = float(p)
    if not p > 1.0:
        raise ValueError(f"p must be > 1, got {p}")
    return p


def _check_m(m: int) -> int:
    if isinstance(m, bool) or not isinstance(m, (int, np.integer)):
        raise ValueError(f"m must be an integer >= 1, got {m!r}")
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m}")
    return int(m)


def _ordered_sum(values: np.ndarray) -> float:
    """Left-to-right accumulation; the fixed vertex order is the contract."""
    total = 0.0
    for v in values:
        total += v
    return float(total)


def _power_factor(base: np.ndarray, expo: float) -> np.ndarray:
    """``base ** expo`` for ``base >= 0`` with the degenerate rule at 0.

    ``expo == 0`` gives 1 everywhere (the ``p = 2`` case); negative ``expo``
    gives 0 where ``base == 0``.
    """
    base = np.asarray(base, dtype=float)
    if expo == 0.0:
        return np.ones_like(base)
    if expo > 0.0:
        return base**expo
    out = np.zeros_like(base)
    nz = base > 0.0
    out[nz] = base[nz] ** expo
    return out


# ----------------------------------------------------------------------
# array-level kernels (shared with the energy and solver modules)
# ----------------------------------------------------------------------


def _integral_arr(g: WeightedGraph, vals: np.ndarray) -> float:
    return _ordered_sum(g.mu * vals)


def _gamma_arr(g: WeightedGraph, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    out = np.zeros(g.n)
    if len(g.edges):
        da = a[g._ej] - a[g._ei]
        db = b[g._ej] - b[g._ei]
        contrib = g.omega * da * db
        np.add.at(out, g._ei, contrib)
        np.add.at(out, g._ej, contrib)
    return out / (2.0 * g.mu)


def _lap_arr(g: WeightedGraph, vals: np.ndarray) -> np.ndarray:
    """Edge-difference evaluation; exactly zero on constant functions."""
    out = np.zeros(g.n)
    if len(g.edges):
        diff = g.omega * (vals[g._ej] - vals[g._ei])
        np.add.at(out, g._ei, diff)
        np.subtract.at(out, g._ej, diff)
    return out / g.mu


def _iterated_laplacian(g: WeightedGraph, k: int, vals: np.ndarray) -> np.ndarray:
    w = vals
    for _ in range(k):
        w = _lap_arr(g, w)
    return w


def _laplacian_power(g: WeightedGraph, k: int) -> np.ndarray:
    cache: dict[int, np.ndarray] = g.__dict__.setdefault("_lap_powers", {})
    if k not in cache:
        cache[k] = np.linalg.matrix_power(g.laplacian_matrix, k)
    return cache[k]


def _m_grad_arr(g: WeightedGraph, m: int, vals: np.ndarray) -> np.ndarray:
    if m % 2 == 0:
        return np.abs(_iterated_laplacian(g, m // 2, vals))
    w = _iterated_laplacian(g, (m - 1) // 2, vals)
    return np.sqrt(_gamma_arr(g, w, w))


def _poly_arr(g: WeightedGraph, m: int, p: float, vals: np.ndarray) -> np.ndarray:
    """Coordinate derivative of ``(1/p) integral(m_grad_len^p)`` over ``mu``."""
    if m % 2 == 0:
        k = m // 2
        W = _laplacian_power(g, k)
        w = W @ vals
        gvec = _power_factor(np.abs(w), p - 2.0) * w
        grad = W.T @ (g.mu * gvec)
    else:
        k = (m - 1) // 2
        w = vals if k == 0 else _laplacian_power(g, k) @ vals
        q = _gamma_arr(g, w, w)
        a = _power_factor(q, (p - 2.0) / 2.0)
        d = np.zeros(g.n)
        if len(g.edges):
            c = g.omega * 0.5 * (a[g._ei] + a[g._ej]) * (w[g._ej] - w[g._ei])
            np.add.at(d, g._ej, c)
            np.subtract.at(d, g._ei, c)
        grad = d if k == 0 else _laplacian_power(g, k).T @ d
    return grad / g.mu


def _sobolev_power_arr(
    g: WeightedGraph, m: int, p: float, h: np.ndarray, vals: np.ndarray
) -> float:
    mg = _m_grad_arr(g, m, vals)
    return _ordered_sum(g.mu * (mg**p + h * np.abs(vals) ** p))


# ----------------------------------------------------------------------
# public operations
# ----------------------------------------------------------------------


def integral(g: WeightedGraph, phi: VertexFunction) -> float:
    """``sum_x mu(x) phi(x)`` in the fixed vertex order."""
    _check_on(g, phi)
    return _integral_arr(g, phi.values)


def gamma(g: WeightedGraph, phi1: VertexFunction, phi2: VertexFunction) -> VertexFunction:
    """Pointwise gradient form of two functions; bilinear and symmetric."""
    _check_on(g, phi1)
    _check_on(g, phi2)
    return VertexFunction(g, _gamma_arr(g, phi1.values, phi2.values))


def grad_len(g: WeightedGraph, phi: VertexFunction) -> VertexFunction:
    """Gradient length ``sqrt(gamma(phi, phi))``."""
    _check_on(g, phi)
    return VertexFunction(g, np.sqrt(_gamma_arr(g, phi.values, phi.values)))


def laplacian(g: WeightedGraph, phi: VertexFunction) -> VertexFunction:
    _check_on(g, phi)
    return VertexFunction(g, _lap_arr(g, phi.values))


def m_grad_len(g: WeightedGraph, m: int, phi: VertexFunction) -> VertexFunction:
    """Length of the order-``m`` gradient (see module docstring)."""
    m = _check_m(m)
    _check_on(g, phi)
    return VertexFunction(g, _m_grad_arr(g, m, phi.values))


def p_laplacian(g: WeightedGraph, p: float, phi: VertexFunction) -> VertexFunction:
    """Pointwise p-Laplacian.

    ``(1/(2 mu(x))) sum_{y~x} (grad_len^(p-2)(y) + grad_len^(p-2)(x))
    omega_xy (phi(y) - phi(x))`` with the degenerate-gradient rule.
    """
    p = _check_p(p)
    _check_on(g, phi)
    vals = phi.values
    gl = np.sqrt(_gamma_arr(g, vals, vals))
    a = _power_factor(gl, p - 2.0)
    out = np.zeros(g.n)
    if len(g.edges):
        c = (a[g._ei] + a[g._ej]) * g.omega * (vals[g._ej] - vals[g._ei])
        np.add.at(out, g._ei, c)
        np.subtract.at(out, g._ej, c)
    return VertexFunction(g, out / (2.0 * g.mu))


def poly_laplacian(g: WeightedGraph, m: int, p: float, phi: VertexFunction) -> VertexFunction:
    """Order-``m`` p-poly-Laplacian via the exact energy coordinate derivative.

    The result ``L`` is the unique vertex function with
    ``integral(L * psi) = integral(m_grad_len(phi)^(p-2) * pairing(phi, psi))``
    for every ``psi``, where the pairing is ``gamma`` of the iterated
    Laplacians for odd ``m`` and the product of iterated Laplacians for
    even ``m``.
    """
    m = _check_m(m)
    p = _check_p(p)
    _check_on(g, phi)
    return VertexFunction(g, _poly_arr(g, m, p, phi.values))


def lp_norm(g: WeightedGraph, q: float, phi: VertexFunction) -> float:
    """``(integral |phi|^q)^(1/q)`` for ``q >= 1``."""
    q = float(q)
    if not q >= 1.0:
        raise ValueError(f"q must be >= 1, got {q}")
    _check_on(g, phi)
    return _integral_arr(g, np.abs(phi.values) ** q) ** (1.0 / q)


def sobolev_power(
    g: WeightedGraph, m: int, p: float, h: VertexFunction, phi: VertexFunction
) -> float:
    """``integral(m_grad_len^p + h |phi|^p)``, the p-th power of the norm."""
    m = _check_m(m)
    p = _check_p(p)
    _check_on(g, h, "h")
    _check_on(g, phi)
    if not np.all(h.values > 0.0):
        raise ValueError("h must be positive at every vertex")
    return _sobolev_power_arr(g, m, p, h.values, phi.values)


def sobolev_norm(
    g: WeightedGraph, m: int, p: float, h: VertexFunction, phi: VertexFunction
) -> float:
    return sobolev_power(g, m, p, h, phi) ** (1.0 / float(p))


def sup_norm(phi: VertexFunction) -> float:
    return float(np.max(np.abs(phi.values)))


def sup_norm_pair(state: SystemState) -> float:
    """Max over vertices of the Euclidean length of ``(u(x), v(x))``."""
    return float(np.max(np.hypot(state.u.values, state.v.values)))


@dataclass(frozen=True)
class EmbeddingConstants:
    """Multipliers bounding sup and L^q norms by the Sobolev norm."""

    sup_bound_factor: float
    lq_bound_factor: float


def embedding_constants(
    g: WeightedGraph, m: int, p: float, h: VertexFunction, q: float
) -> EmbeddingConstants:
    """``sup <= (mu_min h_min)^(-1/p) ||.||`` and the L^q analogue.

    The L^q factor is ``(total_measure)^(1/q) / (mu_min h_min)^(1/p)``.
    """
    m = _check_m(m)
    p = _check_p(p)
    q = float(q)
    if not q >= 1.0:
        raise ValueError(f"q must be >= 1, got {q}")
    _check_on(g, h, "h")
    if not np.all(h.values > 0.0):
        raise ValueError("h must be positive at every vertex")
    mu_min = float(np.min(g.mu))
    h_min = float(np.min(h.values))
    total = 0.0
    for v in g.mu:
        total += v
    sup_factor = (mu_min * h_min) ** (-1.0 / p)
    return EmbeddingConstants(sup_factor, total ** (1.0 / q) * sup_factor)
