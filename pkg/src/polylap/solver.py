"""Critical-point solvers for the graph energy functionals.

* ``descend``       -- gradient descent with backtracking line search from
  one starting state; the workhorse of ``minimize``.
* ``minimize``      -- seeded multi-start descent for coercive (sublinear)
  functionals, deduplicated modulo the sign symmetry when the term is even.
* ``mountain_pass`` -- discrete path deformation between the zero state and
  a negative-energy anchor: repeatedly move the maximal-energy interior
  point one line-search step downhill and re-even the path by arc-length
  uniform piecewise-linear reparameterization in the product Sobolev norm.
* ``newton_refine`` -- damped Newton on the gradient map with a central
  finite-difference Jacobian-vector product inside a GMRES solve; used to
  take almost-converged states down to tight residuals (plain descent
  cannot certify sup residuals near 1e-8 because the sufficient-decrease
  comparison saturates double precision first).
* ``sweep_lambda``  -- one solve per parameter value, each row checked
  against the closed-form bounds when a report is supplied.

Descent directions use the measure-weighted gradient pair, so a step is
accepted when it decreases the energy by at least
``1e-4 * step * integral(G_u^2 + G_v^2)``.  All randomness flows from the
config seed; fixed seed means byte-identical results.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.sparse.linalg import LinearOperator, gmres

from .bounds import BoundsReport, mountain_pass_level_bound, solution_norm_bounds
from .calculus import _integral_arr
from .energy import Problem, transfers_to_original
from .graph import SystemState, VertexFunction

_ARMIJO = 1e-4
_MIN_STEP = 1e-18
_NEWTON_MAX_ITERS = 60


@dataclass(frozen=True)
class SolveConfig:
    mode: str = "minimize"  # "minimize" | "mountain-pass"
    residual_tol: float = 1e-8
    max_iters: int = 20000
    path_points: int = 41
    restarts: int = 32
    init_scale: float | None = None  # None -> delta / 8
    seed: int = 0
    dedup_dist: float = 1e-4
    warm_start: bool = False

    def __post_init__(self) -> None:
        if self.mode not in ("minimize", "mountain-pass"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if not self.residual_tol > 0.0:
            raise ValueError("residual_tol must be positive")
        if self.path_points < 3:
            raise ValueError("path_points must be >= 3")
        if self.restarts < 1:
            raise ValueError("restarts must be >= 1")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if not self.dedup_dist > 0.0:
            raise ValueError("dedup_dist must be positive")


@dataclass(frozen=True, eq=False)
class SolveResult:
    state: SystemState
    energy: float
    residual_sup: float
    w_norm: float
    sup_norm: float
    transfers: bool
    iterations: int
    converged: bool


# ----------------------------------------------------------------------
# packing helpers
# ----------------------------------------------------------------------


def _pack(state: SystemState) -> np.ndarray:
    return np.concatenate([state.u.values, state.v.values])


def _unpack(prob: Problem, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    n = prob.graph.n
    return x[:n], x[n:]


def _grad_packed(prob: Problem, x: np.ndarray) -> np.ndarray:
    gu, gv = prob.gradient_arrays(*_unpack(prob, x))
    return np.concatenate([gu, gv])


def _residual_sup(prob: Problem, gx: np.ndarray) -> float:
    n = prob.graph.n
    return float(np.max(np.hypot(gx[:n], gx[n:])))


def _metric_sq(prob: Problem, gx: np.ndarray) -> float:
    n = prob.graph.n
    return _integral_arr(prob.graph, gx[:n] ** 2 + gx[n:] ** 2)


def _make_result(prob: Problem, x: np.ndarray, iterations: int, converged: bool) -> SolveResult:
    u, v = _unpack(prob, x)
    g = prob.graph
    state = SystemState(VertexFunction(g, u), VertexFunction(g, v))
    gx = _grad_packed(prob, x)
    return SolveResult(
        state=state,
        energy=prob.energy_arrays(u, v),
        residual_sup=_residual_sup(prob, gx),
        w_norm=prob.w_norm(u, v),
        sup_norm=float(np.max(np.hypot(u, v))),
        transfers=float(np.max(np.hypot(u, v))) <= prob.f.delta / 2.0,
        iterations=iterations,
        converged=converged,
    )


def _nudge_off_zero_lines(prob: Problem, x0: np.ndarray, x1: np.ndarray, step: np.ndarray) -> np.ndarray:
    """Keep sub-quadratic terms off exact zero lines after a step."""
    if prob.params.p1 >= 2.0 and prob.params.p2 >= 2.0:
        return x1
    landed = (x1 == 0.0) & (x0 != 0.0)
    if np.any(landed):
        x1 = x1.copy()
        scale = 1e-15 * max(1.0, float(np.max(np.abs(x1))))
        x1[landed] = -np.sign(step[landed]) * scale
    return x1


# ----------------------------------------------------------------------
# Newton refinement
# ----------------------------------------------------------------------


def _newton_arrays(
    prob: Problem, x: np.ndarray, tol: float
) -> tuple[np.ndarray, float, int, bool]:
    """Damped Newton on the packed gradient map; returns (x, residual, iters, ok)."""
    sqrt_eps = math.sqrt(np.finfo(float).eps)
    gx = _grad_packed(prob, x)
    res = _residual_sup(prob, gx)
    if res <= tol:
        return x, res, 0, True
    for it in range(1, _NEWTON_MAX_ITERS + 1):
        xsup = float(np.max(np.abs(x)))

        def jvp(d: np.ndarray) -> np.ndarray:
            dn = float(np.max(np.abs(d)))
            if dn == 0.0:
                return np.zeros_like(d)
            eps = sqrt_eps * (1.0 + xsup) / dn
            return (_grad_packed(prob, x + eps * d) - _grad_packed(prob, x - eps * d)) / (
                2.0 * eps
            )

        op = LinearOperator((x.size, x.size), matvec=jvp, dtype=float)
        # full-memory GMRES: the space is tiny, so one restart cycle spans it
        step, _ = gmres(op, -gx, rtol=1e-10, atol=0.0, restart=x.size, maxiter=2)
        if not np.all(np.isfinite(step)):
            return x, res, it, False
        alpha, accepted = 1.0, False
        for _ in range(40):
            x1 = x + alpha * step
            gx1 = _grad_packed(prob, x1)
            res1 = _residual_sup(prob, gx1)
            if res1 <= tol or res1 <= (1.0 - 0.25 * alpha) * res:
                accepted = True
                break
            alpha *= 0.5
        if not accepted:
            return x, res, it, False
        x, gx, res = x1, gx1, res1
        if res <= tol:
            return x, res, it, True
    return x, res, _NEWTON_MAX_ITERS, False


def newton_refine(prob: Problem, state: SystemState, cfg: SolveConfig) -> SolveResult:
    """Polish an almost-critical state to ``cfg.residual_tol``.

    Returns the input state with ``converged = False`` when the local
    Jacobian solve fails or no damping step contracts the residual; an
    already-converged input is returned unchanged.
    """
    x0 = _pack(state)
    x, _, iters, ok = _newton_arrays(prob, x0, cfg.residual_tol)
    if not ok:
        return _make_result(prob, x0, iters, False)
    return _make_result(prob, x, iters, True)


# ----------------------------------------------------------------------
# descent
# ----------------------------------------------------------------------


def descend(
    prob: Problem,
    start: SystemState,
    cfg: SolveConfig,
    record_trace: bool = False,
) -> SolveResult | tuple[SolveResult, list[float]]:
    """Backtracking gradient descent from ``start`` to a critical point.

    Energy is strictly non-increasing across accepted iterations; once the
    residual is small (or no decreasing step exists) a Newton polish takes
    over.  ``record_trace`` additionally returns the accepted energies.
    """
    x = _pack(start)
    energy = prob.energy_arrays(*_unpack(prob, x))
    trace = [energy]
    last_newton_res = math.inf
    alpha_prev = 1.0
    result: SolveResult | None = None
    for it in range(1, cfg.max_iters + 1):
        gx = _grad_packed(prob, x)
        res = _residual_sup(prob, gx)
        if res <= cfg.residual_tol:
            result = _make_result(prob, x, it - 1, True)
            break
        if res <= 1e-3 and res < 0.25 * last_newton_res:
            xn, resn, _, ok = _newton_arrays(prob, x, cfg.residual_tol)
            if ok and prob.energy_arrays(*_unpack(prob, xn)) <= energy + 1e-9 * max(
                1.0, abs(energy)
            ):
                result = _make_result(prob, xn, it, True)
                break
            last_newton_res = res
        m2 = _metric_sq(prob, gx)
        alpha, accepted = min(1.0, 4.0 * alpha_prev), False
        while alpha >= _MIN_STEP:
            x1 = _nudge_off_zero_lines(prob, x, x - alpha * gx, -gx)
            e1 = prob.energy_arrays(*_unpack(prob, x1))
            if e1 <= energy - _ARMIJO * alpha * m2:
                accepted = True
                break
            alpha *= 0.5
        alpha_prev = alpha
        if not accepted:
            xn, resn, _, ok = _newton_arrays(prob, x, cfg.residual_tol)
            result = _make_result(prob, xn if ok else x, it, ok)
            break
        if e1 > energy:
            raise RuntimeError("descent accepted an energy increase")
        x, energy = x1, e1
        trace.append(energy)
    if result is None:
        result = _make_result(prob, x, cfg.max_iters, False)
    return (result, trace) if record_trace else result


def _w_distance(prob: Problem, a: SolveResult, b: SolveResult) -> float:
    du = a.state.u.values - b.state.u.values
    dv = a.state.v.values - b.state.v.values
    return prob.w_norm(du, dv)


def _deduplicate(prob: Problem, results: list[SolveResult], cfg: SolveConfig) -> list[SolveResult]:
    kept: list[SolveResult] = []
    for cand in sorted(results, key=lambda r: r.energy):
        duplicate = False
        for ref in kept:
            dist = _w_distance(prob, cand, ref)
            if prob.f.even:
                flipped = SystemState(
                    VertexFunction(prob.graph, -ref.state.u.values),
                    VertexFunction(prob.graph, -ref.state.v.values),
                )
                flipped_res = SolveResult(
                    state=flipped,
                    energy=ref.energy,
                    residual_sup=ref.residual_sup,
                    w_norm=ref.w_norm,
                    sup_norm=ref.sup_norm,
                    transfers=ref.transfers,
                    iterations=ref.iterations,
                    converged=ref.converged,
                )
                dist = min(dist, _w_distance(prob, cand, flipped_res))
            if dist <= cfg.dedup_dist:
                duplicate = True
                break
        if not duplicate:
            kept.append(cand)
    return kept


def minimize(prob: Problem, cfg: SolveConfig) -> list[SolveResult]:
    """Multi-start descent; distinct converged nonzero critical points.

    Draws ``cfg.restarts`` starting states of amplitude ``init_scale``
    (default ``delta / 8``) from the seeded generator, descends each,
    drops non-converged and near-zero results, deduplicates modulo the
    sign symmetry, and sorts by energy ascending.
    """
    rng = np.random.default_rng(cfg.seed)
    scale = cfg.init_scale if cfg.init_scale is not None else prob.f.delta / 8.0
    n = prob.graph.n
    g = prob.graph
    found: list[SolveResult] = []
    for _ in range(cfg.restarts):
        vals = rng.uniform(-scale, scale, size=2 * n)
        start = SystemState(VertexFunction(g, vals[:n]), VertexFunction(g, vals[n:]))
        result = descend(prob, start, cfg)
        if result.converged and result.w_norm > cfg.dedup_dist:
            found.append(result)
    return _deduplicate(prob, found, cfg)


# ----------------------------------------------------------------------
# mountain pass
# ----------------------------------------------------------------------


def _path_norms(prob: Problem, path: np.ndarray) -> np.ndarray:
    n = prob.graph.n
    segs = np.empty(len(path) - 1)
    for i in range(len(path) - 1):
        d = path[i + 1] - path[i]
        segs[i] = prob.w_norm(d[:n], d[n:])
    return segs


def _resample_path(prob: Problem, path: np.ndarray) -> np.ndarray:
    """Arc-length-uniform piecewise-linear reparameterization (endpoints fixed)."""
    segs = _path_norms(prob, path)
    cum = np.concatenate([[0.0], np.cumsum(segs)])
    total = cum[-1]
    if total <= 0.0:
        return path
    targets = np.linspace(0.0, total, len(path))
    out = np.empty_like(path)
    out[0] = path[0]
    out[-1] = path[-1]
    for i in range(1, len(path) - 1):
        j = int(np.searchsorted(cum, targets[i], side="right") - 1)
        j = min(j, len(segs) - 1)
        width = cum[j + 1] - cum[j]
        frac = 0.0 if width == 0.0 else (targets[i] - cum[j]) / width
        out[i] = (1.0 - frac) * path[j] + frac * path[j + 1]
    return out


def _acceptable_pass(result: SolveResult, cfg: SolveConfig) -> bool:
    return (
        result.converged
        and result.residual_sup <= cfg.residual_tol
        and result.energy > 0.0
        and result.w_norm > cfg.dedup_dist
    )


def mountain_pass(
    prob: Problem,
    anchor: SystemState,
    cfg: SolveConfig,
    init_path: np.ndarray | None = None,
) -> SolveResult:
    """Deform a discrete path from the zero state to ``anchor`` to a saddle.

    Requires the superlinear spliced variant and a strictly negative anchor
    energy (the two sides of the mountain).  The returned critical point
    has positive energy; stagnation is reported as ``converged = False``.
    """
    if prob.variant != "superlinear":
        raise ValueError("mountain pass requires the superlinear spliced variant")
    anchor_energy = prob.energy_arrays(anchor.u.values, anchor.v.values)
    if not anchor_energy < 0.0:
        raise ValueError(
            f"anchor energy must be negative (got {anchor_energy!r}); "
            "pick a larger anchor or a larger lambda"
        )
    arr_anchor = _pack(anchor)
    N = cfg.path_points
    if init_path is None:
        path = np.outer(np.linspace(0.0, 1.0, N), arr_anchor)
    else:
        path = _resample_path(prob, np.asarray(init_path, dtype=float))
        if len(path) != N:
            raise ValueError("init_path must have cfg.path_points rows")
    last_newton_res = math.inf
    best: SolveResult | None = None
    for it in range(1, cfg.max_iters + 1):
        energies = np.array([prob.energy_arrays(*_unpack(prob, pt)) for pt in path])
        k = 1 + int(np.argmax(energies[1:-1]))
        if energies[k] <= 0.0:
            best = _make_result(prob, path[k], it, False)
            break
        x = path[k]
        gx = _grad_packed(prob, x)
        res = _residual_sup(prob, gx)
        if res <= cfg.residual_tol:
            candidate = _make_result(prob, x, it, True)
            xn, _, _, ok = _newton_arrays(prob, x, cfg.residual_tol)
            if ok:
                refined = _make_result(prob, xn, it, True)
                if _acceptable_pass(refined, cfg):
                    return refined
            return candidate
        if res < 0.5 * last_newton_res:
            xn, _, _, ok = _newton_arrays(prob, x, cfg.residual_tol)
            if ok:
                refined = _make_result(prob, xn, it, True)
                if _acceptable_pass(refined, cfg):
                    return refined
            last_newton_res = res
        m2 = _metric_sq(prob, gx)
        alpha, accepted = 1.0, False
        while alpha >= _MIN_STEP:
            x1 = _nudge_off_zero_lines(prob, x, x - alpha * gx, -gx)
            e1 = prob.energy_arrays(*_unpack(prob, x1))
            if e1 <= energies[k] - _ARMIJO * alpha * m2:
                accepted = True
                break
            alpha *= 0.5
        if not accepted:
            xn, _, _, ok = _newton_arrays(prob, x, cfg.residual_tol)
            if ok:
                refined = _make_result(prob, xn, it, True)
                if _acceptable_pass(refined, cfg):
                    return refined
            best = _make_result(prob, x, it, False)
            break
        path[k] = x1
        path = _resample_path(prob, path)
    if best is None:
        energies = np.array([prob.energy_arrays(*_unpack(prob, pt)) for pt in path])
        k = 1 + int(np.argmax(energies[1:-1]))
        best = _make_result(prob, path[k], cfg.max_iters, False)
    return best


# ----------------------------------------------------------------------
# lambda sweep
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class SweepRow:
    lam: float
    energy: float
    w_norm: float
    sup_norm: float
    residual_sup: float
    mp_bound: float
    b18_bound: float
    b19_bound: float
    b20_bound: float
    b21_bound: float
    transfers: bool
    converged: bool


CSV_HEADER = (
    "lambda,energy,w_norm,sup_norm,residual_sup,mp_bound,"
    "b18_bound,b19_bound,b20_bound,b21_bound,transfers,converged"
)


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def sweep_to_csv(rows: list[SweepRow]) -> str:
    lines = [CSV_HEADER]
    for r in rows:
        lines.append(
            ",".join(
                [
                    _fmt(r.lam),
                    _fmt(r.energy),
                    _fmt(r.w_norm),
                    _fmt(r.sup_norm),
                    _fmt(r.residual_sup),
                    _fmt(r.mp_bound),
                    _fmt(r.b18_bound),
                    _fmt(r.b19_bound),
                    _fmt(r.b20_bound),
                    _fmt(r.b21_bound),
                    "true" if r.transfers else "false",
                    "true" if r.converged else "false",
                ]
            )
        )
    return "\n".join(lines) + "\n"


def result_to_row(
    result: SolveResult, lam: float, report: BoundsReport | None
) -> SweepRow:
    if report is not None:
        mp_bound = mountain_pass_level_bound(report, lam)
        nb = solution_norm_bounds(report, lam)
        b18, b19, b20, b21 = nb.w_u, nb.w_v, nb.sup_u, nb.sup_v
    else:
        mp_bound = b18 = b19 = b20 = b21 = math.nan
    return SweepRow(
        lam=lam,
        energy=result.energy,
        w_norm=result.w_norm,
        sup_norm=result.sup_norm,
        residual_sup=result.residual_sup,
        mp_bound=mp_bound,
        b18_bound=b18,
        b19_bound=b19,
        b20_bound=b20,
        b21_bound=b21,
        transfers=result.transfers,
        converged=result.converged,
    )


def sweep_lambda(
    prob: Problem,
    lambdas: list[float],
    cfg: SolveConfig,
    anchor: SystemState | None = None,
    report: BoundsReport | None = None,
) -> list[SweepRow]:
    """Solve once per parameter value; rows are ordered by lambda.

    Each value is solved independently unless ``cfg.warm_start`` routes the
    previous solution into the initial path.  Per-value failures are
    recorded in the row and the sweep continues.
    """
    if any(not lam > 0.0 for lam in lambdas):
        raise ValueError("all lambda values must be positive")
    if any(b <= a for a, b in zip(lambdas, lambdas[1:])):
        raise ValueError("lambda values must be strictly ascending")
    rows: list[SweepRow] = []
    prev: SolveResult | None = None
    for lam in lambdas:
        prob_lam = prob.with_lambda(lam)
        if cfg.mode == "mountain-pass":
            if anchor is None:
                raise ValueError("mountain-pass sweep requires an anchor state")
            init_path = None
            if cfg.warm_start and prev is not None and prev.converged:
                waypoints = np.vstack(
                    [np.zeros(2 * prob.graph.n), _pack(prev.state), _pack(anchor)]
                )
                idx = np.linspace(0.0, 2.0, cfg.path_points)
                init_path = np.empty((cfg.path_points, 2 * prob.graph.n))
                for i, t in enumerate(idx):
                    j = min(int(t), 1)
                    frac = t - j
                    init_path[i] = (1.0 - frac) * waypoints[j] + frac * waypoints[j + 1]
            result = mountain_pass(prob_lam, anchor, cfg, init_path=init_path)
        else:
            results = minimize(prob_lam, cfg)
            if results:
                result = results[0]
            else:
                zero = SystemState(prob.graph.zeros(), prob.graph.zeros())
                result = _make_result(prob_lam, _pack(zero), 0, False)
        rows.append(result_to_row(result, lam, report))
        prev = result
    return rows
