"""Closed-form thresholds, level bounds, and solution-norm bounds.

Given superlinear growth metadata, a baseline pair of norms for the anchor
functions, and the graph quantities ``mu_min``, ``h_min``, ``h_max`` and
``total_measure``, this module evaluates the explicit constants of the
superlinear existence theory:

* ``lambda1 .. lambda4``  -- parameter thresholds;
* ``lambda5``             -- the smallness threshold, which is only real
  when both of its inner denominators
  ``delta^p_i (theta_i - p_i) mu_min h_i_min - 2^(2 p_i + 1) p_i theta_i max(C)``
  are positive; otherwise it is reported undefined together with the
  offending denominators;
* ``c1_star / c2_star``   -- the level-bound coefficients;
* ``lambda_star``         -- the max of the defined thresholds (flagged
  partial when ``lambda5`` is undefined);

plus the evaluable quantities ``mountain_ring_estimate`` (the radius below
which the energy is provably positive on the sphere, and the level there),
``mountain_pass_level_bound``, ``solution_norm_bounds``, the anchor-ray
maxima behind the level bound, and the sublinear sphere radius
``small_sphere_radius``.

All closed forms are evaluated with 50-digit arithmetic and rounded to
float once at the end.

The baseline pair carries the powers ``||grad^m u0||_{L^p}^p`` and
``||u0||_{L^p}^p`` either computed from a concrete pair on the graph or
supplied directly; the direct mode exists because published constants for
a worked example may be derived from norm values that differ from the
definition-evaluated ones, and the two concerns are kept separate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from mpmath import mp, mpf

from .calculus import (
    _integral_arr,
    _m_grad_arr,
    _ordered_sum,
    _poly_arr,
    _power_factor,
    _sobolev_power_arr,
)
from .energy import SystemParams
from .graph import SystemState, VertexFunction, WeightedGraph
from .nonlinearity import GrowthMeta


@dataclass(frozen=True)
class BaselinePair:
    """Norm powers of the anchor pair: gradient part and L^p part per component."""

    u0_grad_p1: float
    u0_lp1: float
    v0_grad_p2: float
    v0_lp2: float
    source: str  # "computed-from-graph" | "direct-input"

    def __post_init__(self) -> None:
        if self.source not in ("computed-from-graph", "direct-input"):
            raise ValueError(f"unknown baseline source {self.source!r}")
        for name in ("u0_grad_p1", "v0_grad_p2"):
            val = getattr(self, name)
            if not (math.isfinite(val) and val >= 0.0):
                raise ValueError(f"{name} must be a finite nonnegative real, got {val!r}")
        for name in ("u0_lp1", "v0_lp2"):
            val = getattr(self, name)
            if not (math.isfinite(val) and val > 0.0):
                raise ValueError(f"{name} must be a positive real (nonzero anchor), got {val!r}")

    @classmethod
    def from_state(cls, params: SystemParams, state: SystemState) -> "BaselinePair":
        g = state.graph
        u, v = state.u.values, state.v.values
        grad1 = _integral_arr(g, _m_grad_arr(g, params.m1, u) ** params.p1)
        lp1 = _integral_arr(g, np.abs(u) ** params.p1)
        grad2 = _integral_arr(g, _m_grad_arr(g, params.m2, v) ** params.p2)
        lp2 = _integral_arr(g, np.abs(v) ** params.p2)
        return cls(grad1, lp1, grad2, lp2, "computed-from-graph")


@dataclass(frozen=True)
class BoundsReport:
    """All computed constants plus the scalar ingredients behind them."""

    lambda1: float
    lambda2: float
    lambda3: float
    lambda4: float
    lambda5: float | None
    lambda5_denominators: tuple[float, float]
    c1_star: float
    c2_star: float
    lambda_star: float
    lambda_star_partial: bool
    theta1: float
    theta2: float
    tail1: float
    tail2: float
    # ingredients for the lambda-dependent evaluations
    p1: float
    p2: float
    q1: float
    q2: float
    k1: float
    k2: float
    delta: float
    mu_min: float
    h1_min: float
    h2_min: float
    h1_max: float
    h2_max: float
    total_measure: float
    tail_coeff: float  # combined tail coefficient in the sphere estimate
    u0_lp_norm: float  # ||u0||_{L^p1}
    v0_lp_norm: float  # ||v0||_{L^p2}
    w1_power: float  # max(1, h1_max) * (grad + L^p powers) of u0
    w2_power: float
    baseline_source: str

    @property
    def max_c(self) -> float:
        return max(self.c1_star, self.c2_star)

    @property
    def lambda5_defined(self) -> bool:
        return self.lambda5 is not None


def _graph_extrema(g: WeightedGraph, h1: VertexFunction, h2: VertexFunction):
    total = _ordered_sum(g.mu)
    return (
        float(np.min(g.mu)),
        float(np.min(h1.values)),
        float(np.min(h2.values)),
        float(np.max(h1.values)),
        float(np.max(h2.values)),
        total,
    )


def compute_bounds(
    g: WeightedGraph,
    params: SystemParams,
    growth: GrowthMeta,
    base: BaselinePair,
    delta: float,
) -> BoundsReport:
    """Evaluate every closed-form constant for the superlinear regime."""
    if growth.regime != "superlinear":
        raise ValueError("bounds require superlinear growth metadata")
    growth.validate_for(params.p1, params.p2)
    if not (math.isfinite(delta) and delta > 0.0):
        raise ValueError(f"delta must be a positive real, got {delta!r}")
    mu_min, h1_min, h2_min, h1_max, h2_max, total = _graph_extrema(
        g, params.h1, params.h2
    )

    with mp.workdps(50):
        p1, p2 = mpf(params.p1), mpf(params.p2)
        q1, q2 = mpf(growth.q1), mpf(growth.q2)
        k1, k2 = mpf(growth.k1), mpf(growth.k2)
        th1, th2 = mpf(growth.theta1), mpf(growth.theta2)
        m1c, m2c = mpf(growth.lower1), mpf(growth.lower2)
        t1, t2 = mpf(growth.tail1), mpf(growth.tail2)
        mu_inf = mpf(mu_min)
        h1i, h2i = mpf(h1_min), mpf(h2_min)
        h1s, h2s = mpf(h1_max), mpf(h2_max)
        tot = mpf(total)
        dlt = mpf(delta)
        ug, ul = mpf(base.u0_grad_p1), mpf(base.u0_lp1)
        vg, vl = mpf(base.v0_grad_p2), mpf(base.v0_lp2)

        max_p = max(p1, p2)
        min_k = min(k1, k2)
        tail_coeff = t1 / (
            mu_inf ** ((k1 - p1) / p1) * h1i ** (k1 / p1)
        ) + t2 / (mu_inf ** ((k2 - p2) / p2) * h2i ** (k2 / p2))
        head = mpf(2) ** (1 - max_p) / max_p
        lam1 = head / tail_coeff

        u_lp_norm = ul ** (1 / p1)
        v_lp_norm = vl ** (1 / p2)
        lam2 = lam1 * (6 * h1i ** (1 / p1) * u_lp_norm) ** (max_p - min_k)
        lam3 = lam1 * (3 * h2i ** (1 / p2) * v_lp_norm) ** (max_p - min_k)

        w1 = max(mpf(1), h1s) * (ug + ul)
        w2 = max(mpf(1), h2s) * (vg + vl)
        lam4_num = w1 / p1 + w2 / p2
        lam4_den = m1c * ul ** (q1 / p1) * tot ** (1 - q1 / p1) + m2c * vl ** (
            q2 / p2
        ) * tot ** (1 - q2 / p2)
        lam4 = lam4_num / lam4_den

        c1 = (
            (q1 - p1) * tot / p1
            * (max(mpf(1), h1s) ** q1 / (q1**q1 * m1c**p1)) ** (1 / (q1 - p1))
            * (w1 ** (1 / p1) / u_lp_norm) ** (p1 * q1 / (q1 - p1))
        )
        c2 = (
            (q2 - p2) * tot / p2
            * (max(mpf(1), h2s) ** q2 / (q2**q2 * m2c**p2)) ** (1 / (q2 - p2))
            * (w2 ** (1 / p2) / v_lp_norm) ** (p2 * q2 / (q2 - p2))
        )
        max_c = max(c1, c2)

        exp5 = 1 / max(p1 / (q1 - p1), p2 / (q2 - p2))
        num5_1 = mpf(2) ** (2 * p1 + 1) * p1 * th1 * max_c
        num5_2 = mpf(2) ** (2 * p2 + 1) * p2 * th2 * max_c
        den5_1 = dlt**p1 * (th1 - p1) * mu_inf * h1i - num5_1
        den5_2 = dlt**p2 * (th2 - p2) * mu_inf * h2i - num5_2
        if den5_1 > 0 and den5_2 > 0:
            lam5 = max((num5_1 / den5_1) ** exp5, (num5_2 / den5_2) ** exp5)
        else:
            lam5 = None

        candidates = [lam1, lam2, lam3, lam4] + ([lam5] if lam5 is not None else [])
        lam_star = max(candidates)

        report = BoundsReport(
            lambda1=float(lam1),
            lambda2=float(lam2),
            lambda3=float(lam3),
            lambda4=float(lam4),
            lambda5=None if lam5 is None else float(lam5),
            lambda5_denominators=(float(den5_1), float(den5_2)),
            c1_star=float(c1),
            c2_star=float(c2),
            lambda_star=float(lam_star),
            lambda_star_partial=lam5 is None,
            theta1=float(th1),
            theta2=float(th2),
            tail1=float(t1),
            tail2=float(t2),
            p1=float(p1),
            p2=float(p2),
            q1=float(q1),
            q2=float(q2),
            k1=float(k1),
            k2=float(k2),
            delta=float(dlt),
            mu_min=mu_min,
            h1_min=h1_min,
            h2_min=h2_min,
            h1_max=h1_max,
            h2_max=h2_max,
            total_measure=total,
            tail_coeff=float(tail_coeff),
            u0_lp_norm=float(u_lp_norm),
            v0_lp_norm=float(v_lp_norm),
            w1_power=float(w1),
            w2_power=float(w2),
            baseline_source=base.source,
        )
    return report


def _check_lambda(lam: float) -> float:
    lam = float(lam)
    if not (math.isfinite(lam) and lam > 0.0):
        raise ValueError(f"lambda must be positive, got {lam!r}")
    return lam


@dataclass(frozen=True)
class RingEstimate:
    """Sphere radii on which the functional is provably positive.

    ``radius_cap`` is the radius at which the lower estimate
    ``head * r^max_p - lambda * tail_coeff * r^min_k`` crosses zero,
    ``radius`` is half of it, and ``level`` is the estimate's value there
    (positive whenever ``0 < radius < radius_cap``).
    """

    radius_cap: float
    radius: float
    level: float


def mountain_ring_estimate(report: BoundsReport, lam: float) -> RingEstimate:
    lam = _check_lambda(lam)
    max_p = max(report.p1, report.p2)
    min_k = min(report.k1, report.k2)
    head = 2.0 ** (1.0 - max_p) / max_p
    radius_cap = (head / (lam * report.tail_coeff)) ** (1.0 / (min_k - max_p))
    radius = 0.5 * radius_cap
    level = head * radius**max_p - lam * report.tail_coeff * radius**min_k
    return RingEstimate(radius_cap, radius, level)


def mountain_pass_level_bound(report: BoundsReport, lam: float) -> float:
    """Upper bound for the mountain-pass level at parameter ``lam``."""
    lam = _check_lambda(lam)
    return report.max_c * (
        lam ** (-report.p1 / (report.q1 - report.p1))
        + lam ** (-report.p2 / (report.q2 - report.p2))
    )


@dataclass(frozen=True)
class SolutionNormBounds:
    w_u: float
    w_v: float
    sup_u: float
    sup_v: float


def solution_norm_bounds(report: BoundsReport, lam: float) -> SolutionNormBounds:
    """Sobolev- and sup-norm bounds for the critical point at ``lam``."""
    lam = _check_lambda(lam)
    if not (report.theta1 > report.p1 and report.theta2 > report.p2):
        raise ValueError("norm bounds require theta_i > p_i")
    base = lam ** (-report.p1 / (report.q1 - report.p1)) + lam ** (
        -report.p2 / (report.q2 - report.p2)
    )
    c = report.max_c
    w_u = (report.p1 * report.theta1 * c / (report.theta1 - report.p1)) ** (
        1.0 / report.p1
    ) * base ** (1.0 / report.p1)
    w_v = (report.p2 * report.theta2 * c / (report.theta2 - report.p2)) ** (
        1.0 / report.p2
    ) * base ** (1.0 / report.p2)
    sup_u = (
        report.p1
        * report.theta1
        * c
        / ((report.theta1 - report.p1) * report.mu_min * report.h1_min)
    ) ** (1.0 / report.p1) * base ** (1.0 / report.p1)
    sup_v = (
        report.p2
        * report.theta2
        * c
        / ((report.theta2 - report.p2) * report.mu_min * report.h2_min)
    ) ** (1.0 / report.p2) * base ** (1.0 / report.p2)
    return SolutionNormBounds(w_u, w_v, sup_u, sup_v)


@dataclass(frozen=True)
class AnchorRayMaxima:
    """Per-component maxima of the anchor-ray upper estimates.

    ``value_i`` is the maximum over ``s >= 0`` of
    ``(1/p_i) W_i s^p_i - lam lower_i total^(1 - q_i/p_i) ||.||^q_i s^q_i``
    attained at ``scale_i``; by construction it equals
    ``c_i_star * lam^(-p_i / (q_i - p_i))``.
    """

    scale1: float
    value1: float
    scale2: float
    value2: float


def anchor_ray_maxima(report: BoundsReport, growth: GrowthMeta, lam: float) -> AnchorRayMaxima:
    lam = _check_lambda(lam)
    tot = report.total_measure

    def one(p, q, low, w_power, lp_norm):
        scale = tot ** (1.0 / p) * (w_power / (lam * q * low * lp_norm**q)) ** (
            1.0 / (q - p)
        )
        coeff = lam * low * tot ** (1.0 - q / p) * lp_norm**q
        value = w_power / p * scale**p - coeff * scale**q
        return scale, value

    s1, g1 = one(report.p1, report.q1, growth.lower1, report.w1_power, report.u0_lp_norm)
    s2, g2 = one(report.p2, report.q2, growth.lower2, report.w2_power, report.v0_lp_norm)
    return AnchorRayMaxima(s1, g1, s2, g2)


def small_sphere_radius(
    params: SystemParams, growth: GrowthMeta, c1: float, c2: float, lam: float
) -> float:
    """Radius of spheres on which the sublinear functional is negative.

    ``((p1 p2 / (p1 + p2)) lam min(lower1 c1, lower2 c2) 2^(1 - max q))
    ^ (1 / (min p - max q))`` where ``c1``/``c2`` are norm-equivalence
    constants of the ambient space (estimates, not certificates).
    """
    lam = _check_lambda(lam)
    if growth.regime != "sublinear":
        raise ValueError("the sphere radius applies to sublinear growth metadata")
    growth.validate_for(params.p1, params.p2)
    if not (c1 > 0.0 and c2 > 0.0):
        raise ValueError("norm-equivalence constants must be positive")
    p1, p2 = params.p1, params.p2
    base = (
        (p1 * p2 / (p1 + p2))
        * lam
        * min(growth.lower1 * c1, growth.lower2 * c2)
        * 2.0 ** (1.0 - max(growth.q1, growth.q2))
    )
    return base ** (1.0 / (min(p1, p2) - max(growth.q1, growth.q2)))


@dataclass(frozen=True)
class InequalitySides:
    lhs: float
    rhs: float


def power_sum_bound(lam: float, a: float, b: float) -> InequalitySides:
    """Both sides of ``lam^-a + lam^-b <= 2 (1 + lam^-max(a, b))``."""
    lam = _check_lambda(lam)
    if not (a > 0.0 and b > 0.0):
        raise ValueError("exponents must be positive")
    lhs = lam**-a + lam**-b
    rhs = 2.0 * (1.0 + lam ** -max(a, b))
    return InequalitySides(lhs, rhs)


def norm_equivalence_estimate(
    g: WeightedGraph,
    m: int,
    p: float,
    h: VertexFunction,
    q: float,
    restarts: int,
    seed: int = 0,
    max_iters: int = 400,
) -> float:
    """Numerical lower estimate of ``min { ||u||_{L^q}^q : ||u||_{m,p} = 1 }``.

    Multi-start projected descent on the unit sphere of the (finite
    dimensional) Sobolev space; returns the best minimum found.  This is an
    estimate of the norm-equivalence constant, not a certificate.
    """
    if not isinstance(restarts, (int, np.integer)) or restarts < 1:
        raise ValueError(f"restarts must be a positive integer, got {restarts!r}")
    if not q >= 1.0:
        raise ValueError(f"q must be >= 1, got {q}")
    if not p > 1.0:
        raise ValueError(f"p must be > 1, got {p}")
    if h.graph is not g:
        raise ValueError("h is not defined on this graph")
    h_arr = h.values
    rng = np.random.default_rng(seed)

    def norm(x: np.ndarray) -> float:
        return _sobolev_power_arr(g, m, p, h_arr, x) ** (1.0 / p)

    def value(x: np.ndarray) -> float:
        return _integral_arr(g, np.abs(x) ** q)

    def value_grad(x: np.ndarray) -> np.ndarray:
        return q * g.mu * _power_factor(np.abs(x), q - 2.0) * x

    def norm_grad(x: np.ndarray) -> np.ndarray:
        # coordinate gradient of the norm on its unit sphere
        return g.mu * (_poly_arr(g, m, p, x) + h_arr * _power_factor(np.abs(x), p - 2.0) * x)

    best = math.inf
    for _ in range(restarts):
        x = rng.standard_normal(g.n)
        nx = norm(x)
        if nx == 0.0:
            continue
        x = x / nx
        fx = value(x)
        for _ in range(max_iters):
            gf = value_grad(x)
            gn = norm_grad(x)
            nn = float(gn @ gn)
            if nn == 0.0:
                break
            d = gf - (float(gf @ gn) / nn) * gn
            slope = float(d @ d)
            if slope <= (1e-11 * max(1.0, fx)) ** 2:
                break
            alpha, stepped = 1.0, False
            while alpha > 1e-18:
                x1 = x - alpha * d
                n1 = norm(x1)
                if n1 > 0.0:
                    x1 = x1 / n1
                    f1 = value(x1)
                    if f1 <= fx - 1e-4 * alpha * slope:
                        stepped = True
                        break
                alpha *= 0.5
            if not stepped:
                break
            x, fx = x1, f1
        best = min(best, fx)
    return float(best)
