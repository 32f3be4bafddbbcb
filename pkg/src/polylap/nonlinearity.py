"""Nonlinear coupling terms, growth metadata, and cut-off modifications.

A :class:`NonlinearityDef` bundles a term ``F(x, t, s)`` with its partial
derivatives, the locality radius ``delta`` inside which its growth
hypotheses are assumed, and the :class:`GrowthMeta` that records them.
``modify_superlinear`` / ``modify_sublinear`` splice ``F`` with a controlled
power tail outside the ``delta``-ball so that the locally-defined term
becomes globally usable; inside the radius ``delta/2`` the modified term
equals ``F`` exactly.

Cut-off profile: both cut-offs are the radial C^1 smoothstep in
``r = |(t, s)|`` -- 1 for ``r <= delta/2``, 0 for ``r >= delta``, and
``1 - 3w^2 + 2w^3`` with ``w = 2r/delta - 1`` on the annulus.  The profile
is non-increasing in ``r``, which gives ``t * d/dt <= 0`` and
``s * d/ds <= 0`` automatically.

Evaluation convention: the callables take ``(x, t, s)`` where ``x`` is an
array of vertex indices aligned with ``t``/``s`` (or ``None`` when the term
does not depend on the vertex), and ``t``/``s`` may be scalars or arrays.
They must be pure and reentrant.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

TermFn = Callable[[object, np.ndarray, np.ndarray], np.ndarray]

_GOLDEN_ANGLE = math.pi * (3.0 - math.sqrt(5.0))


# ----------------------------------------------------------------------
# growth metadata
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class GrowthMeta:
    """Exponents and coefficients of the growth hypotheses near the origin.

    ``lower1/lower2`` multiply the lower bound
    ``F >= lower1 |t|^q1 + lower2 |s|^q2``; ``dbound1/dbound2`` multiply the
    partial-derivative bounds with exponents built from ``k1``/``k2``.
    ``beta1/beta2`` (superlinear only) are the Ambrosetti-Rabinowitz-type
    exponents in ``F <= t F_t / beta1 + s F_s / beta2``.

    The derived tail coefficients are never stored: ``tail1`` and ``tail2``
    are recomputed from ``dbound1``, ``dbound2``, ``k1``, ``k2``.
    """

    regime: str  # "superlinear" | "sublinear"
    q1: float
    q2: float
    k1: float
    k2: float
    lower1: float
    lower2: float
    dbound1: float
    dbound2: float
    beta1: float | None = None
    beta2: float | None = None

    def __post_init__(self) -> None:
        if self.regime not in ("superlinear", "sublinear"):
            raise ValueError(f"unknown regime {self.regime!r}")
        for name in ("q1", "q2", "k1", "k2", "lower1", "lower2", "dbound1", "dbound2"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be a positive real, got {value!r}")
        if self.regime == "superlinear":
            if self.beta1 is None or self.beta2 is None:
                raise ValueError("superlinear metadata requires beta1 and beta2")
        elif self.beta1 is not None or self.beta2 is not None:
            raise ValueError("beta exponents are superlinear-only")

    @property
    def tail1(self) -> float:
        """Coefficient of ``|t|^k1`` in the derived upper bound and tail."""
        return (self.dbound1 + self.dbound2) / self.k1

    @property
    def tail2(self) -> float:
        """Coefficient of ``|s|^k2`` in the derived upper bound and tail."""
        return ((self.k1 - 1.0) / self.k1 + 1.0 / self.k2) * self.dbound2

    @property
    def theta1(self) -> float:
        if self.beta1 is None:
            raise ValueError("theta exponents exist only for superlinear metadata")
        return min(self.beta1, self.k1)

    @property
    def theta2(self) -> float:
        if self.beta2 is None:
            raise ValueError("theta exponents exist only for superlinear metadata")
        return min(self.beta2, self.k2)

    def validate_for(self, p1: float, p2: float) -> None:
        """Check the exponent relations against the system exponents."""
        if self.regime == "superlinear":
            if not (self.q1 > p1 and self.q2 > p2):
                raise ValueError(
                    f"superlinear growth needs q1 > p1 and q2 > p2, "
                    f"got q=({self.q1}, {self.q2}) p=({p1}, {p2})"
                )
            if not (p1 < self.k1 < self.q1 and p2 < self.k2 < self.q2):
                raise ValueError("superlinear growth needs k_i strictly between p_i and q_i")
            if not min(self.k1, self.k2) > max(p1, p2):
                raise ValueError("superlinear growth needs min(k1, k2) > max(p1, p2)")
            if not (self.beta1 > p1 and self.beta2 > p2):
                raise ValueError("superlinear growth needs beta_i > p_i")
        else:
            if not (1.0 < self.q1 < p1 and 1.0 < self.q2 < p2):
                raise ValueError(
                    f"sublinear growth needs 1 < q_i < p_i, "
                    f"got q=({self.q1}, {self.q2}) p=({p1}, {p2})"
                )
            if not min(p1, p2) > max(self.q1, self.q2):
                raise ValueError("sublinear growth needs min(p1, p2) > max(q1, q2)")
            if not (1.0 < self.k1 < self.q1 and 1.0 < self.k2 < self.q2):
                raise ValueError("sublinear growth needs 1 < k_i < q_i")


@dataclass(frozen=True, eq=False)
class NonlinearityDef:
    """``F`` with partials, locality radius, and growth metadata.

    ``fn(x, 0, 0)`` must vanish.  ``global_domain`` marks terms that are
    defined and C^1 on all of R^2 (the built-ins are); only those may be
    used unmodified in a problem.
    """

    name: str
    fn: TermFn
    d_t: TermFn
    d_s: TermFn
    delta: float
    growth: GrowthMeta
    even: bool = False
    global_domain: bool = False

    def __post_init__(self) -> None:
        if not (math.isfinite(self.delta) and self.delta > 0):
            raise ValueError(f"delta must be a positive real, got {self.delta!r}")
        at_origin = float(np.asarray(self.fn(None, 0.0, 0.0)))
        if abs(at_origin) > 1e-12:
            raise ValueError(f"F(x, 0, 0) must vanish, got {at_origin!r}")


# ----------------------------------------------------------------------
# cut-off functions
# ----------------------------------------------------------------------


def _check_delta(delta: float) -> float:
    delta = float(delta)
    if not (math.isfinite(delta) and delta > 0):
        raise ValueError(f"delta must be a positive real, got {delta!r}")
    return delta


def _pair_arrays(t, s) -> tuple[np.ndarray, np.ndarray, bool]:
    scalar = np.ndim(t) == 0 and np.ndim(s) == 0
    t_arr = np.atleast_1d(np.asarray(t, dtype=float))
    s_arr = np.atleast_1d(np.asarray(s, dtype=float))
    t_arr, s_arr = np.broadcast_arrays(t_arr, s_arr)
    return t_arr, s_arr, scalar


def _unwrap(out: np.ndarray, scalar: bool):
    return float(out[0]) if scalar else out


def _profile(r: np.ndarray, delta: float) -> np.ndarray:
    w = np.clip(2.0 * r / delta - 1.0, 0.0, 1.0)
    return 1.0 - 3.0 * w**2 + 2.0 * w**3


def _profile_slope(r: np.ndarray, delta: float) -> np.ndarray:
    """d(profile)/dr; zero on the plateau and outside the support."""
    w = 2.0 * r / delta - 1.0
    inside = (w > 0.0) & (w < 1.0)
    out = np.zeros_like(r)
    wi = w[inside]
    out[inside] = (-6.0 * wi + 6.0 * wi**2) * (2.0 / delta)
    return out


def tau(t, s, delta: float):
    """Radial cut-off: 1 on the ``delta/2`` disc, 0 outside the ``delta`` disc.

    C^1, valued in [0, 1], non-increasing in the radius, hence
    ``t * tau_t <= 0`` and ``s * tau_s <= 0`` everywhere.
    """
    delta = _check_delta(delta)
    t_arr, s_arr, scalar = _pair_arrays(t, s)
    return _unwrap(_profile(np.hypot(t_arr, s_arr), delta), scalar)


def tau_partials(t, s, delta: float):
    """Partial derivatives ``(tau_t, tau_s)`` of the radial cut-off."""
    delta = _check_delta(delta)
    t_arr, s_arr, scalar = _pair_arrays(t, s)
    r = np.hypot(t_arr, s_arr)
    slope = _profile_slope(r, delta)
    dt = np.zeros_like(r)
    ds = np.zeros_like(r)
    active = slope != 0.0
    dt[active] = slope[active] * t_arr[active] / r[active]
    ds[active] = slope[active] * s_arr[active] / r[active]
    return _unwrap(dt, scalar), _unwrap(ds, scalar)


def rho(t, s, delta: float):
    """Cut-off for the sublinear modification; same radial profile as ``tau``."""
    return tau(t, s, delta)


def rho_partials(t, s, delta: float):
    return tau_partials(t, s, delta)


# ----------------------------------------------------------------------
# modified nonlinearities
# ----------------------------------------------------------------------


def _signed_power(x: np.ndarray, expo: float) -> np.ndarray:
    """``sign(x) |x|^expo`` with value 0 at 0 (requires ``expo > 0``)."""
    return np.sign(x) * np.abs(x) ** expo


def _masked_term(fn: TermFn, x, mask: np.ndarray, t: np.ndarray, s: np.ndarray) -> np.ndarray:
    """Evaluate ``fn`` only where ``mask`` holds; zero elsewhere.

    The raw term is only trusted inside its locality radius, so it is never
    called outside the cut-off support.
    """
    out = np.zeros_like(t)
    if np.any(mask):
        xm = None if x is None else np.atleast_1d(np.asarray(x))[mask]
        out[mask] = fn(xm, t[mask], s[mask])
    return out


def _spliced(
    f: NonlinearityDef,
    tail_c1: float,
    tail_e1: float,
    tail_c2: float,
    tail_e2: float,
    name: str,
) -> NonlinearityDef:
    delta = f.delta

    def tail(t, s):
        return tail_c1 * np.abs(t) ** tail_e1 + tail_c2 * np.abs(s) ** tail_e2

    def fn(x, t, s):
        t_arr, s_arr, scalar = _pair_arrays(t, s)
        cut = _profile(np.hypot(t_arr, s_arr), delta)
        out = (1.0 - cut) * tail(t_arr, s_arr)
        mask = cut > 0.0
        out += cut * _masked_term(f.fn, x, mask, t_arr, s_arr)
        return _unwrap(out, scalar)

    def _partial(raw_value: TermFn, raw_partial: TermFn, tail_partial, component: int):
        def d(x, t, s):
            t_arr, s_arr, scalar = _pair_arrays(t, s)
            r = np.hypot(t_arr, s_arr)
            cut = _profile(r, delta)
            slope = _profile_slope(r, delta)
            out = (1.0 - cut) * tail_partial(t_arr, s_arr)
            mask = cut > 0.0
            out += cut * _masked_term(raw_partial, x, mask, t_arr, s_arr)
            ring = slope != 0.0
            if np.any(ring):
                fvals = _masked_term(raw_value, x, ring, t_arr, s_arr)
                z = t_arr if component == 0 else s_arr
                dcut = np.zeros_like(r)
                dcut[ring] = slope[ring] * z[ring] / r[ring]
                out += dcut * (fvals - tail(t_arr, s_arr))
            return _unwrap(out, scalar)

        return d

    def tail_t(t, s):
        return tail_c1 * tail_e1 * _signed_power(t, tail_e1 - 1.0)

    def tail_s(t, s):
        return tail_c2 * tail_e2 * _signed_power(s, tail_e2 - 1.0)

    return NonlinearityDef(
        name=name,
        fn=fn,
        d_t=_partial(f.fn, f.d_t, tail_t, 0),
        d_s=_partial(f.fn, f.d_s, tail_s, 1),
        delta=delta,
        growth=f.growth,
        even=f.even,
        global_domain=True,
    )


def modify_superlinear(f: NonlinearityDef) -> NonlinearityDef:
    """Splice ``F`` with the tail ``tail1 |t|^k1 + tail2 |s|^k2``.

    Equals ``F`` exactly on the closed ``delta/2`` disc and equals the tail
    outside the ``delta`` disc.
    """
    if f.growth.regime != "superlinear":
        raise ValueError(f"expected superlinear growth metadata, got {f.growth.regime!r}")
    meta = f.growth
    return _spliced(
        f, meta.tail1, meta.k1, meta.tail2, meta.k2, f"{f.name}-spliced-superlinear"
    )


def modify_sublinear(f: NonlinearityDef) -> NonlinearityDef:
    """Splice ``F`` with the tail ``lower1 |t|^q1 + lower2 |s|^q2``."""
    if f.growth.regime != "sublinear":
        raise ValueError(f"expected sublinear growth metadata, got {f.growth.regime!r}")
    meta = f.growth
    return _spliced(
        f, meta.lower1, meta.q1, meta.lower2, meta.q2, f"{f.name}-spliced-sublinear"
    )


# ----------------------------------------------------------------------
# built-in nonlinearities
# ----------------------------------------------------------------------


def builtin_example51() -> NonlinearityDef:
    """Even sixth/fourth-power blend with a radial sine transition.

    ``F = sigma (|t|^6 + |s|^6) + (1 - sigma)(|t|^4 + |s|^4)`` where
    ``sigma`` is 1 on the unit disc, ``sin(pi (t^2 + s^2 - 16)^2 / 450)``
    on ``1 < |(t,s)| <= 4``, and 0 beyond; globally C^1.  Superlinear near
    the origin with exponents ``q = 7``, ``k = 5``, ``beta = 3``.
    """

    def _blend(t, s):
        r2 = t * t + s * s
        theta = math.pi * (r2 - 16.0) ** 2 / 450.0
        sigma = np.where(r2 <= 1.0, 1.0, np.where(r2 > 16.0, 0.0, np.sin(theta)))
        # d(sigma)/d(r2); the cosine factor vanishes at both seams.
        dsig = np.where(
            (r2 > 1.0) & (r2 <= 16.0),
            np.cos(theta) * math.pi * 2.0 * (r2 - 16.0) / 450.0,
            0.0,
        )
        return sigma, dsig

    def fn(x, t, s):
        t_arr, s_arr, scalar = _pair_arrays(t, s)
        sigma, _ = _blend(t_arr, s_arr)
        p6 = np.abs(t_arr) ** 6 + np.abs(s_arr) ** 6
        p4 = np.abs(t_arr) ** 4 + np.abs(s_arr) ** 4
        return _unwrap(sigma * p6 + (1.0 - sigma) * p4, scalar)

    def _d(component: int):
        def d(x, t, s):
            t_arr, s_arr, scalar = _pair_arrays(t, s)
            sigma, dsig = _blend(t_arr, s_arr)
            p6 = np.abs(t_arr) ** 6 + np.abs(s_arr) ** 6
            p4 = np.abs(t_arr) ** 4 + np.abs(s_arr) ** 4
            z = t_arr if component == 0 else s_arr
            out = (
                sigma * 6.0 * np.abs(z) ** 4 * z
                + (1.0 - sigma) * 4.0 * np.abs(z) ** 2 * z
                + dsig * 2.0 * z * (p6 - p4)
            )
            return _unwrap(out, scalar)

        return d

    growth = GrowthMeta(
        regime="superlinear",
        q1=7.0,
        q2=7.0,
        k1=5.0,
        k2=5.0,
        lower1=1.0,
        lower2=1.0,
        dbound1=6.0,
        dbound2=6.0,
        beta1=3.0,
        beta2=3.0,
    )
    return NonlinearityDef(
        name="example51",
        fn=fn,
        d_t=_d(0),
        d_s=_d(1),
        delta=1.0,
        growth=growth,
        even=True,
        global_domain=True,
    )


def builtin_example52() -> NonlinearityDef:
    """``F = (3/4)(|t|^(4/3) + |s|^(4/3))``; even, globally C^1, sublinear.

    ``F_t = sign(t) |t|^(1/3)``; exponents ``q = 5/3``, ``k = 5/4``.
    """

    def fn(x, t, s):
        t_arr, s_arr, scalar = _pair_arrays(t, s)
        out = 0.75 * (np.abs(t_arr) ** (4.0 / 3.0) + np.abs(s_arr) ** (4.0 / 3.0))
        return _unwrap(out, scalar)

    def d_t(x, t, s):
        t_arr, s_arr, scalar = _pair_arrays(t, s)
        return _unwrap(np.cbrt(t_arr), scalar)

    def d_s(x, t, s):
        t_arr, s_arr, scalar = _pair_arrays(t, s)
        return _unwrap(np.cbrt(s_arr), scalar)

    growth = GrowthMeta(
        regime="sublinear",
        q1=5.0 / 3.0,
        q2=5.0 / 3.0,
        k1=1.25,
        k2=1.25,
        lower1=0.75,
        lower2=0.75,
        dbound1=2.0,
        dbound2=2.0,
    )
    return NonlinearityDef(
        name="example52",
        fn=fn,
        d_t=d_t,
        d_s=d_s,
        delta=1.0,
        growth=growth,
        even=True,
        global_domain=True,
    )


_BUILTINS = {
    "example51": builtin_example51,
    "example52": builtin_example52,
}


def builtin_names() -> tuple[str, ...]:
    return tuple(_BUILTINS)


def get_builtin(name: str) -> NonlinearityDef:
    try:
        factory = _BUILTINS[name]
    except KeyError:
        raise ValueError(
            f"unknown nonlinearity {name!r}; built-ins: {', '.join(_BUILTINS)}"
        ) from None
    return factory()


# ----------------------------------------------------------------------
# sampled hypothesis checking
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class CheckRecord:
    """One sampled inequality: worst signed margin (>= 0 means it held)."""

    name: str
    passed: bool
    worst_margin: float
    witness: tuple[float, float]


@dataclass(frozen=True)
class GrowthReport:
    checks: tuple[CheckRecord, ...]
    samples: int

    @property
    def all_passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def failed(self) -> tuple[CheckRecord, ...]:
        return tuple(c for c in self.checks if not c.passed)


def disc_samples(delta: float, samples: int) -> tuple[np.ndarray, np.ndarray]:
    """Deterministic quasi-uniform points in the punctured ``delta`` disc."""
    i = np.arange(1, samples + 1, dtype=float)
    r = delta * np.sqrt(i / samples)
    ang = i * _GOLDEN_ANGLE
    return r * np.cos(ang), r * np.sin(ang)


def check_growth(f: NonlinearityDef, p1: float, p2: float, samples: int) -> GrowthReport:
    """Falsify the growth hypotheses of ``f`` on sampled disc points.

    Evaluates each inequality of the declared regime at quasi-random points
    of the ``delta`` disc (origin excluded) and every vertex-independent
    slot, reporting the worst margin.  Sampling can only falsify, never
    prove; density is the caller's choice.
    """
    if not isinstance(samples, (int, np.integer)) or samples < 1:
        raise ValueError(f"samples must be a positive integer, got {samples!r}")
    meta = f.growth
    meta.validate_for(p1, p2)
    t, s = disc_samples(f.delta, int(samples))
    fv = np.asarray(f.fn(None, t, s))
    ft = np.asarray(f.d_t(None, t, s))
    fs = np.asarray(f.d_s(None, t, s))
    tol = 1e-12 * max(1.0, float(np.max(np.abs(fv))))

    def record(name: str, margins: np.ndarray) -> CheckRecord:
        worst = int(np.argmin(margins))
        margin = float(margins[worst])
        return CheckRecord(name, margin >= -tol, margin, (float(t[worst]), float(s[worst])))

    lower = meta.lower1 * np.abs(t) ** meta.q1 + meta.lower2 * np.abs(s) ** meta.q2
    dt_bound = (
        meta.dbound1 * np.abs(t) ** (meta.k1 - 1.0)
        + meta.dbound2 * np.abs(s) ** (meta.k2 * (meta.k1 - 1.0) / meta.k1)
    )
    ds_bound = (
        meta.dbound1 * np.abs(t) ** (meta.k1 * (meta.k2 - 1.0) / meta.k2)
        + meta.dbound2 * np.abs(s) ** (meta.k2 - 1.0)
    )
    checks = [
        record("lower-bound", fv - lower),
        record("partial-t-bound", dt_bound - np.abs(ft)),
        record("partial-s-bound", ds_bound - np.abs(fs)),
    ]
    if meta.regime == "superlinear":
        ar = t * ft / meta.beta1 + s * fs / meta.beta2
        checks.append(record("positivity", fv))
        checks.append(record("directional-upper-bound", ar - fv))
    else:
        even_gap = np.abs(np.asarray(f.fn(None, -t, -s)) - fv)
        checks.append(record("evenness", -even_gap))
    return GrowthReport(tuple(checks), int(samples))
