from __future__ import annotations

import math

import numpy as np
import pytest

from polylap import fixtures
from polylap.bounds import (
    BaselinePair,
    anchor_ray_maxima,
    compute_bounds,
    mountain_pass_level_bound,
    mountain_ring_estimate,
    norm_equivalence_estimate,
    power_sum_bound,
    small_sphere_radius,
    solution_norm_bounds,
)
from polylap.calculus import sobolev_norm, lp_norm
from polylap.energy import SystemParams
from polylap.graph import WeightedGraph
from helpers import random_graph, random_positive_function, single_vertex_graph, two_vertex_graph


@pytest.fixture(scope="module")
def reference_report():
    prob = fixtures.example51_problem(1e8)
    base = fixtures.example51_direct_baseline()
    return compute_bounds(prob.graph, prob.params, prob.f.growth, base, prob.f.delta)


class TestReferenceConstants:
    def test_thresholds_closed_forms(self, reference_report):
        rep = reference_report
        assert math.isclose(rep.lambda1, 5.0 / 168.0, rel_tol=1e-12)
        assert math.isclose(rep.lambda2, (5.0 / 168.0) * 6.0**-3 * 34.0**1.5, rel_tol=1e-12)
        assert math.isclose(rep.lambda3, (5.0 / 168.0) * 3.0**-3 * 34.0**1.5, rel_tol=1e-12)

    def test_level_coefficients_closed_form(self, reference_report):
        expected = 62.5 * (17.0 / 14.0) ** 1.4
        assert math.isclose(reference_report.c1_star, expected, rel_tol=1e-12)
        assert math.isclose(reference_report.c2_star, expected, rel_tol=1e-12)

    def test_fourth_threshold_reference_value(self, reference_report):
        assert math.isclose(reference_report.lambda4, 89523333.3, rel_tol=1e-4)
        closed = (17.0 / 136.0) * 25.0**2.5 * 34.0**3.5
        assert math.isclose(reference_report.lambda4, closed, rel_tol=1e-12)

    def test_smallness_threshold_undefined(self, reference_report):
        rep = reference_report
        assert rep.lambda5 is None
        d1, d2 = rep.lambda5_denominators
        assert d1 < 0.0 and d2 < 0.0
        # the denominator is 1 - 2^5 * 2 * 3 * max_c on these inputs
        assert math.isclose(d1, 1.0 - 192.0 * rep.max_c, rel_tol=1e-12)

    def test_star_threshold_partial(self, reference_report):
        rep = reference_report
        assert rep.lambda_star_partial
        assert rep.lambda_star == rep.lambda4

    def test_mu_scaling_matches_formula(self):
        # scaling mu by a constant c rescales lambda1 by c^((k - p)/p) here
        prob = fixtures.example51_problem(1e8)
        base = fixtures.example51_direct_baseline()
        rep1 = compute_bounds(prob.graph, prob.params, prob.f.growth, base, 1.0)
        c = 3.0
        g = prob.graph
        scaled = WeightedGraph(g.vertices, c * g.mu, g.edges, g.omega)
        params = fixtures.example51_params(scaled, 1e8)
        rep2 = compute_bounds(scaled, params, prob.f.growth, base, 1.0)
        assert math.isclose(rep2.lambda1, rep1.lambda1 * c**1.5, rel_tol=1e-12)

    def test_graph_baseline_differs_from_direct(self):
        prob = fixtures.example51_problem(1e8)
        base = fixtures.example51_graph_baseline(prob)
        assert base.source == "computed-from-graph"
        # definition-evaluated gradient power is 6/68, not 15/68
        assert math.isclose(base.u0_grad_p1, 6.0 / 68.0, rel_tol=1e-12)
        assert math.isclose(base.u0_lp1, 1.0 / 34.0, rel_tol=1e-12)

    def test_requires_superlinear_metadata(self):
        prob = fixtures.example52_problem(1.0)
        base = fixtures.example51_direct_baseline()
        with pytest.raises(ValueError, match="superlinear"):
            compute_bounds(prob.graph, prob.params, prob.f.growth, base, 1.0)

    def test_baseline_validation(self):
        with pytest.raises(ValueError, match="positive real"):
            BaselinePair(1.0, 0.0, 1.0, 1.0, "direct-input")
        with pytest.raises(ValueError, match="unknown baseline source"):
            BaselinePair(1.0, 1.0, 1.0, 1.0, "guessed")


class TestRingEstimate:
    def test_radius_cap_crosses_one_at_first_threshold(self, reference_report):
        rep = reference_report
        ring = mountain_ring_estimate(rep, rep.lambda1)
        assert math.isclose(ring.radius_cap, 1.0, rel_tol=1e-12)

    def test_radius_cap_ratio_at_doubled_parameter(self, reference_report):
        rep = reference_report
        ring = mountain_ring_estimate(rep, 2.0 * rep.lambda1)
        assert math.isclose(ring.radius_cap, 0.5 ** (1.0 / 3.0), rel_tol=1e-12)

    def test_level_positive_inside_cap(self, reference_report):
        rep = reference_report
        for lam in (rep.lambda1, 10.0, 1e6, 1e8):
            ring = mountain_ring_estimate(rep, lam)
            assert 0.0 < ring.radius < ring.radius_cap
            assert ring.level > 0.0

    def test_cap_below_one_above_first_threshold(self, reference_report):
        rep = reference_report
        for lam in (1.001 * rep.lambda1, 2.0 * rep.lambda1, 1e4 * rep.lambda1):
            assert mountain_ring_estimate(rep, lam).radius_cap < 1.0

    def test_rejects_nonpositive_lambda(self, reference_report):
        with pytest.raises(ValueError, match="lambda"):
            mountain_ring_estimate(reference_report, 0.0)


class TestLevelBound:
    def test_unit_parameter(self, reference_report):
        rep = reference_report
        assert math.isclose(
            mountain_pass_level_bound(rep, 1.0), 2.0 * rep.max_c, rel_tol=1e-14
        )

    def test_reference_parameter(self, reference_report):
        rep = reference_report
        expected = rep.max_c * 2.0 * 1e8 ** (-0.4)
        assert math.isclose(mountain_pass_level_bound(rep, 1e8), expected, rel_tol=1e-12)

    def test_strictly_decreasing(self, reference_report):
        rep = reference_report
        grid = np.geomspace(1.0, 1e10, 40)
        vals = [mountain_pass_level_bound(rep, lam) for lam in grid]
        assert all(b < a for a, b in zip(vals, vals[1:]))


class TestSolutionNormBounds:
    def test_reference_structure(self, reference_report):
        rep = reference_report
        nb = solution_norm_bounds(rep, 1e8)
        expected = math.sqrt(6.0 * rep.max_c * 2.0 * 1e8 ** (-0.4))
        assert math.isclose(nb.sup_u, expected, rel_tol=1e-12)
        # mu_min = h_min = 1 makes the Sobolev and sup bounds coincide here
        assert nb.w_u == nb.sup_u

    def test_decay_to_zero(self, reference_report):
        rep = reference_report
        grid = np.geomspace(1e8, 1e28, 24)
        sups = [solution_norm_bounds(rep, lam).sup_u for lam in grid]
        assert all(b < a for a, b in zip(sups, sups[1:]))
        assert sups[-1] < 1e-3


class TestAnchorRayMaxima:
    def test_matches_level_coefficients(self, reference_report):
        rep = reference_report
        growth = fixtures.example51_problem(1e8).f.growth
        for lam in (1e8, 3e8):
            arm = anchor_ray_maxima(rep, growth, lam)
            assert math.isclose(arm.value1, rep.c1_star * lam ** (-0.4), rel_tol=1e-10)
            assert math.isclose(arm.value2, rep.c2_star * lam ** (-0.4), rel_tol=1e-10)

    def test_matches_grid_search(self, reference_report):
        rep = reference_report
        growth = fixtures.example51_problem(1e8).f.growth
        lam = 1e8
        arm = anchor_ray_maxima(rep, growth, lam)

        def ray_value(s):
            quad = rep.w1_power / rep.p1 * s**rep.p1
            drop = (
                lam
                * growth.lower1
                * rep.total_measure ** (1.0 - rep.q1 / rep.p1)
                * rep.u0_lp_norm**rep.q1
                * s**rep.q1
            )
            return quad - drop

        grid = np.linspace(0.5 * arm.scale1, 1.5 * arm.scale1, 20001)
        brute = max(ray_value(s) for s in grid)
        assert arm.value1 >= brute - 1e-12
        assert math.isclose(arm.value1, brute, rel_tol=1e-6)

    def test_level_bound_dominates_sum(self, reference_report):
        rep = reference_report
        growth = fixtures.example51_problem(1e8).f.growth
        for lam in (1e8, 5e8):
            arm = anchor_ray_maxima(rep, growth, lam)
            assert arm.value1 + arm.value2 <= mountain_pass_level_bound(rep, lam) * (
                1 + 1e-12
            )


class TestSphereRadius:
    def growth(self):
        return fixtures.example52_problem(1.0).f.growth

    def params(self):
        g = fixtures.example51_graph()
        return fixtures.example52_params(g, 1.0)

    def test_reference_value(self):
        r = small_sphere_radius(self.params(), self.growth(), 1.0, 1.0, 1.0)
        expected = ((6.0 / 5.0) * 0.75 * 2.0 ** (-2.0 / 3.0)) ** 3
        assert math.isclose(r, expected, rel_tol=1e-12)

    def test_power_law_scaling(self):
        p, gr = self.params(), self.growth()
        r1 = small_sphere_radius(p, gr, 0.7, 0.9, 1.0)
        for a in (2.0, 10.0):
            ra = small_sphere_radius(p, gr, 0.7, 0.9, a)
            assert math.isclose(ra, a**3 * r1, rel_tol=1e-12)

    def test_monotone_increasing(self):
        p, gr = self.params(), self.growth()
        vals = [small_sphere_radius(p, gr, 1.0, 1.0, lam) for lam in (0.5, 1.0, 2.0, 8.0)]
        assert all(b > a for a, b in zip(vals, vals[1:]))

    def test_rejects_bad_inputs(self):
        with pytest.raises(ValueError, match="positive"):
            small_sphere_radius(self.params(), self.growth(), 0.0, 1.0, 1.0)


class TestPowerSumBound:
    def test_unit_parameter(self):
        sides = power_sum_bound(1.0, 2.0, 3.0)
        assert sides.lhs == 2.0 and sides.rhs == 4.0

    def test_half_parameter(self):
        sides = power_sum_bound(0.5, 1.0, 2.0)
        assert math.isclose(sides.lhs, 6.0, rel_tol=1e-15)
        assert math.isclose(sides.rhs, 10.0, rel_tol=1e-15)

    def test_random_triples_hold(self):
        rng = np.random.default_rng(40)
        for _ in range(1000):
            lam = float(rng.uniform(0.01, 100.0))
            a, b = rng.uniform(0.01, 5.0, size=2)
            sides = power_sum_bound(lam, float(a), float(b))
            assert sides.lhs <= sides.rhs * (1 + 1e-12)


class TestNormEquivalence:
    def test_single_vertex_exact(self):
        g = single_vertex_graph(mu=1.0)
        h = g.constant(1.0)
        for m in (1, 2, 3):
            est = norm_equivalence_estimate(g, m, 2.0, h, 3.0, restarts=4)
            assert abs(est - 1.0) < 1e-8

    def test_never_exceeds_sampled_values(self):
        rng = np.random.default_rng(41)
        g = random_graph(rng, n_min=4, n_max=6)
        h = random_positive_function(rng, g)
        m, p, q = 1, 2.0, 3.0
        est = norm_equivalence_estimate(g, m, p, h, q, restarts=16)
        for _ in range(50):
            phi = g.function(rng.standard_normal(g.n))
            norm = sobolev_norm(g, m, p, h, phi)
            unit = g.function(phi.values / norm)
            assert est <= lp_norm(g, q, unit) ** q + 1e-9

    def test_two_vertex_matches_circle_scan(self):
        g = two_vertex_graph()
        h = g.constant(1.0)
        est = norm_equivalence_estimate(g, 1, 2.0, h, 2.0, restarts=8)
        best = math.inf
        for theta in np.linspace(0.0, math.pi, 20001):
            d = np.array([math.cos(theta), math.sin(theta)])
            phi = g.function(d)
            norm = sobolev_norm(g, 1, 2.0, h, phi)
            unit = g.function(d / norm)
            best = min(best, lp_norm(g, 2.0, unit) ** 2)
        assert abs(est - best) < 1e-4

    def test_rejects_bad_restarts(self):
        g = two_vertex_graph()
        with pytest.raises(ValueError, match="restarts"):
            norm_equivalence_estimate(g, 1, 2.0, g.constant(1.0), 2.0, restarts=0)
