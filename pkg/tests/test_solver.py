from __future__ import annotations

import math

import numpy as np
import pytest

from polylap import fixtures
from polylap.bounds import (
    compute_bounds,
    mountain_pass_level_bound,
    solution_norm_bounds,
)
from polylap.energy import eval_energy, gradient, residual_norms
from polylap.graph import SystemState, VertexFunction
from polylap.solver import (
    SolveConfig,
    descend,
    minimize,
    mountain_pass,
    newton_refine,
    result_to_row,
    sweep_lambda,
    sweep_to_csv,
)


@pytest.fixture(scope="module")
def superlinear_problem():
    return fixtures.example51_problem(1e8)


@pytest.fixture(scope="module")
def sublinear_problem():
    return fixtures.example52_problem(1.0)


@pytest.fixture(scope="module")
def reference_report(superlinear_problem):
    prob = superlinear_problem
    return compute_bounds(
        prob.graph, prob.params, prob.f.growth,
        fixtures.example51_direct_baseline(), prob.f.delta,
    )


@pytest.fixture(scope="module")
def minimize_results(sublinear_problem):
    cfg = SolveConfig(mode="minimize", seed=0, restarts=32)
    return minimize(sublinear_problem, cfg)


@pytest.fixture(scope="module")
def pass_result(superlinear_problem):
    cfg = SolveConfig(mode="mountain-pass", seed=0)
    anchor = fixtures.example51_anchor(superlinear_problem)
    return mountain_pass(superlinear_problem, anchor, cfg)


class TestConfig:
    def test_validation(self):
        with pytest.raises(ValueError, match="mode"):
            SolveConfig(mode="explore")
        with pytest.raises(ValueError, match="path_points"):
            SolveConfig(path_points=2)
        with pytest.raises(ValueError, match="restarts"):
            SolveConfig(restarts=0)
        with pytest.raises(ValueError, match="residual_tol"):
            SolveConfig(residual_tol=0.0)


class TestDescend:
    def test_zero_start_converges_immediately(self, sublinear_problem):
        g = sublinear_problem.graph
        zero = SystemState(g.zeros(), g.zeros())
        result = descend(sublinear_problem, zero, SolveConfig())
        assert result.converged and result.iterations == 0
        assert result.energy == 0.0 and result.w_norm == 0.0

    def test_energy_monotone_along_descent(self, sublinear_problem):
        g = sublinear_problem.graph
        rng = np.random.default_rng(50)
        start = SystemState(
            VertexFunction(g, rng.uniform(-0.2, 0.2, g.n)),
            VertexFunction(g, rng.uniform(-0.2, 0.2, g.n)),
        )
        result, trace = descend(sublinear_problem, start, SolveConfig(), record_trace=True)
        assert result.converged
        assert all(b <= a for a, b in zip(trace, trace[1:]))

    def test_result_energy_matches_reevaluation(self, sublinear_problem, minimize_results):
        for r in minimize_results[:5]:
            assert eval_energy(sublinear_problem, r.state) == r.energy


class TestMinimize:
    def test_finds_three_distinct_negative_solutions(self, minimize_results):
        negative = [r for r in minimize_results if r.energy < 0.0]
        assert len(negative) >= 3

    def test_residuals_tight(self, minimize_results):
        assert all(r.residual_sup < 1e-8 for r in minimize_results)
        assert all(r.converged for r in minimize_results)

    def test_sorted_by_energy(self, minimize_results):
        energies = [r.energy for r in minimize_results]
        assert energies == sorted(energies)

    def test_nontrivial(self, minimize_results):
        assert all(r.w_norm > 1e-4 for r in minimize_results)

    def test_distinct_modulo_sign(self, sublinear_problem, minimize_results):
        prob = sublinear_problem
        for i, a in enumerate(minimize_results):
            for b in minimize_results[i + 1 :]:
                du = a.state.u.values - b.state.u.values
                dv = a.state.v.values - b.state.v.values
                direct = prob.w_norm(du, dv)
                su = a.state.u.values + b.state.u.values
                sv = a.state.v.values + b.state.v.values
                flipped = prob.w_norm(su, sv)
                assert min(direct, flipped) > 1e-4

    def test_seeded_determinism_bitwise(self, sublinear_problem):
        cfg = SolveConfig(mode="minimize", seed=123, restarts=6)
        first = minimize(sublinear_problem, cfg)
        second = minimize(sublinear_problem, cfg)
        assert len(first) == len(second)
        for a, b in zip(first, second):
            assert a.energy == b.energy
            assert a.state.u.values.tobytes() == b.state.u.values.tobytes()
            assert a.state.v.values.tobytes() == b.state.v.values.tobytes()

    def test_small_solutions_solve_original(self, sublinear_problem, minimize_results):
        original = fixtures.example52_problem(1.0, variant="original")
        for r in minimize_results:
            if r.transfers:
                assert residual_norms(original, r.state).sup <= 1e-8


class TestMountainPass:
    def test_converged_with_positive_level(self, pass_result):
        assert pass_result.converged
        assert pass_result.residual_sup < 1e-8
        assert pass_result.energy > 0.0

    def test_level_below_bound(self, pass_result, reference_report):
        bound = mountain_pass_level_bound(reference_report, 1e8)
        assert pass_result.energy <= bound

    def test_norms_below_bounds(self, pass_result, reference_report):
        nb = solution_norm_bounds(reference_report, 1e8)
        assert pass_result.w_norm <= nb.w_u + nb.w_v
        assert pass_result.sup_norm <= nb.sup_u + nb.sup_v

    def test_transfers_and_original_residual(self, pass_result, superlinear_problem):
        assert pass_result.transfers
        original = fixtures.example51_problem(1e8, variant="original")
        assert residual_norms(original, pass_result.state).sup < 1e-8

    def test_rejects_nonnegative_anchor_energy(self, superlinear_problem):
        g = superlinear_problem.graph
        cfg = SolveConfig(mode="mountain-pass")
        tiny = SystemState(g.constant(1e-6), g.constant(1e-6))
        with pytest.raises(ValueError, match="anchor energy must be negative"):
            mountain_pass(superlinear_problem, tiny, cfg)

    def test_rejects_wrong_variant(self):
        prob = fixtures.example51_problem(1e8, variant="original")
        anchor = fixtures.example51_anchor(prob)
        with pytest.raises(ValueError, match="superlinear spliced variant"):
            mountain_pass(prob, anchor, SolveConfig())

    def test_seeded_determinism(self, superlinear_problem):
        cfg = SolveConfig(mode="mountain-pass", seed=9)
        anchor = fixtures.example51_anchor(superlinear_problem)
        a = mountain_pass(superlinear_problem, anchor, cfg)
        b = mountain_pass(superlinear_problem, anchor, cfg)
        assert a.state.u.values.tobytes() == b.state.u.values.tobytes()
        assert a.energy == b.energy


class TestNewtonRefine:
    def test_contracts_small_residual(self, superlinear_problem, pass_result):
        g = superlinear_problem.graph
        rng = np.random.default_rng(51)
        bump = 2e-6 * rng.standard_normal(g.n)
        perturbed = SystemState(
            VertexFunction(g, pass_result.state.u.values + bump),
            VertexFunction(g, pass_result.state.v.values + bump),
        )
        start_res = residual_norms(superlinear_problem, perturbed).sup
        assert 1e-8 < start_res < 1e-2
        cfg = SolveConfig(residual_tol=1e-10)
        refined = newton_refine(superlinear_problem, perturbed, cfg)
        assert refined.converged
        assert refined.residual_sup < 1e-10

    def test_exact_point_unchanged(self, sublinear_problem, minimize_results):
        sol = minimize_results[0]
        refined = newton_refine(sublinear_problem, sol.state, SolveConfig())
        assert refined.converged and refined.iterations == 0
        assert np.array_equal(refined.state.u.values, sol.state.u.values)

    def test_far_input_flags_failure(self, superlinear_problem):
        g = superlinear_problem.graph
        far = SystemState(g.constant(0.4), g.constant(-0.3))
        refined = newton_refine(superlinear_problem, far, SolveConfig())
        assert not refined.converged  # no crash, flagged


class TestSweep:
    def test_rows_conform_to_bounds(self, superlinear_problem, reference_report):
        cfg = SolveConfig(mode="mountain-pass", seed=0)
        anchor = fixtures.example51_anchor(superlinear_problem)
        lambdas = [1e8, 2e8]
        rows = sweep_lambda(
            superlinear_problem, lambdas, cfg, anchor=anchor, report=reference_report
        )
        assert [r.lam for r in rows] == lambdas
        for row in rows:
            assert row.converged and row.transfers
            assert 0.0 < row.energy <= row.mp_bound
            assert row.w_norm <= row.b18_bound + row.b19_bound
            assert row.sup_norm <= row.b20_bound + row.b21_bound

    def test_single_lambda_equals_single_solve(
        self, superlinear_problem, pass_result, reference_report
    ):
        cfg = SolveConfig(mode="mountain-pass", seed=0)
        anchor = fixtures.example51_anchor(superlinear_problem)
        rows = sweep_lambda(
            superlinear_problem, [1e8], cfg, anchor=anchor, report=reference_report
        )
        assert len(rows) == 1
        assert rows[0].energy == pass_result.energy
        assert rows[0].w_norm == pass_result.w_norm

    def test_empty_list(self, superlinear_problem):
        cfg = SolveConfig(mode="mountain-pass")
        assert sweep_lambda(superlinear_problem, [], cfg, anchor=None, report=None) == []

    def test_rejects_unsorted_or_nonpositive(self, superlinear_problem):
        cfg = SolveConfig(mode="mountain-pass")
        anchor = fixtures.example51_anchor(superlinear_problem)
        with pytest.raises(ValueError, match="ascending"):
            sweep_lambda(superlinear_problem, [2e8, 1e8], cfg, anchor=anchor)
        with pytest.raises(ValueError, match="positive"):
            sweep_lambda(superlinear_problem, [-1.0, 1e8], cfg, anchor=anchor)

    def test_csv_format(self, pass_result, reference_report):
        rows = [result_to_row(pass_result, 1e8, reference_report)]
        text = sweep_to_csv(rows)
        lines = text.strip().split("\n")
        assert lines[0] == (
            "lambda,energy,w_norm,sup_norm,residual_sup,mp_bound,"
            "b18_bound,b19_bound,b20_bound,b21_bound,transfers,converged"
        )
        fields = lines[1].split(",")
        assert len(fields) == 12
        assert fields[-1] == "true" and fields[-2] == "true"
        assert float(fields[0]) == 1e8
