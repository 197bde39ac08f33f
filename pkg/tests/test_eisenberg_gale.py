"""
Eisenberg-Gale 오프라인 솔버 테스트
"""
import numpy as np
import pytest

from src.core.eisenberg_gale import (
    brute_force_oracle,
    eg_objective,
    round_to_grid,
    solve_eg,
)
from src.core.exceptions import (
    PreconditionError,
    RefusalError,
    SolverNonconvergenceError,
    UndefinedRatioError,
)
from src.core.instance_generator import gen_hard_table2
from src.core.invariant_auditor import eg_violations, ratio_relation_ok
from src.core.welfare import impartiality_ratio, ratio_report, scale_agent
from src.models.instance import Allocation, Instance

from .conftest import random_instance


class TestSolver:
    def test_symmetric_single_item(self):
        inst = Instance.from_arrays([1.0], [[1.0], [1.0]])
        solution = solve_eg(inst)
        np.testing.assert_allclose(solution.allocation.entries, [[0.5], [0.5]], atol=1e-6)
        assert solution.converged

    def test_example_optimum(self, example_instance):
        solution = solve_eg(example_instance, step_rule="pairwise")
        np.testing.assert_allclose(solution.utilities, [200.0, 20.0], rtol=1e-4)
        assert solution.fw_gap <= 1e-7
        assert impartiality_ratio(solution) == pytest.approx(10.0, rel=1e-4)

    def test_hard_instance_optimum(self):
        solution = solve_eg(gen_hard_table2(3), step_rule="pairwise")
        np.testing.assert_allclose(solution.utilities, [9.0, 81.0, 729.0], rtol=1e-4)
        assert impartiality_ratio(solution) == pytest.approx(81.0, rel=1e-4)

    def test_zero_agent_rejected(self):
        inst = Instance.from_arrays([1.0], [[1.0], [0.0]])
        with pytest.raises(UndefinedRatioError) as excinfo:
            solve_eg(inst)
        assert excinfo.value.agents == [1]

    def test_unknown_step_rule(self, example_instance):
        with pytest.raises(PreconditionError):
            solve_eg(example_instance, step_rule="newton")

    def test_nonconvergence(self, rng):
        inst = random_instance(rng, 4, 10)
        with pytest.raises(SolverNonconvergenceError) as excinfo:
            solve_eg(inst, tol=1e-15, max_iterations=1)
        assert excinfo.value.best is not None
        assert not excinfo.value.best.converged

        relaxed = solve_eg(inst, tol=1e-15, max_iterations=1, strict=False)
        assert not relaxed.converged
        assert relaxed.iterations == 1

    def test_objective_history_is_monotone(self, rng):
        inst = random_instance(rng, 4, 12)
        for step_rule in ("open_loop", "line_search"):
            solution = solve_eg(inst, tol=1e-12, max_iterations=300, step_rule=step_rule,
                                record_history=True, strict=False)
            history = np.array(solution.objective_history)
            assert np.all(np.diff(history) >= -1e-12 * np.maximum(np.abs(history[1:]), 1.0))

    def test_different_starts_agree(self, rng):
        inst = random_instance(rng, 3, 6)
        shares = 1.0 - rng.random((3, 6))
        x0 = Allocation(shares / shares.sum(axis=0) * inst.supplies)
        default = solve_eg(inst, tol=1e-12, step_rule="pairwise")
        started = solve_eg(inst, tol=1e-12, step_rule="pairwise", x0=x0)
        np.testing.assert_allclose(started.utilities, default.utilities, rtol=1e-5)

    def test_infeasible_start_rejected(self, example_instance):
        with pytest.raises(PreconditionError):
            solve_eg(example_instance, x0=Allocation(np.full((2, 2), 5.0)))

    def test_scale_invariance(self, rng):
        inst = random_instance(rng, 3, 5)
        base = solve_eg(inst, tol=1e-13, step_rule="pairwise")
        scaled = solve_eg(scale_agent(inst, 1, 37.5), tol=1e-13, step_rule="pairwise")
        expected = base.utilities.copy()
        expected[1] *= 37.5
        np.testing.assert_allclose(scaled.utilities, expected, rtol=1e-5)


class TestInvariants:
    def test_random_solutions_satisfy_invariants(self, rng):
        for _ in range(10):
            inst = random_instance(rng, 4, 8, zero_probability=0.3)
            solution = solve_eg(inst, tol=1e-10, step_rule="pairwise")
            assert eg_violations(solution, inst) == []

    def test_ratio_relation(self, rng):
        for _ in range(10):
            inst = random_instance(rng, 3, 6, zero_probability=0.3)
            report = ratio_report(inst, solve_eg(inst, tol=1e-10, step_rule="pairwise"))
            assert ratio_relation_ok(report, inst.num_agents)
            assert report.to_dict()["impartiality_fw_gap"] <= 1e-10


class TestOracle:
    def test_symmetric_item(self):
        inst = Instance.from_arrays([1.0], [[1.0], [1.0]])
        alloc, objective = brute_force_oracle(inst, 1000)
        np.testing.assert_allclose(alloc.entries, [[0.5], [0.5]])
        assert objective == pytest.approx(2.0 * np.log(0.5))

    def test_example(self, example_instance):
        solution = solve_eg(example_instance, step_rule="pairwise")
        _, objective = brute_force_oracle(example_instance, 200)
        assert objective <= solution.objective + solution.fw_gap + 1e-9
        assert objective >= solution.objective - 1e-6

    def test_brackets_solver_on_tiny_instances(self, rng):
        for _ in range(30):
            n = int(rng.integers(1, 4))
            t = int(rng.integers(1, 4))
            inst = random_instance(rng, n, t, zero_probability=0.3)
            solution = solve_eg(inst, tol=1e-10, step_rule="pairwise")
            _, objective = brute_force_oracle(inst, 12)
            assert objective <= solution.objective + solution.fw_gap + 1e-9
            rounded = round_to_grid(solution.allocation, inst, 12)
            assert objective >= eg_objective(rounded, inst) - 1e-9

    def test_refuses_large_instances(self, rng):
        with pytest.raises(RefusalError):
            brute_force_oracle(random_instance(rng, 4, 2), 10)
        with pytest.raises(RefusalError):
            brute_force_oracle(random_instance(rng, 3, 3), 1000)

    def test_round_to_grid_uses_full_supply(self, rng):
        inst = random_instance(rng, 3, 3)
        solution = solve_eg(inst, tol=1e-8, step_rule="pairwise")
        rounded = round_to_grid(solution.allocation, inst, 7)
        np.testing.assert_allclose(rounded.entries.sum(axis=0), inst.supplies)
        units = rounded.entries / inst.supplies * 7
        np.testing.assert_allclose(units, np.round(units), atol=1e-9)
