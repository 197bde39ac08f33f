"""
불변식 감사 테스트
"""
import math

import numpy as np
import pytest

from src.core.eisenberg_gale import solve_eg
from src.core.exceptions import AuditViolationError
from src.core.instance_generator import gen_random_balanced, gen_random_binary
from src.core.invariant_auditor import (
    audit_trace,
    binary_prefix_residuals,
    eg_violations,
    half_and_half_bound,
    hard_instance_bound,
    hard_instance_exact_bound,
    random_feasible_utilities,
    rounded_sandwich_violations,
    step_function_minimizer,
    step_function_witness,
    sub_item_image,
    trace_violations,
    waterfill_kkt_violations,
)
from src.core.online_allocators import half_and_half, levels_for_mu, make_rng, myopic_greedy
from src.core.waterfill import waterfill
from src.core.welfare import impartiality_ratio
from src.models.instance import Allocation, Instance
from src.models.results import EGSolution, WaterfillResult


class TestBounds:
    def test_half_and_half_bound(self):
        assert half_and_half_bound(1.0, 2) == pytest.approx(4.0 * math.log(32.0))

    def test_hard_instance_bounds(self):
        assert hard_instance_bound(3) == pytest.approx(2.0 / math.e)
        for n in range(2, 26):
            assert hard_instance_exact_bound(n) > hard_instance_bound(n)


class TestTraceAudit:
    def test_clean_trace(self, example_instance):
        trace = half_and_half(example_instance, 16.0)
        assert trace_violations(trace, check_kkt=True) == []
        audit_trace(trace, check_anticipation=True)

    def test_tampered_utilities(self, example_instance):
        trace = myopic_greedy(example_instance)
        trace.utilities = trace.utilities * 2.0
        with pytest.raises(AuditViolationError) as excinfo:
            audit_trace(trace)
        assert excinfo.value.invariant == "utility_consistency"

    def test_oversupplied_allocation(self, example_instance):
        trace = myopic_greedy(example_instance)
        trace.allocation = Allocation(trace.allocation.entries * 1.5)
        names = [name for name, _ in trace_violations(trace)]
        assert "feasibility" in names

    def test_kkt_detects_wrong_split(self):
        u_prime, v = np.array([1.0, 2.0]), np.array([1.0, 1.0])
        good = waterfill(u_prime, v, 3.0)
        bad = WaterfillResult(z=np.array([1.5, 1.5]), nu_star=good.nu_star,
                              post_utilities=u_prime + v * np.array([1.5, 1.5]))
        assert waterfill_kkt_violations(good, u_prime, v, 3.0) == []
        assert waterfill_kkt_violations(bad, u_prime, v, 3.0)


class TestEGAudit:
    def test_detects_unfair_allocation(self, example_instance):
        alloc = Allocation(np.array([[2.0, 2.0], [0.0, 0.0]]))
        u = np.array([230.0, 1e-3])
        fake = EGSolution(allocation=alloc, utilities=u, objective=float(np.sum(np.log(u))), fw_gap=0.0,
                          iterations=0)
        names = [name for name, _ in eg_violations(fake, example_instance)]
        assert "utility_consistency" in names
        assert "proportionality" in names


class TestBinaryAnalysis:
    def test_prefix_inequality_for_greedy(self):
        for seed in range(5):
            inst = gen_random_binary(4, 12, 0.5, seed)
            trace = myopic_greedy(inst)
            optimum = solve_eg(inst, tol=1e-10, step_rule="pairwise")
            residuals = binary_prefix_residuals(trace.utilities, optimum.utilities)
            assert np.all(residuals >= 0)

    def test_step_function_makes_constraints_tight(self):
        u_tilde = np.array([1.0, 2.0, 3.0, 4.0])
        u = step_function_minimizer(u_tilde)
        np.testing.assert_allclose(u, np.cumsum(u_tilde / np.array([4.0, 3.0, 2.0, 1.0])))
        residuals = binary_prefix_residuals(u, u_tilde, tolerance=0.0)
        np.testing.assert_allclose(residuals, 0.0, atol=1e-12)

    def test_random_points_are_feasible(self):
        rng = make_rng(3)
        u_tilde = 1.0 - rng.random(6)
        for _ in range(50):
            candidate = random_feasible_utilities(u_tilde, rng)
            assert np.all(binary_prefix_residuals(candidate, u_tilde, tolerance=1e-9) >= 0)

    def test_step_function_is_minimal(self):
        u_tilde = np.array([0.5, 1.0, 1.5, 2.0, 4.0])
        step_objective, sampled = step_function_witness(u_tilde, samples=2000, seed=9)
        assert step_objective <= sampled + 1e-9


class TestRoundedSandwich:
    def test_optimum_is_sandwiched(self):
        for seed in range(5):
            inst = gen_random_balanced(2, 10, 1.0, seed)
            solution = solve_eg(inst, tol=1e-10, step_rule="pairwise")
            levels = levels_for_mu(impartiality_ratio(solution))
            assert rounded_sandwich_violations(solution.allocation, inst, levels) == []

    def test_image_of_simple_allocation(self):
        inst = Instance.from_arrays([1.0], [[8.0], [3.0]])
        alloc = Allocation(np.array([[0.5], [0.5]]))
        image = sub_item_image(alloc, inst, 2)
        # 8 → 레벨 1 (임계값 4), 3 → 레벨 2 (임계값 2)
        np.testing.assert_allclose(image[:, 0], [0.5 / 2 * 4.0, 0.5 / 2 * 2.0])
        assert rounded_sandwich_violations(alloc, inst, 2) == []

    def test_value_below_last_level_breaks_lower_bound(self):
        inst = Instance.from_arrays([1.0], [[8.0], [1.0]])
        alloc = Allocation(np.array([[0.5], [0.5]]))
        names = [name for name, _ in rounded_sandwich_violations(alloc, inst, 2)]
        assert names == ["rounded_sandwich"]
