"""
수용 기준 검사
실행 시간이 긴 검사는 slow 마커 (python run_tests.py --slow 또는 pytest -m slow)
"""
import math

import numpy as np
import pytest

from src.core.bench_runner import BenchSuite
from src.core.eisenberg_gale import brute_force_oracle, eg_objective, round_to_grid, solve_eg
from src.core.instance_generator import (
    gen_hard_table2,
    gen_hard_table2_binary,
    gen_random_balanced,
    gen_random_binary,
    generate,
)
from src.core.invariant_auditor import (
    anticipation_violations,
    binary_prefix_residuals,
    eg_violations,
    half_and_half_bound,
    hard_instance_bound,
    rounded_sandwich_violations,
    step_function_witness,
    trace_violations,
)
from src.core.online_allocators import (
    ALGORITHMS,
    enumerate_guesses,
    half_and_half,
    levels_for_mu,
    make_rng,
    myopic_greedy,
    run_algorithm,
    sample_guesses,
)
from src.core.waterfill import waterfill, waterfill_objective
from src.core.welfare import (
    balance_ratio,
    competitive_ratio,
    impartiality_ratio,
    nash_welfare,
    prefix_average_bound,
    prefix_average_gap,
)

from .conftest import random_instance
from .test_waterfill import _grid_best

pytestmark = pytest.mark.slow


def test_waterfill_matches_grid_search():
    rng = make_rng(1)
    for _ in range(1000):
        n = int(rng.integers(1, 4))
        u_prime = 2.0 * rng.random(n)
        v = 1.0 - rng.random(n)
        u_prime[rng.random(n) < 0.2] = 0.0
        v[rng.random(n) < 0.2] = 0.0
        s = float(0.1 + 3.0 * rng.random())
        result = waterfill(u_prime, v, s)
        assert waterfill_objective(u_prime, v, result.z) >= _grid_best(u_prime, v, s, 1000) - 1e-5


def test_gain_inequality_across_desk_suite():
    steps = 0
    suite = BenchSuite.desk_suite(seeds=(0, 1, 2, 3))
    for spec in suite.generators:
        inst = generate(spec)
        for algorithm in ALGORITHMS:
            for seed in (0, 1):
                trace = run_algorithm(inst, algorithm, lam=balance_ratio(inst), mu=16.0, seed=seed)
                assert trace.min_gain_residual >= -1e-9
                assert not trace_violations(trace)
                steps += len(trace.steps)
    assert steps >= 10_000


def test_offline_solver_against_oracle():
    rng = make_rng(2)
    for _ in range(500):
        inst = random_instance(rng, int(rng.integers(1, 4)), int(rng.integers(1, 4)), zero_probability=0.3)
        solution = solve_eg(inst, tol=1e-10, step_rule="pairwise")
        assert eg_violations(solution, inst) == []
        _, objective = brute_force_oracle(inst, 12)
        assert objective <= solution.objective + solution.fw_gap + 1e-9
        assert objective >= eg_objective(round_to_grid(solution.allocation, inst, 12), inst) - 1e-9


@pytest.mark.parametrize("num_agents", [2, 4, 8])
@pytest.mark.parametrize("lam", [1.0, 2.0, 16.0])
def test_half_and_half_finite_bound(num_agents, lam):
    for seed in range(100):
        inst = gen_random_balanced(num_agents, 20, lam, seed)
        true_lambda = balance_ratio(inst)
        trace = half_and_half(inst, true_lambda)
        assert anticipation_violations(trace) == []
        optimum = solve_eg(inst, step_rule="pairwise")
        ratio = competitive_ratio(optimum.nash_welfare, nash_welfare(trace.utilities))
        assert ratio <= half_and_half_bound(true_lambda, num_agents)


@pytest.mark.parametrize("n", [3, 4, 5, 6])
def test_hard_instance_lower_bound(n):
    inst = gen_hard_table2(n)
    optimum = solve_eg(inst, step_rule="pairwise")
    ratio = competitive_ratio(optimum.nash_welfare, nash_welfare(myopic_greedy(inst).utilities))
    assert ratio >= hard_instance_bound(n)
    assert balance_ratio(inst) <= n ** (2 * n)
    assert impartiality_ratio(optimum) <= n ** (2 * n)
    binary = solve_eg(gen_hard_table2_binary(n), step_rule="pairwise")
    np.testing.assert_allclose(binary.utilities, optimum.utilities, rtol=1e-5)


def test_binary_prefix_inequality():
    rng = make_rng(3)
    for seed in range(200):
        inst = gen_random_binary(int(rng.integers(2, 9)), int(rng.integers(5, 31)), 0.5, seed)
        if inst.zero_agents():
            continue
        optimum = solve_eg(inst, tol=1e-10, step_rule="pairwise")
        residuals = binary_prefix_residuals(myopic_greedy(inst).utilities, optimum.utilities)
        assert np.all(residuals >= 0)


@pytest.mark.parametrize("size", [2, 5, 12])
def test_step_function_is_minimal_over_random_optima(size):
    rng = make_rng(8)
    for index in range(5):
        u_tilde = np.sort(rng.uniform(0.1, 10.0, size))
        step_objective, sampled = step_function_witness(u_tilde, samples=10_000, seed=100 + index)
        assert step_objective <= sampled + 1e-9


@pytest.mark.parametrize("mu", [2.0, 4.0, 16.0])
def test_rounded_sandwich_of_optimum(mu):
    rng = make_rng(4)
    for _ in range(100):
        inst = random_instance(rng, int(rng.integers(2, 5)), int(rng.integers(2, 8)))
        solution = solve_eg(inst, tol=1e-10, step_rule="pairwise")
        levels = levels_for_mu(max(mu, impartiality_ratio(solution)))
        assert rounded_sandwich_violations(solution.allocation, inst, levels) == []


@pytest.mark.parametrize("mu", [2.0, 10.0, 1000.0])
def test_prefix_average_inequality(mu):
    rng = make_rng(5)
    bound = prefix_average_bound(mu)
    for _ in range(10_000):
        a = np.sort(1.0 + (mu - 1.0) * rng.random(int(rng.integers(1, 40))))
        assert prefix_average_gap(a, mu) <= bound


def test_guess_sampler_and_mixture():
    draws = sample_guesses(1_000_000, 6)
    assert abs(np.mean(draws == 0) - 6.0 / math.pi ** 2) <= 0.002
    rng = make_rng(6)
    for _ in range(10):
        inst = random_instance(rng, 4, 15, zero_probability=0.2)
        for algorithm in ("half-and-half-guessed", "rounded-guessed"):
            enumeration = enumerate_guesses(inst, algorithm, k_max=6)
            assert enumeration.mixture_nash_welfare >= enumeration.weighted_mean * (1 - 1e-9)


def test_online_causality():
    rng = make_rng(7)
    for _ in range(50):
        inst = random_instance(rng, int(rng.integers(1, 6)), int(rng.integers(2, 25)), zero_probability=0.2)
        cut = int(rng.integers(1, inst.num_items))
        for algorithm in ALGORITHMS:
            full = run_algorithm(inst, algorithm, lam=8.0, mu=8.0, seed=11)
            head = run_algorithm(inst.prefix(cut), algorithm, lam=8.0, mu=8.0, seed=11)
            np.testing.assert_array_equal(head.allocation.entries, full.allocation.entries[:, :cut])
