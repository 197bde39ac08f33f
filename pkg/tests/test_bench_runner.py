"""
벤치마크 실행기 테스트
"""
import math

import pytest

from src.core.bench_runner import BenchRunner, BenchSuite
from src.core.instance_generator import gen_hard_table2
from src.models.generator_spec import GeneratorSpec
from src.models.report import NONDETERMINISTIC_COLUMNS
from src.models.settings import DefaultSettings


def _small_suite(enumerate_k=None):
    return BenchSuite(
        generators=[
            GeneratorSpec("hard_table2", n=3),
            GeneratorSpec("random_balanced", num_agents=3, num_items=8, lambda_target=4.0, seed=1),
            GeneratorSpec("random_binary", num_agents=3, num_items=8, density=0.6, seed=2),
        ],
        algorithms=["half-and-half", "myopic", "rounded", "rounded-guessed"],
        seeds=[0, 1],
        enumerate_k=enumerate_k,
    )


ACCEPTANCE = DefaultSettings.get_acceptance_settings()


def _deterministic(rows):
    return [{key: value for key, value in row.to_dict().items() if key not in NONDETERMINISTIC_COLUMNS}
            for row in rows]


class TestBenchRunner:
    def test_empty_suite(self):
        assert BenchRunner().run(BenchSuite()) == []

    def test_rows_and_order(self):
        rows = BenchRunner(ACCEPTANCE).run(_small_suite())
        # 인스턴스마다 half-and-half, myopic, rounded, rounded-guessed × 시드 2개
        assert len(rows) == 3 * 5
        assert [row.instance_id for row in rows[:5]] == ["hard_table2-000"] * 5
        assert [row.algorithm for row in rows[:5]] == ["half-and-half", "myopic", "rounded",
                                                       "rounded-guessed", "rounded-guessed"]
        assert all(row.status == "ok" for row in rows)
        assert all(row.competitive_ratio >= 1.0 - 1e-6 for row in rows)

    def test_hard_instance_lower_bound(self):
        rows = BenchRunner(ACCEPTANCE).run(BenchSuite(generators=[GeneratorSpec("hard_table2", n=4)],
                                            algorithms=["myopic"]))
        row = rows[0]
        assert row.bound_kind == "lower"
        assert row.bound_value == pytest.approx(3.0 / math.e)
        assert row.balance_ratio == pytest.approx((16 + 16 ** 2 + 16 ** 3 + 16 ** 4) / 16)
        assert row.competitive_ratio >= row.bound_value
        assert row.bound_satisfied is True

    def test_half_and_half_upper_bound(self):
        rows = BenchRunner(ACCEPTANCE).run(BenchSuite(
            generators=[GeneratorSpec("random_balanced", num_agents=4, num_items=20, lambda_target=2.0, seed=3)],
            algorithms=["half-and-half"]))
        row = rows[0]
        assert row.bound_kind == "upper"
        assert row.bound_satisfied is True

    def test_deterministic_and_thread_independent(self):
        single = BenchRunner(ACCEPTANCE, threads=1).run(_small_suite())
        again = BenchRunner(ACCEPTANCE, threads=1).run(_small_suite())
        threaded = BenchRunner(ACCEPTANCE, threads=3).run(_small_suite())
        assert _deterministic(single) == _deterministic(again)
        assert _deterministic(single) == _deterministic(threaded)

    def test_enumeration_rows(self):
        suite = BenchSuite(generators=[GeneratorSpec("hard_table2", n=3)],
                           algorithms=["half-and-half-guessed"], seeds=[0], enumerate_k=2)
        rows = BenchRunner().run(suite)
        kinds = [row.row_kind for row in rows]
        assert kinds == ["run", "k", "k", "k", "mixture", "expectation_lower_bound"]
        mixture = rows[4]
        lower = rows[5]
        assert mixture.algorithm_nw >= lower.algorithm_nw
        assert mixture.status == "ok"

    def test_context_for_hard_instance(self):
        runner = BenchRunner()
        context = runner.prepare_context("h", GeneratorSpec("hard_table2", n=3), gen_hard_table2(3))
        assert context.balance == pytest.approx(91.0)
        assert context.impartiality == pytest.approx(81.0, rel=1e-4)
        assert context.offline_nw == pytest.approx(81.0, rel=1e-4)
        assert context.solution.step_rule == "open_loop"
        assert context.solution.converged

    def test_copies_of_hard_instance_keep_lower_bound(self):
        suite = BenchSuite(
            generators=[GeneratorSpec("hard_table2", n=4),
                        GeneratorSpec("copies", copies=2, base_family="hard_table2", n=4)],
            algorithms=["myopic"])
        base, copied = BenchRunner(ACCEPTANCE).run(suite)
        assert copied.generator == "copies"
        assert copied.bound_kind == "lower"
        assert copied.bound_value == pytest.approx(3.0 / math.e)
        assert copied.bound_satisfied is True
        assert copied.balance_ratio == pytest.approx(base.balance_ratio)
        assert copied.competitive_ratio == pytest.approx(base.competitive_ratio, rel=1e-5)
