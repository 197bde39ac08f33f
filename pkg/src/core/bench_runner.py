"""
벤치마크 실행기
생성기 × 알고리즘 × 시드 조합을 실행하고 보고서 행을 만든다
"""
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

from .eisenberg_gale import solve_eg
from .exceptions import InconsistencyError, SolverNonconvergenceError, UndefinedRatioError
from .instance_generator import generate
from .invariant_auditor import half_and_half_bound, hard_instance_bound, trace_violations
from .online_allocators import ALGORITHMS, GUESSED_ALGORITHMS, enumerate_guesses, run_algorithm
from .welfare import balance_ratio, competitive_ratio, impartiality_ratio, nash_welfare
from ..models.generator_spec import GeneratorSpec
from ..models.instance import Instance
from ..models.report import ReportRow
from ..models.results import EGSolution, RunTrace
from ..models.settings import Settings
from ..utils.logger import get_logger, log_context
from ..utils.performance_monitor import performance_monitor

logger = get_logger(__name__)


@dataclass
class BenchSuite:
    """벤치마크 조합 정의"""

    generators: List[GeneratorSpec] = field(default_factory=list)
    algorithms: List[str] = field(default_factory=lambda: list(ALGORITHMS))
    seeds: List[int] = field(default_factory=lambda: [0])
    enumerate_k: Optional[int] = None

    def is_empty(self) -> bool:
        return not self.generators or not self.algorithms

    @classmethod
    def desk_suite(cls, seeds: Sequence[int] = (0, 1, 2), enumerate_k: Optional[int] = None) -> "BenchSuite":
        """데스크 규모 기본 스위트"""
        generators = []
        for seed in seeds:
            for num_agents in (2, 4, 8):
                for lam in (1.0, 2.0, 16.0):
                    generators.append(GeneratorSpec("random_balanced", num_agents=num_agents, num_items=50,
                                                    lambda_target=lam, seed=seed))
            generators.append(GeneratorSpec("random_binary", num_agents=6, num_items=30, density=0.5, seed=seed))
        for n in (3, 4, 5, 6):
            generators.append(GeneratorSpec("hard_table2", n=n))
        return cls(generators=generators, algorithms=list(ALGORITHMS), seeds=list(seeds),
                   enumerate_k=enumerate_k)


@dataclass
class InstanceContext:
    """인스턴스별 공통 값 (오프라인 최적해 포함)"""

    instance_id: str
    spec: GeneratorSpec
    instance: Instance
    solution: Optional[EGSolution]
    balance: Optional[float]
    impartiality: Optional[float]
    status: str = "ok"

    @property
    def offline_nw(self) -> Optional[float]:
        return self.solution.nash_welfare if self.solution is not None else None


def _theoretical_bound(context: InstanceContext, algorithm: str,
                       lam: Optional[float]) -> Tuple[Optional[str], Optional[float]]:
    if context.spec.is_hard:
        # 블록 대각 복제본은 하드 인스턴스의 경쟁비를 그대로 가진다
        return "lower", hard_instance_bound(context.spec.n)
    if algorithm == "half-and-half" and lam is not None:
        return "upper", half_and_half_bound(lam, context.instance.num_agents)
    return None, None


def _bound_satisfied(kind: Optional[str], bound: Optional[float], ratio: Optional[float]) -> Optional[bool]:
    if kind is None or ratio is None:
        return None
    return ratio <= bound if kind == "upper" else ratio >= bound


class BenchRunner:
    """벤치마크 실행 클래스"""

    def __init__(self, settings: Optional[Settings] = None, threads: Optional[int] = None):
        """
        초기화

        Args:
            settings: 허용 오차 및 솔버 설정
            threads: 작업 스레드 수 (None 이면 settings.bench_threads)
        """
        self.settings = settings or Settings()
        self.threads = max(1, threads or self.settings.bench_threads)

    def prepare_context(self, instance_id: str, spec: GeneratorSpec, inst: Instance) -> InstanceContext:
        """오프라인 최적해와 λ*, μ* 계산"""
        settings = self.settings
        status = "ok"
        try:
            balance = balance_ratio(inst)
        except UndefinedRatioError:
            balance = None

        solution: Optional[EGSolution] = None
        try:
            solution = solve_eg(inst, tol=settings.eg_tolerance, max_iterations=settings.eg_max_iterations,
                                step_rule=settings.eg_step_rule, strict=True)
        except SolverNonconvergenceError as e:
            if settings.strict_solver:
                raise
            logger.warning(f"{instance_id}: {e}")
            solution = e.best
            status = "eg_nonconvergence"
        except UndefinedRatioError as e:
            logger.warning(f"{instance_id}: 오프라인 최적값 없음 ({e})")
            status = "undefined_optimum"

        impartiality = None
        if solution is not None:
            try:
                impartiality = impartiality_ratio(solution)
            except UndefinedRatioError:
                impartiality = None
        return InstanceContext(instance_id, spec, inst, solution, balance, impartiality, status)

    def make_row(self, context: InstanceContext, trace: Optional[RunTrace], algorithm: str,
                 row_kind: str = "run", alg_nw: Optional[float] = None, seed: Optional[int] = None,
                 k: Optional[int] = None, lam: Optional[float] = None,
                 wall_time: Optional[float] = None) -> ReportRow:
        """보고서 행 생성"""
        status = context.status
        if alg_nw is None and trace is not None:
            alg_nw = nash_welfare(trace.utilities)

        ratio = None
        offline_nw = context.offline_nw
        if offline_nw is not None and alg_nw is not None:
            try:
                ratio = competitive_ratio(offline_nw, alg_nw, self.settings.invariant_tolerance)
            except InconsistencyError as e:
                logger.error(f"{context.instance_id} {algorithm}: {e}")
                status = "inconsistent"

        min_residual = None
        if trace is not None:
            min_residual = trace.min_gain_residual
            violations = trace_violations(trace, self.settings)
            if violations:
                status = "audit_failed:" + violations[0][0]

        kind, bound = _theoretical_bound(context, algorithm, lam)
        return ReportRow(
            instance_id=context.instance_id,
            generator=context.spec.family,
            generator_params=context.spec.describe(),
            algorithm=algorithm,
            row_kind=row_kind,
            seed=seed,
            k=k if k is not None else (trace.guess.k if trace is not None and trace.guess else None),
            algorithm_nw=alg_nw,
            offline_nw=offline_nw,
            fw_gap=context.solution.fw_gap if context.solution is not None else None,
            competitive_ratio=ratio,
            balance_ratio=context.balance,
            impartiality_ratio=context.impartiality,
            bound_kind=kind,
            bound_value=bound,
            bound_satisfied=_bound_satisfied(kind, bound, ratio),
            min_gain_residual=None if min_residual is None or math.isinf(min_residual) else min_residual,
            status=status,
            wall_time_s=wall_time,
        )

    def _run_cell(self, context: InstanceContext, algorithm: str, seed: Optional[int]) -> Optional[ReportRow]:
        lam = mu = None
        if algorithm == "half-and-half":
            lam = context.balance
            if lam is None:
                return None
        if algorithm == "rounded":
            mu = context.impartiality
            if mu is None:
                return None
        with log_context(algorithm=algorithm, seed=seed), performance_monitor.timer(algorithm) as clock:
            trace = run_algorithm(context.instance, algorithm, lam=lam, mu=mu, seed=seed,
                                  level_cap=self.settings.level_cap, gain_tolerance=self.settings.gain_tolerance)
        return self.make_row(context, trace, algorithm, seed=seed, lam=lam, wall_time=clock["elapsed"])

    def _enumeration_rows(self, context: InstanceContext, algorithm: str, k_max: int) -> List[ReportRow]:
        with log_context(algorithm=algorithm, k_max=k_max), \
                performance_monitor.timer(f"{algorithm}_enumeration") as clock:
            enumeration = enumerate_guesses(context.instance, algorithm, k_max, self.settings.level_cap,
                                            self.settings.gain_tolerance)
        rows = [self.make_row(context, trace, algorithm, row_kind="k", k=k)
                for k, trace in enumerate(enumeration.traces)]
        rows.append(self.make_row(context, None, algorithm, row_kind="mixture",
                                  alg_nw=enumeration.mixture_nash_welfare, k=k_max,
                                  wall_time=clock["elapsed"]))
        rows.append(self.make_row(context, None, algorithm, row_kind="expectation_lower_bound",
                                  alg_nw=enumeration.expectation_lower_bound, k=k_max))
        if enumeration.mixture_nash_welfare < enumeration.weighted_mean * (1 - self.settings.invariant_tolerance):
            rows[-2].status = "audit_failed:mixture_concavity"
        return rows

    def run_instance(self, instance_id: str, spec: GeneratorSpec, suite: BenchSuite) -> List[ReportRow]:
        """인스턴스 하나의 모든 셀 실행"""
        with log_context(instance=instance_id):
            inst = generate(spec)
            context = self.prepare_context(instance_id, spec, inst)
            rows: List[ReportRow] = []
            for algorithm in suite.algorithms:
                if algorithm in GUESSED_ALGORITHMS:
                    for seed in suite.seeds:
                        row = self._run_cell(context, algorithm, seed)
                        if row is not None:
                            rows.append(row)
                    if suite.enumerate_k is not None:
                        rows.extend(self._enumeration_rows(context, algorithm, suite.enumerate_k))
                else:
                    row = self._run_cell(context, algorithm, None)
                    if row is None:
                        logger.warning(f"{algorithm} 에 필요한 비율이 정의되지 않아 건너뜁니다")
                    else:
                        rows.append(row)
            logger.info(f"인스턴스 완료: {len(rows)}행")
            return rows

    def run(self, suite: BenchSuite) -> List[ReportRow]:
        """
        스위트 실행

        Returns:
            셀 순서대로 정렬된 보고서 행 (스레드 수와 무관)
        """
        if suite.is_empty():
            logger.info("빈 스위트: 헤더만 출력합니다")
            return []

        jobs = [(f"{spec.family}-{index:03d}", spec) for index, spec in enumerate(suite.generators)]
        logger.info(f"벤치마크 시작: 인스턴스 {len(jobs)}개, 알고리즘 {len(suite.algorithms)}개, "
                    f"스레드 {self.threads}개")

        if self.threads == 1:
            results = [self.run_instance(instance_id, spec, suite) for instance_id, spec in jobs]
        else:
            with ThreadPoolExecutor(max_workers=self.threads) as executor:
                results = list(executor.map(lambda job: self.run_instance(job[0], job[1], suite), jobs))

        rows = [row for block in results for row in block]
        performance_monitor.log_report()
        return rows
