"""
온라인 할당 알고리즘
Half-and-Half (λ 기지/추측), 근시안적 그리디, 반올림 가치 그리디 (μ 기지/추측),
추측 샘플러와 기대 할당 탈랜덤화
"""
import math
from functools import lru_cache
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .exceptions import PreconditionError, StructuralError
from .waterfill import gain_lower_bound_check, gain_residual_ok, waterfill
from .welfare import nash_welfare, utilities
from ..models.instance import Allocation, Instance, Item
from ..models.results import (
    GuessEnumeration,
    GuessSample,
    HalfAndHalfState,
    RunTrace,
    StepRecord,
    SubItem,
    WaterfillResult,
)
from ..utils.logger import get_logger
from ..utils.performance_monitor import performance_monitor

logger = get_logger(__name__)

LN2 = math.log(2.0)
BASEL_NORMALIZER = 6.0 / math.pi ** 2
# 역누적분포 표 크기 (초과 꼬리는 마지막 k 로 합쳐진다)
GUESS_TABLE_SIZE = 1_000_000
# 2^k 가 이 값을 넘으면 ln λ = inf 로 취급
MAX_GUESS_EXPONENT = 1000

ALGORITHMS = ("half-and-half", "half-and-half-guessed", "myopic", "rounded", "rounded-guessed")
GUESSED_ALGORITHMS = ("half-and-half-guessed", "rounded-guessed")


# ---------------------------------------------------------------------------
# 추측 샘플러
# ---------------------------------------------------------------------------

def guess_probability(k: int) -> float:
    """P(k) = 6/π² · 1/(k+1)²"""
    if k < 0:
        raise PreconditionError(f"k 는 0 이상이어야 합니다: {k}")
    return BASEL_NORMALIZER / float(k + 1) ** 2


@lru_cache(maxsize=1)
def _guess_cdf() -> np.ndarray:
    k = np.arange(GUESS_TABLE_SIZE, dtype=np.float64)
    cdf = np.cumsum(BASEL_NORMALIZER / (k + 1.0) ** 2)
    cdf.setflags(write=False)
    return cdf


def make_rng(seed: int) -> np.random.Generator:
    """PCG64 기반 생성기"""
    return np.random.Generator(np.random.PCG64(seed))


def sample_guess(rng_seed: int) -> GuessSample:
    """
    k 를 역누적분포로 추출 (부분합이 u 를 처음 넘는 k)

    Args:
        rng_seed: PCG64 시드

    Returns:
        GuessSample
    """
    u = make_rng(rng_seed).random()
    k = int(np.searchsorted(_guess_cdf(), u, side="right"))
    return GuessSample(k=k, probability=guess_probability(k))


def sample_guesses(count: int, rng_seed: int) -> np.ndarray:
    """한 시드에서 count 개의 k 를 추출 (첫 값은 sample_guess 와 같다)"""
    draws = make_rng(rng_seed).random(count)
    return np.searchsorted(_guess_cdf(), draws, side="right")


def log_lambda_for_guess(k: int) -> float:
    """ln(2^{2^k}) = 2^k·ln 2"""
    if k >= MAX_GUESS_EXPONENT:
        return math.inf
    return math.ldexp(LN2, k)


def levels_for_mu(mu: float) -> int:
    """
    J = max(1, ⌈log₂ μ⌉)

    frexp 로 정확히 계산한다. 2의 거듭제곱은 그 지수, 그 밖의 값은 다음 지수.
    """
    if not mu >= 1:
        raise PreconditionError(f"μ 는 1 이상이어야 합니다: {mu}")
    if math.isinf(mu):
        raise PreconditionError("μ 는 유한해야 합니다")
    mantissa, exponent = math.frexp(mu)
    ceil_log2 = exponent - 1 if mantissa == 0.5 else exponent
    return max(1, ceil_log2)


def levels_for_guess(k: int, level_cap: int) -> Tuple[int, bool]:
    """
    추측 k 의 레벨 수 min(2^k, level_cap)

    Returns:
        (레벨 수, 상한 적용 여부)
    """
    if level_cap < 1:
        raise PreconditionError(f"level_cap 은 1 이상이어야 합니다: {level_cap}")
    uncapped = 1 << min(k, 62)
    if k >= 62 or uncapped > level_cap:
        return level_cap, True
    return uncapped, False


# ---------------------------------------------------------------------------
# 서브아이템
# ---------------------------------------------------------------------------

def _sub_items(item: Item, levels: int, item_index: int) -> List[SubItem]:
    top = item.max_value
    if top == 0:
        return []
    supply = item.supply / levels
    subs = []
    for j in range(1, levels + 1):
        threshold = math.ldexp(top, -j)
        values = tuple(threshold if v >= threshold else 0.0 for v in item.values)
        subs.append(SubItem(parent_item_index=item_index, level=j, supply=supply,
                            threshold=threshold, values=values))
    return subs


def round_item(item: Item, mu: float, item_index: int = 0) -> List[SubItem]:
    """
    아이템을 J = max(1, ⌈log₂ μ⌉) 개의 이진 가치 서브아이템으로 분할

    레벨 j 의 서브아이템은 공급량 s/J, 가치 v̄/2^j (v_i ≥ v̄/2^j 인 에이전트만).
    모든 가치가 0 인 아이템은 빈 목록.
    """
    return _sub_items(item, levels_for_mu(mu), item_index)


# ---------------------------------------------------------------------------
# 알고리즘
# ---------------------------------------------------------------------------

class OnlineAllocator:
    """
    온라인 할당기 기본 클래스

    아이템을 stream() 순서로 하나씩 받아 즉시 할당을 확정한다.
    """

    name = "online"

    def __init__(self, gain_tolerance: float = 1e-9):
        """
        초기화

        Args:
            gain_tolerance: 이득 부등식 잔차의 상대 허용 오차
        """
        self.gain_tolerance = gain_tolerance
        self._steps: List[StepRecord] = []
        self._true_running: Optional[np.ndarray] = None

    def _start(self, inst: Instance) -> None:
        """실행 전 상태 초기화"""

    def _allocate(self, item_index: int, item: Item) -> np.ndarray:
        """아이템 하나의 할당 열 반환"""
        raise NotImplementedError

    def _decision_utilities(self) -> np.ndarray:
        return self._true_running.copy()

    def _parameters(self) -> Dict:
        return {}

    def _finish(self, trace: RunTrace) -> None:
        """실행 후 트레이스 보강"""

    def _waterfill_step(self, item_index: int, level: int, anticipated: np.ndarray,
                        values: np.ndarray, supply: float) -> Tuple[WaterfillResult, float]:
        result = waterfill(anticipated, values, supply)
        residual = gain_lower_bound_check(result, anticipated, values, supply)
        if not gain_residual_ok(residual, result, values, supply, self.gain_tolerance):
            logger.warning("이득 부등식 위반: 아이템 %d 레벨 %d 잔차 %.3e", item_index, level, residual)
        return result, residual

    def _record(self, item_index: int, level: int, supply: float, values: np.ndarray,
                anticipated: np.ndarray, result: WaterfillResult, residual: float,
                running: np.ndarray) -> None:
        self._steps.append(StepRecord(
            item_index=item_index,
            level=level,
            supply=supply,
            values=values,
            anticipated=anticipated,
            result=result,
            gain_residual=residual,
            running_utilities=running.copy(),
        ))

    def run(self, inst: Instance) -> RunTrace:
        """
        인스턴스 스트림 전체 실행

        Args:
            inst: 인스턴스

        Returns:
            RunTrace
        """
        self._steps = []
        self._true_running = np.zeros(inst.num_agents)
        self._start(inst)

        columns = []
        for t, item in inst.stream():
            column = self._allocate(t, item)
            columns.append(column)
            self._true_running += np.asarray(item.values) * column

        allocation = Allocation(np.column_stack(columns))
        trace = RunTrace(
            algorithm=self.name,
            instance=inst,
            allocation=allocation,
            utilities=utilities(allocation, inst),
            decision_utilities=self._decision_utilities(),
            steps=self._steps,
            parameters=self._parameters(),
        )
        self._finish(trace)
        logger.debug("%s 실행 완료: N=%d, T=%d, 스텝 %d", self.name, inst.num_agents,
                     inst.num_items, len(self._steps))
        return trace


class HalfAndHalfAllocator(OnlineAllocator):
    """
    Half-and-Half

    아이템의 절반은 균등 분배, 나머지 절반은 예상 효용
    u' = M_t/(2λN²) + (이전 아이템까지의 두 번째 절반 효용) 에 대한 워터필링.
    M_t 는 현재 아이템을 포함한 독점 효용 누적합.
    """

    name = "half-and-half"

    def __init__(self, log_lambda: float, guess_k: Optional[int] = None, gain_tolerance: float = 1e-9):
        super().__init__(gain_tolerance)
        if not log_lambda >= 0:
            raise PreconditionError(f"λ 는 1 이상이어야 합니다 (ln λ = {log_lambda})")
        self.log_lambda = log_lambda
        self.guess_k = guess_k
        self._coefficient = 0.0
        self._monopolist = 0.0
        self._second_half: Optional[np.ndarray] = None
        self._num_agents = 0

    @classmethod
    def with_lambda(cls, lam: float, gain_tolerance: float = 1e-9) -> "HalfAndHalfAllocator":
        """λ 값으로 생성"""
        if not lam >= 1 or math.isnan(lam):
            raise PreconditionError(f"λ 는 1 이상이어야 합니다: {lam}")
        return cls(math.log(lam), gain_tolerance=gain_tolerance)

    @classmethod
    def with_guess(cls, k: int, gain_tolerance: float = 1e-9) -> "HalfAndHalfAllocator":
        """추측 λ = 2^{2^k} 로 생성"""
        return cls(log_lambda_for_guess(k), guess_k=k, gain_tolerance=gain_tolerance)

    def _start(self, inst: Instance) -> None:
        n = inst.num_agents
        self._num_agents = n
        self._monopolist = 0.0
        self._second_half = np.zeros(n)
        log_coefficient = -(self.log_lambda + math.log(2.0 * n * n))
        self._coefficient = math.exp(log_coefficient)
        if self._coefficient == 0.0:
            logger.warning("예상 효용 계수 1/(2λN²) 가 0 으로 언더플로 (ln λ = %.4g)", self.log_lambda)

    def _allocate(self, item_index: int, item: Item) -> np.ndarray:
        supply = item.supply
        values = np.asarray(item.values, dtype=np.float64)
        n = self._num_agents

        self._monopolist += supply * math.fsum(item.values)
        anticipated = self._coefficient * self._monopolist + self._second_half

        result, residual = self._waterfill_step(item_index, 0, anticipated, values, supply / 2.0)
        column = supply / (2.0 * n) + result.z
        self._second_half += values * result.z

        self._record(item_index, 0, supply / 2.0, values, anticipated, result, residual,
                     self._true_running + values * column)
        return column

    def _parameters(self) -> Dict:
        lam = math.exp(self.log_lambda) if self.log_lambda < 700 else math.inf
        return {"lambda": lam, "log_lambda": self.log_lambda, "coefficient": self._coefficient}

    def _finish(self, trace: RunTrace) -> None:
        trace.final_state = HalfAndHalfState(
            num_agents=self._num_agents,
            log_lambda=self.log_lambda,
            coefficient=self._coefficient,
            cumulative_monopolist=self._monopolist,
            second_half_utilities=self._second_half.copy(),
            guess_k=self.guess_k,
        )


class MyopicGreedyAllocator(OnlineAllocator):
    """근시안적 그리디: 지금까지의 효용을 u' 로 두고 아이템 전체를 워터필링"""

    name = "myopic"

    def _allocate(self, item_index: int, item: Item) -> np.ndarray:
        values = np.asarray(item.values, dtype=np.float64)
        anticipated = self._true_running.copy()
        result, residual = self._waterfill_step(item_index, 0, anticipated, values, item.supply)
        self._record(item_index, 0, item.supply, values, anticipated, result, residual,
                     anticipated + values * result.z)
        return result.z


class RoundedGreedyAllocator(OnlineAllocator):
    """
    반올림 가치 그리디

    각 아이템을 레벨 1..J 서브아이템으로 나누어 레벨 순서대로 근시안적 그리디를 적용한다.
    결정은 반올림 가치의 누적 효용으로, 평가는 실제 가치로 한다.
    """

    name = "rounded"

    def __init__(self, levels: int, mu: Optional[float] = None, guess_k: Optional[int] = None,
                 level_cap: Optional[int] = None, level_cap_engaged: bool = False,
                 gain_tolerance: float = 1e-9):
        super().__init__(gain_tolerance)
        if levels < 1:
            raise PreconditionError(f"레벨 수는 1 이상이어야 합니다: {levels}")
        self.levels = levels
        self.mu = mu
        self.guess_k = guess_k
        self.level_cap = level_cap
        self.level_cap_engaged = level_cap_engaged
        self._rounded_running: Optional[np.ndarray] = None

    @classmethod
    def with_mu(cls, mu: float, gain_tolerance: float = 1e-9) -> "RoundedGreedyAllocator":
        """μ 값으로 생성"""
        return cls(levels_for_mu(mu), mu=mu, gain_tolerance=gain_tolerance)

    @classmethod
    def with_guess(cls, k: int, level_cap: int = 64, gain_tolerance: float = 1e-9) -> "RoundedGreedyAllocator":
        """추측 μ = 2^{2^k} 로 생성 (레벨 수는 level_cap 으로 제한)"""
        levels, capped = levels_for_guess(k, level_cap)
        if capped:
            logger.warning("레벨 상한 적용: k=%d, 2^k 레벨 대신 %d 레벨", k, levels)
        return cls(levels, guess_k=k, level_cap=level_cap, level_cap_engaged=capped,
                   gain_tolerance=gain_tolerance)

    def _start(self, inst: Instance) -> None:
        self._rounded_running = np.zeros(inst.num_agents)

    def _allocate(self, item_index: int, item: Item) -> np.ndarray:
        column = np.zeros(len(item.values))
        for sub in _sub_items(item, self.levels, item_index):
            values = np.asarray(sub.values, dtype=np.float64)
            anticipated = self._rounded_running.copy()
            result, residual = self._waterfill_step(item_index, sub.level, anticipated, values, sub.supply)
            self._rounded_running += values * result.z
            column += result.z
            self._record(item_index, sub.level, sub.supply, values, anticipated, result, residual,
                         self._rounded_running)
        return column

    def _decision_utilities(self) -> np.ndarray:
        return self._rounded_running.copy()

    def _parameters(self) -> Dict:
        return {"mu": self.mu, "levels": self.levels, "level_cap": self.level_cap}

    def _finish(self, trace: RunTrace) -> None:
        trace.level_cap_engaged = self.level_cap_engaged


# ---------------------------------------------------------------------------
# 함수형 진입점
# ---------------------------------------------------------------------------

def half_and_half(inst: Instance, lam: float, gain_tolerance: float = 1e-9) -> RunTrace:
    """λ 를 아는 Half-and-Half"""
    return HalfAndHalfAllocator.with_lambda(lam, gain_tolerance).run(inst)


def half_and_half_with_guess(inst: Instance, k: int, gain_tolerance: float = 1e-9) -> RunTrace:
    """λ = 2^{2^k} 로 고정한 Half-and-Half"""
    trace = HalfAndHalfAllocator.with_guess(k, gain_tolerance).run(inst)
    trace.algorithm = "half-and-half-guessed"
    trace.guess = GuessSample(k=k, probability=guess_probability(k))
    return trace


def half_and_half_guessed(inst: Instance, rng_seed: int, gain_tolerance: float = 1e-9) -> RunTrace:
    """k 를 샘플링한 뒤 λ = 2^{2^k} 로 Half-and-Half 실행"""
    guess = sample_guess(rng_seed)
    trace = half_and_half_with_guess(inst, guess.log2_log2_bound, gain_tolerance)
    trace.seed = rng_seed
    return trace


def myopic_greedy(inst: Instance, gain_tolerance: float = 1e-9) -> RunTrace:
    """근시안적 그리디"""
    return MyopicGreedyAllocator(gain_tolerance).run(inst)


def rounded_greedy(inst: Instance, mu: float, gain_tolerance: float = 1e-9) -> RunTrace:
    """μ 를 아는 반올림 가치 그리디"""
    return RoundedGreedyAllocator.with_mu(mu, gain_tolerance).run(inst)


def rounded_greedy_with_guess(inst: Instance, k: int, level_cap: int = 64,
                              gain_tolerance: float = 1e-9) -> RunTrace:
    """μ = 2^{2^k} 로 고정한 반올림 가치 그리디"""
    trace = RoundedGreedyAllocator.with_guess(k, level_cap, gain_tolerance).run(inst)
    trace.algorithm = "rounded-guessed"
    trace.guess = GuessSample(k=k, probability=guess_probability(k))
    return trace


def rounded_greedy_guessed(inst: Instance, rng_seed: int, level_cap: int = 64,
                           gain_tolerance: float = 1e-9) -> RunTrace:
    """k 를 샘플링한 뒤 μ = 2^{2^k} 로 반올림 가치 그리디 실행"""
    guess = sample_guess(rng_seed)
    trace = rounded_greedy_with_guess(inst, guess.log2_log2_bound, level_cap, gain_tolerance)
    trace.seed = rng_seed
    return trace


def final_anticipated_utilities(trace: RunTrace) -> np.ndarray:
    """Half-and-Half 트레이스의 최종 예상 효용 û_iT"""
    if trace.final_state is None:
        raise PreconditionError(f"{trace.algorithm} 트레이스에는 Half-and-Half 상태가 없습니다")
    return trace.final_state.anticipated_utilities()


def derandomize_mixture(traces: Sequence[RunTrace], probs: Sequence[float]) -> Allocation:
    """
    기대 할당 x̄ = Σ_g p_g·x^(g)

    Σ p 가 1 보다 작으면 잔여 질량은 마지막 트레이스에 더한다.

    Args:
        traces: 같은 인스턴스 위의 트레이스
        probs: 음이 아닌 가중치 (합 ≤ 1)
    """
    if len(traces) == 0 or len(traces) != len(probs):
        raise StructuralError(f"트레이스 수({len(traces)})와 가중치 수({len(probs)})가 맞지 않습니다")
    weights = [float(p) for p in probs]
    if any(not math.isfinite(p) or p < 0 for p in weights):
        raise PreconditionError("가중치는 0 이상의 유한값이어야 합니다")
    total = math.fsum(weights)
    if total > 1.0 + 1e-12:
        raise PreconditionError(f"가중치 합이 1 을 넘습니다: {total}")

    base = traces[0].instance
    for trace in traces[1:]:
        if trace.instance is not base and trace.instance != base:
            raise StructuralError("서로 다른 인스턴스의 트레이스는 섞을 수 없습니다")

    weights[-1] += max(0.0, 1.0 - total)
    mixture = np.zeros_like(traces[0].allocation.entries)
    for weight, trace in zip(weights, traces):
        mixture += weight * trace.allocation.entries
    return Allocation(mixture)


def _mixture_weights(probs: Sequence[float]) -> List[float]:
    weights = list(probs)
    weights[-1] += max(0.0, 1.0 - math.fsum(weights))
    return weights


def enumerate_guesses(inst: Instance, algorithm: str, k_max: int = 6, level_cap: int = 64,
                      gain_tolerance: float = 1e-9) -> GuessEnumeration:
    """
    추측 알고리즘을 k = 0..k_max 로 전수 실행

    기대 NW 의 하한 (k > k_max 꼬리는 NW 0 으로 취급) 과
    잔여 질량을 k_max 에 둔 탈랜덤화 혼합의 NW 를 계산한다.
    """
    if k_max < 0:
        raise PreconditionError(f"k_max 는 0 이상이어야 합니다: {k_max}")
    if algorithm == "half-and-half-guessed":
        traces = [half_and_half_with_guess(inst, k, gain_tolerance) for k in range(k_max + 1)]
    elif algorithm == "rounded-guessed":
        traces = [rounded_greedy_with_guess(inst, k, level_cap, gain_tolerance) for k in range(k_max + 1)]
    else:
        raise PreconditionError(f"추측 알고리즘이 아닙니다: {algorithm}")

    probabilities = [guess_probability(k) for k in range(k_max + 1)]
    welfares = [nash_welfare(trace.utilities) for trace in traces]
    mixture = derandomize_mixture(traces, probabilities)
    mixture_nw = nash_welfare(utilities(mixture, inst))

    enumeration = GuessEnumeration(
        algorithm=algorithm,
        traces=traces,
        probabilities=probabilities,
        nash_welfares=welfares,
        expectation_lower_bound=math.fsum(p * nw for p, nw in zip(probabilities, welfares)),
        mixture_weights=_mixture_weights(probabilities),
        mixture=mixture,
        mixture_nash_welfare=mixture_nw,
    )
    logger.info("%s k=0..%d 전수 평가: 기대 NW 하한 %.6g, 혼합 NW %.6g",
                algorithm, k_max, enumeration.expectation_lower_bound, mixture_nw)
    return enumeration


@performance_monitor.measure_performance("online_run")
def run_algorithm(inst: Instance, algorithm: str, lam: Optional[float] = None,
                  mu: Optional[float] = None, seed: Optional[int] = None, k: Optional[int] = None,
                  level_cap: int = 64, gain_tolerance: float = 1e-9) -> RunTrace:
    """
    이름으로 알고리즘 실행

    Args:
        inst: 인스턴스
        algorithm: ALGORITHMS 중 하나
        lam: half-and-half 의 λ
        mu: rounded 의 μ
        seed: 추측 알고리즘의 시드
        k: 추측 알고리즘의 k 를 직접 지정 (seed 대신)
        level_cap: rounded-guessed 레벨 상한
    """
    logger.info("알고리즘 실행: %s (N=%d, T=%d)", algorithm, inst.num_agents, inst.num_items)
    if algorithm == "half-and-half":
        if lam is None:
            raise PreconditionError("half-and-half 에는 λ 가 필요합니다")
        return half_and_half(inst, lam, gain_tolerance)
    if algorithm == "myopic":
        return myopic_greedy(inst, gain_tolerance)
    if algorithm == "rounded":
        if mu is None:
            raise PreconditionError("rounded 에는 μ 가 필요합니다")
        return rounded_greedy(inst, mu, gain_tolerance)
    if algorithm in GUESSED_ALGORITHMS:
        if k is None and seed is None:
            raise PreconditionError(f"{algorithm} 에는 시드 또는 k 가 필요합니다")
        if algorithm == "half-and-half-guessed":
            if k is not None:
                return half_and_half_with_guess(inst, k, gain_tolerance)
            return half_and_half_guessed(inst, seed, gain_tolerance)
        if k is not None:
            return rounded_greedy_with_guess(inst, k, level_cap, gain_tolerance)
        return rounded_greedy_guessed(inst, seed, level_cap, gain_tolerance)
    raise PreconditionError(f"알 수 없는 알고리즘: {algorithm}")
