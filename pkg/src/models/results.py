"""
결과 데이터 모델
워터필링 결과, 온라인 실행 트레이스, 오프라인 최적해, 비율 보고서
"""
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

import numpy as np

from .instance import Allocation, Instance, UtilityVector


@dataclass(frozen=True, eq=False)
class WaterfillResult:
    """
    단일 아이템 워터필링 결과

    z: 에이전트별 할당량, nu_star: 최적 쌍대 변수 ν* (모든 v=0 이면 0),
    post_utilities: u' + v·z
    """

    z: np.ndarray
    nu_star: float
    post_utilities: np.ndarray

    @property
    def water_level(self) -> float:
        """수위 1/ν* (ν*=0 이면 inf)"""
        return math.inf if self.nu_star == 0 else 1.0 / self.nu_star


@dataclass(frozen=True, eq=False)
class StepRecord:
    """워터필링 한 번의 기록"""

    item_index: int
    level: int  # 서브아이템 레벨 (반올림 그리디 외에는 0)
    supply: float
    values: np.ndarray
    anticipated: np.ndarray
    result: WaterfillResult
    gain_residual: float
    running_utilities: np.ndarray


@dataclass(frozen=True, eq=False)
class HalfAndHalfState:
    """
    Half-and-Half 내부 상태

    cumulative_monopolist 는 지금까지 도착한 아이템의 Σ_j v_jt·s_t 누적합,
    second_half_utilities 는 두 번째 절반에서 얻은 효용.
    log_lambda 는 ln λ (추측 모드에서는 2^k·ln 2).
    """

    num_agents: int
    log_lambda: float
    coefficient: float
    cumulative_monopolist: float
    second_half_utilities: np.ndarray
    guess_k: Optional[int] = None

    def anticipated_utilities(self) -> np.ndarray:
        """û = coefficient·M + second_half"""
        return self.coefficient * self.cumulative_monopolist + self.second_half_utilities


@dataclass(frozen=True)
class GuessSample:
    """λ 또는 μ 추측값 2^{2^k}"""

    k: int
    probability: float

    @property
    def log2_log2_bound(self) -> int:
        return self.k


@dataclass(frozen=True)
class SubItem:
    """반올림 그리디의 서브아이템"""

    parent_item_index: int
    level: int
    supply: float
    threshold: float
    values: tuple

    @property
    def recipients(self) -> List[int]:
        return [i for i, v in enumerate(self.values) if v > 0]


@dataclass(eq=False)
class RunTrace:
    """온라인 알고리즘 한 번 실행의 전체 기록"""

    algorithm: str
    instance: Instance
    allocation: Allocation
    utilities: UtilityVector
    decision_utilities: UtilityVector
    steps: List[StepRecord] = field(default_factory=list)
    parameters: Dict[str, Any] = field(default_factory=dict)
    guess: Optional[GuessSample] = None
    seed: Optional[int] = None
    final_state: Optional[HalfAndHalfState] = None
    level_cap_engaged: bool = False

    @property
    def gain_residuals(self) -> np.ndarray:
        return np.array([step.gain_residual for step in self.steps], dtype=np.float64)

    @property
    def min_gain_residual(self) -> float:
        """가장 작은 이득 잔차 (스텝이 없으면 inf)"""
        residuals = self.gain_residuals
        return float(residuals.min()) if residuals.size else math.inf

    def summary(self) -> Dict[str, Any]:
        """로그/보고용 요약"""
        return {
            "algorithm": self.algorithm,
            "num_agents": self.instance.num_agents,
            "num_items": self.instance.num_items,
            "steps": len(self.steps),
            "seed": self.seed,
            "k": self.guess.k if self.guess else None,
            "level_cap_engaged": self.level_cap_engaged,
            **self.parameters,
        }


@dataclass(eq=False)
class GuessEnumeration:
    """추측 알고리즘의 k = 0..K 전수 평가 결과"""

    algorithm: str
    traces: List[RunTrace]
    probabilities: List[float]
    nash_welfares: List[float]
    expectation_lower_bound: float
    mixture_weights: List[float]
    mixture: Allocation
    mixture_nash_welfare: float

    @property
    def k_max(self) -> int:
        return len(self.traces) - 1

    @property
    def weighted_mean(self) -> float:
        """혼합 가중치(잔여 질량을 마지막 k에 부여)로 계산한 NW 평균"""
        return math.fsum(p * nw for p, nw in zip(self.mixture_weights, self.nash_welfares))


@dataclass(eq=False)
class EGSolution:
    """Eisenberg-Gale 프로그램의 (근사) 최적해와 Frank-Wolfe 간격 인증서"""

    allocation: Allocation
    utilities: UtilityVector
    objective: float
    fw_gap: float
    iterations: int
    converged: bool = True
    step_rule: str = "open_loop"
    objective_history: Optional[List[float]] = None

    @property
    def nash_welfare(self) -> float:
        """exp(objective / N)"""
        return math.exp(self.objective / len(self.utilities))


@dataclass(frozen=True, eq=False)
class RatioReport:
    """균형 비율 λ*, 공평 비율 μ*, 독점 효용"""

    balance_ratio: float
    impartiality_ratio: float
    monopolist_utilities: UtilityVector
    fw_gap: float = 0.0

    def to_dict(self) -> Dict[str, Any]:
        """JSON 출력용 딕셔너리"""
        return {
            "balance_ratio": self.balance_ratio,
            "impartiality_ratio": self.impartiality_ratio,
            "impartiality_fw_gap": self.fw_gap,
            "monopolist_utilities": [float(v) for v in self.monopolist_utilities],
        }
