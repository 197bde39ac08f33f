"""
복지 지표
효용, 내쉬 복지, 독점 효용, 균형/공평 비율, 경쟁비
"""
import math
from typing import Optional, Sequence

import numpy as np

from .exceptions import (
    InconsistencyError,
    PreconditionError,
    StructuralError,
    UndefinedRatioError,
)
from ..models.instance import Allocation, Instance, Item, UtilityVector
from ..models.results import EGSolution, RatioReport
from ..utils.logger import get_logger

logger = get_logger(__name__)

# alg_nw = 0, opt_nw > 0 일 때의 경쟁비
INFINITE_RATIO = math.inf


def _row_fsum(terms: np.ndarray) -> np.ndarray:
    """행별 보정 합산 (math.fsum, 아이템 순서)"""
    return np.array([math.fsum(row) for row in terms.tolist()], dtype=np.float64)


def utilities(alloc: Allocation, inst: Instance) -> UtilityVector:
    """
    u_i = Σ_t x_it·v_it

    Args:
        alloc: 할당 (N×T)
        inst: 인스턴스

    Returns:
        길이 N 효용 벡터
    """
    alloc.check_shape(inst)
    return _row_fsum(alloc.entries * inst.value_matrix)


def nash_welfare(u: Sequence[float]) -> float:
    """
    효용의 기하평균

    어떤 u_i 가 0 이면 정확히 0 을 반환한다.
    """
    u = np.asarray(u, dtype=np.float64)
    if u.ndim != 1 or u.size == 0:
        raise StructuralError("효용 벡터는 비어 있지 않은 1차원이어야 합니다")
    if np.any(u < 0) or not np.all(np.isfinite(u)):
        raise PreconditionError("효용은 0 이상의 유한값이어야 합니다")
    if np.any(u == 0):
        return 0.0
    return math.exp(math.fsum(np.log(u).tolist()) / u.size)


def log_nash_objective(u: Sequence[float]) -> float:
    """Σ log u_i (0 이 있으면 -inf)"""
    u = np.asarray(u, dtype=np.float64)
    if np.any(u <= 0):
        return -math.inf
    return math.fsum(np.log(u).tolist())


def monopolist_utilities(inst: Instance) -> UtilityVector:
    """V_i = Σ_t s_t·v_it"""
    return _row_fsum(inst.value_matrix * inst.supplies[np.newaxis, :])


def _max_min_ratio(values: np.ndarray, label: str) -> float:
    zero_agents = [int(i) for i in np.flatnonzero(values <= 0)]
    if zero_agents:
        raise UndefinedRatioError(
            f"{label}이 0 인 에이전트가 있어 비율이 정의되지 않습니다: {zero_agents}",
            agents=zero_agents,
        )
    return float(values.max() / values.min())


def balance_ratio(inst: Instance) -> float:
    """λ* = max_i V_i / min_i V_i"""
    return _max_min_ratio(monopolist_utilities(inst), "독점 효용")


def impartiality_ratio(eg: EGSolution) -> float:
    """μ* = max_i u*_i / min_i u*_i (EG 최적 효용 기준)"""
    return _max_min_ratio(np.asarray(eg.utilities, dtype=np.float64), "최적 효용")


def ratio_report(inst: Instance, eg: EGSolution) -> RatioReport:
    """λ*, μ*, 독점 효용을 묶은 보고서"""
    return RatioReport(
        balance_ratio=balance_ratio(inst),
        impartiality_ratio=impartiality_ratio(eg),
        monopolist_utilities=monopolist_utilities(inst),
        fw_gap=eg.fw_gap,
    )


def competitive_ratio(opt_nw: float, alg_nw: float, tolerance: float = 1e-6) -> float:
    """
    경쟁비 opt_nw / alg_nw

    Args:
        opt_nw: 오프라인 최적 NW
        alg_nw: 알고리즘 NW
        tolerance: alg_nw 가 opt_nw 를 넘어도 되는 상대 허용 오차

    Returns:
        경쟁비. alg_nw = 0 이면 INFINITE_RATIO (둘 다 0 이면 1)
    """
    if opt_nw < 0 or alg_nw < 0:
        raise PreconditionError(f"NW 는 0 이상이어야 합니다: opt={opt_nw}, alg={alg_nw}")
    if alg_nw > opt_nw * (1.0 + tolerance):
        raise InconsistencyError(
            f"알고리즘 NW({alg_nw})가 오프라인 최적값({opt_nw})을 초과합니다. 벤치마크 솔버를 확인하세요"
        )
    if alg_nw == 0:
        return 1.0 if opt_nw == 0 else INFINITE_RATIO
    return opt_nw / alg_nw


def prefix_average_bound(mu: float) -> float:
    """ln(ln μ + 1) + 1"""
    if mu < 1:
        raise PreconditionError(f"μ 는 1 이상이어야 합니다: {mu}")
    return math.log(math.log(mu) + 1.0) + 1.0


def prefix_average_gap(a: Sequence[float], mu: Optional[float] = None) -> float:
    """
    (1/N)Σ log a_i − (1/N)Σ log((1/i)Σ_{j≤i} a_j)

    Args:
        a: 1 ≤ a_1 ≤ … ≤ a_N 인 수열
        mu: 주어지면 a_N ≤ μ 도 확인

    Returns:
        간격 (호출자가 prefix_average_bound(μ) 이하인지 확인)
    """
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 1 or a.size == 0:
        raise StructuralError("수열은 비어 있지 않은 1차원이어야 합니다")
    if not np.all(np.isfinite(a)) or a[0] < 1:
        raise PreconditionError("수열의 원소는 1 이상의 유한값이어야 합니다")
    if np.any(np.diff(a) < 0):
        raise PreconditionError("수열이 오름차순으로 정렬되어 있지 않습니다")
    if mu is not None and a[-1] > mu:
        raise PreconditionError(f"수열의 최댓값({a[-1]})이 μ({mu})를 넘습니다")

    prefix_means = np.cumsum(a) / np.arange(1, a.size + 1)
    return float(np.mean(np.log(a)) - np.mean(np.log(prefix_means)))


def scale_agent(inst: Instance, agent: int, factor: float) -> Instance:
    """에이전트 한 명의 가치 행 전체에 factor 를 곱한 인스턴스"""
    if not 0 <= agent < inst.num_agents:
        raise PreconditionError(f"에이전트 인덱스가 범위를 벗어났습니다: {agent}")
    if not factor > 0:
        raise PreconditionError(f"배율은 양수여야 합니다: {factor}")
    items = []
    for item in inst.items:
        values = list(item.values)
        values[agent] *= factor
        items.append(Item(item.supply, tuple(values)))
    return Instance(inst.num_agents, tuple(items))


def is_binary_structured(inst: Instance) -> bool:
    """각 아이템의 0 이 아닌 가치가 모두 같은지 확인"""
    for item in inst.items:
        positive = {v for v in item.values if v > 0}
        if len(positive) > 1:
            return False
    return True
