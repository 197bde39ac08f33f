"""
불변식 감사
실행 트레이스, 워터필링 KKT 조건, EG 최적해의 불변식과
분석에 쓰이는 유한 부등식 (이진 가치 누적합, 계단 함수, 반올림 샌드위치, 이론 한계) 점검
"""
import math
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .exceptions import AuditViolationError, PreconditionError
from .online_allocators import final_anticipated_utilities, make_rng
from .waterfill import gain_residual_ok
from .welfare import impartiality_ratio, monopolist_utilities, utilities
from ..models.instance import Allocation, Instance
from ..models.results import EGSolution, RatioReport, RunTrace, WaterfillResult
from ..models.settings import Settings
from ..utils.logger import get_logger

logger = get_logger(__name__)

# (불변식 이름, 설명)
Violation = Tuple[str, str]


# ---------------------------------------------------------------------------
# 이론 한계
# ---------------------------------------------------------------------------

def half_and_half_bound(lam: float, num_agents: int) -> float:
    """Half-and-Half 경쟁비 상한 4·ln(4λ²N³)"""
    return 4.0 * math.log(4.0 * lam * lam * num_agents ** 3)


def hard_instance_bound(n: int) -> float:
    """하드 인스턴스에서 어떤 알고리즘도 넘지 못하는 경쟁비 하한 (n−1)/e"""
    return (n - 1) / math.e


def hard_instance_exact_bound(n: int) -> float:
    """(n−1)/n·(n!)^{1/n} (항상 (n−1)/e 보다 크다)"""
    return (n - 1) / n * math.exp(math.lgamma(n + 1) / n)


# ---------------------------------------------------------------------------
# 워터필링 / 트레이스
# ---------------------------------------------------------------------------

def waterfill_kkt_violations(result: WaterfillResult, u_prime: Sequence[float], v: Sequence[float],
                             s: float, tolerance: float = 1e-9) -> List[Violation]:
    """WaterfillResult 의 KKT 인증서 점검"""
    u_prime = np.asarray(u_prime, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    z = result.z
    violations: List[Violation] = []

    positive = v > 0
    if np.any(z[~positive] != 0):
        violations.append(("waterfill_kkt", "v=0 인 에이전트에게 할당됨"))
    if not np.any(positive):
        return violations

    if abs(z.sum() - s) > 1e-12 * s * max(1, z.size):
        violations.append(("waterfill_kkt", f"Σz={z.sum()!r} ≠ s={s!r}"))

    level = result.water_level
    expected = np.clip(level - u_prime[positive] / v[positive], 0.0, None)
    if np.any(np.abs(z[positive] - expected) > tolerance * level + 1e-12 * s):
        violations.append(("waterfill_kkt", "z_i ≠ max(1/ν* − u'_i/v_i, 0)"))

    receiving = z > 0
    marginal = v[receiving] / result.post_utilities[receiving]
    if np.any(np.abs(marginal - result.nu_star) > 1e-9 * result.nu_star):
        violations.append(("waterfill_kkt", "활성 에이전트의 한계 효용이 ν* 와 다릅니다"))
    return violations


def trace_violations(trace: RunTrace, settings: Optional[Settings] = None,
                     check_kkt: bool = False) -> List[Violation]:
    """
    RunTrace 불변식 점검

    실행 가능성, 효용 일관성, 모든 워터필링 스텝의 이득 부등식.
    Half-and-Half 는 가치가 있는 아이템을 전량 할당했는지도 확인한다.
    """
    settings = settings or Settings()
    inst = trace.instance
    violations: List[Violation] = []

    excess = trace.allocation.feasibility_excess(inst)
    if excess > settings.feasibility_tolerance:
        violations.append(("feasibility", f"공급 초과 비율 {excess:.3e}"))

    recomputed = utilities(trace.allocation, inst)
    scale = np.maximum(np.abs(recomputed), 1e-300)
    if np.any(np.abs(recomputed - trace.utilities) > 1e-9 * scale):
        violations.append(("utility_consistency", "트레이스 효용이 할당에서 계산한 효용과 다릅니다"))

    for step in trace.steps:
        if not gain_residual_ok(step.gain_residual, step.result, step.values, step.supply,
                                settings.gain_tolerance):
            violations.append(("gain_inequality",
                               f"아이템 {step.item_index} 레벨 {step.level}: 잔차 {step.gain_residual:.3e}"))
        if check_kkt:
            violations.extend(waterfill_kkt_violations(step.result, step.anticipated, step.values,
                                                       step.supply))

    if trace.final_state is not None:
        totals = trace.allocation.entries.sum(axis=0)
        valued = (inst.value_matrix > 0).any(axis=0)
        short = valued & (totals < inst.supplies * (1.0 - settings.feasibility_tolerance))
        if np.any(short):
            violations.append(("full_allocation", f"전량 할당되지 않은 아이템: {np.flatnonzero(short).tolist()}"))
    return violations


def anticipation_violations(trace: RunTrace, tolerance: float = 1e-9) -> List[Violation]:
    """Half-and-Half 최종 효용 u_i ≥ û_iT·(1 − tolerance)"""
    anticipated = final_anticipated_utilities(trace)
    short = np.flatnonzero(trace.utilities < anticipated * (1.0 - tolerance))
    if short.size:
        return [("anticipation", f"u_i < û_iT 인 에이전트: {short.tolist()}")]
    return []


def audit_trace(trace: RunTrace, settings: Optional[Settings] = None,
                check_anticipation: bool = False) -> None:
    """
    트레이스 감사 (위반 시 AuditViolationError)

    Args:
        trace: 실행 트레이스
        settings: 허용 오차 설정
        check_anticipation: Half-and-Half 예상 효용 보조정리도 확인 (λ ≥ λ* 인 실행에서만 의미)
    """
    violations = trace_violations(trace, settings)
    if check_anticipation:
        violations.extend(anticipation_violations(trace, (settings or Settings()).feasibility_tolerance))
    if violations:
        invariant, message = violations[0]
        logger.error("감사 실패 (%s): %s", trace.algorithm, message)
        raise AuditViolationError(invariant, message)
    logger.debug("감사 통과: %s (%d 스텝)", trace.algorithm, len(trace.steps))


# ---------------------------------------------------------------------------
# EG 최적해
# ---------------------------------------------------------------------------

def eg_violations(solution: EGSolution, inst: Instance,
                  settings: Optional[Settings] = None) -> List[Violation]:
    """
    EGSolution 불변식: 실행 가능성, 효용 일관성, 비례성, 지지 조건
    """
    settings = settings or Settings()
    tolerance = settings.invariant_tolerance
    violations: List[Violation] = []
    x = solution.allocation.entries

    excess = solution.allocation.feasibility_excess(inst)
    if excess > settings.feasibility_tolerance:
        violations.append(("feasibility", f"공급 초과 비율 {excess:.3e}"))

    recomputed = utilities(solution.allocation, inst)
    if np.any(np.abs(recomputed - solution.utilities) > 1e-9 * np.maximum(recomputed, 1e-300)):
        violations.append(("utility_consistency", "최적 효용이 할당과 일치하지 않습니다"))

    monopolist = monopolist_utilities(inst)
    fair_share = monopolist / inst.num_agents
    short = np.flatnonzero(solution.utilities < fair_share - tolerance * monopolist)
    if short.size:
        violations.append(("proportionality", f"u_i < V_i/N 인 에이전트: {short.tolist()}"))

    mu_hat = impartiality_ratio(solution)
    values = inst.value_matrix
    top = values.max(axis=0)
    supported = x > settings.support_eps * inst.supplies[np.newaxis, :]
    too_low = supported & (values < top[np.newaxis, :] / mu_hat - tolerance * top[np.newaxis, :])
    if np.any(too_low):
        agents, items = np.nonzero(too_low)
        violations.append(("support_condition",
                           f"v_it < v̄_t/μ̂ 인데 할당된 (i, t): {list(zip(agents.tolist(), items.tolist()))[:10]}"))
    return violations


def ratio_relation_ok(report: RatioReport, num_agents: int, tolerance: float = 1e-6) -> bool:
    """λ* ≤ N·μ* 이고 μ* ≤ N·λ*"""
    lam, mu = report.balance_ratio, report.impartiality_ratio
    return lam <= num_agents * mu * (1 + tolerance) and mu <= num_agents * lam * (1 + tolerance)


# ---------------------------------------------------------------------------
# 이진 가치 분석
# ---------------------------------------------------------------------------

def binary_prefix_residuals(alg_utilities: Sequence[float], opt_utilities: Sequence[float],
                            tolerance: float = 1e-6) -> np.ndarray:
    """
    누적합 부등식 잔차

    알고리즘 효용 오름차순으로 에이전트를 정렬하고 ũ 를 같은 순서로 배열했을 때
    Σ_j min(u_i, u_j) + tolerance·Σũ − Σ_{j≤i} ũ_j (모두 0 이상이어야 한다).
    """
    u = np.asarray(alg_utilities, dtype=np.float64)
    u_tilde = np.asarray(opt_utilities, dtype=np.float64)
    if u.shape != u_tilde.shape:
        raise PreconditionError("효용 벡터 길이가 다릅니다")
    order = np.argsort(u, kind="stable")
    u_sorted = u[order]
    tilde_sorted = u_tilde[order]
    lhs = np.cumsum(tilde_sorted)
    rhs = np.minimum(u_sorted[:, np.newaxis], u_sorted[np.newaxis, :]).sum(axis=1)
    return rhs + tolerance * tilde_sorted.sum() - lhs


def step_function_minimizer(opt_utilities: Sequence[float]) -> np.ndarray:
    """u_i = Σ_{j≤i} ũ_j/(N+1−j) (모든 누적합 부등식이 등호가 되는 점)"""
    u_tilde = np.asarray(opt_utilities, dtype=np.float64)
    n = u_tilde.size
    return np.cumsum(u_tilde / (n + 1.0 - np.arange(1, n + 1)))


def random_feasible_utilities(opt_utilities: Sequence[float], rng: np.random.Generator) -> np.ndarray:
    """
    누적합 부등식을 만족하는 임의의 오름차순 효용 벡터

    임의의 오름차순 벡터 w 를 c = max_i (Σ_{j≤i} ũ_j / Σ_j min(w_i, w_j)) 배 한다.
    """
    u_tilde = np.asarray(opt_utilities, dtype=np.float64)
    w = np.sort(rng.random(u_tilde.size) + 1e-3)
    capacity = np.minimum(w[:, np.newaxis], w[np.newaxis, :]).sum(axis=1)
    scale = float(np.max(np.cumsum(u_tilde) / capacity))
    return scale * w


def step_function_witness(opt_utilities: Sequence[float], samples: int, seed: int) -> Tuple[float, float]:
    """
    계단 함수 최소성의 몬테카를로 증거

    Returns:
        (계단 함수의 Σ log u, 표본 중 최소 Σ log u)
    """
    rng = make_rng(seed)
    step_objective = float(np.sum(np.log(step_function_minimizer(opt_utilities))))
    best = math.inf
    for _ in range(samples):
        candidate = random_feasible_utilities(opt_utilities, rng)
        best = min(best, float(np.sum(np.log(candidate))))
    return step_objective, best


# ---------------------------------------------------------------------------
# 반올림 샌드위치
# ---------------------------------------------------------------------------

def sub_item_image(alloc: Allocation, inst: Instance, levels: int) -> np.ndarray:
    """
    할당 x 를 서브아이템으로 옮긴 효용 기여 (N×T)

    v_it > 0 인 에이전트는 v_it ≥ v̄_t/2^ℓ 인 가장 작은 레벨 ℓ ≤ J 의 서브아이템에서
    x_it/J 를 받아 x_it/J·v̄_t/2^ℓ 를 얻는다. 그런 레벨이 없으면 0.
    """
    alloc.check_shape(inst)
    values = inst.value_matrix
    x = alloc.entries
    top = values.max(axis=0)
    contribution = np.zeros_like(x)
    assigned = np.zeros(x.shape, dtype=bool)
    for level in range(1, levels + 1):
        threshold = np.ldexp(top, -level)
        newly = ~assigned & (values > 0) & (values >= threshold[np.newaxis, :])
        contribution[newly] = (x / levels * threshold[np.newaxis, :])[newly]
        assigned |= newly
    return contribution


def rounded_sandwich_violations(alloc: Allocation, inst: Instance, levels: int,
                                tolerance: float = 1e-6) -> List[Violation]:
    """
    Σ_t x_it v_it/(2J) ≤ u'_i ≤ Σ_t x_it v_it/J (에이전트별, 상대 허용 오차)
    """
    image = sub_item_image(alloc, inst, levels).sum(axis=1)
    true_utilities = utilities(alloc, inst)
    lower = true_utilities / (2.0 * levels)
    upper = true_utilities / levels
    violations: List[Violation] = []
    low = np.flatnonzero(image < lower * (1.0 - tolerance))
    high = np.flatnonzero(image > upper * (1.0 + tolerance))
    if low.size:
        violations.append(("rounded_sandwich", f"하한 위반 에이전트: {low.tolist()}"))
    if high.size:
        violations.append(("rounded_sandwich", f"상한 위반 에이전트: {high.tolist()}"))
    return violations
