"""
Eisenberg-Gale 오프라인 솔버
아이템별 심플렉스 곱 위에서 F(x) = Σ log u_i(x) 를 Frank-Wolfe 로 최대화하고
작은 인스턴스용 전수 탐색 오라클을 제공
"""
import itertools
import math
from typing import List, Optional, Tuple

import numpy as np

from .exceptions import PreconditionError, RefusalError, SolverNonconvergenceError, UndefinedRatioError
from .welfare import log_nash_objective, monopolist_utilities, utilities
from ..models.instance import Allocation, Instance
from ..models.results import EGSolution
from ..models.settings import STEP_RULES
from ..utils.logger import get_logger
from ..utils.performance_monitor import performance_monitor

logger = get_logger(__name__)

# LMO 동률 판정 상대 허용 오차
TIE_RTOL = 1e-12
BISECTION_STEPS = 100
ORACLE_MAX_AGENTS = 3
ORACLE_MAX_ITEMS = 3
ORACLE_MAX_POINTS = 50_000_000


def _objective(u: np.ndarray) -> float:
    if np.any(u <= 0):
        return -math.inf
    return float(np.sum(np.log(u)))


def _lmo(gradient: np.ndarray, supplies: np.ndarray) -> np.ndarray:
    """각 아이템을 기울기 최대 에이전트에게 (동률이면 균등 분할)"""
    column_max = gradient.max(axis=0)
    ties = np.isclose(gradient, column_max[np.newaxis, :], rtol=TIE_RTOL, atol=0.0)
    return ties / ties.sum(axis=0) * supplies[np.newaxis, :]


def _line_search(u: np.ndarray, du: np.ndarray) -> float:
    """
    φ(γ) = Σ log(u + γ·du) 의 [0, 1] 최대점 (φ' 이분법)
    """
    def derivative(gamma: float) -> float:
        shifted = u + gamma * du
        if np.any(shifted <= 0):
            return -math.inf
        return float(np.sum(du / shifted))

    if derivative(1.0) >= 0:
        return 1.0
    low, high = 0.0, 1.0
    for _ in range(BISECTION_STEPS):
        mid = 0.5 * (low + high)
        if derivative(mid) > 0:
            low = mid
        else:
            high = mid
        if high - low <= 1e-16:
            break
    return low


def _pairwise_sweep(x: np.ndarray, u: np.ndarray, values: np.ndarray) -> None:
    """
    아이템별 쌍 이동: 보유자 중 기울기 최소(away) 에이전트의 양을
    기울기 최대(FW) 에이전트에게 정확한 선 탐색 길이만큼 옮긴다. x, u 를 제자리에서 갱신.
    """
    num_items = x.shape[1]
    for t in range(num_items):
        v = values[:, t]
        gradient = v / u
        fw_agent = int(np.argmax(gradient))
        holders = np.flatnonzero(x[:, t] > 0)
        if holders.size == 0:
            continue
        away_agent = int(holders[np.argmin(gradient[holders])])
        if away_agent == fw_agent or gradient[away_agent] >= gradient[fw_agent]:
            continue

        held = x[away_agent, t]
        v_fw, v_away = v[fw_agent], v[away_agent]
        if v_away == 0:
            delta = held
        else:
            delta = (v_fw * u[away_agent] - v_away * u[fw_agent]) / (2.0 * v_away * v_fw)
            delta = min(max(delta, 0.0), held)
        if delta <= 0:
            continue

        x[away_agent, t] = held - delta if delta < held else 0.0
        x[fw_agent, t] += delta
        u[fw_agent] += v_fw * delta
        u[away_agent] = max(u[away_agent] - v_away * delta, 0.0) if delta < held else \
            float(np.dot(values[away_agent], x[away_agent]))


def _initial_allocation(inst: Instance, x0: Optional[Allocation]) -> np.ndarray:
    if x0 is None:
        return np.tile(inst.supplies / inst.num_agents, (inst.num_agents, 1))
    x0.check_shape(inst)
    if not x0.is_feasible(inst):
        raise PreconditionError("초기 할당이 실행 가능하지 않습니다")
    x = x0.entries.copy()
    # 아이템 공급을 모두 사용하도록 정규화
    totals = x.sum(axis=0)
    empty = totals <= 0
    x[:, empty] = inst.supplies[empty] / inst.num_agents
    totals = x.sum(axis=0)
    return x * (inst.supplies / totals)[np.newaxis, :]


@performance_monitor.measure_performance("solve_eg")
def solve_eg(inst: Instance, tol: float = 1e-7, max_iterations: int = 1_000_000,
             step_rule: str = "open_loop", x0: Optional[Allocation] = None,
             record_history: bool = False, strict: bool = True) -> EGSolution:
    """
    Frank-Wolfe 로 Eisenberg-Gale 프로그램 풀기

    Args:
        inst: 인스턴스 (모든 에이전트의 독점 효용 > 0)
        tol: Frank-Wolfe 간격 허용 오차 (절대값)
        max_iterations: 반복 한도
        step_rule: "open_loop" (2/(k+2), 목적값 감소 시 정확한 선 탐색),
            "line_search" (정확한 선 탐색), "pairwise" (아이템별 쌍 이동)
        x0: 실행 가능한 초기 할당 (None 이면 x_it = s_t/N)
        record_history: 반복별 목적값 기록
        strict: True 이면 반복 한도 도달 시 SolverNonconvergenceError

    Returns:
        EGSolution (fw_gap 은 F(x*) − F(x) 의 상한)
    """
    if not tol > 0:
        raise PreconditionError(f"tol 은 양수여야 합니다: {tol}")
    if step_rule not in STEP_RULES:
        raise PreconditionError(f"알 수 없는 스텝 규칙: {step_rule}")
    monopolist = monopolist_utilities(inst)
    zero_agents = [int(i) for i in np.flatnonzero(monopolist <= 0)]
    if zero_agents:
        raise UndefinedRatioError(f"독점 효용이 0 인 에이전트: {zero_agents}", agents=zero_agents)

    values = np.array(inst.value_matrix)
    supplies = inst.supplies
    x = _initial_allocation(inst, x0)
    u = np.sum(x * values, axis=1)
    if np.any(u <= 0):
        raise PreconditionError("초기 할당에서 효용이 0 인 에이전트가 있습니다")
    history: Optional[List[float]] = [] if record_history else None

    gap = math.inf
    iteration = 0
    converged = False
    while True:
        gradient = values / u[:, np.newaxis]
        target = _lmo(gradient, supplies)
        gap = float(np.sum(gradient * (target - x)))
        if history is not None:
            history.append(_objective(u))
        if gap <= tol:
            converged = True
            break
        if iteration >= max_iterations:
            break
        iteration += 1

        if step_rule == "pairwise":
            _pairwise_sweep(x, u, values)
            # 누적 오차 제거
            if iteration % 50 == 0:
                u = np.sum(x * values, axis=1)
            continue

        direction = target - x
        du = np.sum(direction * values, axis=1)
        if step_rule == "open_loop":
            gamma = 2.0 / (iteration + 2.0)
            if _objective(u + gamma * du) < _objective(u):
                gamma = _line_search(u, du)
        else:
            gamma = _line_search(u, du)
        x = x + gamma * direction
        u = u + gamma * du

    allocation = Allocation(np.clip(x, 0.0, None))
    exact_utilities = utilities(allocation, inst)
    solution = EGSolution(
        allocation=allocation,
        utilities=exact_utilities,
        objective=log_nash_objective(exact_utilities),
        fw_gap=gap,
        iterations=iteration,
        converged=converged,
        step_rule=step_rule,
        objective_history=history,
    )

    if not converged:
        message = f"Frank-Wolfe 가 {max_iterations}회 안에 수렴하지 않았습니다 (간격 {gap:.3e} > {tol:.1e})"
        if strict:
            raise SolverNonconvergenceError(message, best=solution)
        logger.warning(message)
    else:
        logger.info("EG 솔버 수렴: %d회 반복, 간격 %.3e (%s)", iteration, gap, step_rule)
    return solution


def eg_objective(alloc: Allocation, inst: Instance) -> float:
    """F(x) = Σ log u_i(x)"""
    return log_nash_objective(utilities(alloc, inst))


def round_to_grid(alloc: Allocation, inst: Instance, grid_steps: int) -> Allocation:
    """
    각 아이템을 s_t/grid_steps 격자로 반올림 (최대 나머지 방식, 공급 전량 사용)
    """
    if grid_steps < 1:
        raise PreconditionError(f"grid_steps 는 1 이상이어야 합니다: {grid_steps}")
    alloc.check_shape(inst)
    supplies = inst.supplies
    entries = alloc.entries
    rounded = np.zeros_like(entries)
    for t in range(inst.num_items):
        share = entries[:, t] / supplies[t]
        total = share.sum()
        share = share / total if total > 0 else np.full(inst.num_agents, 1.0 / inst.num_agents)
        units = share * grid_steps
        base = np.floor(units).astype(np.int64)
        remaining = grid_steps - int(base.sum())
        if remaining > 0:
            order = np.argsort(-(units - base), kind="stable")
            base[order[:remaining]] += 1
        rounded[:, t] = base * supplies[t] / grid_steps
    return Allocation(rounded)


def _compositions(total: int, parts: int) -> np.ndarray:
    """total 을 parts 개의 음이 아닌 정수로 나누는 모든 방법 (행 단위)"""
    if parts == 1:
        return np.array([[total]], dtype=np.int64)
    rows = []
    for bars in itertools.combinations(range(total + parts - 1), parts - 1):
        previous = -1
        row = []
        for bar in bars:
            row.append(bar - previous - 1)
            previous = bar
        row.append(total + parts - 2 - previous)
        rows.append(row)
    return np.array(rows, dtype=np.int64)


def brute_force_oracle(inst: Instance, grid_steps: int,
                       max_points: int = ORACLE_MAX_POINTS) -> Tuple[Allocation, float]:
    """
    격자 전수 탐색 오라클

    각 아이템을 s_t/grid_steps 단위로 나눈 모든 할당 중 F 최대점을 찾는다.

    Args:
        inst: N ≤ 3, T ≤ 3 인스턴스
        grid_steps: 아이템별 격자 분할 수
        max_points: 탐색 격자점 수 상한

    Returns:
        (최적 격자 할당, 목적값)
    """
    if inst.num_agents > ORACLE_MAX_AGENTS or inst.num_items > ORACLE_MAX_ITEMS:
        raise RefusalError(
            f"오라클은 N ≤ {ORACLE_MAX_AGENTS}, T ≤ {ORACLE_MAX_ITEMS} 만 지원합니다 "
            f"(N={inst.num_agents}, T={inst.num_items})"
        )
    if grid_steps < 1:
        raise PreconditionError(f"grid_steps 는 1 이상이어야 합니다: {grid_steps}")

    points = math.comb(grid_steps + inst.num_agents - 1, inst.num_agents - 1) ** inst.num_items
    if points > max_points:
        raise RefusalError(f"격자점 수 {points} 가 상한 {max_points} 를 넘습니다")
    compositions = _compositions(grid_steps, inst.num_agents)

    values = inst.value_matrix
    supplies = inst.supplies
    # 아이템별 효용 기여 (K × N)
    contributions = [compositions * (supplies[t] / grid_steps) * values[:, t][np.newaxis, :]
                     for t in range(inst.num_items)]

    # 나머지 아이템 조합을 브로드캐스트로 펼친 뒤 첫 아이템을 순회
    rest = np.zeros((1, inst.num_agents))
    for block in contributions[1:]:
        rest = (rest[:, np.newaxis, :] + block[np.newaxis, :, :]).reshape(-1, inst.num_agents)

    best_objective = -math.inf
    best_index = (0, 0)
    with np.errstate(divide="ignore"):
        for first_index, first in enumerate(contributions[0]):
            totals = rest + first[np.newaxis, :]
            objective = np.sum(np.log(totals), axis=1)
            candidate = int(np.argmax(objective))
            if objective[candidate] > best_objective:
                best_objective = float(objective[candidate])
                best_index = (first_index, candidate)

    first_index, rest_index = best_index
    chosen = [first_index]
    size = compositions.shape[0]
    rest_digits = []
    for _ in range(inst.num_items - 1):
        rest_digits.append(rest_index % size)
        rest_index //= size
    chosen.extend(reversed(rest_digits))

    entries = np.column_stack([compositions[k] * supplies[t] / grid_steps for t, k in enumerate(chosen)])
    allocation = Allocation(entries)
    return allocation, eg_objective(allocation, inst)
