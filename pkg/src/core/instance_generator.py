"""
인스턴스 생성기
하드 인스턴스 (단위 공급/이진 변형), 복제 구성, 무작위 균형/이진 인스턴스
"""
import math
from typing import List

import numpy as np

from .exceptions import InstanceFormatError, PreconditionError, RefusalError
from .online_allocators import make_rng
from ..models.generator_spec import MAX_HARD_N, GeneratorSpec
from ..models.instance import Instance, Item
from ..utils.logger import get_logger

logger = get_logger(__name__)


def _check_hard_n(n: int) -> None:
    if n < 2:
        raise PreconditionError(f"n 은 2 이상이어야 합니다: {n}")
    if n > MAX_HARD_N:
        raise RefusalError(f"n^(2n) 이 부동소수 범위를 벗어날 수 있습니다 (n ≤ {MAX_HARD_N}): {n}")


def gen_hard_table2(n: int) -> Instance:
    """
    단위 공급 하드 인스턴스

    N = T = n, 아이템 t (1부터) 는 에이전트 i ≥ t 에게 가치 n^(2t), 나머지는 0.
    """
    _check_hard_n(n)
    items = []
    for t in range(1, n + 1):
        value = float(n ** (2 * t))
        items.append(Item(1.0, tuple(value if i >= t else 0.0 for i in range(1, n + 1))))
    return Instance(n, tuple(items))


def gen_hard_table2_binary(n: int) -> Instance:
    """이진 변형: 아이템 t 는 공급 n^(2t), 에이전트 i ≥ t 의 가치 1"""
    _check_hard_n(n)
    items = []
    for t in range(1, n + 1):
        items.append(Item(float(n ** (2 * t)), tuple(1.0 if i >= t else 0.0 for i in range(1, n + 1))))
    return Instance(n, tuple(items))


def gen_copies(base: Instance, m: int, order: str = "interleaved") -> Instance:
    """
    기반 인스턴스의 독립 복제본 m 개

    에이전트 m·N 명. 복제본 g 의 아이템 t 는 공급 s_t 를 가진 별도 아이템이며
    복제본 g 의 에이전트 블록만 가치를 가진다.

    Args:
        base: 기반 인스턴스
        m: 복제 수
        order: "interleaved" (복제1 아이템1, 복제2 아이템1, …) 또는 "sequential" (복제본 순서대로)
    """
    if m < 1:
        raise PreconditionError(f"복제 수는 1 이상이어야 합니다: {m}")
    if order not in ("interleaved", "sequential"):
        raise PreconditionError(f"알 수 없는 도착 순서: {order}")
    if m == 1:
        return base

    n = base.num_agents
    total_agents = m * n

    def copy_item(item: Item, g: int) -> Item:
        values = [0.0] * total_agents
        values[g * n:(g + 1) * n] = item.values
        return Item(item.supply, tuple(values))

    if order == "interleaved":
        items = [copy_item(item, g) for item in base.items for g in range(m)]
    else:
        items = [copy_item(item, g) for g in range(m) for item in base.items]
    return Instance(total_agents, tuple(items))


def gen_random_balanced(num_agents: int, num_items: int, lambda_target: float, seed: int) -> Instance:
    """
    균형 비율이 lambda_target 인 무작위 인스턴스

    가치는 (0, 1] 균등분포에서 뽑은 뒤 에이전트 i 의 독점 효용이 λ^(i/(N−1)) 이 되도록 행을 조정한다.
    공급량은 모두 1.
    """
    if num_agents < 1 or num_items < 1:
        raise PreconditionError(f"N, T 는 1 이상이어야 합니다: N={num_agents}, T={num_items}")
    if not lambda_target >= 1 or math.isinf(lambda_target):
        raise PreconditionError(f"lambda_target 은 1 이상의 유한값이어야 합니다: {lambda_target}")

    rng = make_rng(seed)
    raw = 1.0 - rng.random((num_agents, num_items))
    if num_agents == 1:
        targets = np.ones(1)
    else:
        targets = lambda_target ** (np.arange(num_agents) / (num_agents - 1))
    row_sums = np.array([math.fsum(row) for row in raw.tolist()])
    values = raw * (targets / row_sums)[:, np.newaxis]
    return Instance.from_arrays(np.ones(num_items), values)


def gen_random_binary(num_agents: int, num_items: int, density: float, seed: int) -> Instance:
    """
    이진 구조 무작위 인스턴스

    아이템마다 공통 가치 v_t ∈ (0, 1] 와 각 에이전트가 확률 density 로 포함되는
    비어 있지 않은 부분집합을 뽑는다. 공급량은 모두 1.
    """
    if num_agents < 1 or num_items < 1:
        raise PreconditionError(f"N, T 는 1 이상이어야 합니다: N={num_agents}, T={num_items}")
    if not 0 < density <= 1:
        raise PreconditionError(f"density 는 (0, 1] 범위여야 합니다: {density}")

    rng = make_rng(seed)
    items: List[Item] = []
    for _ in range(num_items):
        common = 1.0 - rng.random()
        members = rng.random(num_agents) < density
        while not members.any():
            members = rng.random(num_agents) < density
        items.append(Item(1.0, tuple(np.where(members, common, 0.0).tolist())))
    return Instance(num_agents, tuple(items))


def generate(spec: GeneratorSpec) -> Instance:
    """
    사양으로 인스턴스 생성

    Raises:
        InstanceFormatError: 사양 검증 실패
    """
    is_valid, errors = spec.validate()
    if not is_valid:
        raise InstanceFormatError("생성기 사양이 올바르지 않습니다: " + "; ".join(errors), errors)

    if spec.family == "hard_table2":
        inst = gen_hard_table2(spec.n)
    elif spec.family == "hard_table2_binary":
        inst = gen_hard_table2_binary(spec.n)
    elif spec.family == "copies":
        inst = gen_copies(generate(spec.base_spec()), spec.copies, spec.order)
    elif spec.family == "random_balanced":
        inst = gen_random_balanced(spec.num_agents, spec.num_items, spec.lambda_target, spec.seed)
    else:
        inst = gen_random_binary(spec.num_agents, spec.num_items, spec.density, spec.seed)

    logger.info("인스턴스 생성: %s (N=%d, T=%d)", spec.family, inst.num_agents, inst.num_items)
    return inst
