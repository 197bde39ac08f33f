"""
인스턴스 데이터 모델
N명의 에이전트와 순서가 있는 분할 가능 아이템 스트림, 그리고 할당 행렬
"""
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Dict, Iterator, List, Sequence, Tuple

import numpy as np

from ..core.exceptions import PreconditionError, StructuralError

# 에이전트별 효용 벡터 (길이 N의 float64 배열)
UtilityVector = np.ndarray


@dataclass(frozen=True)
class Item:
    """분할 가능 아이템: 공급량 s_t 와 에이전트별 단위 가치 v_it"""

    supply: float
    values: Tuple[float, ...]

    def __post_init__(self):
        """초기화 후 검증"""
        object.__setattr__(self, "supply", float(self.supply))
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))

        if not math.isfinite(self.supply) or self.supply <= 0:
            raise PreconditionError(f"공급량은 양의 유한값이어야 합니다: {self.supply}")
        for i, value in enumerate(self.values):
            if not math.isfinite(value) or value < 0:
                raise PreconditionError(f"에이전트 {i}의 가치가 잘못되었습니다: {value}")

    @property
    def max_value(self) -> float:
        """최대 가치 v̄_t"""
        return max(self.values) if self.values else 0.0

    def is_zero(self) -> bool:
        """모든 가치가 0인지 확인"""
        return self.max_value == 0.0

    def to_dict(self) -> Dict[str, Any]:
        """딕셔너리로 변환"""
        return {"supply": self.supply, "values": list(self.values)}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "Item":
        """딕셔너리에서 아이템 생성"""
        return cls(supply=data["supply"], values=tuple(data["values"]))


@dataclass(frozen=True)
class Instance:
    """
    온라인 할당 인스턴스

    아이템은 stream() 순서대로 하나씩 도착한다. 생성 후 변경 불가.
    """

    num_agents: int
    items: Tuple[Item, ...] = field(default_factory=tuple)

    def __post_init__(self):
        """초기화 후 검증"""
        object.__setattr__(self, "items", tuple(self.items))

        if not isinstance(self.num_agents, (int, np.integer)) or self.num_agents < 1:
            raise PreconditionError(f"에이전트 수는 1 이상의 정수여야 합니다: {self.num_agents}")
        if len(self.items) == 0:
            raise PreconditionError("인스턴스에는 최소 한 개의 아이템이 필요합니다")
        for t, item in enumerate(self.items):
            if len(item.values) != self.num_agents:
                raise StructuralError(
                    f"아이템 {t}의 가치 벡터 길이({len(item.values)})가 에이전트 수({self.num_agents})와 다릅니다"
                )

    @property
    def num_items(self) -> int:
        """아이템 수 T"""
        return len(self.items)

    @cached_property
    def supplies(self) -> np.ndarray:
        """공급량 벡터 (길이 T, 읽기 전용)"""
        array = np.array([item.supply for item in self.items], dtype=np.float64)
        array.setflags(write=False)
        return array

    @cached_property
    def value_matrix(self) -> np.ndarray:
        """가치 행렬 (N×T, 읽기 전용)"""
        array = np.array([item.values for item in self.items], dtype=np.float64).T.copy()
        array.setflags(write=False)
        return array

    def stream(self) -> Iterator[Tuple[int, Item]]:
        """아이템을 도착 순서대로 하나씩 반환"""
        for t, item in enumerate(self.items):
            yield t, item

    def prefix(self, length: int) -> "Instance":
        """
        앞쪽 length개 아이템만 포함하는 인스턴스

        Args:
            length: 유지할 아이템 수 (1 이상 T 이하)
        """
        if not 1 <= length <= self.num_items:
            raise PreconditionError(f"prefix 길이가 범위를 벗어났습니다: {length}")
        return Instance(self.num_agents, self.items[:length])

    def zero_agents(self) -> List[int]:
        """모든 가치가 0인 에이전트 목록"""
        return [int(i) for i in np.flatnonzero(~(self.value_matrix > 0).any(axis=1))]

    def to_dict(self) -> Dict[str, Any]:
        """딕셔너리로 변환"""
        return {"num_agents": int(self.num_agents), "items": [item.to_dict() for item in self.items]}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "Instance":
        """딕셔너리에서 인스턴스 생성"""
        return cls(
            num_agents=int(data["num_agents"]),
            items=tuple(Item.from_dict(item) for item in data["items"]),
        )

    @classmethod
    def from_arrays(cls, supplies: Sequence[float], values) -> "Instance":
        """
        공급량 벡터와 N×T 가치 행렬에서 인스턴스 생성

        Args:
            supplies: 길이 T의 공급량
            values: N×T 가치 행렬
        """
        matrix = np.asarray(values, dtype=np.float64)
        if matrix.ndim != 2:
            raise StructuralError("가치 행렬은 2차원이어야 합니다")
        supplies = list(supplies)
        if matrix.shape[1] != len(supplies):
            raise StructuralError(
                f"가치 행렬의 열 수({matrix.shape[1]})와 공급량 길이({len(supplies)})가 다릅니다"
            )
        items = tuple(Item(supply=s, values=tuple(matrix[:, t])) for t, s in enumerate(supplies))
        return cls(num_agents=matrix.shape[0], items=items)


@dataclass(frozen=True, eq=False)
class Allocation:
    """할당 행렬 x (N×T): x_it 는 아이템 t 중 에이전트 i 에게 준 양"""

    entries: np.ndarray

    def __post_init__(self):
        """초기화 후 검증"""
        entries = np.array(self.entries, dtype=np.float64)
        if entries.ndim != 2:
            raise StructuralError("할당 행렬은 2차원이어야 합니다")
        if not np.all(np.isfinite(entries)) or np.any(entries < 0):
            raise PreconditionError("할당량은 0 이상의 유한값이어야 합니다")
        entries.setflags(write=False)
        object.__setattr__(self, "entries", entries)

    @classmethod
    def zeros(cls, inst: Instance) -> "Allocation":
        """영 할당"""
        return cls(np.zeros((inst.num_agents, inst.num_items)))

    @property
    def num_agents(self) -> int:
        return self.entries.shape[0]

    @property
    def num_items(self) -> int:
        return self.entries.shape[1]

    def check_shape(self, inst: Instance) -> None:
        """인스턴스와 차원이 일치하는지 확인"""
        if self.entries.shape != (inst.num_agents, inst.num_items):
            raise StructuralError(
                f"할당 차원 {self.entries.shape} 이 인스턴스 차원 "
                f"({inst.num_agents}, {inst.num_items}) 과 다릅니다"
            )

    def feasibility_excess(self, inst: Instance) -> float:
        """
        공급 초과 비율의 최댓값

        Returns:
            max_t (Σ_i x_it − s_t) / s_t (0 이하이면 실행 가능)
        """
        self.check_shape(inst)
        totals = self.entries.sum(axis=0)
        return float(np.max((totals - inst.supplies) / inst.supplies))

    def is_feasible(self, inst: Instance, tolerance: float = 1e-9) -> bool:
        """Σ_i x_it ≤ s_t·(1+tolerance) 인지 확인"""
        return self.feasibility_excess(inst) <= tolerance

    def prefix(self, length: int) -> "Allocation":
        """앞쪽 length개 아이템 열"""
        return Allocation(self.entries[:, :length])

    def to_dict(self) -> Dict[str, Any]:
        """딕셔너리로 변환"""
        return {"entries": self.entries.tolist()}
