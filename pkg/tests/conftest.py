"""
공용 픽스처
"""
import numpy as np
import pytest

from src.core.online_allocators import make_rng
from src.models.instance import Instance


@pytest.fixture
def example_instance() -> Instance:
    """초콜릿/젤리 예제: 공급 (2, 2), 에이전트 1 가치 (100, 15), 에이전트 2 가치 (1, 10)"""
    return Instance.from_arrays([2.0, 2.0], [[100.0, 15.0], [1.0, 10.0]])


@pytest.fixture
def two_step_instance() -> Instance:
    """(s=1, v=(1,1)) 다음 (s=1, v=(0,1))"""
    return Instance.from_arrays([1.0, 1.0], [[1.0, 0.0], [1.0, 1.0]])


@pytest.fixture
def rng() -> np.random.Generator:
    return make_rng(20240611)


def random_instance(rng: np.random.Generator, num_agents: int, num_items: int,
                    zero_probability: float = 0.0) -> Instance:
    """(0, 1] 가치, (0.5, 2] 공급의 무작위 인스턴스 (모든 에이전트의 독점 효용 > 0)"""
    values = 1.0 - rng.random((num_agents, num_items))
    if zero_probability > 0:
        values[rng.random((num_agents, num_items)) < zero_probability] = 0.0
        for i in range(num_agents):
            if not values[i].any():
                values[i, rng.integers(num_items)] = 1.0
    supplies = 0.5 + 1.5 * (1.0 - rng.random(num_items))
    return Instance.from_arrays(supplies, values)
