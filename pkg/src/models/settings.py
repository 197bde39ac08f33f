"""
설정 데이터 모델
허용 오차, 솔버 한도, 로깅 옵션을 담는 설정 클래스
"""
from typing import Dict
from dataclasses import dataclass, asdict, fields


STEP_RULES = ("open_loop", "line_search", "pairwise")
NUMBER_FORMATS = ("double", "decimal")
COPIES_ORDERS = ("interleaved", "sequential")
LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL")


@dataclass
class Settings:
    """설정 데이터 모델"""

    # 허용 오차
    feasibility_tolerance: float = 1e-9
    invariant_tolerance: float = 1e-6
    gain_tolerance: float = 1e-9

    # 오프라인 솔버
    eg_tolerance: float = 1e-7
    eg_max_iterations: int = 1_000_000
    eg_step_rule: str = "open_loop"
    support_eps: float = 1e-8  # s_t 대비 상대값
    strict_solver: bool = False

    # 온라인 알고리즘
    level_cap: int = 64
    enumerate_k_max: int = 6

    # 입출력
    number_format: str = "double"
    copies_order: str = "interleaved"
    bench_threads: int = 1

    # 로깅
    enable_logging: bool = True
    log_to_file: bool = False
    log_level: str = "INFO"

    def to_dict(self) -> Dict:
        """딕셔너리로 변환"""
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Dict) -> 'Settings':
        """딕셔너리에서 설정 생성 (알 수 없는 키는 무시)"""
        known = {f.name for f in fields(cls)}
        return cls(**{key: value for key, value in data.items() if key in known})


class DefaultSettings:
    """기본 설정값"""

    @staticmethod
    def get_default_settings() -> Settings:
        """기본 설정 반환"""
        return Settings()

    @staticmethod
    def get_fast_settings() -> Settings:
        """빠른 확인용 설정 (느슨한 솔버 허용 오차)"""
        return Settings(eg_tolerance=1e-5, eg_max_iterations=20_000, enumerate_k_max=3)

    @staticmethod
    def get_acceptance_settings() -> Settings:
        """수용 검사용 설정 (정확한 선 탐색 기반 쌍 이동으로 1e-7 간격까지 수렴)"""
        return Settings(eg_step_rule="pairwise", strict_solver=True)
