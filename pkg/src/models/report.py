"""
보고서 행 데이터 모델
벤치마크 CSV 한 행
"""
from dataclasses import dataclass, asdict, fields
from typing import Dict, List, Optional

# 결정론 보장에서 제외되는 열
NONDETERMINISTIC_COLUMNS = ("wall_time_s",)
# 빈 값이 섞여도 정수로 기록되는 열
INTEGER_COLUMNS = ("seed", "k")


@dataclass
class ReportRow:
    """Report CSV 행"""

    instance_id: str
    generator: str
    generator_params: str
    algorithm: str
    row_kind: str = "run"  # run | k | mixture | expectation_lower_bound
    seed: Optional[int] = None
    k: Optional[int] = None
    algorithm_nw: Optional[float] = None
    offline_nw: Optional[float] = None
    fw_gap: Optional[float] = None
    competitive_ratio: Optional[float] = None
    balance_ratio: Optional[float] = None
    impartiality_ratio: Optional[float] = None
    bound_kind: Optional[str] = None  # upper | lower
    bound_value: Optional[float] = None
    bound_satisfied: Optional[bool] = None
    min_gain_residual: Optional[float] = None
    status: str = "ok"
    wall_time_s: Optional[float] = None

    def to_dict(self) -> Dict:
        """딕셔너리로 변환"""
        return asdict(self)

    @staticmethod
    def columns() -> List[str]:
        """CSV 열 순서"""
        return [f.name for f in fields(ReportRow)]
