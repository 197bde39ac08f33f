"""
JSON 스키마 검증
인스턴스 파일과 설정 파일의 구조 검증
"""
import math
from typing import Any, Dict, List, Optional, Tuple

from .logger import get_logger
from ..models.settings import COPIES_ORDERS, LOG_LEVELS, NUMBER_FORMATS, STEP_RULES

logger = get_logger(__name__)


def parse_number(value: Any) -> Optional[float]:
    """
    JSON 숫자 또는 십진 문자열을 float 로 변환

    Returns:
        변환 값 (변환할 수 없으면 None)
    """
    if isinstance(value, bool):
        return None
    if isinstance(value, (int, float)):
        return float(value)
    if isinstance(value, str):
        try:
            return float(value.strip())
        except ValueError:
            return None
    return None


class JSONValidator:
    """JSON 데이터 검증 클래스"""

    # 인스턴스 파일 스키마
    INSTANCE_SCHEMA = {
        "type": "object",
        "required": ["num_agents", "items"],
        "properties": {
            "num_agents": {"type": "integer", "minimum": 1},
            "items": {"type": "array", "minItems": 1},
        }
    }

    # 아이템 스키마 (숫자는 double 또는 십진 문자열)
    ITEM_SCHEMA = {
        "type": "object",
        "required": ["supply", "values"],
        "properties": {
            "supply": {"type": ["number", "string"], "exclusiveMinimum": 0},
            "values": {"type": "array", "items": {"type": ["number", "string"], "minimum": 0}},
        }
    }

    # 설정 파일 스키마
    SETTINGS_SCHEMA = {
        "type": "object",
        "properties": {
            "feasibility_tolerance": {"type": "number", "exclusiveMinimum": 0},
            "invariant_tolerance": {"type": "number", "exclusiveMinimum": 0},
            "gain_tolerance": {"type": "number", "exclusiveMinimum": 0},
            "eg_tolerance": {"type": "number", "exclusiveMinimum": 0},
            "eg_max_iterations": {"type": "integer", "minimum": 1},
            "eg_step_rule": {"type": "string", "enum": list(STEP_RULES)},
            "support_eps": {"type": "number", "exclusiveMinimum": 0},
            "strict_solver": {"type": "boolean"},
            "level_cap": {"type": "integer", "minimum": 1},
            "enumerate_k_max": {"type": "integer", "minimum": 0},
            "number_format": {"type": "string", "enum": list(NUMBER_FORMATS)},
            "copies_order": {"type": "string", "enum": list(COPIES_ORDERS)},
            "bench_threads": {"type": "integer", "minimum": 1},
            "enable_logging": {"type": "boolean"},
            "log_to_file": {"type": "boolean"},
            "log_level": {"type": "string", "enum": list(LOG_LEVELS)},
        }
    }

    @classmethod
    def validate_instance(cls, data: Dict[str, Any]) -> Tuple[bool, List[str]]:
        """
        인스턴스 문서 검증

        Args:
            data: 검증할 데이터

        Returns:
            (유효성 여부, 에러 메시지 리스트)
        """
        errors = []

        if not isinstance(data, dict):
            return False, ["인스턴스 문서는 객체여야 합니다"]

        for field in cls.INSTANCE_SCHEMA["required"]:
            if field not in data:
                errors.append(f"필수 필드 누락: {field}")
        if errors:
            return False, errors

        num_agents = data["num_agents"]
        if isinstance(num_agents, bool) or not isinstance(num_agents, int) or num_agents < 1:
            errors.append("num_agents 는 1 이상의 정수여야 합니다")
            num_agents = None

        items = data["items"]
        if not isinstance(items, list):
            errors.append("items 는 배열이어야 합니다")
            return False, errors
        if len(items) == 0:
            errors.append("items 에는 최소 한 개의 아이템이 필요합니다")

        for t, item in enumerate(items):
            item_valid, item_errors = cls.validate_item(item, num_agents)
            if not item_valid:
                errors.extend([f"아이템 #{t}: {err}" for err in item_errors])

        return len(errors) == 0, errors

    @classmethod
    def validate_item(cls, item: Any, num_agents: Optional[int]) -> Tuple[bool, List[str]]:
        """아이템 하나 검증"""
        errors = []
        if not isinstance(item, dict):
            return False, ["아이템은 객체여야 합니다"]

        for field in cls.ITEM_SCHEMA["required"]:
            if field not in item:
                errors.append(f"필수 필드 누락: {field}")
        if errors:
            return False, errors

        supply = parse_number(item["supply"])
        if supply is None or not math.isfinite(supply) or supply <= 0:
            errors.append(f"supply 는 양의 유한값이어야 합니다: {item['supply']!r}")

        values = item["values"]
        if not isinstance(values, list):
            errors.append("values 는 배열이어야 합니다")
            return False, errors
        if num_agents is not None and len(values) != num_agents:
            errors.append(f"values 길이({len(values)})가 num_agents({num_agents})와 다릅니다")
        for i, raw in enumerate(values):
            value = parse_number(raw)
            if value is None or not math.isfinite(value) or value < 0:
                errors.append(f"values[{i}] 는 0 이상의 유한값이어야 합니다: {raw!r}")

        return len(errors) == 0, errors

    @classmethod
    def validate_settings(cls, data: Dict[str, Any]) -> Tuple[bool, List[str]]:
        """
        설정 파일 검증 (없는 키는 기본값 사용)

        Returns:
            (유효성 여부, 에러 메시지 리스트)
        """
        errors = []
        if not isinstance(data, dict):
            return False, ["설정 문서는 객체여야 합니다"]

        for key, rule in cls.SETTINGS_SCHEMA["properties"].items():
            if key not in data:
                continue
            value = data[key]
            kind = rule["type"]
            if kind == "boolean":
                if not isinstance(value, bool):
                    errors.append(f"{key} 는 불리언이어야 합니다")
                continue
            if kind == "string":
                if value not in rule.get("enum", [value]):
                    errors.append(f"{key} 의 값이 올바르지 않습니다: {value!r}")
                continue
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                errors.append(f"{key} 는 숫자여야 합니다")
                continue
            if kind == "integer" and not isinstance(value, int):
                errors.append(f"{key} 는 정수여야 합니다")
            if "minimum" in rule and value < rule["minimum"]:
                errors.append(f"{key} 는 {rule['minimum']} 이상이어야 합니다")
            if "exclusiveMinimum" in rule and value <= rule["exclusiveMinimum"]:
                errors.append(f"{key} 는 {rule['exclusiveMinimum']} 보다 커야 합니다")

        return len(errors) == 0, errors
