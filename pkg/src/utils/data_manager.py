"""
데이터 관리 유틸리티
인스턴스 JSON, 할당 CSV, 보고서 CSV, 설정 파일 입출력
"""
import csv
import json
from pathlib import Path
from typing import Any, Dict, Iterable, Optional, Union

import numpy as np
import pandas as pd

from ..core.exceptions import InstanceFormatError
from ..models.instance import Allocation, Instance, Item
from ..models.report import INTEGER_COLUMNS, ReportRow
from ..models.settings import Settings, DefaultSettings
from .json_validator import JSONValidator, parse_number
from .logger import get_logger

logger = get_logger(__name__)

PathLike = Union[str, Path]

# T ≤ 10^5 아이템 인스턴스를 허용하는 파일 크기 상한
MAX_FILE_BYTES = 200 * 1024 * 1024


class DataManager:
    """JSON/CSV 데이터 관리자"""

    def __init__(self, data_dir: Optional[PathLike] = None):
        """
        초기화

        Args:
            data_dir: 설정 파일 디렉토리 (None 이면 저장소의 data/)
        """
        self.data_dir = Path(data_dir) if data_dir is not None else Path(__file__).parent.parent.parent / "data"
        self.settings_file = self.data_dir / "settings.json"

    def _load_json(self, file_path: Path) -> Dict:
        """JSON 파일 로드 (크기 및 구조 검증 포함)"""
        file_path = Path(file_path)
        try:
            file_size = file_path.stat().st_size
            if file_size > MAX_FILE_BYTES:
                raise InstanceFormatError(f"파일이 너무 큽니다: {file_size} bytes")

            with open(file_path, 'r', encoding='utf-8') as f:
                data = json.load(f)
        except FileNotFoundError:
            raise
        except json.JSONDecodeError as e:
            logger.error(f"JSON 파일 로드 오류 ({file_path}): {e}", exc_info=True)
            raise InstanceFormatError(f"JSON 구문 오류 ({file_path}): {e}") from e

        if not isinstance(data, dict):
            raise InstanceFormatError(f"잘못된 JSON 구조입니다: {file_path}")
        return data

    def _save_json(self, file_path: Path, data: Dict):
        """JSON 파일 저장"""
        file_path = Path(file_path)
        try:
            file_path.parent.mkdir(parents=True, exist_ok=True)
            with open(file_path, 'w', encoding='utf-8') as f:
                json.dump(data, f, ensure_ascii=False, indent=2)
                f.write("\n")
        except OSError as e:
            logger.error(f"JSON 파일 저장 오류 ({file_path}): {e}", exc_info=True)
            raise

    # 인스턴스
    @staticmethod
    def instance_to_document(inst: Instance, number_format: str = "double") -> Dict[str, Any]:
        """
        인스턴스를 JSON 문서로 변환

        Args:
            number_format: "double" (JSON 숫자) 또는 "decimal" (최단 왕복 십진 문자열)
        """
        if number_format == "decimal":
            encode = repr
        elif number_format == "double":
            encode = float
        else:
            raise ValueError(f"알 수 없는 숫자 형식: {number_format}")
        return {
            "num_agents": int(inst.num_agents),
            "items": [
                {"supply": encode(item.supply), "values": [encode(v) for v in item.values]}
                for item in inst.items
            ],
        }

    @staticmethod
    def document_to_instance(data: Dict[str, Any]) -> Instance:
        """
        JSON 문서를 인스턴스로 변환

        Raises:
            InstanceFormatError: 검증 실패
        """
        is_valid, errors = JSONValidator.validate_instance(data)
        if not is_valid:
            raise InstanceFormatError("인스턴스 파일이 올바르지 않습니다: " + "; ".join(errors[:5]), errors)
        items = tuple(
            Item(parse_number(item["supply"]), tuple(parse_number(v) for v in item["values"]))
            for item in data["items"]
        )
        return Instance(int(data["num_agents"]), items)

    def save_instance(self, inst: Instance, path: PathLike, number_format: str = "double") -> Path:
        """인스턴스 파일 저장"""
        path = Path(path)
        self._save_json(path, self.instance_to_document(inst, number_format))
        logger.info(f"인스턴스 저장: {path} (N={inst.num_agents}, T={inst.num_items})")
        return path

    def load_instance(self, path: PathLike) -> Instance:
        """인스턴스 파일 로드"""
        inst = self.document_to_instance(self._load_json(Path(path)))
        logger.info(f"인스턴스 로드: {path} (N={inst.num_agents}, T={inst.num_items})")
        return inst

    # 할당
    def save_allocation(self, alloc: Allocation, path: PathLike) -> Path:
        """할당 CSV 저장 (행: 에이전트, 열: 아이템)"""
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        frame = pd.DataFrame(
            alloc.entries,
            index=pd.Index([f"agent_{i}" for i in range(alloc.num_agents)], name="agent"),
            columns=[f"item_{t}" for t in range(alloc.num_items)],
        )
        frame.to_csv(path, lineterminator="\n")
        return path

    def load_allocation(self, path: PathLike) -> Allocation:
        """할당 CSV 로드"""
        frame = pd.read_csv(path, index_col=0, float_precision="round_trip")
        return Allocation(frame.to_numpy(dtype=np.float64))

    # 보고서
    def save_report(self, rows: Iterable[ReportRow], path: PathLike) -> Path:
        """보고서 CSV 저장 (헤더 포함, 행이 없으면 헤더만)"""
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        frame = pd.DataFrame([row.to_dict() for row in rows], columns=ReportRow.columns())
        frame = frame.astype({column: "Int64" for column in INTEGER_COLUMNS})
        frame.to_csv(path, index=False, quoting=csv.QUOTE_MINIMAL, lineterminator="\n")
        logger.info(f"보고서 저장: {path} ({len(frame)}행)")
        return path

    def load_report(self, path: PathLike) -> pd.DataFrame:
        """보고서 CSV 로드"""
        return pd.read_csv(path, float_precision="round_trip",
                           dtype={column: "Int64" for column in INTEGER_COLUMNS})

    # 설정
    def get_settings(self) -> Settings:
        """설정 반환 (파일이 없으면 기본값, 값 검증은 Config 가 담당)"""
        if not self.settings_file.exists():
            return DefaultSettings.get_default_settings()
        return Settings.from_dict(self._load_json(self.settings_file))

    def save_settings(self, settings: Settings):
        """설정 저장"""
        self._save_json(self.settings_file, settings.to_dict())
