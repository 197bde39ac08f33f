"""
설정 관리 유틸리티
설정 파일과 환경 변수 관리
"""
import os
import sys
from pathlib import Path
from typing import Optional

from .data_manager import DataManager
from .json_validator import JSONValidator
from .logger import get_logger
from ..models.settings import Settings, DefaultSettings

logger = get_logger(__name__)

THREADS_ENV = "NASH_STREAM_THREADS"
LOG_LEVEL_ENV = "NASH_STREAM_LOG_LEVEL"


class Config:
    """설정 관리 클래스"""

    def __init__(self, data_dir: Optional[Path] = None):
        """초기화"""
        self.data_manager = DataManager(data_dir or self.get_data_directory())
        self._settings: Optional[Settings] = None
        self._load_settings()

    def _load_settings(self):
        """설정 로드 (실패 시 기본값)"""
        try:
            self._settings = self.data_manager.get_settings()
        except Exception as e:
            logger.warning(f"설정 로드 오류, 기본값 사용: {e}")
            self._settings = DefaultSettings.get_default_settings()
        self._apply_environment()

    def _apply_environment(self):
        """환경 변수 덮어쓰기"""
        threads = os.environ.get(THREADS_ENV)
        if threads:
            try:
                self._settings.bench_threads = max(1, int(threads))
            except ValueError:
                logger.warning(f"{THREADS_ENV} 값이 정수가 아닙니다: {threads!r}")
        level = os.environ.get(LOG_LEVEL_ENV)
        if level:
            self._settings.log_level = level.upper()

    def get_settings(self) -> Settings:
        """설정 반환"""
        return self._settings

    # 애플리케이션 경로
    @staticmethod
    def get_app_root() -> Path:
        """저장소 루트 경로 반환"""
        return Path(__file__).parent.parent.parent

    @staticmethod
    def get_data_directory() -> Path:
        """데이터 디렉토리 경로 반환"""
        return Config.get_app_root() / "data"

    def get_log_directory(self) -> Path:
        """로그 디렉토리 반환"""
        return self.get_app_root() / "logs"

    # 애플리케이션 정보
    @staticmethod
    def get_app_name() -> str:
        """애플리케이션 이름 반환"""
        return "NashStream"

    @staticmethod
    def get_app_version() -> str:
        """애플리케이션 버전 반환"""
        return "1.0.0"

    @staticmethod
    def get_platform() -> str:
        """플랫폼 정보 반환"""
        return sys.platform

    # 설정 조회
    def is_logging_enabled(self) -> bool:
        return self._settings.enable_logging

    def is_file_logging_enabled(self) -> bool:
        return self._settings.enable_logging and self._settings.log_to_file

    def get_log_level(self) -> str:
        return self._settings.log_level

    def get_bench_threads(self) -> int:
        return self._settings.bench_threads

    # 검증 메서드
    def validate_settings(self) -> bool:
        """설정 유효성 검사"""
        is_valid, errors = JSONValidator.validate_settings(self._settings.to_dict())
        for error in errors:
            logger.warning(f"설정 오류: {error}")
        return is_valid

    def fix_settings(self):
        """잘못된 값들을 기본값으로 변경"""
        defaults = DefaultSettings.get_default_settings().to_dict()
        current = self._settings.to_dict()
        for key, value in current.items():
            _, errors = JSONValidator.validate_settings({key: value})
            if errors:
                logger.warning(f"설정 {key}={value!r} 를 기본값 {defaults[key]!r} 로 수정합니다")
                setattr(self._settings, key, defaults[key])


# 전역 설정 인스턴스
config = Config()
