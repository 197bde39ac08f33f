"""
로깅 시스템
라이브러리와 CLI 전역 로깅 설정 및 관리

각 레코드에는 현재 실행 문맥(인스턴스, 알고리즘, 시드)이 [context] 필드로 붙는다.
벤치마크 작업 스레드마다 문맥이 따로 유지된다.
"""
import logging
import logging.handlers
import sys
from contextlib import contextmanager
from contextvars import ContextVar
from datetime import datetime
from pathlib import Path
from typing import Dict, Iterator, Optional

_run_context: ContextVar[str] = ContextVar("nash_stream_run_context", default="-")


class RunContextFilter(logging.Filter):
    """레코드에 현재 실행 문맥 문자열 추가"""

    def filter(self, record: logging.LogRecord) -> bool:
        record.context = _run_context.get()
        return True


@contextmanager
def log_context(**fields) -> Iterator[str]:
    """
    블록 안의 로그에 실행 문맥 부여

    Example:
        with log_context(instance="hard_table2-000", algorithm="myopic"):
            logger.info("실행")  # ... [instance=hard_table2-000 algorithm=myopic] 실행
    """
    parent = _run_context.get()
    current = " ".join(f"{key}={value}" for key, value in fields.items() if value is not None)
    if parent != "-" and current:
        current = f"{parent} {current}"
    token = _run_context.set(current or parent)
    try:
        yield _run_context.get()
    finally:
        _run_context.reset(token)


class LoggerSetup:
    """로거 설정 및 관리 클래스"""

    _initialized = False
    _loggers: Dict[str, logging.Logger] = {}

    CONSOLE_FORMAT = "%(levelname)s [%(context)s] %(message)s"
    FILE_FORMAT = "%(asctime)s %(levelname)s %(name)s [%(context)s] %(message)s"

    @classmethod
    def setup_logging(cls, log_dir: Optional[Path] = None, log_level: str = "INFO",
                      enable_console: bool = True, enable_file: bool = False) -> None:
        """
        로깅 시스템 초기화

        콘솔 출력은 stderr 로 보낸다. stdout 은 CLI 결과(JSON, 경로)용이다.

        Args:
            log_dir: 로그 파일 디렉토리
            log_level: 로그 레벨 (DEBUG, INFO, WARNING, ERROR, CRITICAL)
            enable_console: 콘솔 출력 활성화
            enable_file: 파일 출력 활성화 (일자별 회전 파일 하나)
        """
        if cls._initialized:
            return

        numeric_level = getattr(logging, log_level.upper(), logging.INFO)
        root_logger = logging.getLogger()
        root_logger.setLevel(numeric_level)
        root_logger.handlers.clear()

        if enable_console:
            console_handler = logging.StreamHandler(sys.stderr)
            console_handler.setFormatter(logging.Formatter(cls.CONSOLE_FORMAT))
            console_handler.addFilter(RunContextFilter())
            root_logger.addHandler(console_handler)

        if enable_file and log_dir:
            try:
                log_dir = Path(log_dir)
                log_dir.mkdir(parents=True, exist_ok=True)
                log_file = log_dir / f"nash_stream_{datetime.now():%Y%m%d}.log"
                file_handler = logging.handlers.RotatingFileHandler(
                    log_file,
                    maxBytes=10 * 1024 * 1024,  # 10MB
                    backupCount=5,
                    encoding='utf-8'
                )
                file_handler.setFormatter(logging.Formatter(cls.FILE_FORMAT, datefmt='%Y-%m-%d %H:%M:%S'))
                file_handler.addFilter(RunContextFilter())
                root_logger.addHandler(file_handler)
            except OSError as e:
                print(f"로그 파일 핸들러 설정 오류: {e}", file=sys.stderr)

        cls._initialized = True
        root_logger.debug("NashStream 로깅 초기화 (레벨 %s, 콘솔 %s, 파일 %s)",
                          log_level, enable_console, enable_file)

    @classmethod
    def get_logger(cls, name: str) -> logging.Logger:
        """모듈별 로거 반환 (보통 __name__)"""
        if name not in cls._loggers:
            cls._loggers[name] = logging.getLogger(name)
        return cls._loggers[name]

    @classmethod
    def shutdown(cls):
        """루트 핸들러를 닫고 제거 (다음 setup_logging 이 새로 구성)"""
        root_logger = logging.getLogger()
        for handler in root_logger.handlers[:]:
            handler.close()
            root_logger.removeHandler(handler)
        cls._initialized = False


def get_logger(name: str) -> logging.Logger:
    """편의 함수: 로거 반환"""
    return LoggerSetup.get_logger(name)
