"""
성능 측정 유틸리티
솔버와 온라인 알고리즘 호출 시간 집계
"""
import threading
import time
from contextlib import contextmanager
from functools import wraps
from typing import Any, Callable, Dict, Iterator, Optional

from .logger import get_logger

logger = get_logger(__name__)


class PerformanceMonitor:
    """이름별 호출 시간 메트릭 (스레드 안전)"""

    def __init__(self):
        """초기화"""
        self.performance_metrics: Dict[str, Dict[str, Any]] = {}
        self._lock = threading.Lock()
        self.enabled = True

    def _record(self, name: str, elapsed: float, success: bool) -> None:
        with self._lock:
            metrics = self.performance_metrics.setdefault(name, {
                "calls": 0,
                "total_time": 0.0,
                "avg_time": 0.0,
                "min_time": float('inf'),
                "max_time": 0.0,
                "success_count": 0,
                "error_count": 0,
            })
            metrics["calls"] += 1
            metrics["total_time"] += elapsed
            metrics["avg_time"] = metrics["total_time"] / metrics["calls"]
            metrics["min_time"] = min(metrics["min_time"], elapsed)
            metrics["max_time"] = max(metrics["max_time"], elapsed)
            if success:
                metrics["success_count"] += 1
            else:
                metrics["error_count"] += 1

    def measure_performance(self, func_name: Optional[str] = None):
        """
        함수 성능 측정 데코레이터

        Args:
            func_name: 메트릭 이름 (None이면 함수 이름)
        """
        def decorator(func: Callable) -> Callable:
            name = func_name or func.__name__

            @wraps(func)
            def wrapper(*args, **kwargs):
                if not self.enabled:
                    return func(*args, **kwargs)
                start_time = time.perf_counter()
                success = False
                try:
                    result = func(*args, **kwargs)
                    success = True
                    return result
                finally:
                    self._record(name, time.perf_counter() - start_time, success)

            return wrapper
        return decorator

    @contextmanager
    def timer(self, name: str) -> Iterator[Dict[str, float]]:
        """
        코드 블록 시간 측정

        with 블록이 끝나면 반환된 딕셔너리의 "elapsed" 에 경과 시간(초)이 기록된다.
        """
        box = {"elapsed": 0.0}
        start_time = time.perf_counter()
        success = False
        try:
            yield box
            success = True
        finally:
            box["elapsed"] = time.perf_counter() - start_time
            if self.enabled:
                self._record(name, box["elapsed"], success)

    def get_metrics(self, name: Optional[str] = None) -> Dict[str, Any]:
        """메트릭 사본 반환"""
        with self._lock:
            if name is not None:
                return dict(self.performance_metrics.get(name, {}))
            return {key: dict(value) for key, value in self.performance_metrics.items()}

    def reset(self) -> None:
        with self._lock:
            self.performance_metrics.clear()

    def log_report(self) -> None:
        """메트릭 요약을 로그로 출력"""
        for name, metrics in sorted(self.get_metrics().items()):
            logger.info(
                "성능 %s: 호출 %d회, 평균 %.4fs, 최대 %.4fs, 오류 %d회",
                name, metrics["calls"], metrics["avg_time"], metrics["max_time"], metrics["error_count"],
            )


# 전역 성능 모니터
performance_monitor = PerformanceMonitor()
