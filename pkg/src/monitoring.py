"""Wall time and memory monitoring for sweeps and verification runs"""
import gc
import logging
import os
import time
from functools import wraps
from typing import Any, Callable, Dict, Optional

logger = logging.getLogger(__name__)

try:
    import psutil
except ImportError:  # pragma: no cover - exercised only without psutil
    psutil = None


class MemoryMonitor:
    """Track resident memory of the current process"""

    def __init__(self, threshold_percent: float = 85.0) -> None:
        """
        Initialize memory monitor

        Args:
            threshold_percent: Memory usage threshold percentage
        """
        self.threshold_percent = threshold_percent
        self.process = psutil.Process(os.getpid()) if psutil is not None else None
        self.start_memory = self.get_memory_info()

    def get_memory_info(self) -> Dict[str, float]:
        """Get current memory usage information"""
        if self.process is None:
            return {"rss_mb": 0.0, "percent": 0.0}
        memory_info = self.process.memory_info()
        return {
            "rss_mb": memory_info.rss / 1024 / 1024,
            "percent": float(self.process.memory_percent()),
        }

    def check_memory_usage(self) -> bool:
        """
        Check if memory usage is within the threshold

        Returns:
            True if memory usage is safe, False if above the threshold
        """
        memory_info = self.get_memory_info()
        if memory_info["percent"] > self.threshold_percent:
            logger.warning(
                f"High memory usage: {memory_info['percent']:.1f}% "
                f"(RSS: {memory_info['rss_mb']:.1f} MB)"
            )
            return False
        return True

    def rss_delta_mb(self) -> float:
        return self.get_memory_info()["rss_mb"] - self.start_memory["rss_mb"]


class ResourceGuard:
    """Context manager that times an operation and watches its memory"""

    def __init__(
        self,
        operation_name: str,
        memory_threshold: float = 85.0,
        cleanup_on_exit: bool = False
    ) -> None:
        """
        Initialize resource guard

        Args:
            operation_name: Name of the operation for logging
            memory_threshold: Memory usage threshold percentage
            cleanup_on_exit: Whether to force garbage collection on exit
        """
        self.operation_name = operation_name
        self.cleanup_on_exit = cleanup_on_exit
        self.monitor = MemoryMonitor(memory_threshold)
        self.start_time: Optional[float] = None
        self.elapsed: float = 0.0

    def __enter__(self) -> "ResourceGuard":
        self.start_time = time.perf_counter()
        logger.debug(f"Starting {self.operation_name}")
        if not self.monitor.check_memory_usage():
            gc.collect()
        return self

    def __exit__(self, exc_type: Any, exc_val: Any, exc_tb: Any) -> None:
        self.elapsed = time.perf_counter() - (self.start_time or 0.0)
        logger.info(
            "Completed %s in %s s (RSS delta %s MB)",
            self.operation_name, round(self.elapsed, 6), round(self.monitor.rss_delta_mb(), 3)
        )
        if self.cleanup_on_exit:
            gc.collect()


def monitor_memory(threshold_percent: float = 85.0) -> Callable:
    """
    Decorator logging memory use around long-running sweeps

    Args:
        threshold_percent: Memory usage threshold percentage

    Returns:
        Decorated function with memory monitoring
    """
    def decorator(func: Callable) -> Callable:
        @wraps(func)
        def wrapper(*args: Any, **kwargs: Any) -> Any:
            with ResourceGuard(func.__name__, memory_threshold=threshold_percent):
                return func(*args, **kwargs)
        return wrapper
    return decorator
