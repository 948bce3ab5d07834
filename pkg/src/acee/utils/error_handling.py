"""Error types and resilience helpers shared across the package."""

import logging
import time
from datetime import datetime, timezone
from types import TracebackType
from typing import Any, Callable, Dict, List, Optional, Type, TypeVar

from tenacity import (
    RetryError,
    Retrying,
    before_sleep_log,
    retry_if_exception_type,
    stop_after_attempt,
)

logger = logging.getLogger(__name__)

T = TypeVar("T")


class AceeError(Exception):
    """Base error carrying a stable machine-readable code."""

    code = "acee_error"

    def __init__(self, message: str, **details: Any):
        super().__init__(message)
        self.message = message
        self.details: Dict[str, Any] = details


class NumericFailure(AceeError):
    code = "numeric_failure"


class DimensionMismatch(AceeError, ValueError):
    code = "dimension_mismatch"


class DomainError(AceeError, ValueError):
    """An argument lies outside the range an operation accepts."""

    code = "out_of_domain"


class GraphError(AceeError, ValueError):
    code = "graph_error"


class SimulationError(AceeError):
    code = "simulation_error"


class ProxyError(AceeError, ValueError):
    code = "proxy_error"


class RankDeficiencyError(ProxyError):
    code = "rank_deficiency"


class TrainingError(AceeError):
    code = "training_error"


class TrainingDiverged(TrainingError):
    code = "training_diverged"


class SamplerFailure(AceeError):
    code = "sampler_failure"


class NonFiniteDraws(SamplerFailure):
    """Raised inside the sampler retry loop; callers see SamplerFailure."""

    code = "non_finite_draws"


class SchemaError(AceeError, ValueError):
    code = "schema_error"


class ConfigError(AceeError, ValueError):
    code = "config_error"


class EstimationError(AceeError, ValueError):
    code = "estimation_error"


def error_record(exc: BaseException) -> Dict[str, Any]:
    """Machine-readable description of an exception."""
    if isinstance(exc, AceeError):
        return {
            "code": exc.code,
            "type": type(exc).__name__,
            "message": exc.message,
            "details": _jsonable(exc.details),
        }
    return {"code": "internal_error", "type": type(exc).__name__, "message": str(exc), "details": {}}


def _jsonable(value: Any) -> Any:
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, (str, int, float, bool)) or value is None:
        return value
    return str(value)


class ErrorContext:
    """Context manager that times an operation and logs its outcome."""

    def __init__(self, operation_name: str, level: int = logging.DEBUG):
        self.operation_name = operation_name
        self.level = level
        self.start_time: Optional[float] = None
        self.duration: float = 0.0
        self.errors: List[BaseException] = []

    def __enter__(self) -> "ErrorContext":
        self.start_time = time.perf_counter()
        logger.log(self.level, "Starting operation: %s", self.operation_name)
        return self

    def __exit__(
        self,
        exc_type: Optional[Type[BaseException]],
        exc_val: Optional[BaseException],
        exc_tb: Optional[TracebackType],
    ) -> bool:
        self.duration = time.perf_counter() - (self.start_time or time.perf_counter())
        if exc_val is not None:
            self.errors.append(exc_val)
            logger.error(
                "Operation %s failed after %.3fs: %s", self.operation_name, self.duration, exc_val
            )
        else:
            logger.log(
                self.level, "Operation %s completed in %.3fs", self.operation_name, self.duration
            )
        return False


def retry_nonfinite(func: Callable[[], T], attempts: int = 2) -> T:
    """Call ``func`` until it stops raising NonFiniteDraws, at most ``attempts`` times."""
    retrying = Retrying(
        stop=stop_after_attempt(attempts),
        retry=retry_if_exception_type(NonFiniteDraws),
        before_sleep=before_sleep_log(logger, logging.WARNING),
        reraise=False,
    )
    try:
        return retrying(func)
    except RetryError as exc:
        last = exc.last_attempt.exception()
        details = last.details if isinstance(last, AceeError) else {}
        raise SamplerFailure(
            f"non-finite draws persisted after {attempts} attempts", **details
        ) from last


class ErrorAggregator:
    """Collect failures per operation key for later accounting."""

    def __init__(self) -> None:
        self.errors: Dict[str, List[Dict[str, Any]]] = {}

    def record_error(
        self, operation: str, error: BaseException, context: Optional[Dict[str, Any]] = None
    ) -> Dict[str, Any]:
        return self.record(operation, type(error).__name__, str(error), context)

    def record(
        self,
        operation: str,
        error_type: str,
        error_message: str,
        context: Optional[Dict[str, Any]] = None,
    ) -> Dict[str, Any]:
        """Record a failure described by name, e.g. one reported by a worker process."""
        record = {
            "timestamp": datetime.now(timezone.utc).isoformat(),
            "error_type": error_type,
            "error_message": error_message,
            "context": _jsonable(context or {}),
        }
        self.errors.setdefault(operation, []).append(record)
        return record

    def __len__(self) -> int:
        return sum(len(records) for records in self.errors.values())

    def get_error_summary(self, operation: Optional[str] = None) -> Dict[str, Any]:
        if operation:
            return self._analyze_errors(self.errors.get(operation, []))
        return {
            "total_errors": len(self),
            "operations_with_errors": len(self.errors),
            "operations": {op: self._analyze_errors(errs) for op, errs in self.errors.items()},
        }

    def _analyze_errors(self, error_list: List[Dict[str, Any]]) -> Dict[str, Any]:
        if not error_list:
            return {"count": 0}
        error_types: Dict[str, int] = {}
        for error in error_list:
            error_types[error["error_type"]] = error_types.get(error["error_type"], 0) + 1
        return {
            "count": len(error_list),
            "error_types": error_types,
            "most_common": max(error_types.items(), key=lambda x: x[1]),
        }
