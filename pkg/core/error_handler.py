"""
错误码与异常边界
领域异常、标准异常归类、命令级装饰器
"""

import traceback
from collections import Counter, deque
from datetime import datetime, timezone
from functools import wraps
from typing import Any, Deque, Dict, List, Optional, Tuple, Type

import numpy as np
import structlog

from schemas.cli_models import ErrorCodes, ErrorReport


def _utcnow() -> datetime:
    return datetime.now(timezone.utc)


# ---------------------------------------------------------------------------
# 领域异常
# ---------------------------------------------------------------------------

class SwcrtBaseException(Exception):
    """所有领域异常的基类, 携带错误码与细节"""

    def __init__(
        self,
        message: str,
        error_code: str = ErrorCodes.INTERNAL,
        details: Optional[Dict[str, Any]] = None,
        original_exception: Optional[Exception] = None
    ):
        super().__init__(message)
        self.message, self.error_code = message, error_code
        self.details = dict(details) if details else {}
        self.original_exception = original_exception
        self.timestamp = _utcnow()

    @property
    def exit_status(self) -> int:
        return ErrorCodes.exit_status(self.error_code)

    def to_error_report(self) -> ErrorReport:
        """转换为单行错误报告"""
        details = dict(self.details)
        if self.original_exception is not None:
            details["original_error"] = str(self.original_exception)
        return ErrorReport(error=self.error_code, message=self.message, details=details)


class ConfigurationError(SwcrtBaseException):
    """配置或输入验证错误"""

    def __init__(self, field: str, value: Any, message: str, **kwargs: Any):
        detail = {"field": field, "value": str(value)}
        super().__init__(f"参数 '{field}' 无效: {message}", ErrorCodes.CONFIG, detail, **kwargs)


class RankDeficiencyError(SwcrtBaseException):
    """设计矩阵秩亏或信息矩阵奇异"""

    def __init__(self, column: Optional[str], message: str, **kwargs: Any):
        super().__init__(message, ErrorCodes.RANK, {"column": column}, **kwargs)


class ConvergenceError(SwcrtBaseException):
    """优化或搜索未收敛"""

    def __init__(self, message: str, bracket: Optional[List[float]] = None, **kwargs: Any):
        super().__init__(message, ErrorCodes.CONVERGENCE, {"bracket": bracket}, **kwargs)


class DataIOError(SwcrtBaseException):
    """文件读写或格式错误"""

    def __init__(self, path: str, message: str, **kwargs: Any):
        super().__init__(f"{message}: {path}", ErrorCodes.IO, {"path": str(path)}, **kwargs)


# ---------------------------------------------------------------------------
# 标准异常 → 错误码
# ---------------------------------------------------------------------------

# 按 MRO 顺序匹配, 子类先于父类命中
_STANDARD_CODES: Tuple[Tuple[Type[BaseException], str], ...] = (
    (np.linalg.LinAlgError, ErrorCodes.RANK),
    (ValueError, ErrorCodes.CONFIG),
    (TypeError, ErrorCodes.CONFIG),
    (KeyError, ErrorCodes.CONFIG),
    (OSError, ErrorCodes.IO),
)


def classify_exception(exception: BaseException) -> str:
    """标准异常的错误码, 无法归类时为 E_INTERNAL"""
    codes = dict(_STANDARD_CODES)
    for klass in type(exception).__mro__:
        if klass in codes:
            return codes[klass]
    return ErrorCodes.INTERNAL


# ---------------------------------------------------------------------------
# 处理器
# ---------------------------------------------------------------------------

_RECENT_LIMIT = 50


class ErrorHandler:
    """记录、计数并转换命令执行中的异常"""

    def __init__(self, logger: Optional[Any] = None):
        self.logger = logger or structlog.get_logger(__name__)
        self._counts: Counter = Counter()
        self._recent: Deque[Dict[str, str]] = deque(maxlen=_RECENT_LIMIT)

    def handle_exception(
        self,
        exception: Exception,
        context: Optional[Dict[str, Any]] = None
    ) -> ErrorReport:
        ctx = context or {}
        name = type(exception).__name__
        self._counts[name] += 1
        self._recent.append({"type": name, "message": str(exception), "timestamp": _utcnow().isoformat()})

        if isinstance(exception, SwcrtBaseException):
            self.logger.info("领域异常", error_code=exception.error_code,
                             message=exception.message, details=exception.details, context=ctx)
            return exception.to_error_report()

        code = classify_exception(exception)
        if code == ErrorCodes.INTERNAL:
            self.logger.error("未处理异常", exception_type=name, message=str(exception),
                              context=ctx, traceback=traceback.format_exc())
        else:
            # 可归类的标准异常不打印堆栈
            self.logger.info("标准异常", exception_type=name, message=str(exception), context=ctx)
        return ErrorReport(
            error=code,
            message=str(exception),
            details={"context": ctx, "exception_type": name},
        )

    def to_domain_exception(self, exception: Exception) -> SwcrtBaseException:
        """把标准异常包装为领域异常 (保留原异常)"""
        if isinstance(exception, SwcrtBaseException):
            return exception
        name = type(exception).__name__
        return SwcrtBaseException(
            str(exception) or name,
            error_code=classify_exception(exception),
            details={"exception_type": name},
            original_exception=exception,
        )

    def get_error_stats(self) -> Dict[str, Any]:
        return {
            "total_errors": sum(self._counts.values()),
            "error_types": dict(self._counts),
            "recent_errors": list(self._recent),
        }

    def clear_error_stats(self) -> None:
        self._counts.clear()
        self._recent.clear()


def handle_errors(
    error_handler: Optional[ErrorHandler] = None,
    reraise: bool = False,
    default_return: Any = None
):
    """命令级异常边界

    reraise=True 时标准异常被包装为领域异常再抛出; 否则返回
    ``default_return`` 或 ``{"error": <报告>}``。
    """

    def decorator(func):
        @wraps(func)
        def wrapper(*args, **kwargs):
            try:
                return func(*args, **kwargs)
            except Exception as exc:
                handler = error_handler or _default_handler
                report = handler.handle_exception(exc, {
                    "function": func.__name__,
                    "kwargs": {key: str(value)[:100] for key, value in kwargs.items()},
                })
                if reraise:
                    if isinstance(exc, SwcrtBaseException):
                        raise
                    raise handler.to_domain_exception(exc) from exc
                return default_return if default_return is not None else {"error": report.model_dump()}

        return wrapper

    return decorator


_default_handler = ErrorHandler()


def get_error_handler() -> ErrorHandler:
    return _default_handler
