"""
Base exception classes for qephonon

Every error falls in one of four categories. The category fixes the process
exit code of the command line; subclasses in the per-module files add
physics-specific context on top of one (or a domain base plus one) of them.
"""

import math
from typing import Optional, Dict, Any

EXIT_FAILURE = 1
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


class QEPhononError(Exception):
    """
    Base exception for all qephonon errors

    ``context`` collects the quantities needed to reproduce the failure
    (grid sizes, tolerances, offending values) and is stored verbatim in the
    run summary.
    """

    default_code = "QEPHONON_ERROR"
    exit_code = EXIT_FAILURE

    def __init__(
        self,
        message: str,
        error_code: Optional[str] = None,
        context: Optional[Dict[str, Any]] = None,
        cause: Optional[Exception] = None
    ):
        super().__init__(message)
        self.message = message
        self.error_code = error_code or self.default_code
        self.context: Dict[str, Any] = dict(context or {})
        self.cause = cause
        if cause is not None:
            self.__cause__ = cause

    def add_context(self, key: str, value: Any) -> "QEPhononError":
        self.context[key] = value
        return self

    def get_context(self, key: str, default: Any = None) -> Any:
        return self.context.get(key, default)

    def to_dict(self) -> Dict[str, Any]:
        """Summary-file form; context values are reduced to JSON types"""
        return {
            "error_type": type(self).__name__,
            "error_code": self.error_code,
            "exit_code": self.exit_code,
            "message": self.message,
            "context": {k: _jsonable(v) for k, v in self.context.items()},
            "cause": repr(self.cause) if self.cause is not None else None,
        }

    def __str__(self) -> str:
        text = self.message
        if self.context:
            text += " [" + ", ".join(f"{k}={_short(v)}" for k, v in self.context.items()) + "]"
        if self.cause is not None:
            text += f" (caused by {type(self.cause).__name__}: {self.cause})"
        return text

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.message!r}, error_code={self.error_code!r})"


def _short(value: Any) -> str:
    if isinstance(value, float) and math.isfinite(value):
        return f"{value:.6g}"
    return str(value)


def _jsonable(value: Any) -> Any:
    if isinstance(value, float) and not math.isfinite(value):
        return str(value)
    if isinstance(value, (str, int, float, bool)) or value is None:
        return value
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    item = getattr(value, "item", None)
    if callable(item) and getattr(value, "ndim", None) == 0:
        return _jsonable(item())
    tolist = getattr(value, "tolist", None)
    if callable(tolist):
        return _jsonable(tolist())
    return str(value)


class QEPhononConfigurationError(QEPhononError):
    """Missing or inconsistent settings, presets, materials or run files"""

    default_code = "CONFIG_ERROR"
    exit_code = EXIT_CONFIG

    def __init__(
        self,
        message: str,
        setting_name: Optional[str] = None,
        setting_value: Optional[Any] = None,
        **kwargs
    ):
        super().__init__(message, **kwargs)
        if setting_name:
            self.add_context("setting_name", setting_name)
        if setting_value is not None:
            self.add_context("setting_value", setting_value)


class QEPhononValidationError(QEPhononError):
    """
    A physical quantity or user input violates its invariant

    ``validation_rule`` is the violated condition written as an expression,
    e.g. ``"W > 0"``.
    """

    default_code = "VALIDATION_ERROR"
    exit_code = EXIT_CONFIG

    def __init__(
        self,
        message: str,
        field_name: Optional[str] = None,
        field_value: Optional[Any] = None,
        validation_rule: Optional[str] = None,
        **kwargs
    ):
        super().__init__(message, **kwargs)
        if field_name:
            self.add_context("field_name", field_name)
        if field_value is not None:
            self.add_context("field_value", field_value)
        if validation_rule:
            self.add_context("validation_rule", validation_rule)


class QEPhononNumericalError(QEPhononError):
    """Quadrature, transform, optimizer or propagation missed its accuracy target"""

    default_code = "NUMERICAL_ERROR"
    exit_code = EXIT_NUMERICAL

    def __init__(
        self,
        message: str,
        diagnostics: Optional[Dict[str, Any]] = None,
        **kwargs
    ):
        super().__init__(message, **kwargs)
        self.context.update(diagnostics or {})


class QEPhononResourceError(QEPhononError):
    """A computation would exceed memory or another system limit"""

    default_code = "RESOURCE_ERROR"
    exit_code = EXIT_NUMERICAL

    def __init__(
        self,
        message: str,
        resource_type: Optional[str] = None,
        resource_name: Optional[str] = None,
        **kwargs
    ):
        super().__init__(message, **kwargs)
        if resource_type:
            self.add_context("resource_type", resource_type)
        if resource_name:
            self.add_context("resource_name", resource_name)
