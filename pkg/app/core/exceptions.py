from typing import Any

from pydantic import ValidationError as PydanticValidationError

from app.core.logging import logger


class AppException(Exception):
    """Base application exception"""
    def __init__(
        self,
        message: str,
        exit_code: int = 1,
        error_code: str = "INTERNAL_ERROR"
    ):
        self.message = message
        self.exit_code = exit_code
        self.error_code = error_code
        super().__init__(message)


class ValidationError(AppException):
    def __init__(self, message: str):
        super().__init__(
            message=message,
            exit_code=2,
            error_code="VALIDATION_ERROR"
        )


class IndexRangeError(ValidationError):
    def __init__(self, name: str, value: Any, upper: int):
        super().__init__(f"{name}={value} outside [0, {upper})")


class EstimationError(AppException):
    def __init__(self, message: str = "No signal power at the estimator"):
        super().__init__(
            message=message,
            exit_code=1,
            error_code="ESTIMATION_ERROR"
        )


class ModelIntegrityError(AppException):
    def __init__(self, message: str):
        super().__init__(
            message=message,
            exit_code=1,
            error_code="MODEL_INTEGRITY_ERROR"
        )


class OutputError(AppException):
    def __init__(self, path: str, message: str):
        super().__init__(
            message=f"Cannot write {path}: {message}",
            exit_code=1,
            error_code="OUTPUT_ERROR"
        )


def from_pydantic(exc: PydanticValidationError) -> ValidationError:
    """Collapse a pydantic error report into one application ValidationError."""
    details = "; ".join(
        f"{'.'.join(str(loc) for loc in err['loc']) or 'value'}: {err['msg']}"
        for err in exc.errors()
    )
    return ValidationError(details)


def handle_exception(exc: Exception) -> int:
    """Log a failure and return the process exit code for it."""
    if isinstance(exc, AppException):
        logger.error(
            f"{exc.error_code}: {exc.message}",
            extra={"error_code": exc.error_code}
        )
        return exc.exit_code

    if isinstance(exc, PydanticValidationError):
        return handle_exception(from_pydantic(exc))

    if isinstance(exc, OSError):
        logger.error(f"I/O failure: {exc}", extra={"error_code": "OUTPUT_ERROR"})
        return 1

    logger.error(f"Unhandled exception: {exc}", exc_info=True)
    return 1
