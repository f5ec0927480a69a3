"""Custom exceptions for gpcond."""


class GpcondError(Exception):
    """Base exception for gpcond."""

    def __init__(self, message: str, key: str = None, line: int = None):
        self.message = message
        self.key = key
        self.line = line
        super().__init__(self.message)


class InvalidArgumentError(GpcondError, ValueError):
    """Raised when an argument violates an operation's precondition."""

    pass


class NotPsdError(GpcondError):
    """Raised when a matrix has an eigenvalue below the PSD tolerance."""

    def __init__(self, message: str, min_eigenvalue: float = None, **kw):
        self.min_eigenvalue = min_eigenvalue
        super().__init__(message, **kw)


class NotSpdError(GpcondError):
    """Raised when a Cholesky factorization meets a non-positive pivot."""

    pass


class NumericalFailureError(GpcondError):
    """Raised when an iterative routine fails to converge."""

    pass


class UnsupportedFunctionalError(GpcondError):
    """Raised when a functional cannot be applied to a kernel or mean."""

    pass


class InvalidUsageError(GpcondError):
    """Raised when an operation is called outside its supported setting."""

    pass


class ConfigError(GpcondError):
    """Raised when an experiment config cannot be parsed or validated."""

    def __str__(self) -> str:
        parts = []
        if self.line is not None:
            parts.append(f"line {self.line}")
        if self.key:
            parts.append(f"key '{self.key}'")
        if parts:
            return f"{', '.join(parts)}: {self.message}"
        return self.message
