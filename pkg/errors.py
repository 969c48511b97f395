"""Exception hierarchy shared by every module."""

from typing import Any


class SBMError(Exception):
    """Base class for all library errors."""


class DomainError(SBMError, ValueError):
    """Argument outside the mathematical domain (λ ≤ 0, t ≤ 0, unknown key, bad grid)."""


class PreconditionError(SBMError, ValueError):
    """Operation called on an input that does not meet its stated assumptions."""


class UnsupportedError(SBMError, NotImplementedError):
    """No closed form / sampler / method exists for this input."""


class ConfigError(SBMError, ValueError):
    """Invalid environment variable or JSON experiment config."""


class NumericalError(SBMError, RuntimeError):
    """Quadrature or inversion failed; `diagnostics` holds the evidence."""

    def __init__(self, message: str, **diagnostics: Any) -> None:
        super().__init__(message)
        self.diagnostics = diagnostics

    def __str__(self) -> str:
        base = super().__str__()
        if not self.diagnostics:
            return base
        details = ", ".join(f"{k}={v!r}" for k, v in sorted(self.diagnostics.items()))
        return f"{base} ({details})"
