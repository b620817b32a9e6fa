"""Exception taxonomy shared by every module.

Each error carries a machine-readable ``code`` that surfaces unchanged on the
CLI (printed to stderr) and the HTTP API (JSON error payloads).
"""

from __future__ import annotations


class SimQGenError(Exception):
    """Base class for all domain errors."""

    code = "INTERNAL_ERROR"

    def __init__(self, message: str = ""):
        super().__init__(message or self.code)


class InvalidRepresentationError(SimQGenError):
    code = "INVALID_REPRESENTATION"

    def __init__(self, violations=(), message: str = ""):
        self.violations = tuple(violations)
        detail = message or "; ".join(v.code for v in self.violations)
        super().__init__(detail or self.code)


class NoChainError(SimQGenError):
    code = "NO_CHAIN"


class TypeUnsupportedError(SimQGenError):
    code = "TYPE_UNSUPPORTED"


class SessionClosedError(SimQGenError):
    code = "SESSION_CLOSED"


class NoPendingPromptError(SimQGenError):
    code = "NO_PENDING_PROMPT"


class EmptyAnswerError(SimQGenError):
    code = "EMPTY_ANSWER"


class InvalidTransitionError(SimQGenError):
    code = "INVALID_TRANSITION"


class ExtractionUnparsableError(SimQGenError):
    code = "EXTRACTION_UNPARSABLE"


class GatewayError(SimQGenError):
    code = "GATEWAY_ERROR"


class EditConflictError(SimQGenError):
    code = "EDIT_CONFLICT"


class ValidationFailedError(SimQGenError):
    code = "VALIDATION_FAILED"

    def __init__(self, violations=(), message: str = ""):
        self.violations = tuple(violations)
        detail = message or "; ".join(v.code for v in self.violations)
        super().__init__(detail or self.code)


class ConfigError(SimQGenError):
    code = "CONFIG_ERROR"


class EmptyBatchError(SimQGenError):
    code = "EMPTY_BATCH"


class DegenerateDataError(SimQGenError):
    code = "DEGENERATE_DATA"


class EmptyInputError(SimQGenError):
    code = "EMPTY_INPUT"


class EmptyStoreError(SimQGenError):
    code = "EMPTY_STORE"


class StoreError(SimQGenError):
    code = "STORE_ERROR"


class UnknownIdError(SimQGenError):
    code = "UNKNOWN_ID"
