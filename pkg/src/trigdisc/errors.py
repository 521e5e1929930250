"""Shared exception types.

Input/usage problems raise ValueError (or PreconditionError for violated
mathematical hypotheses); failed numerical certifications raise
VerificationError so callers can distinguish "bad input" from "the math
check did not pass".
"""


class PreconditionError(ValueError):
    """A documented mathematical hypothesis of an operation is violated."""


class VerificationError(RuntimeError):
    """A numerical certification or verification check failed."""
