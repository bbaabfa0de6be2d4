"""Exception hierarchy."""

from __future__ import annotations

import enum


class VkpError(Exception):
    """Base class for all package errors."""


class MalformedIdentityError(VkpError, ValueError):
    pass


class ChainExhaustedError(VkpError):
    """A 48-bit sequence counter would wrap."""


class InsufficientPoolError(VkpError):
    pass


class UnknownHssError(VkpError):
    pass


class ProtocolStateError(VkpError):
    """An operation was attempted in the wrong phase."""


class FailureCause(enum.IntEnum):
    IDENTIFICATION = 1
    MAC = 2
    SQN = 3
    RES_MISMATCH = 4
    ANCHOR_MISMATCH = 5


class AuthenticationError(VkpError):
    cause: FailureCause

    def __init__(self, cause: FailureCause, detail: str = ""):
        self.cause = cause
        super().__init__(f"{cause.name.lower()}-failure" + (f": {detail}" if detail else ""))


class ScenarioError(VkpError, ValueError):
    pass
