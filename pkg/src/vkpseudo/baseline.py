"""Basic k-pseudonym challenge-response protocol, kept as the attack baseline.

The user sends a k-set containing its *real* identity every time; the server
finds the user by trying the key of every member in order.
"""

from __future__ import annotations

import enum
import hmac as _hmac
from dataclasses import dataclass

import numpy as np

from . import crypto
from .errors import AuthenticationError, FailureCause, ProtocolStateError
from .identity import Pseudonym, encode_identity
from .kset import KSet

NONCE_LEN = 16


class Phase(enum.IntEnum):
    REQUESTED = 0
    CHALLENGED = 1
    RESPONDED = 2
    MUTUAL = 3


def compute_m1(n1: bytes, n2: bytes, identity: Pseudonym, key: bytes, kset: KSet) -> bytes:
    return crypto.hmac(key, n1 + n2 + encode_identity(identity) + key + kset.to_wire())


def server_find_identity(n1: bytes, n2: bytes, kset: KSet, m1: bytes, key_db) -> Pseudonym | None:
    """Walk the set in order; members without a registered key are skipped."""
    for member in kset.members:
        key = key_db.get(member)
        if key is None:
            continue
        if _hmac.compare_digest(compute_m1(n1, n2, member, key, kset), m1):
            return member
    return None


def compute_m2(n2: bytes, key: bytes) -> bytes:
    return crypto.hmac(key, n2 + key)


def session_key(key: bytes, n1: bytes, n2: bytes) -> bytes:
    return crypto.prng_expand(crypto.xor_bytes(crypto.xor_bytes(key, n1), n2), 16)


@dataclass
class BaselineSession:
    kset: KSet
    n1: bytes = b""
    n2: bytes = b""
    m1: bytes = b""
    m2: bytes = b""
    sk: bytes | None = None
    phase: Phase = Phase.REQUESTED

    def _advance(self, to: Phase) -> None:
        if to != self.phase + 1:
            raise ProtocolStateError(f"cannot move from {self.phase.name} to {to.name}")
        self.phase = to


def run_session(
    identity: Pseudonym,
    user_key: bytes,
    kset: KSet,
    key_db,
    rng: np.random.Generator,
) -> BaselineSession:
    """One full request/challenge/response/confirm exchange.

    Raises :class:`AuthenticationError` if the server finds no member
    (``IDENTIFICATION``) or the user rejects ``M2`` (``MAC``).
    """
    s = BaselineSession(kset)
    s.n1 = rng.bytes(NONCE_LEN)
    s._advance(Phase.CHALLENGED)
    s.n2 = rng.bytes(NONCE_LEN)
    s.m1 = compute_m1(s.n1, s.n2, identity, user_key, kset)
    s._advance(Phase.RESPONDED)

    found = server_find_identity(s.n1, s.n2, kset, s.m1, key_db)
    if found is None:
        raise AuthenticationError(FailureCause.IDENTIFICATION)
    server_key = key_db[found]
    s.m2 = compute_m2(s.n2, server_key)
    if not _hmac.compare_digest(s.m2, compute_m2(s.n2, user_key)):
        raise AuthenticationError(FailureCause.MAC, "server response M2")
    s._advance(Phase.MUTUAL)
    s.sk = session_key(user_key, s.n1, s.n2)
    return s
