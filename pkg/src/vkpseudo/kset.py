"""Variable k-pseudonym set construction."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from . import crypto
from .errors import InsufficientPoolError, MalformedIdentityError
from .identity import ENCODED_LEN, IdentityKind, Pseudonym, decode_identity, encode_identity, expand_40
from .zuc import zuc_init, zuc_next_word

LIVE_KINDS = frozenset({IdentityKind.REAL_IMSI, IdentityKind.SHARED, IdentityKind.ANCHOR})


class PoolSource(enum.Enum):
    HSS = "hss-provided"
    SELF = "self-generated"


@dataclass
class AssistantPool:
    entries: list[Pseudonym] = field(default_factory=list)
    source: PoolSource = PoolSource.SELF

    def __post_init__(self):
        if len(set(self.entries)) != len(self.entries):
            raise ValueError("assistant pool entries must be distinct")

    def __len__(self):
        return len(self.entries)


@dataclass(frozen=True)
class KSet:
    members: tuple[Pseudonym, ...]
    live_index: int | None = field(default=None, compare=False)

    @property
    def k(self) -> int:
        return len(self.members)

    @property
    def live(self) -> Pseudonym:
        if self.live_index is None:
            raise ValueError("live position is unknown for a decoded set")
        return self.members[self.live_index]

    def to_wire(self) -> bytes:
        """``k`` as two octets followed by k encoded identities; the live position is not sent."""
        return self.k.to_bytes(2, "big") + b"".join(encode_identity(m) for m in self.members)

    @classmethod
    def from_wire(cls, data: bytes) -> "KSet":
        if len(data) < 2:
            raise MalformedIdentityError("truncated k-set")
        k = int.from_bytes(data[:2], "big")
        if len(data) != 2 + k * ENCODED_LEN:
            raise MalformedIdentityError(f"k-set of {k} members needs {2 + k * ENCODED_LEN} octets")
        members = tuple(decode_identity(data[2 + i * ENCODED_LEN : 2 + (i + 1) * ENCODED_LEN]) for i in range(k))
        return cls(members)


def build_set(live: Pseudonym, pool: AssistantPool, k: int, rng: np.random.Generator) -> KSet:
    """Sample k-1 assistants without replacement and insert ``live`` at a uniform position."""
    if k < 1:
        raise ValueError("k must be >= 1")
    if live.kind not in LIVE_KINDS:
        raise ValueError(f"live identity has kind {live.kind.value}")
    candidates = [p for p in pool.entries if p != live]
    if len(candidates) < k - 1:
        raise InsufficientPoolError(f"need {k - 1} assistants, pool has {len(candidates)}")
    picks = rng.choice(len(candidates), size=k - 1, replace=False) if k > 1 else []
    members = [candidates[int(i)].with_kind(IdentityKind.ASSISTANT) for i in picks]
    pos = int(rng.integers(0, k))
    members.insert(pos, live)
    return KSet(tuple(members), pos)


def _assistant_iv(counter: int) -> bytes:
    return crypto.hash(b"vkp-assistants" + crypto.encode_sqn(counter))[:16]


def self_generate_assistants(
    key: bytes,
    counter: int,
    n: int,
    mcc: str,
    mnc: str,
    exclude: frozenset | set = frozenset(),
) -> AssistantPool:
    """Generate ``n`` assistant identities from a UE-local keystream.

    ZUC is keyed with ``key`` and an IV derived from ``counter`` under a label
    that the pseudonym chain never uses, so the two streams are unrelated.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    state = zuc_init(key, _assistant_iv(counter))
    seen = set(exclude)
    out = []
    while len(out) < n:
        p = Pseudonym(mcc, mnc, expand_40(zuc_next_word(state), zuc_next_word(state)), IdentityKind.ASSISTANT)
        if p in seen:
            continue
        seen.add(p)
        out.append(p)
    return AssistantPool(out, PoolSource.SELF)


def hss_assign_assistants(registry, requester, n: int, rng: np.random.Generator) -> AssistantPool:
    """Draw ``n`` current shared pseudonyms of other active subscribers.

    ``registry`` is any object with an ``active_pseudonyms(exclude=...)``
    method returning a list of pseudonyms (see :class:`protocol.HssState`).
    """
    others = registry.active_pseudonyms(exclude=requester)
    if len(others) < n:
        raise InsufficientPoolError(f"need {n} other active subscribers, registry has {len(others)}")
    picks = rng.choice(len(others), size=n, replace=False)
    return AssistantPool([others[int(i)].with_kind(IdentityKind.ASSISTANT) for i in picks], PoolSource.HSS)
