"""Subscriber identities and the synchronized shared-pseudonym chain.

A :class:`PseudonymChain` is held by both the UE and the HSS.  Both sides seed
ZUC with the shared key and an IV derived from the anchor sequence counter,
then XOR successive 40-bit keystream chunks into the MSIN.  As long as both
ends apply the same number of updates they hold the same pseudonym.
"""

from __future__ import annotations

import copy
import enum
from dataclasses import dataclass, field

from . import crypto
from .errors import ChainExhaustedError, MalformedIdentityError
from .zuc import ZucState, zuc_init, zuc_next_word

MSIN_BITS = 40
MSIN_MASK = (1 << MSIN_BITS) - 1
ENCODED_LEN = 8  # 3 BCD octets (MCC, MNC) + 5 octets MSIN


class IdentityKind(enum.Enum):
    REAL_IMSI = "real-imsi"
    SHARED = "shared-pseudonym"
    ANCHOR = "anchor"
    ASSISTANT = "assistant"


def _check_digits(value: str, name: str) -> None:
    if len(value) != 3 or not value.isdigit() or not value.isascii():
        raise MalformedIdentityError(f"{name} must be 3 decimal digits, got {value!r}")


@dataclass(frozen=True)
class Pseudonym:
    """An identity as it appears on the wire.

    Equality and hashing ignore ``kind``: an observer cannot tell an assistant
    from a live identity, and neither can a dictionary lookup.
    """

    mcc: str
    mnc: str
    msin: int
    kind: IdentityKind = field(default=IdentityKind.ASSISTANT, compare=False)

    def __post_init__(self):
        _check_digits(self.mcc, "MCC")
        _check_digits(self.mnc, "MNC")
        if not 0 <= self.msin <= MSIN_MASK:
            raise MalformedIdentityError(f"MSIN out of 40-bit range: {self.msin:#x}")

    def with_kind(self, kind: IdentityKind) -> "Pseudonym":
        return Pseudonym(self.mcc, self.mnc, self.msin, kind)

    def __str__(self):
        return f"{self.mcc}{self.mnc}{self.msin:010x}"


@dataclass(frozen=True)
class Imsi:
    mcc: str
    mnc: str
    msin: int

    def __post_init__(self):
        _check_digits(self.mcc, "MCC")
        _check_digits(self.mnc, "MNC")
        if not 0 <= self.msin <= MSIN_MASK:
            raise MalformedIdentityError(f"MSIN out of 40-bit range: {self.msin:#x}")

    def as_pseudonym(self) -> Pseudonym:
        return Pseudonym(self.mcc, self.mnc, self.msin, IdentityKind.REAL_IMSI)


def encode_identity(p: Pseudonym | Imsi) -> bytes:
    digits = p.mcc + p.mnc
    bcd = bytes((int(digits[i]) << 4) | int(digits[i + 1]) for i in range(0, 6, 2))
    return bcd + p.msin.to_bytes(5, "big")


def decode_identity(data: bytes, kind: IdentityKind = IdentityKind.ASSISTANT) -> Pseudonym:
    if len(data) != ENCODED_LEN:
        raise MalformedIdentityError(f"identity must be {ENCODED_LEN} octets, got {len(data)}")
    nibbles = []
    for b in data[:3]:
        nibbles += [b >> 4, b & 0xF]
    if any(n > 9 for n in nibbles):
        raise MalformedIdentityError(f"non-digit nibble in MCC/MNC: {data[:3].hex()}")
    digits = "".join(map(str, nibbles))
    return Pseudonym(digits[:3], digits[3:], int.from_bytes(data[3:], "big"), kind)


def derive_iv(key: bytes, sqn: int) -> bytes:
    """ZUC IV from the shared key and a sequence number.

    Rand = top 128 bits of H(SQN); IV = high half of f3 || low half of f4.
    """
    out = crypto.milenage(key, crypto.rand_from_sqn(sqn), 0, b"\x00\x00")
    return out.ck[:8] + out.ik[8:]


def expand_40(w1: int, w2: int) -> int:
    """High 40 bits of the 64-bit concatenation ``w1 || w2``."""
    return ((w1 << 32) | w2) >> 24


def anchor_pseudonym(key: bytes, imsi: Imsi, sqn: int) -> Pseudonym:
    mask = crypto.hmac40(key, crypto.encode_sqn(sqn))
    return Pseudonym(imsi.mcc, imsi.mnc, imsi.msin ^ mask, IdentityKind.ANCHOR)


@dataclass
class PseudonymChain:
    """Per-subscriber chain state, mirrored at the UE and at the HSS.

    ``sqn_imsi`` is the running AKA sequence counter; its value at the first
    successful authentication is the SQN_IMSI that seeds the first epoch.
    ``sqn_p0`` is the anchor counter: it is set to SQN_IMSI on activation,
    advanced on every recovery, and always seeds the current ZUC epoch.
    ``count`` is the number of keystream words consumed in the epoch and
    ``index`` the position i of ``current`` in the chain (0 = not activated).
    """

    key: bytes
    imsi: Imsi
    sqn_imsi: int = 0
    sqn_p0: int = 0
    count: int = 0
    index: int = 0
    current: Pseudonym | None = None
    _zuc: ZucState | None = field(default=None, repr=False, compare=False)

    @property
    def active(self) -> bool:
        return self.index >= 1

    @property
    def anchor(self) -> Pseudonym:
        return anchor_pseudonym(self.key, self.imsi, self.sqn_p0)

    def live_identity(self) -> Pseudonym:
        if not self.active:
            return self.imsi.as_pseudonym()
        return self.current

    def start_epoch(self) -> None:
        """(Re)initialize ZUC from the anchor counter; resets ``count``."""
        self._zuc = zuc_init(self.key, derive_iv(self.key, self.sqn_p0))
        self.count = 0

    def expand_keystream_40(self) -> int:
        if self._zuc is None:
            self.start_epoch()
        w1 = zuc_next_word(self._zuc)
        w2 = zuc_next_word(self._zuc)
        self.count += 2
        return expand_40(w1, w2)

    def next_pseudonym(self) -> Pseudonym:
        ks = self.expand_keystream_40()
        self.current = Pseudonym(self.imsi.mcc, self.imsi.mnc, self.imsi.msin ^ ks, IdentityKind.SHARED)
        self.index += 1
        return self.current

    def activate(self) -> Pseudonym:
        """First successful IMSI authentication: fix SQN_IMSI as the anchor seed."""
        self.sqn_p0 = self.sqn_imsi
        self.start_epoch()
        return self.next_pseudonym()

    def advance_sqn(self, which: str) -> int:
        attr = {"imsi": "sqn_imsi", "p0": "sqn_p0"}[which]
        value = getattr(self, attr)
        if value >= crypto.SQN_MAX:
            raise ChainExhaustedError(f"{attr} exhausted")
        setattr(self, attr, value + 1)
        return value + 1

    def rebuild_epoch(self) -> Pseudonym:
        """Recovery: advance the anchor counter, restart ZUC, take the next pseudonym."""
        self.advance_sqn("p0")
        self.start_epoch()
        return self.next_pseudonym()

    def clone(self) -> "PseudonymChain":
        return copy.deepcopy(self)

    # persistence

    def to_record(self) -> str:
        fields = (
            self.key.hex(),
            self.imsi.mcc,
            self.imsi.mnc,
            f"{self.imsi.msin:010x}",
            f"{self.sqn_imsi:012x}",
            f"{self.sqn_p0:012x}",
            f"{self.count:x}",
            f"{self.index:x}",
        )
        return " ".join(fields)

    @classmethod
    def from_record(cls, line: str) -> "PseudonymChain":
        """Rebuild a chain, replaying the current epoch to recover ``current``."""
        parts = line.split()
        if len(parts) != 8:
            raise MalformedIdentityError(f"expected 8 fields, got {len(parts)}")
        key, mcc, mnc, msin, sqn_imsi, sqn_p0, count, index = parts
        chain = cls(
            key=bytes.fromhex(key),
            imsi=Imsi(mcc, mnc, int(msin, 16)),
            sqn_imsi=int(sqn_imsi, 16),
            sqn_p0=int(sqn_p0, 16),
        )
        count, index = int(count, 16), int(index, 16)
        if count % 2:
            raise MalformedIdentityError("count must be even")
        if index:
            chain.start_epoch()
            for _ in range(count // 2):
                chain.next_pseudonym()
        chain.index = index
        return chain


def replay_chain(key: bytes, imsi: Imsi, seed_sqn: int, updates: int) -> Pseudonym | None:
    """Pseudonym reached after ``updates`` updates from a fresh epoch seeded by ``seed_sqn``."""
    chain = PseudonymChain(key=key, imsi=imsi, sqn_p0=seed_sqn)
    chain.start_epoch()
    for _ in range(updates):
        chain.next_pseudonym()
    return chain.current


def save_registry(chains, path) -> None:
    with open(path, "w") as fh:
        for chain in chains:
            fh.write(chain.to_record() + "\n")


def load_registry(path) -> list[PseudonymChain]:
    with open(path) as fh:
        return [PseudonymChain.from_record(line) for line in fh if line.strip()]
