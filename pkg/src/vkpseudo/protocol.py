"""UE / MME / HSS state machines for anonymous attach with shared pseudonyms.

Each operation below is one protocol step; :mod:`vkpseudo.network` wires them
together over a simulated message channel.  All messages have fixed binary
layouts (big-endian, fields in declaration order) led by a 4-octet
transaction identifier.
"""

from __future__ import annotations

import enum
import hmac as _hmac
import itertools
from dataclasses import dataclass, field

import numpy as np

from . import crypto
from .errors import (
    AuthenticationError,
    FailureCause,
    InsufficientPoolError,
    ProtocolStateError,
    UnknownHssError,
)
from .identity import IdentityKind, Imsi, Pseudonym, PseudonymChain, encode_identity
from .kset import AssistantPool, KSet, build_set, hss_assign_assistants, self_generate_assistants

AMF = b"\x80\x00"
SQN_WINDOW = 32
ID_LEN = 8


def _id_bytes(name: str) -> bytes:
    raw = name.encode()
    if len(raw) > ID_LEN:
        raise ValueError(f"network identifier longer than {ID_LEN} octets: {name!r}")
    return raw.ljust(ID_LEN, b"\x00")


def _id_str(raw: bytes) -> str:
    return raw.rstrip(b"\x00").decode()


# --- wire messages --------------------------------------------------------


@dataclass(frozen=True)
class AttachRequest:
    txn: int
    dest_id: str
    h0: bytes
    kset: KSet

    def to_bytes(self) -> bytes:
        return self.txn.to_bytes(4, "big") + _id_bytes(self.dest_id) + self.h0 + self.kset.to_wire()

    @classmethod
    def from_bytes(cls, data: bytes) -> "AttachRequest":
        return cls(int.from_bytes(data[:4], "big"), _id_str(data[4:12]), data[12:44], KSet.from_wire(data[44:]))


@dataclass(frozen=True)
class ForwardedRequest:
    txn: int
    sn_id: str
    h0: bytes
    kset: KSet

    def to_bytes(self) -> bytes:
        return self.txn.to_bytes(4, "big") + _id_bytes(self.sn_id) + self.h0 + self.kset.to_wire()

    @classmethod
    def from_bytes(cls, data: bytes) -> "ForwardedRequest":
        return cls(int.from_bytes(data[:4], "big"), _id_str(data[4:12]), data[12:44], KSet.from_wire(data[44:]))


@dataclass(frozen=True)
class AuthToken:
    concealed_sqn: int
    amf: bytes
    mac: bytes

    def to_bytes(self) -> bytes:
        return self.concealed_sqn.to_bytes(6, "big") + self.amf + self.mac

    @classmethod
    def from_bytes(cls, data: bytes) -> "AuthToken":
        if len(data) != 16:
            raise ValueError("AUTH is 16 octets")
        return cls(int.from_bytes(data[:6], "big"), data[6:8], data[8:16])


@dataclass(frozen=True)
class AuthVector:
    rand: bytes
    xres: bytes
    k_asme: bytes
    auth: AuthToken

    def to_bytes(self) -> bytes:
        return self.rand + self.xres + self.k_asme + self.auth.to_bytes()

    @classmethod
    def from_bytes(cls, data: bytes) -> "AuthVector":
        if len(data) != 72:
            raise ValueError("AV is 72 octets")
        return cls(data[:16], data[16:24], data[24:56], AuthToken.from_bytes(data[56:72]))


@dataclass(frozen=True)
class AvResponse:
    txn: int
    av: AuthVector

    def to_bytes(self) -> bytes:
        return self.txn.to_bytes(4, "big") + self.av.to_bytes()


@dataclass(frozen=True)
class AuthChallenge:
    txn: int
    rand: bytes
    auth: AuthToken
    ksi_asme: int

    def __post_init__(self):
        if not 0 <= self.ksi_asme < 8:
            raise ValueError("KSI_ASME is a 3-bit value")

    def to_bytes(self) -> bytes:
        return self.txn.to_bytes(4, "big") + self.rand + self.auth.to_bytes() + bytes([self.ksi_asme])

    @classmethod
    def from_bytes(cls, data: bytes) -> "AuthChallenge":
        if len(data) != 37:
            raise ValueError("challenge is 37 octets")
        return cls(int.from_bytes(data[:4], "big"), data[4:20], AuthToken.from_bytes(data[20:36]), data[36])


@dataclass(frozen=True)
class AuthResponse:
    txn: int
    res: bytes

    def to_bytes(self) -> bytes:
        return self.txn.to_bytes(4, "big") + self.res


@dataclass(frozen=True)
class AuthFailure:
    """UE -> MME: challenge rejected."""

    txn: int
    cause: FailureCause

    def to_bytes(self) -> bytes:
        return self.txn.to_bytes(4, "big") + bytes([self.cause])


@dataclass(frozen=True)
class Reject:
    """HSS -> MME or MME -> UE: attach refused."""

    txn: int
    cause: FailureCause

    def to_bytes(self) -> bytes:
        return self.txn.to_bytes(4, "big") + bytes([self.cause])


@dataclass(frozen=True)
class AuthAccept:
    txn: int

    def to_bytes(self) -> bytes:
        return self.txn.to_bytes(4, "big")


@dataclass(frozen=True)
class AuthConfirm:
    """MME -> HSS: outcome of the RES check, so the HSS can move the chain."""

    txn: int
    ok: bool

    def to_bytes(self) -> bytes:
        return self.txn.to_bytes(4, "big") + bytes([self.ok])


@dataclass(frozen=True)
class AssistantDelivery:
    """HSS -> UE over the secured link: fresh assistant identities."""

    txn: int
    entries: tuple[Pseudonym, ...]

    def to_bytes(self) -> bytes:
        body = b"".join(encode_identity(p) for p in self.entries)
        return self.txn.to_bytes(4, "big") + len(self.entries).to_bytes(2, "big") + body


# --- actor state ----------------------------------------------------------


class UePhase(enum.Enum):
    IDLE = "idle"
    AWAITING_CHALLENGE = "awaiting-challenge"
    AWAITING_RESULT = "awaiting-result"


@dataclass
class UeState:
    chain: PseudonymChain
    hss_id: str
    sn_id: str = ""
    pool: AssistantPool = field(default_factory=AssistantPool)
    stored_imsi_kset: KSet | None = None
    pending_kset: KSet | None = None
    pending_txn: int | None = None
    phase: UePhase = UePhase.IDLE
    recovery_mode: bool = False
    attach_via_anchor: bool = False
    k_asme: bytes | None = None
    ksi_asme: int | None = None
    assistant_counter: int = 0
    _pending_keys: tuple[bytes, bytes] | None = field(default=None, repr=False)

    @property
    def key(self) -> bytes:
        return self.chain.key


@dataclass
class MmeState:
    sn_id: str
    hss_ids: set[str] = field(default_factory=set)
    pending: dict[int, AuthVector] = field(default_factory=dict)
    ksi: dict[int, int] = field(default_factory=dict)
    k_asme: dict[int, bytes] = field(default_factory=dict)
    _ksi_counter: itertools.count = field(default_factory=itertools.count, repr=False)


@dataclass
class Subscriber:
    sub_id: int
    chain: PseudonymChain

    @property
    def key(self) -> bytes:
        return self.chain.key


@dataclass
class PendingAuth:
    sub_id: int
    matched_kind: IdentityKind
    sqn: int


@dataclass
class HssState:
    """Subscriber database keyed by every identity that may appear live.

    ``index`` maps the IMSI, the current shared pseudonym and the current
    anchor of each subscriber to its id.
    """

    hss_id: str
    known_sn_ids: set[str] = field(default_factory=set)
    subscribers: dict[int, Subscriber] = field(default_factory=dict)
    index: dict[Pseudonym, tuple[int, IdentityKind]] = field(default_factory=dict)
    pending: dict[int, PendingAuth] = field(default_factory=dict)

    def register(self, sub_id: int, chain: PseudonymChain) -> Subscriber:
        sub = Subscriber(sub_id, chain)
        self.subscribers[sub_id] = sub
        self.reindex(sub_id)
        return sub

    def reindex(self, sub_id: int) -> None:
        for ident in [i for i, (s, _) in self.index.items() if s == sub_id]:
            del self.index[ident]
        chain = self.subscribers[sub_id].chain
        self.index[chain.imsi.as_pseudonym()] = (sub_id, IdentityKind.REAL_IMSI)
        if chain.active:
            self.index[chain.anchor] = (sub_id, IdentityKind.ANCHOR)
            if chain.current is not None:
                self.index[chain.current] = (sub_id, IdentityKind.SHARED)

    def lookup(self, ident: Pseudonym) -> tuple[Subscriber, IdentityKind] | None:
        hit = self.index.get(ident)
        if hit is None:
            return None
        return self.subscribers[hit[0]], hit[1]

    def active_pseudonyms(self, exclude=None) -> list[Pseudonym]:
        return [
            s.chain.current
            for sid, s in self.subscribers.items()
            if sid != exclude and s.chain.active and s.chain.current is not None
        ]

    def lose_pseudonym(self, sub_id: int) -> None:
        """Fault: the stored current pseudonym of ``sub_id`` is wiped."""
        chain = self.subscribers[sub_id].chain
        chain.current = None
        chain._zuc = None
        self.reindex(sub_id)


# --- protocol steps -------------------------------------------------------


def compute_h0(key: bytes, identity: Pseudonym) -> bytes:
    return crypto.hmac(key, encode_identity(identity))


def _ensure_pool(ue: UeState, k: int, live: Pseudonym) -> AssistantPool:
    usable = [p for p in ue.pool.entries if p != live]
    if len(usable) >= k - 1:
        return ue.pool
    ue.assistant_counter += 1
    imsi = ue.chain.imsi
    return self_generate_assistants(
        ue.key, ue.assistant_counter, max(k - 1, 1), imsi.mcc, imsi.mnc, exclude={live, imsi.as_pseudonym()}
    )


def ue_initiate(ue: UeState, k: int, rng: np.random.Generator, txn: int) -> AttachRequest:
    """Build the attach request for the UE's live identity.

    The first attach uses the IMSI with a self-generated set, which is stored
    and re-sent verbatim until the IMSI is authenticated.  Afterwards the
    current shared pseudonym is used, or the anchor when recovering.
    """
    if ue.phase is not UePhase.IDLE:
        raise ProtocolStateError(f"UE busy ({ue.phase.value})")
    chain = ue.chain
    if ue.recovery_mode:
        live = chain.anchor
        kset = build_set(live, _ensure_pool(ue, k, live), k, rng)
    elif not chain.active:
        live = chain.imsi.as_pseudonym()
        if ue.stored_imsi_kset is None:
            ue.assistant_counter += 1
            pool = self_generate_assistants(
                ue.key, ue.assistant_counter, max(k - 1, 1), chain.imsi.mcc, chain.imsi.mnc, exclude={live}
            )
            ue.stored_imsi_kset = build_set(live, pool, k, rng)
        kset = ue.stored_imsi_kset
    else:
        live = chain.current
        kset = build_set(live, _ensure_pool(ue, k, live), k, rng)
    ue.attach_via_anchor = ue.recovery_mode
    ue.pending_kset = kset
    ue.pending_txn = txn
    ue.phase = UePhase.AWAITING_CHALLENGE
    return AttachRequest(txn, ue.hss_id, compute_h0(ue.key, live), kset)


def mme_forward(mme: MmeState, req: AttachRequest) -> ForwardedRequest:
    if req.dest_id not in mme.hss_ids:
        raise UnknownHssError(req.dest_id)
    return ForwardedRequest(req.txn, mme.sn_id, req.h0, req.kset)


def hss_identify(hss: HssState, kset: KSet, h0: bytes) -> tuple[Subscriber, IdentityKind] | None:
    """First member whose registered key reproduces ``h0``; unknown members are skipped."""
    for member in kset.members:
        hit = hss.lookup(member)
        if hit is None:
            continue
        sub, kind = hit
        if _hmac.compare_digest(compute_h0(sub.key, member), h0):
            return sub, kind
    return None


def derive_k_asme(ck: bytes, ik: bytes, sn_id: str) -> bytes:
    return crypto.prng_expand(ck + ik + _id_bytes(sn_id), 32)


def make_auth_vector(key: bytes, sqn: int, rand: bytes, sn_id: str, amf: bytes = AMF) -> AuthVector:
    out = crypto.milenage(key, rand, sqn, amf)
    ak = int.from_bytes(out.ak, "big")
    auth = AuthToken(sqn ^ ak, amf, out.mac)
    return AuthVector(rand, out.res, derive_k_asme(out.ck, out.ik, sn_id), auth)


def hss_generate_av(
    hss: HssState, sub: Subscriber, kind: IdentityKind, sn_id: str, rng: np.random.Generator, txn: int
) -> AuthVector:
    if sn_id not in hss.known_sn_ids:
        raise UnknownHssError(f"serving network {sn_id!r} not recognised")
    sqn = sub.chain.advance_sqn("imsi")
    av = make_auth_vector(sub.key, sqn, rng.bytes(16), sn_id)
    hss.pending[txn] = PendingAuth(sub.sub_id, kind, sqn)
    return av


def mme_challenge(mme: MmeState, txn: int, av: AuthVector) -> AuthChallenge:
    ksi = next(mme._ksi_counter) % 7  # 7 (0b111) means "no key available"
    mme.pending[txn] = av
    mme.ksi[txn] = ksi
    return AuthChallenge(txn, av.rand, av.auth, ksi)


def ue_verify_challenge(ue: UeState, ch: AuthChallenge) -> bytes:
    """Check MAC and SQN freshness, then answer with RES.

    Raises :class:`AuthenticationError` with cause ``MAC`` or ``SQN``; the UE
    returns to idle in either case.
    """
    if ue.phase is not UePhase.AWAITING_CHALLENGE:
        raise ProtocolStateError(f"UE not awaiting a challenge ({ue.phase.value})")
    out = crypto.milenage(ue.key, ch.rand, 0, ch.auth.amf)
    sqn = ch.auth.concealed_sqn ^ int.from_bytes(out.ak, "big")
    expected_mac = crypto.milenage(ue.key, ch.rand, sqn, ch.auth.amf).mac
    if not _hmac.compare_digest(expected_mac, ch.auth.mac):
        ue.phase = UePhase.IDLE
        raise AuthenticationError(FailureCause.MAC)
    stored = ue.chain.sqn_imsi
    if not stored < sqn <= stored + SQN_WINDOW:
        ue.phase = UePhase.IDLE
        raise AuthenticationError(FailureCause.SQN, f"received {sqn}, stored {stored}")
    ue.chain.sqn_imsi = sqn
    ue._pending_keys = (out.ck, out.ik)
    ue.ksi_asme = ch.ksi_asme
    ue.phase = UePhase.AWAITING_RESULT
    return out.res


def mme_verify_res(mme: MmeState, txn: int, res: bytes) -> bool:
    av = mme.pending.pop(txn, None)
    if av is None:
        raise ProtocolStateError(f"no pending vector for transaction {txn}")
    if _hmac.compare_digest(av.xres, res):
        mme.k_asme[txn] = av.k_asme
        return True
    return False


def _advance_chain(chain: PseudonymChain, via_anchor: bool) -> Pseudonym:
    if not chain.active:
        return chain.activate()
    if via_anchor:
        return chain.rebuild_epoch()
    return chain.next_pseudonym()


def ue_complete(ue: UeState) -> Pseudonym:
    """UE side of the post-authentication update."""
    if ue.phase is not UePhase.AWAITING_RESULT:
        raise ProtocolStateError(f"UE not awaiting a result ({ue.phase.value})")
    ck, ik = ue._pending_keys
    ue.k_asme = derive_k_asme(ck, ik, ue.sn_id)
    new = _advance_chain(ue.chain, ue.attach_via_anchor)
    ue.stored_imsi_kset = None
    ue.recovery_mode = False
    ue.pending_kset = None
    ue.phase = UePhase.IDLE
    return new


def hss_complete(hss: HssState, txn: int) -> Subscriber:
    """HSS side of the post-authentication update."""
    pending = hss.pending.pop(txn)
    sub = hss.subscribers[pending.sub_id]
    _advance_chain(sub.chain, pending.matched_kind is IdentityKind.ANCHOR)
    hss.reindex(sub.sub_id)
    return sub


def post_auth_update(ue: UeState, hss: HssState, txn: int) -> tuple[Pseudonym, Pseudonym]:
    new_ue = ue_complete(ue)
    new_hss = hss_complete(hss, txn).chain.current
    return new_ue, new_hss


def ue_failed(ue: UeState, cause: FailureCause) -> None:
    """Attach refused.  An identification failure on a pseudonym attach arms recovery."""
    ue.phase = UePhase.IDLE
    ue.pending_kset = None
    if cause is FailureCause.IDENTIFICATION and ue.chain.active:
        if ue.attach_via_anchor:
            raise AuthenticationError(FailureCause.ANCHOR_MISMATCH, "anchor attach was not recognised")
        ue.recovery_mode = True


def recover(ue: UeState, k: int, rng: np.random.Generator, txn: int) -> AttachRequest:
    """Start an anchor attach; only legal after an identification failure."""
    if not ue.recovery_mode:
        raise ProtocolStateError("no failed attach to recover from")
    return ue_initiate(ue, k, rng, txn)


def hss_deliver_assistants(hss: HssState, sub_id: int, n: int, rng: np.random.Generator) -> AssistantPool | None:
    """Assistants for the next attach of ``sub_id``, or None while too few subscribers are active."""
    available = len(hss.active_pseudonyms(exclude=sub_id))
    if available == 0:
        return None
    try:
        return hss_assign_assistants(hss, sub_id, min(n, available), rng)
    except InsufficientPoolError:
        return None


def new_subscriber(
    sub_id: int, key: bytes, imsi: Imsi, sqn: int, hss: HssState, hss_id: str
) -> tuple[UeState, Subscriber]:
    """Provision matching UE and HSS records for one subscriber."""
    ue_chain = PseudonymChain(key=key, imsi=imsi, sqn_imsi=sqn)
    hss_chain = PseudonymChain(key=key, imsi=imsi, sqn_imsi=sqn)
    return UeState(chain=ue_chain, hss_id=hss_id), hss.register(sub_id, hss_chain)

