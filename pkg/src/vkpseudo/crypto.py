"""Hash, HMAC and Milenage primitives shared by the protocol modules.

SHA-256 is the single hash used throughout.  Milenage follows 3GPP TS 35.206
with the OP value of conformance test set 1 as the fixed operator constant.
"""

from __future__ import annotations

import hashlib
import hmac as _hmac
from dataclasses import dataclass

from cryptography.hazmat.primitives.ciphers import Cipher, algorithms, modes

DIGEST_SIZE = 32
SQN_BITS = 48
SQN_MAX = (1 << SQN_BITS) - 1

DEFAULT_OP = bytes.fromhex("cdc202d5123e20f62b6d676ac72cb318")

# rotation amounts (bits) and constants c1..c5
_R = (64, 0, 32, 64, 96)
_C = tuple(bytes(15) + bytes([v]) for v in (0, 1, 2, 4, 8))


def hash(message: bytes) -> bytes:  # noqa: A001 - mirrors H()
    return hashlib.sha256(message).digest()


def hmac(key: bytes, message: bytes) -> bytes:
    return _hmac.new(key, message, hashlib.sha256).digest()


def hmac40(key: bytes, message: bytes) -> int:
    """High 40 bits of ``hmac(key, message)`` as a big-endian integer."""
    return int.from_bytes(hmac(key, message)[:5], "big")


def encode_sqn(sqn: int) -> bytes:
    if not 0 <= sqn <= SQN_MAX:
        raise ValueError(f"SQN out of 48-bit range: {sqn}")
    return sqn.to_bytes(6, "big")


def rand_from_sqn(sqn: int) -> bytes:
    """128-bit Rand used for IV derivation: top half of hash(SQN)."""
    return hash(encode_sqn(sqn))[:16]


def prng_expand(seed: bytes, out_len: int) -> bytes:
    """Counter-mode HMAC expansion; ``expand(s, n)`` prefixes ``expand(s, m)`` for n < m."""
    if out_len < 1:
        raise ValueError("out_len must be >= 1")
    blocks = []
    for counter in range(1, -(-out_len // DIGEST_SIZE) + 1):
        blocks.append(hmac(seed, counter.to_bytes(4, "big")))
    return b"".join(blocks)[:out_len]


def xor_bytes(a: bytes, b: bytes) -> bytes:
    if len(a) != len(b):
        raise ValueError("length mismatch")
    return (int.from_bytes(a, "big") ^ int.from_bytes(b, "big")).to_bytes(len(a), "big")


def _aes(key: bytes):
    enc = Cipher(algorithms.AES(key), modes.ECB()).encryptor()
    return enc.update


def _rot(block: bytes, bits: int) -> bytes:
    if bits == 0:
        return block
    x = int.from_bytes(block, "big")
    x = ((x << bits) | (x >> (128 - bits))) & ((1 << 128) - 1)
    return x.to_bytes(16, "big")


def compute_opc(key: bytes, op: bytes = DEFAULT_OP) -> bytes:
    return xor_bytes(_aes(key)(op), op)


@dataclass(frozen=True)
class MilenageOutput:
    mac: bytes  # f1, 64 bits
    res: bytes  # f2, 64 bits
    ck: bytes  # f3
    ik: bytes  # f4
    ak: bytes  # f5, 48 bits
    mac_s: bytes = b""  # f1*
    ak_s: bytes = b""  # f5*


def milenage(
    key: bytes,
    rand: bytes,
    sqn: int,
    amf: bytes,
    op: bytes = DEFAULT_OP,
    *,
    opc: bytes | None = None,
) -> MilenageOutput:
    """Evaluate f1..f5 (and f1*, f5*) for one (key, rand, sqn, amf).

    ``opc`` overrides the OP-derived value when the caller already has it.
    """
    if len(key) != 16 or len(rand) != 16 or len(amf) != 2:
        raise ValueError("milenage expects 16-byte key/rand and 2-byte AMF")
    enc = _aes(key)
    if opc is None:
        opc = xor_bytes(enc(op), op)
    temp = enc(xor_bytes(rand, opc))
    sqn_b = encode_sqn(sqn)
    in1 = sqn_b + amf + sqn_b + amf

    out1 = enc(xor_bytes(xor_bytes(temp, _rot(xor_bytes(in1, opc), _R[0])), _C[0]))
    out1 = xor_bytes(out1, opc)

    outs = []
    base = xor_bytes(temp, opc)
    for i in range(1, 5):
        block = enc(xor_bytes(_rot(base, _R[i]), _C[i]))
        outs.append(xor_bytes(block, opc))
    out2, out3, out4, out5 = outs
    return MilenageOutput(
        mac=out1[:8],
        res=out2[8:],
        ck=out3,
        ik=out4,
        ak=out2[:6],
        mac_s=out1[8:],
        ak_s=out5[:6],
    )


def f2_f5(key: bytes, rand: bytes, op: bytes = DEFAULT_OP) -> tuple[bytes, bytes]:
    """RES and AK only; both are independent of SQN and AMF."""
    out = milenage(key, rand, 0, b"\x00\x00", op)
    return out.res, out.ak
