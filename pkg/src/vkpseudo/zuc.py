"""ZUC stream cipher keystream generator.

Only the raw 32-bit word generator is provided; the EEA3/EIA3 modes built on
top of it are not needed here.  The state is a plain mutable dataclass, so a
generator can be cloned with :func:`copy.deepcopy` and replayed.

>>> state = zuc_init(bytes(16), bytes(16))
>>> [hex(w) for w in zuc_keystream(state, 2)]
['0x27bede74', '0x18082da']
"""

from __future__ import annotations

from dataclasses import dataclass, field

MASK32 = 0xFFFFFFFF
MOD31 = 0x7FFFFFFF  # 2^31 - 1

_S0 = bytes.fromhex(
    "3e725b47cae0003304d1549809b96dcb7b1bf932af9d6aa5b82dfc1d08530390"
    "4d4e8499e4ced991ddb685488b296eaccdc1f81e734369c6b5bdfd396320d438"
    "767db2a7cfed57c5f32cbb142106559be3ef5e314f7f5aa40d8251495fba581c"
    "4a16d517a892241f8cffd8ae2e01d3ad3b4bda46ebc9de9a8f87d73a806f2fc8"
    "b1b437f70a2213287ccc3c89c7c3965607bf7ef00b2b975235417961a64c10fe"
    "bc2695888ab0a3fbc01894f2e1e5e95dd0dc1166645cec59427512f5749caa23"
    "0e86abbe2a02e767e644a26cc2939ff1f6fa36d250689e6271153dd640c4e20f"
    "8e83776b25053f0c30ea70b7a1e8a9658d271adb81b3a0f4457a19dfee783460"
)

_S1 = bytes.fromhex(
    "55c263713bc847869f3cda5b29aafd778cc5940ca61a1300e3a8167240f9f842"
    "4426689681d9453e1076c6a78b3943e13ab5562ac06db3052266bfdc0bfa6248"
    "dd20110636c9c1cff62752bb69f5d4877f844cd29c57a4bc4f9adffed68d7aeb"
    "2b53d85ca11417fb23d57d3067730809eeb7703f61b2198e4ee54b938f5ddba9"
    "adf1ae2ecb0dfcf42d466e1d97e8d1e94d37a5755e839eab829db91ce0cd4989"
    "01b6bd5824a25f387899159050b895e4d091c7ceed0fb46fa0ccf0024a79c3de"
    "a3efea51e66b18ec1b2c80f774e7ff215a6a541e41319235c433070aba7e0e34"
    "88b1987cf33d606c7bcad31f3265042864be859b2f598ad7b025acaf1203e2f2"
)

_D = (
    0x44D7, 0x26BC, 0x626B, 0x135E, 0x5789, 0x35E2, 0x7135, 0x09AF,
    0x4D78, 0x2F13, 0x6BC4, 0x1AF1, 0x5E26, 0x3C4D, 0x789A, 0x47AC,
)


@dataclass
class ZucState:
    lfsr: list[int] = field(default_factory=lambda: [0] * 16)
    r1: int = 0
    r2: int = 0
    words_emitted: int = 0


def _add31(a: int, b: int) -> int:
    c = a + b
    return (c & MOD31) + (c >> 31)


def _rot31(a: int, k: int) -> int:
    return ((a << k) | (a >> (31 - k))) & MOD31


def _rol32(a: int, k: int) -> int:
    return ((a << k) | (a >> (32 - k))) & MASK32


def _l1(x: int) -> int:
    return x ^ _rol32(x, 2) ^ _rol32(x, 10) ^ _rol32(x, 18) ^ _rol32(x, 24)


def _l2(x: int) -> int:
    return x ^ _rol32(x, 8) ^ _rol32(x, 14) ^ _rol32(x, 22) ^ _rol32(x, 30)


def _sbox(x: int) -> int:
    return (
        (_S0[x >> 24] << 24)
        | (_S1[(x >> 16) & 0xFF] << 16)
        | (_S0[(x >> 8) & 0xFF] << 8)
        | _S1[x & 0xFF]
    )


def _feedback(s: list[int]) -> int:
    v = s[0]
    v = _add31(v, _rot31(s[0], 8))
    v = _add31(v, _rot31(s[4], 20))
    v = _add31(v, _rot31(s[10], 21))
    v = _add31(v, _rot31(s[13], 17))
    v = _add31(v, _rot31(s[15], 15))
    return v


def _shift_in(s: list[int], v: int) -> None:
    # a zero cell is never stored; 0 and 2^31-1 are the same residue
    if v == 0:
        v = MOD31
    del s[0]
    s.append(v)


def _bit_reorganization(s: list[int]) -> tuple[int, int, int, int]:
    x0 = ((s[15] & 0x7FFF8000) << 1) | (s[14] & 0xFFFF)
    x1 = ((s[11] & 0xFFFF) << 16) | (s[9] >> 15)
    x2 = ((s[7] & 0xFFFF) << 16) | (s[5] >> 15)
    x3 = ((s[2] & 0xFFFF) << 16) | (s[0] >> 15)
    return x0, x1, x2, x3


def _nonlinear(state: ZucState, x0: int, x1: int, x2: int) -> int:
    w = ((x0 ^ state.r1) + state.r2) & MASK32
    w1 = (state.r1 + x1) & MASK32
    w2 = state.r2 ^ x2
    u = ((w1 << 16) | (w2 >> 16)) & MASK32
    v = ((w2 << 16) | (w1 >> 16)) & MASK32
    state.r1 = _sbox(_l1(u))
    state.r2 = _sbox(_l2(v))
    return w


def zuc_init(key: bytes, iv: bytes) -> ZucState:
    """Load a 128-bit key and IV and run the 32 initialization rounds."""
    if len(key) != 16 or len(iv) != 16:
        raise ValueError("ZUC key and IV must both be 16 bytes")
    state = ZucState(lfsr=[(key[i] << 23) | (_D[i] << 8) | iv[i] for i in range(16)])
    s = state.lfsr
    for _ in range(32):
        x0, x1, x2, _x3 = _bit_reorganization(s)
        w = _nonlinear(state, x0, x1, x2)
        _shift_in(s, _add31(_feedback(s), w >> 1))
    # first working-mode step; its output is discarded by the standard
    x0, x1, x2, _x3 = _bit_reorganization(s)
    _nonlinear(state, x0, x1, x2)
    _shift_in(s, _feedback(s))
    return state


def zuc_next_word(state: ZucState) -> int:
    s = state.lfsr
    x0, x1, x2, x3 = _bit_reorganization(s)
    z = _nonlinear(state, x0, x1, x2) ^ x3
    _shift_in(s, _feedback(s))
    state.words_emitted += 1
    return z


def zuc_keystream(state: ZucState, n: int) -> list[int]:
    if n < 0:
        raise ValueError("n must be non-negative")
    return [zuc_next_word(state) for _ in range(n)]
