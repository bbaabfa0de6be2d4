"""Independent, deliberately naive re-implementation of the pseudonym pipeline.

Shares no code with the package: ZUC uses plain ``%`` arithmetic and string
bit slicing, Milenage is written over Python integers.  Only AES and SHA-256
come from outside.
"""

import hashlib

from cryptography.hazmat.primitives.ciphers import Cipher, algorithms, modes

P31 = 2**31 - 1

_S0_HEX = (
    "3e725b47cae0003304d1549809b96dcb7b1bf932af9d6aa5b82dfc1d08530390"
    "4d4e8499e4ced991ddb685488b296eaccdc1f81e734369c6b5bdfd396320d438"
    "767db2a7cfed57c5f32cbb142106559be3ef5e314f7f5aa40d8251495fba581c"
    "4a16d517a892241f8cffd8ae2e01d3ad3b4bda46ebc9de9a8f87d73a806f2fc8"
    "b1b437f70a2213287ccc3c89c7c3965607bf7ef00b2b975235417961a64c10fe"
    "bc2695888ab0a3fbc01894f2e1e5e95dd0dc1166645cec59427512f5749caa23"
    "0e86abbe2a02e767e644a26cc2939ff1f6fa36d250689e6271153dd640c4e20f"
    "8e83776b25053f0c30ea70b7a1e8a9658d271adb81b3a0f4457a19dfee783460"
)
_S1_HEX = (
    "55c263713bc847869f3cda5b29aafd778cc5940ca61a1300e3a8167240f9f842"
    "4426689681d9453e1076c6a78b3943e13ab5562ac06db3052266bfdc0bfa6248"
    "dd20110636c9c1cff62752bb69f5d4877f844cd29c57a4bc4f9adffed68d7aeb"
    "2b53d85ca11417fb23d57d3067730809eeb7703f61b2198e4ee54b938f5ddba9"
    "adf1ae2ecb0dfcf42d466e1d97e8d1e94d37a5755e839eab829db91ce0cd4989"
    "01b6bd5824a25f387899159050b895e4d091c7ceed0fb46fa0ccf0024a79c3de"
    "a3efea51e66b18ec1b2c80f774e7ff215a6a541e41319235c433070aba7e0e34"
    "88b1987cf33d606c7bcad31f3265042864be859b2f598ad7b025acaf1203e2f2"
)
S0 = list(bytes.fromhex(_S0_HEX))
S1 = list(bytes.fromhex(_S1_HEX))
D = [
    "100010011010111", "010011010111100", "110001001101011", "001001101011110",
    "101011110001001", "011010111100010", "111000100110101", "000100110101111",
    "100110101111000", "010111100010011", "110101111000100", "001101011110001",
    "101111000100110", "011110001001101", "111100010011010", "100011110101100",
]


def bits(x, n):
    return format(x, f"0{n}b")


class RefZuc:
    def __init__(self, key, iv):
        self.s = [int(bits(key[i], 8) + D[i] + bits(iv[i], 8), 2) for i in range(16)]
        self.r1 = self.r2 = 0
        for _ in range(32):
            self.br()
            w = self.f()
            self.lfsr(w >> 1)
        self.br()
        self.f()
        self.lfsr(None)

    def br(self):
        b = [bits(v, 31) for v in self.s]
        self.x = [
            int(b[15][:16] + b[14][15:], 2),
            int(b[11][15:] + b[9][:16], 2),
            int(b[7][15:] + b[5][:16], 2),
            int(b[2][15:] + b[0][:16], 2),
        ]

    @staticmethod
    def rol(x, k):
        return ((x << k) | (x >> (32 - k))) % 2**32

    def sub(self, x):
        b = x.to_bytes(4, "big")
        return int.from_bytes(bytes([S0[b[0]], S1[b[1]], S0[b[2]], S1[b[3]]]), "big")

    def f(self):
        x0, x1, x2, _ = self.x
        w = ((x0 ^ self.r1) + self.r2) % 2**32
        w1 = (self.r1 + x1) % 2**32
        w2 = self.r2 ^ x2
        u = int(bits(w1, 32)[16:] + bits(w2, 32)[:16], 2)
        v = int(bits(w2, 32)[16:] + bits(w1, 32)[:16], 2)
        l1 = u ^ self.rol(u, 2) ^ self.rol(u, 10) ^ self.rol(u, 18) ^ self.rol(u, 24)
        l2 = v ^ self.rol(v, 8) ^ self.rol(v, 14) ^ self.rol(v, 22) ^ self.rol(v, 30)
        self.r1, self.r2 = self.sub(l1), self.sub(l2)
        return w

    def lfsr(self, u):
        s = self.s
        v = (2**15 * s[15] + 2**17 * s[13] + 2**21 * s[10] + 2**20 * s[4] + (1 + 2**8) * s[0]) % P31
        if u is not None:
            v = (v + u) % P31
        if v == 0:
            v = P31
        self.s = s[1:] + [v]

    def word(self):
        self.br()
        z = self.f() ^ self.x[3]
        self.lfsr(None)
        return z


def aes(key, block):
    return Cipher(algorithms.AES(key), modes.ECB()).encryptor().update(block)


OP = int("cdc202d5123e20f62b6d676ac72cb318", 16)
M128 = 2**128 - 1


def ref_f3_f4(key, rand):
    k = key
    opc = int.from_bytes(aes(k, OP.to_bytes(16, "big")), "big") ^ OP
    temp = int.from_bytes(aes(k, (int.from_bytes(rand, "big") ^ opc).to_bytes(16, "big")), "big")

    def out(r, c):
        x = temp ^ opc
        x = ((x << r) | (x >> (128 - r))) & M128 if r else x
        return (int.from_bytes(aes(k, (x ^ c).to_bytes(16, "big")), "big") ^ opc).to_bytes(16, "big")

    return out(32, 2), out(64, 4)


def ref_pseudonym_msins(key, sqn, msin, n):
    """MSINs of the first ``n`` shared pseudonyms seeded by (key, sqn)."""
    rand = hashlib.sha256(sqn.to_bytes(6, "big")).digest()[:16]
    ck, ik = ref_f3_f4(key, rand)
    z = RefZuc(key, ck[:8] + ik[8:])
    out = []
    for _ in range(n):
        w = (z.word() << 32) | z.word()
        out.append(msin ^ (w >> 24))
    return out
