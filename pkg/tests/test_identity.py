import pytest
from hypothesis import given, settings, strategies as st

from vkpseudo import crypto
from vkpseudo.errors import ChainExhaustedError, MalformedIdentityError
from vkpseudo.identity import (
    IdentityKind,
    Imsi,
    Pseudonym,
    PseudonymChain,
    anchor_pseudonym,
    decode_identity,
    derive_iv,
    encode_identity,
    expand_40,
    load_registry,
    replay_chain,
    save_registry,
)

from _reference import ref_pseudonym_msins

KEY1 = (1).to_bytes(16, "big")
IMSI = Imsi("460", "001", 0x0123456789)

# frozen from tests/_reference.py (independent pipeline) for key=1, sqn=1
REF_MSINS = [0xE2D214A05A, 0x497CAF398E, 0xD6660E5618]

digits3 = st.text(alphabet="0123456789", min_size=3, max_size=3)
pseudonyms = st.builds(
    Pseudonym, digits3, digits3, st.integers(0, 2**40 - 1), st.sampled_from(list(IdentityKind))
)


def test_imsi_validation():
    with pytest.raises(MalformedIdentityError):
        Imsi("46", "001", 1)
    with pytest.raises(MalformedIdentityError):
        Imsi("460", "0a1", 1)
    with pytest.raises(MalformedIdentityError):
        Imsi("460", "001", 1 << 40)


def test_equality_ignores_kind():
    a = Pseudonym("460", "001", 7, IdentityKind.SHARED)
    b = Pseudonym("460", "001", 7, IdentityKind.ASSISTANT)
    assert a == b and hash(a) == hash(b)
    assert a != Pseudonym("460", "002", 7)


def test_derive_iv_structure(rng):
    key = rng.bytes(16)
    iv = derive_iv(key, 42)
    assert iv == derive_iv(key, 42)
    out = crypto.milenage(key, crypto.rand_from_sqn(42), 0, b"\x00\x00")
    assert iv[:8] == out.ck[:8]
    assert iv[8:] == out.ik[8:]


def test_derive_iv_sqn_sensitivity(rng):
    for _ in range(10_000):
        key = rng.bytes(16)
        sqn = int(rng.integers(0, 2**47))
        assert derive_iv(key, sqn) != derive_iv(key, sqn + 1)


@pytest.mark.parametrize(
    "w1, w2, ks",
    [(0, 0, 0), (0xFFFFFFFF, 0xFFFFFFFF, 0xFFFFFFFFFF), (0x12345678, 0x9ABCDEF0, 0x123456789A)],
)
def test_expand_40(w1, w2, ks):
    assert expand_40(w1, w2) == ks


def test_next_pseudonym_matches_independent_pipeline():
    chain = PseudonymChain(key=KEY1, imsi=IMSI, sqn_imsi=1)
    got = [chain.activate().msin, chain.next_pseudonym().msin, chain.next_pseudonym().msin]
    assert got == REF_MSINS
    assert ref_pseudonym_msins(KEY1, 1, IMSI.msin, 3) == REF_MSINS


def test_zero_keystream_leaves_msin(monkeypatch):
    chain = PseudonymChain(key=KEY1, imsi=IMSI)
    monkeypatch.setattr(chain, "expand_keystream_40", lambda: 0)
    assert chain.next_pseudonym().msin == IMSI.msin


def test_xor_involution(rng):
    for _ in range(100):
        ks = int(rng.integers(0, 2**40))
        assert (IMSI.msin ^ ks) ^ ks == IMSI.msin


def test_chain_counters(rng):
    chain = PseudonymChain(key=rng.bytes(16), imsi=IMSI, sqn_imsi=10)
    assert chain.index == 0 and not chain.active
    assert chain.live_identity().kind is IdentityKind.REAL_IMSI
    p1 = chain.activate()
    assert chain.sqn_p0 == 10
    assert (chain.index, chain.count) == (1, 2)
    for n in range(2, 20):
        chain.next_pseudonym()
        assert (chain.index, chain.count) == (n, 2 * n)
    assert chain.current != p1
    assert chain.live_identity() == chain.current


def test_synchrony_and_prefix_invariance(rng):
    key = rng.bytes(16)
    a = PseudonymChain(key=key, imsi=IMSI, sqn_imsi=77)
    b = PseudonymChain(key=key, imsi=IMSI, sqn_imsi=77)
    seq_a = [a.activate()] + [a.next_pseudonym() for _ in range(300)]
    seq_b = [b.activate()] + [b.next_pseudonym() for _ in range(300)]
    assert seq_a == seq_b
    for p in seq_a + [a.anchor]:
        assert (p.mcc, p.mnc) == (IMSI.mcc, IMSI.mnc)
    assert replay_chain(key, IMSI, 77, 301) == a.current


def test_anchor_pseudonym(rng, monkeypatch):
    key = rng.bytes(16)
    p0 = anchor_pseudonym(key, IMSI, 5)
    assert p0.kind is IdentityKind.ANCHOR
    assert (p0.mcc, p0.mnc) == (IMSI.mcc, IMSI.mnc)
    assert p0.msin == IMSI.msin ^ crypto.hmac40(key, crypto.encode_sqn(5))
    monkeypatch.setattr(crypto, "hmac40", lambda k, m: 0)
    assert anchor_pseudonym(key, IMSI, 5).msin == IMSI.msin


def test_anchor_varies_with_sqn(rng):
    for _ in range(10_000):
        key = rng.bytes(16)
        sqn = int(rng.integers(0, 2**47))
        assert anchor_pseudonym(key, IMSI, sqn) != anchor_pseudonym(key, IMSI, sqn + 1)


def test_advance_sqn():
    chain = PseudonymChain(key=KEY1, imsi=IMSI, sqn_p0=5)
    assert chain.advance_sqn("p0") == 6
    chain.advance_sqn("p0")
    assert chain.sqn_p0 == 7
    chain.sqn_imsi = 2**48 - 1
    with pytest.raises(ChainExhaustedError):
        chain.advance_sqn("imsi")
    assert chain.sqn_imsi == 2**48 - 1


def test_rebuild_epoch_restarts_keystream(rng):
    chain = PseudonymChain(key=rng.bytes(16), imsi=IMSI, sqn_imsi=3)
    chain.activate()
    chain.next_pseudonym()
    old_anchor = chain.anchor
    p = chain.rebuild_epoch()
    assert chain.sqn_p0 == 4 and chain.count == 2 and chain.index == 3
    assert chain.anchor != old_anchor
    assert p == replay_chain(chain.key, IMSI, 4, 1)


@settings(max_examples=300)
@given(pseudonyms)
def test_codec_round_trip(p):
    data = encode_identity(p)
    assert len(data) == 8
    assert decode_identity(data) == p


def test_codec_errors():
    data = encode_identity(Pseudonym("460", "001", 5))
    with pytest.raises(MalformedIdentityError):
        decode_identity(data[:-1])
    with pytest.raises(MalformedIdentityError):
        decode_identity(b"\xa0" + data[1:])


def test_codec_injective(rng):
    seen = {}
    for _ in range(10_000):
        p = Pseudonym(f"{rng.integers(0, 1000):03d}", f"{rng.integers(0, 1000):03d}", int(rng.integers(0, 2**40)))
        enc = encode_identity(p)
        assert seen.setdefault(enc, p) == p


def test_record_round_trip(tmp_path, rng):
    chains = []
    for i in range(5):
        c = PseudonymChain(key=rng.bytes(16), imsi=Imsi("460", "001", i), sqn_imsi=100 + i)
        if i:
            c.activate()
            for _ in range(i):
                c.next_pseudonym()
        chains.append(c)
    path = tmp_path / "registry.txt"
    save_registry(chains, path)
    lines = path.read_text().splitlines()
    assert len(lines) == 5 and all(len(line.split()) == 8 for line in lines)
    restored = load_registry(path)
    for a, b in zip(chains, restored):
        assert (a.key, a.imsi, a.sqn_imsi, a.sqn_p0, a.count, a.index) == (b.key, b.imsi, b.sqn_imsi, b.sqn_p0, b.count, b.index)
        assert a.current == b.current
        if a.active:
            assert a.next_pseudonym() == b.next_pseudonym()


def test_record_rejects_bad_lines():
    with pytest.raises(MalformedIdentityError):
        PseudonymChain.from_record("00 460 001")
