from __future__ import annotations

import hashlib
import random

import pytest

from simplicity import stdlib
from simplicity.errors import TypeMismatch, UnsupportedWidth
from simplicity.merkle import SHA256_IV, sha256_compress
from simplicity.semantics import BOTTOM, TxEnv, eval_core, eval_ext, make_sighash
from simplicity.term import TermDag, infer_types
from simplicity.translate import run_term
from simplicity.ty import BIT, UNIT, prod, word
from simplicity.text import parse_value
from simplicity.value import UNIT_VALUE, PairV, bytes_to_word, interp_word, repr_word, word_to_bytes

def typed_of(t):
    return infer_types(TermDag.from_term(t))


def w2(a, b, n):
    return PairV(repr_word(a, n), repr_word(b, n))


@pytest.mark.parametrize("n", [1, 2, 4])
def test_full_adder_exhaustive(n):
    typed = typed_of(stdlib.full_adder(n))
    assert typed.source is prod(prod(word(n), word(n)), BIT)
    assert typed.target is prod(BIT, word(n))
    for a in range(1 << n):
        for b in range(1 << n):
            for c in (0, 1):
                out = eval_core(typed, PairV(w2(a, b, n), repr_word(c, 1)))
                assert interp_word(out.first, 1) * (1 << n) + interp_word(out.second, n) == a + b + c


def test_full_adder_large_samples():
    typed = typed_of(stdlib.full_adder(32))
    rng = random.Random(1)
    for _ in range(50):
        a, b, c = rng.getrandbits(32), rng.getrandbits(32), rng.getrandbits(1)
        out = eval_core(typed, PairV(w2(a, b, 32), repr_word(c, 1)))
        assert (interp_word(out.first, 1) << 32) + interp_word(out.second, 32) == a + b + c


@pytest.mark.parametrize("n", [1, 2, 4])
def test_multiplier_exhaustive(n):
    typed = typed_of(stdlib.multiplier(n))
    assert typed.target is word(2 * n)
    for a in range(1 << n):
        for b in range(1 << n):
            assert interp_word(eval_core(typed, w2(a, b, n)), 2 * n) == a * b


def test_multiplier_samples():
    typed = typed_of(stdlib.multiplier(16))
    rng = random.Random(2)
    for _ in range(30):
        a, b = rng.getrandbits(16), rng.getrandbits(16)
        assert interp_word(eval_core(typed, w2(a, b, 16)), 32) == a * b


def test_comparisons_and_subtraction():
    eq, lt, le = typed_of(stdlib.eq_word(4)), typed_of(stdlib.lt_word(4)), typed_of(stdlib.le_word(4))
    sub = typed_of(stdlib.full_subtractor(4))
    for a in range(16):
        for b in range(16):
            x = w2(a, b, 4)
            assert interp_word(eval_core(eq, x), 1) == int(a == b)
            assert interp_word(eval_core(lt, x), 1) == int(a < b)
            assert interp_word(eval_core(le, x), 1) == int(a <= b)
            out = eval_core(sub, PairV(x, repr_word(0, 1)))
            assert interp_word(out.first, 1) == int(a < b)
            assert interp_word(out.second, 4) == (a - b) % 16


def test_bitwise():
    for name, fn in [("and", lambda a, b: a & b), ("or", lambda a, b: a | b), ("xor", lambda a, b: a ^ b)]:
        typed = typed_of(stdlib.bitwise2(name, 8))
        for a, b in [(0, 0), (0xF0, 0x3C), (0xFF, 0x81)]:
            assert interp_word(eval_core(typed, w2(a, b, 8)), 8) == fn(a, b)


def test_unsupported_widths():
    with pytest.raises(UnsupportedWidth):
        stdlib.full_adder(3)
    with pytest.raises(UnsupportedWidth):
        stdlib.multiplier(256)
    with pytest.raises(UnsupportedWidth):
        stdlib.full_adder(512)


def abc_block() -> bytes:
    msg = b"abc"
    return msg + b"\x80" + bytes(64 - len(msg) - 1 - 8) + (8 * len(msg)).to_bytes(8, "big")


def test_sha256_abc():
    typed = typed_of(stdlib.sha256_block())
    assert typed.source is prod(word(256), word(512))
    assert typed.target is word(256)
    x = PairV(bytes_to_word(SHA256_IV), bytes_to_word(abc_block()))
    out = word_to_bytes(eval_core(typed, x), 256)
    assert out == hashlib.sha256(b"abc").digest()


def test_sha256_block_matches_native():
    typed = typed_of(stdlib.sha256_block())
    rng = random.Random(3)
    for _ in range(5):
        h, b = rng.randbytes(32), rng.randbytes(64)
        out = eval_core(typed, PairV(bytes_to_word(h), bytes_to_word(b)))
        assert word_to_bytes(out, 256) == sha256_compress(h, b)


def test_sha256_on_machine():
    typed = typed_of(stdlib.sha256_block())
    x = PairV(bytes_to_word(SHA256_IV), bytes_to_word(abc_block()))
    out, stats = run_term(typed, x, jets=False)
    assert word_to_bytes(out.value, 256) == hashlib.sha256(b"abc").digest()
    assert stats.jet_calls == 0


def test_checksig_toy():
    digest = bytes(range(32))
    sig, pk = stdlib.toy_keypair(digest, random.Random(4))
    assert stdlib.toy_check(sig, pk, digest)
    typed = typed_of(stdlib.checksig_toy())
    x = PairV(bytes_to_word(sig), PairV(bytes_to_word(pk), bytes_to_word(digest)))
    assert interp_word(eval_core(typed, x), 1) == 1
    bad = bytearray(sig)
    bad[0] ^= 1
    x = PairV(bytes_to_word(bytes(bad)), PairV(bytes_to_word(pk), bytes_to_word(digest)))
    assert interp_word(eval_core(typed, x), 1) == 0


def _mode():
    return parse_value("((L u), (L u))")


def test_basic_verify():
    env = TxEnv(b"spend 1 coin")
    mode = _mode()
    digest = word_to_bytes(make_sighash(mode, env), 256)
    sig, pk = stdlib.toy_keypair(digest, random.Random(5))
    good = infer_types(stdlib.gen_basic_verify(pk, bytes_to_word(sig), mode))
    assert good.source is UNIT and good.target is UNIT
    assert not eval_ext(good, UNIT_VALUE, env).is_bottom
    assert eval_ext(good, UNIT_VALUE, TxEnv(b"spend 2 coins")) is BOTTOM
    bad_sig = bytearray(sig)
    bad_sig[5] ^= 0x10
    bad = infer_types(stdlib.gen_basic_verify(pk, bytes_to_word(bytes(bad_sig)), mode))
    assert eval_ext(bad, UNIT_VALUE, env) is BOTTOM


def test_basic_verify_rejects_bad_witness_types():
    with pytest.raises(TypeMismatch):
        stdlib.basic_verify(bytes(31))
    with pytest.raises(TypeMismatch):
        stdlib.basic_verify(bytes(32), sig=repr_word(0, 8))


def test_generator_types():
    assert infer_types(stdlib.gen_flip()).source is BIT
    ha = infer_types(stdlib.gen_half_adder())
    assert ha.source is prod(BIT, BIT) and ha.target is prod(BIT, BIT)
    eq = infer_types(stdlib.gen_eq(8))
    assert eq.source is prod(word(8), word(8)) and eq.target is BIT
    assert infer_types(stdlib.gen_const_word(5, 8)).target is word(8)
