"""Generators for standard programs: bit and word arithmetic, SHA-256
compression, a toy signature check and the basic signature program."""

from __future__ import annotations

import functools
import random

from .errors import OutOfRange, TypeMismatch, UnsupportedWidth
from .merkle import SHA256_K, sha256_compress
from .semantics import scribe
from .term import (
    Term,
    TermDag,
    case,
    comp,
    drop,
    fail,
    iden,
    injl,
    injr,
    pair,
    sighash,
    take,
    unit,
    witness,
)
from .ty import SIGHASH_TYPE, word
from .value import Value, bytes_to_word, repr_word, value_has_type

MAX_ADDER_WIDTH = 256
MAX_MULTIPLIER_WIDTH = 128


def _check_width(n: int, limit: int) -> None:
    if not isinstance(n, int) or n < 1 or n & (n - 1) or n > limit:
        raise UnsupportedWidth(f"width must be a power of two between 1 and {limit}, got {n}")


def proj(path: str) -> Term:
    """Projection by a path of 'l' (take) and 'r' (drop), outermost first."""
    t = iden()
    for step in reversed(path):
        t = take(t) if step == "l" else drop(t)
    return t


def const_word(k: int, n: int) -> Term:
    return scribe(repr_word(k, n))


# ---------------------------------------------------------------------------
# bits


def flip() -> Term:
    return comp(pair(iden(), unit()), case(injr(unit()), injl(unit())))


def half_adder() -> Term:
    return case(drop(pair(injl(unit()), iden())), drop(pair(iden(), flip())))


def and1() -> Term:
    """2 x 2 |- 2."""
    return case(injl(unit()), drop(iden()))


def or1() -> Term:
    return case(drop(iden()), injr(unit()))


def xor1() -> Term:
    return case(drop(iden()), drop(flip()))


def eq1() -> Term:
    return case(drop(flip()), drop(iden()))


def ch1() -> Term:
    """2 x (2 x 2) |- 2: first bit selects between the other two."""
    return case(drop(drop(iden())), drop(take(iden())))


def maj1() -> Term:
    return case(drop(and1()), drop(or1()))


# ---------------------------------------------------------------------------
# words


@functools.lru_cache(maxsize=None)
def full_adder(n: int) -> Term:
    """(2^n x 2^n) x 2 |- 2 x 2^n, ripple carry."""
    _check_width(n, MAX_ADDER_WIDTH)
    if n == 1:
        adder = half_adder()
        return comp(
            pair(take(adder), drop(iden())),
            comp(
                pair(take(take(iden())), comp(pair(take(drop(iden())), drop(iden())), adder)),
                pair(case(drop(take(iden())), injr(unit())), drop(drop(iden()))),
            ),
        )
    fa = full_adder(n // 2)
    return comp(
        pair(
            take(pair(take(take(iden())), drop(take(iden())))),
            comp(pair(take(pair(take(drop(iden())), drop(drop(iden())))), drop(iden())), fa),
        ),
        comp(
            pair(drop(drop(iden())), comp(pair(take(iden()), drop(take(iden()))), fa)),
            pair(drop(take(iden())), pair(drop(drop(iden())), take(iden()))),
        ),
    )


@functools.lru_cache(maxsize=None)
def adder(n: int) -> Term:
    """2^n x 2^n |- 2^n, addition modulo 2^n."""
    return comp(comp(pair(iden(), injl(unit())), full_adder(n)), drop(iden()))


def complement(n: int) -> Term:
    return lift1(flip(), n)


@functools.lru_cache(maxsize=None)
def full_subtractor(n: int) -> Term:
    """(2^n x 2^n) x 2 |- 2 x 2^n: a - b - borrow_in, returning (borrow_out, diff).

    Computed as a + not(b) + not(borrow_in), with the carry complemented.
    """
    _check_width(n, MAX_ADDER_WIDTH)
    prep = pair(pair(take(take(iden())), take(comp(drop(iden()), complement(n)))), comp(drop(iden()), flip()))
    return comp(comp(prep, full_adder(n)), pair(comp(take(iden()), flip()), drop(iden())))


def lift1(op: Term, n: int) -> Term:
    """Apply a bit-level ``op : 2 |- 2`` to every bit of a 2^n word."""
    t = op
    w = 1
    while w < n:
        t = pair(take(t), drop(t))
        w *= 2
    return t


@functools.lru_cache(maxsize=None)
def bitwise2(name: str, n: int) -> Term:
    """Pointwise binary op over 2^n x 2^n; ``name`` in and/or/xor."""
    if n == 1:
        return {"and": and1, "or": or1, "xor": xor1}[name]()
    half = bitwise2(name, n // 2)
    return pair(
        comp(pair(take(take(iden())), drop(take(iden()))), half),
        comp(pair(take(drop(iden())), drop(drop(iden()))), half),
    )


@functools.lru_cache(maxsize=None)
def bitwise3(name: str, n: int) -> Term:
    """Pointwise ternary op over 2^n x (2^n x 2^n); ``name`` in ch/maj."""
    if n == 1:
        return {"ch": ch1, "maj": maj1}[name]()
    half = bitwise3(name, n // 2)
    hi = pair(take(take(iden())), pair(drop(take(take(iden()))), drop(drop(take(iden())))))
    lo = pair(take(drop(iden())), pair(drop(take(drop(iden()))), drop(drop(drop(iden())))))
    return pair(comp(hi, half), comp(lo, half))


@functools.lru_cache(maxsize=None)
def eq_word(n: int) -> Term:
    """2^n x 2^n |- 2, one iff both words are equal."""
    _check_width(n, MAX_ADDER_WIDTH)
    if n == 1:
        return eq1()
    half = eq_word(n // 2)
    return comp(
        pair(
            comp(pair(take(take(iden())), drop(take(iden()))), half),
            comp(pair(take(drop(iden())), drop(drop(iden()))), half),
        ),
        and1(),
    )


@functools.lru_cache(maxsize=None)
def lt_word(n: int) -> Term:
    """2^n x 2^n |- 2, one iff a < b (the borrow of a - b)."""
    return comp(comp(pair(iden(), injl(unit())), full_subtractor(n)), take(iden()))


@functools.lru_cache(maxsize=None)
def le_word(n: int) -> Term:
    """a <= b iff not (b < a)."""
    return comp(comp(pair(drop(iden()), take(iden())), lt_word(n)), flip())


@functools.lru_cache(maxsize=None)
def full_multiplier(n: int) -> Term:
    """(2^n x 2^n) x (2^n x 2^n) |- 2^2n computing a*b + c + d."""
    if n == 1:
        # a*b + c + d = fulladder of ((a and b, c), d)
        return comp(pair(pair(comp(take(iden()), and1()), drop(take(iden()))), drop(drop(iden()))), full_adder(1))
    fm = full_multiplier(n // 2)
    # X = ((a, b), (c, d)) with a = (a1, a0) etc.
    a1, a0 = proj("lll"), proj("llr")
    b1, b0 = proj("lrl"), proj("lrr")
    c1, c0 = proj("rll"), proj("rlr")
    d1, d0 = proj("rrl"), proj("rrr")
    # S1 = (X, t0), S2 = (S1, t1), S3 = (S2, t2), S4 = (S3, t3)
    t0 = comp(pair(pair(a0, b0), pair(c0, d0)), fm)
    s1 = pair(iden(), t0)
    t1 = comp(pair(pair(take(a1), take(b0)), pair(take(c1), proj("rl"))), fm)
    s2 = pair(iden(), t1)
    t2 = comp(pair(pair(take(take(a0)), take(take(b1))), pair(take(take(d1)), proj("rr"))), fm)
    s3 = pair(iden(), t2)
    t3 = comp(pair(pair(take(take(take(a1))), take(take(take(b1)))), pair(proj("lrl"), proj("rl"))), fm)
    s4 = pair(iden(), t3)
    out = pair(drop(iden()), pair(proj("lrr"), proj("lllrr")))
    return comp(s1, comp(s2, comp(s3, comp(s4, out))))


@functools.lru_cache(maxsize=None)
def multiplier(n: int) -> Term:
    """2^n x 2^n |- 2^2n."""
    _check_width(n, MAX_MULTIPLIER_WIDTH)
    zero = const_word(0, n)
    return comp(pair(iden(), pair(zero, zero)), full_multiplier(n))


# ---------------------------------------------------------------------------
# SHA-256 block compression


def tuple_tree(parts: list[Term]) -> Term:
    """Balanced nested pairs of a power-of-two list of terms."""
    while len(parts) > 1:
        parts = [pair(parts[i], parts[i + 1]) for i in range(0, len(parts), 2)]
    return parts[0]


def _bit_path(j: int, width: int) -> str:
    path = ""
    while width > 1:
        width //= 2
        if j < width:
            path += "l"
        else:
            path += "r"
            j -= width
    return path


def select_word(src: list[int | None], prefix: str = "") -> Term:
    """Wiring term building a word whose bit i is input bit ``src[i]``
    (None for a constant zero). Aligned runs are copied as whole blocks.
    """
    width = len(src)

    def build(lo: int, size: int) -> Term:
        first = src[lo]
        if first is not None and first % size == 0 and all(
            src[lo + k] == first + k for k in range(size)
        ):
            return proj(prefix + _bit_path(first // size, width // size))
        if size == 1:
            return injl(unit())
        half = size // 2
        return pair(build(lo, half), build(lo + half, half))

    return build(0, width)


def rotr(r: int, n: int = 32) -> Term:
    return select_word([(i - r) % n for i in range(n)])


def shr(r: int, n: int = 32) -> Term:
    return select_word([None if i < r else i - r for i in range(n)])


def _xor3(x: Term, y: Term, z: Term) -> Term:
    x32 = bitwise2("xor", 32)
    return comp(pair(comp(pair(x, y), x32), z), x32)


@functools.lru_cache(maxsize=1)
def _sha_parts() -> dict[str, Term]:
    add = adder(32)
    return {
        "add": add,
        "Sigma0": _xor3(rotr(2), rotr(13), rotr(22)),
        "Sigma1": _xor3(rotr(6), rotr(11), rotr(25)),
        "sigma0": _xor3(rotr(7), rotr(18), shr(3)),
        "sigma1": _xor3(rotr(17), rotr(19), shr(10)),
        "ch": bitwise3("ch", 32),
        "maj": bitwise3("maj", 32),
    }


def _add(x: Term, y: Term) -> Term:
    return comp(pair(x, y), adder(32))


@functools.lru_cache(maxsize=1)
def sha256_round() -> Term:
    """2^32 x (2^256 x 2^512) |- 2^256 x 2^512.

    One round on (K, (state, window)); the window holds the next sixteen
    schedule words and is shifted by one, appending the next word.
    """
    p = _sha_parts()
    # paths inside X = (K, (S, W))
    def st(i: int) -> Term:
        return proj("rl" + _bit_path(i, 8))

    def wd(j: int) -> Term:
        return proj("rr" + _bit_path(j, 16))

    k = proj("l")
    a, b, c, d, e, f, g, h = (st(i) for i in range(8))
    t1 = _add(
        _add(_add(h, comp(e, p["Sigma1"])), _add(comp(pair(e, pair(f, g)), p["ch"]), k)),
        wd(0),
    )
    t2 = _add(comp(a, p["Sigma0"]), comp(pair(a, pair(b, c)), p["maj"]))
    # Y = (X, T1)
    T1 = drop(iden())

    def x(t: Term) -> Term:
        return take(t)

    new_state = tuple_tree(
        [_add(T1, x(t2)), x(a), x(b), x(c), _add(x(d), T1), x(e), x(f), x(g)]
    )
    w16 = _add(
        _add(comp(x(wd(14)), p["sigma1"]), x(wd(9))),
        _add(comp(x(wd(1)), p["sigma0"]), x(wd(0))),
    )
    new_window = tuple_tree([x(wd(j)) for j in range(1, 16)] + [w16])
    return comp(pair(iden(), t1), pair(new_state, new_window))


@functools.lru_cache(maxsize=1)
def sha256_block() -> Term:
    """2^256 x 2^512 |- 2^256: the SHA-256 compression function."""
    body = sha256_round()
    rounds = [comp(pair(const_word(kk, 32), iden()), body) for kk in SHA256_K]
    while len(rounds) > 1:
        rounds = [comp(rounds[i], rounds[i + 1]) for i in range(0, len(rounds), 2)]
    add_words = _wordwise(adder(32), 32, 256)
    return comp(pair(take(iden()), comp(rounds[0], take(iden()))), add_words)


def _wordwise(op: Term, base: int, n: int) -> Term:
    t = op
    w = base
    while w < n:
        t = pair(
            comp(pair(take(take(iden())), drop(take(iden()))), t),
            comp(pair(take(drop(iden())), drop(drop(iden()))), t),
        )
        w *= 2
    return t


# ---------------------------------------------------------------------------
# signatures


def checksig_toy() -> Term:
    """Signature x (PubKey x 2^256) |- 2: valid iff compress(m, s) = p.

    Not a real signature scheme: anyone can produce a valid signature.
    """
    s, p, m = proj("l"), proj("rl"), proj("rr")
    return comp(pair(comp(pair(m, s), sha256_block()), p), eq_word(256))


def toy_check(sig: bytes, pubkey: bytes, digest: bytes) -> bool:
    return sha256_compress(digest, sig) == pubkey


def toy_keypair(digest: bytes, rng: random.Random) -> tuple[bytes, bytes]:
    """A (signature, public key) pair that verifies for ``digest``."""
    sig = rng.randbytes(64)
    return sig, sha256_compress(digest, sig)


def basic_verify(pubkey: bytes, sig: Value | None = None, mode: Value | None = None) -> Term:
    """1 |- 1 program: witness signature checked against ``pubkey`` over the
    transaction digest selected by the witness mode."""
    if len(pubkey) != 32:
        raise TypeMismatch("public key must be 32 bytes")
    if sig is not None and not value_has_type(sig, word(512)):
        raise TypeMismatch("signature witness must have type 2^512")
    if mode is not None and not value_has_type(mode, SIGHASH_TYPE):
        raise TypeMismatch("mode witness must have the sighash mode type")
    pk = scribe(bytes_to_word(pubkey))
    return comp(
        pair(witness(sig), pair(pk, comp(witness(mode), sighash()))),
        comp(pair(checksig_toy(), unit()), case(fail(), unit())),
    )


# ---------------------------------------------------------------------------
# TermDag front ends


def gen_flip() -> TermDag:
    return TermDag.from_term(flip())


def gen_half_adder() -> TermDag:
    return TermDag.from_term(half_adder())


def gen_full_adder(n: int) -> TermDag:
    return TermDag.from_term(full_adder(n))


def gen_multiplier(n: int) -> TermDag:
    return TermDag.from_term(multiplier(n))


def gen_eq(n: int) -> TermDag:
    return TermDag.from_term(eq_word(n))


def gen_const_word(k: int, n: int) -> TermDag:
    if not 0 <= k < (1 << n):
        raise OutOfRange(f"{k} does not fit in {n} bits")
    return TermDag.from_term(const_word(k, n))


@functools.lru_cache(maxsize=1)
def gen_sha256_block() -> TermDag:
    return TermDag.from_term(sha256_block())


def gen_checksig_toy() -> TermDag:
    return TermDag.from_term(checksig_toy())


def gen_basic_verify(pubkey: bytes, sig: Value | None = None, mode: Value | None = None) -> TermDag:
    return TermDag.from_term(basic_verify(pubkey, sig, mode))
