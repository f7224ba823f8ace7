"""SHA-256 block compression, commitment roots, pruning and entropy mixing."""

from __future__ import annotations

import functools
import hashlib
import struct

from .errors import EvaluationFailed, UnknownName, WidthMismatch
from .term import (
    ASSERTL,
    ASSERTR,
    CASE,
    TermDag,
    Term,
    assertl,
    assertr,
    comp,
    injl,
    iden,
    pair,
    take,
    unit,
    _term,
    witness,
    WITNESS,
)
from .value import Value

SHA256_IV = bytes.fromhex("6a09e667bb67ae853c6ef372a54ff53a510e527f9b05688c1f83d9ab5be0cd19")

_K = (
    0x428A2F98, 0x71374491, 0xB5C0FBCF, 0xE9B5DBA5, 0x3956C25B, 0x59F111F1, 0x923F82A4, 0xAB1C5ED5,
    0xD807AA98, 0x12835B01, 0x243185BE, 0x550C7DC3, 0x72BE5D74, 0x80DEB1FE, 0x9BDC06A7, 0xC19BF174,
    0xE49B69C1, 0xEFBE4786, 0x0FC19DC6, 0x240CA1CC, 0x2DE92C6F, 0x4A7484AA, 0x5CB0A9DC, 0x76F988DA,
    0x983E5152, 0xA831C66D, 0xB00327C8, 0xBF597FC7, 0xC6E00BF3, 0xD5A79147, 0x06CA6351, 0x14292967,
    0x27B70A85, 0x2E1B2138, 0x4D2C6DFC, 0x53380D13, 0x650A7354, 0x766A0ABB, 0x81C2C92E, 0x92722C85,
    0xA2BFE8A1, 0xA81A664B, 0xC24B8B70, 0xC76C51A3, 0xD192E819, 0xD6990624, 0xF40E3585, 0x106AA070,
    0x19A4C116, 0x1E376C08, 0x2748774C, 0x34B0BCB5, 0x391C0CB3, 0x4ED8AA4A, 0x5B9CCA4F, 0x682E6FF3,
    0x748F82EE, 0x78A5636F, 0x84C87814, 0x8CC70208, 0x90BEFFFA, 0xA4506CEB, 0xBEF9A3F7, 0xC67178F2,
)
SHA256_K = _K

_M32 = 0xFFFFFFFF


def sha256_compress(iv: bytes, block: bytes) -> bytes:
    """The raw SHA-256 block compression function (no padding, no length)."""
    if len(iv) != 32 or len(block) != 64:
        raise WidthMismatch(f"compress needs 32 + 64 bytes, got {len(iv)} + {len(block)}")
    w = list(struct.unpack(">16I", block))
    m = _M32
    for i in range(16, 64):
        x, y = w[i - 15], w[i - 2]
        s0 = ((x >> 7) | (x << 25)) ^ ((x >> 18) | (x << 14)) ^ (x >> 3)
        s1 = ((y >> 17) | (y << 15)) ^ ((y >> 19) | (y << 13)) ^ (y >> 10)
        w.append((w[i - 16] + (s0 & m) + w[i - 7] + (s1 & m)) & m)
    h = struct.unpack(">8I", iv)
    a, b, c, d, e, f, g, hh = h
    for k, wi in zip(_K, w):
        s1 = ((e >> 6) | (e << 26)) ^ ((e >> 11) | (e << 21)) ^ ((e >> 25) | (e << 7))
        t1 = hh + (s1 & m) + ((e & f) ^ (~e & g)) + k + wi
        s0 = ((a >> 2) | (a << 30)) ^ ((a >> 13) | (a << 19)) ^ ((a >> 22) | (a << 10))
        t2 = (s0 & m) + ((a & b) ^ (a & c) ^ (b & c))
        hh, g, f, e, d, c, b, a = g, f, e, (d + t1) & m, c, b, a, (t1 + t2) & m
    out = [(x + y) & _M32 for x, y in zip(h, (a, b, c, d, e, f, g, hh))]
    return struct.pack(">8I", *out)


def sha256_compress_int(x: int) -> int:
    """Compression on a packed 768-bit ``iv || block`` integer."""
    data = x.to_bytes(96, "big")
    return int.from_bytes(sha256_compress(data[:32], data[32:]), "big")


def sha256_pad(message: bytes) -> list[bytes]:
    """Standard SHA-256 padding split into 64-byte blocks."""
    padded = message + b"\x80" + b"\x00" * ((55 - len(message)) % 64) + struct.pack(">Q", 8 * len(message))
    return [padded[i : i + 64] for i in range(0, len(padded), 64)]


TAG_NAMES = (
    "iden", "comp", "unit", "injl", "injr", "case", "pair",
    "take", "drop", "fail", "witness", "sighash",
)


@functools.lru_cache(maxsize=None)
def tag(name: str) -> bytes:
    """SHA-256 of the lowercase combinator name."""
    if name not in TAG_NAMES:
        raise UnknownName(f"no tag for {name!r}")
    return hashlib.sha256(name.encode("ascii")).digest()


_ZERO256 = bytes(32)
_ZERO512 = bytes(64)


@functools.lru_cache(maxsize=1 << 16)
def _node_root(name: str, payload: bytes) -> bytes:
    return sha256_compress(tag(name), payload)


def node_root(kind: str, child_roots: tuple[bytes, ...] = (), hash: bytes | None = None) -> bytes:
    """Root of one node given its children's roots (and assertion hash)."""
    if kind == ASSERTL:
        return _node_root(CASE, child_roots[0] + hash)
    if kind == ASSERTR:
        return _node_root(CASE, hash + child_roots[0])
    if not child_roots:
        return _node_root(kind, _ZERO512)
    if len(child_roots) == 1:
        return _node_root(kind, child_roots[0] + _ZERO256)
    return _node_root(kind, child_roots[0] + child_roots[1])


def merkle_roots(dag: TermDag) -> list[bytes]:
    """Root of every node, memoized on the DAG."""
    hit = dag._memo.get("merkle")
    if hit is None:
        hit = []
        for node in dag.nodes:
            hit.append(node_root(node.kind, tuple(hit[c] for c in node.children), node.hash))
        dag._memo["merkle"] = hit
    return hit


def merkle_root(dag: TermDag) -> bytes:
    return merkle_roots(dag)[dag.root]


def root_hex(root: bytes) -> str:
    return root.hex()


def term_root(t: Term) -> bytes:
    return merkle_root(TermDag.from_term(t))


def prune(dag: TermDag, input: Value, env=None, ty_in=None, ty_out=None) -> TermDag:
    """Replace case nodes that only ever took one branch by assertions.

    ``ty_in`` / ``ty_out`` fix the root type when it is not the principal one.
    Raises EvaluationFailed if the program does not succeed on ``input``.
    """
    from .semantics import EMPTY_ENV, eval_recording
    from .term import infer_types

    typed = infer_types(dag, ty_in, ty_out)
    outcome, taken = eval_recording(typed, input, env if env is not None else EMPTY_ENV)
    if outcome.is_bottom:
        raise EvaluationFailed("cannot prune a program that fails on this input")
    roots = merkle_roots(dag)
    terms: list[Term] = []
    for i, node in enumerate(dag.nodes):
        kids = [terms[c] for c in node.children]
        if node.kind == CASE:
            left = (i, 0) in taken
            right = (i, 1) in taken
            if left and not right:
                terms.append(assertl(kids[0], roots[node.children[1]]))
                continue
            if right and not left:
                terms.append(assertr(roots[node.children[0]], kids[1]))
                continue
        if node.kind == WITNESS:
            terms.append(witness(node.value, node.declared))
        else:
            terms.append(_term(node.kind, tuple(kids), node.hash, node.value, node.declared))
    return TermDag.from_term(terms[dag.root])


def mix_entropy_term(t: Term, h: bytes) -> Term:
    return comp(pair(injl(iden()), unit()), assertl(take(t), h))


def mix_entropy(dag: TermDag, h: bytes) -> TermDag:
    """Same semantics as ``dag``, different root depending on ``h``."""
    return TermDag.from_term(mix_entropy_term(dag.term(), h))
