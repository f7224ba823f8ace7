"""Closure compiler used by the denotational evaluators.

Values are handled in the packed-integer cell encoding of ``value.pack``: a
value of type ``A`` is an ``A.bit_size``-bit integer, Undef padding read as 0.
Pure wiring (iden, unit, injections, projections, pairing and composition of
those) is fused into shift/mask segments. Other nodes become small closures,
and nodes with narrow inputs memoize their results.
"""

from __future__ import annotations

from typing import Callable

from .errors import MissingWitness
from .term import (
    ASSERTL,
    ASSERTR,
    CASE,
    COMP,
    DROP,
    FAIL,
    IDEN,
    INJL,
    INJR,
    PAIR,
    SIGHASH,
    TAKE,
    UNIT_T,
    WITNESS,
    TypedDag,
)
from .value import pack, unpack

WIRING = frozenset({IDEN, UNIT_T, INJL, INJR, TAKE, DROP, PAIR, COMP})
MEMO_WIDTH = 32
MEMO_CAP = 1 << 16
MAX_NESTING = 250


class Bottom(Exception):
    """Raised inside compiled code when evaluation fails."""


def _wire_fn(m: list[int], win: int) -> Callable[[int], int]:
    wout = len(m)
    if wout == win and all(m[i] == i for i in range(wout)):
        return lambda x: x
    segs = []
    ones = 0
    i = 0
    while i < wout:
        s = m[i]
        if s == -2:
            ones |= 1 << (wout - 1 - i)
            i += 1
            continue
        if s == -1:
            i += 1
            continue
        j = i + 1
        while j < wout and m[j] == m[j - 1] + 1:
            j += 1
        length = j - i
        segs.append((win - s - length, (1 << length) - 1, wout - i - length))
        i = j
    if not segs:
        return lambda x: ones
    if len(segs) <= 64:
        parts = []
        for rs, mk, ls in segs:
            term = f"(x >> {rs})" if rs else "x"
            if rs + mk.bit_length() < win:
                term = f"({term} & {mk})"
            if ls:
                term = f"({term} << {ls})"
            parts.append(term)
        if ones:
            parts.append(str(ones))
        return eval("lambda x: " + " | ".join(parts))  # noqa: S307 - generated from ints only

    def fn(x: int) -> int:
        acc = ones
        for rs, mk, ls in segs:
            acc |= ((x >> rs) & mk) << ls
        return acc

    return fn


def nesting_depth(typed: TypedDag) -> int:
    hit = typed._memo.get("nesting")
    if hit is None:
        depth = []
        for n in typed.nodes:
            depth.append(1 + max((depth[c] for c in n.children), default=0))
        hit = depth[typed.root]
        typed._memo["nesting"] = hit
    return hit


def compile_typed(typed: TypedDag, env_digest=None, record: set | None = None, memo: bool = True):
    """Return a list of closures, one per typed node.

    ``env_digest(mode_int) -> int`` serves sighash nodes. When ``record`` is a
    set, every taken case branch is added as ``(dag index, 0|1)``.
    """
    nodes = typed.nodes
    dag_nodes = typed.dag.nodes
    n = len(nodes)
    wiring = [False] * n
    maps: list = [None] * n
    fns: list = [None] * n

    # wiring maps (cells: index from the start; -1 zero, -2 one)
    for i, tn in enumerate(nodes):
        k = tn.kind
        if k not in WIRING or not all(wiring[c] for c in tn.children):
            continue
        wiring[i] = True
        A, B = tn.ty_in, tn.ty_out
        if k == IDEN:
            m = list(range(A.bit_size))
        elif k == UNIT_T:
            m = []
        elif k in (INJL, INJR):
            inner = maps[tn.children[0]]
            pad = B.bit_size - 1 - len(inner)
            m = [-1 if k == INJL else -2] + [-1] * pad + inner
        elif k == TAKE:
            m = maps[tn.children[0]]
        elif k == DROP:
            off = A.left.bit_size
            m = [s + off if s >= 0 else s for s in maps[tn.children[0]]]
        elif k == PAIR:
            m = maps[tn.children[0]] + maps[tn.children[1]]
        else:
            sm = maps[tn.children[0]]
            m = [sm[j] if j >= 0 else j for j in maps[tn.children[1]]]
        maps[i] = m

    def get(i: int):
        f = fns[i]
        if f is None and wiring[i]:
            f = fns[i] = _wire_fn(maps[i], nodes[i].ty_in.bit_size)
        return f

    for i, tn in enumerate(nodes):
        if wiring[i]:
            continue
        k = tn.kind
        A, B = tn.ty_in, tn.ty_out
        ch = [get(c) for c in tn.children]
        if k == INJL:
            f = ch[0]
        elif k == INJR:
            f = _injr(ch[0], 1 << (B.bit_size - 1))
        elif k == TAKE:
            f = _take(ch[0], A.right.bit_size)
        elif k == DROP:
            f = _drop(ch[0], (1 << A.right.bit_size) - 1)
        elif k == COMP:
            f = _comp(ch[0], ch[1])
        elif k == PAIR:
            f = _pair(ch[0], ch[1], B.right.bit_size)
        elif k in (CASE, ASSERTL, ASSERTR):
            tag_shift = A.bit_size - 1
            c = A.right.bit_size
            lmask = (1 << (A.left.left.bit_size + c)) - 1
            rmask = (1 << (A.left.right.bit_size + c)) - 1
            dag_idx = tn.node
            if k == CASE:
                if record is not None:
                    f = _case_rec(ch[0], ch[1], tag_shift, lmask, rmask, record, dag_idx)
                else:
                    f = _case(ch[0], ch[1], tag_shift, lmask, rmask)
            elif k == ASSERTL:
                f = _assertl(ch[0], tag_shift, lmask)
            else:
                f = _assertr(ch[0], tag_shift, rmask)
        elif k == FAIL:
            f = _fail
        elif k == WITNESS:
            v = dag_nodes[tn.node].value
            if v is None:
                f = _missing(tn.node)
            else:
                const = pack(v, B)
                f = lambda x, const=const: const
        elif k == SIGHASH:
            if env_digest is None:
                f = _missing_env
            else:
                f = env_digest
        else:  # pragma: no cover
            raise AssertionError(k)
        if memo and record is None and A.bit_size <= MEMO_WIDTH and k not in (FAIL, WITNESS):
            f = _memoize(f)
        fns[i] = f
    get(typed.root)
    return fns


def _injr(f, tag):
    return lambda x: tag | f(x)


def _take(f, shift):
    return lambda x: f(x >> shift)


def _drop(f, mask):
    return lambda x: f(x & mask)


def _comp(f, g):
    return lambda x: g(f(x))


def _pair(f, g, shift):
    return lambda x: (f(x) << shift) | g(x)


def _case(f, g, shift, lmask, rmask):
    def fn(x):
        if x >> shift:
            return g(x & rmask)
        return f(x & lmask)

    return fn


def _case_rec(f, g, shift, lmask, rmask, record, idx):
    def fn(x):
        if x >> shift:
            record.add((idx, 1))
            return g(x & rmask)
        record.add((idx, 0))
        return f(x & lmask)

    return fn


def _assertl(f, shift, lmask):
    def fn(x):
        if x >> shift:
            raise Bottom
        return f(x & lmask)

    return fn


def _assertr(g, shift, rmask):
    def fn(x):
        if x >> shift:
            return g(x & rmask)
        raise Bottom

    return fn


def _fail(x):
    raise Bottom


def _missing(idx):
    def fn(x):
        raise MissingWitness(f"witness node {idx} has no value")

    return fn


def _missing_env(x):
    raise MissingWitness("sighash needs a transaction environment")


def _memoize(f):
    table: dict[int, int] = {}

    def fn(x):
        r = table.get(x)
        if r is None:
            r = f(x)
            if len(table) < MEMO_CAP:
                table[x] = r
        return r

    return fn


def core_program(typed: TypedDag):
    """Cached packed evaluator for a core (or env-free) typed DAG."""
    fn = typed._memo.get("fast_core")
    if fn is None:
        fn = compile_typed(typed)[typed.root]
        typed._memo["fast_core"] = fn
    return fn


def run_packed(typed: TypedDag, x: int) -> int:
    return core_program(typed)(x)


def run_value(typed: TypedDag, v):
    return unpack(core_program(typed)(pack(v, typed.source)), typed.target)
