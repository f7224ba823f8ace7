"""Denotational semantics: core evaluation, the failure/environment monad,
lookup-table compilation and the sighash digest."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from typing import Callable, Mapping

from . import _fast
from .errors import MissingWitness, NotCore, TooLarge, TypeMismatch
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
    Term,
    TermDag,
    TypedDag,
    case,
    comp,
    drop,
    iden,
    injl,
    injr,
    pair,
    take,
    unit,
)
from .ty import SIGHASH_TYPE, SUM_KIND, UNIT_KIND, Ty, prod, value_count
from .value import (
    UNIT_VALUE,
    LeftV,
    PairV,
    RightV,
    Value,
    bytes_to_word,
    enumerate_values,
    pack,
    unpack,
    value_has_type,
)

LOOKUP_TABLE_LIMIT = 1 << 16


@dataclass(frozen=True)
class TxEnv:
    """Opaque mock transaction the sighash primitive digests."""

    tx_bytes: bytes = b""


EMPTY_ENV = TxEnv()


class EvalOutcome:
    __slots__ = ()
    is_bottom = False


@dataclass(frozen=True, slots=True)
class Ok(EvalOutcome):
    value: Value

    def __repr__(self) -> str:
        return f"Ok({self.value!r})"


class _BottomOutcome(EvalOutcome):
    __slots__ = ()
    is_bottom = True

    def __repr__(self) -> str:
        return "Bottom"

    def __reduce__(self):
        return (_bottom, ())


BOTTOM = _BottomOutcome()


def _bottom():
    return BOTTOM


# ---------------------------------------------------------------------------
# sighash


def sighash_mode_byte(mode: Value) -> int:
    if not value_has_type(mode, SIGHASH_TYPE):
        raise TypeMismatch(f"{mode!r} is not a sighash mode")
    first = mode.first
    if isinstance(first, LeftV):
        idx = 0
    else:
        idx = 1 if isinstance(first.inner, LeftV) else 2
    return idx + 3 * (1 if isinstance(mode.second, RightV) else 0)


def make_sighash(mode: Value, env: TxEnv) -> Value:
    """SHA-256 of the mode byte followed by the transaction bytes, as ``2^256``."""
    digest = hashlib.sha256(bytes([sighash_mode_byte(mode)]) + env.tx_bytes).digest()
    return bytes_to_word(digest)


def _packed_digest(env: TxEnv):
    cache: dict[int, int] = {}

    def fn(x: int) -> int:
        r = cache.get(x)
        if r is None:
            mode = unpack(x, SIGHASH_TYPE)
            r = cache[x] = int.from_bytes(
                hashlib.sha256(bytes([sighash_mode_byte(mode)]) + env.tx_bytes).digest(), "big"
            )
        return r

    return fn


# ---------------------------------------------------------------------------
# evaluators


def _check_input(typed: TypedDag, v: Value) -> None:
    if not value_has_type(v, typed.source):
        raise TypeMismatch(f"input {v!r} does not have type {typed.source}")


def eval_core(typed: TypedDag, input: Value) -> Value:
    """Pure denotation of a core term."""
    if not typed.is_core():
        raise NotCore("term contains non-core combinators")
    _check_input(typed, input)
    if _fast.nesting_depth(typed) > _fast.MAX_NESTING:
        out = eval_reference(typed, input)
        return out.value
    return _fast.run_value(typed, input)


def eval_core_packed(typed: TypedDag, x: int) -> int:
    """``eval_core`` on packed cell integers (no per-call type check)."""
    if not typed.is_core():
        raise NotCore("term contains non-core combinators")
    if _fast.nesting_depth(typed) > _fast.MAX_NESTING:
        out = eval_reference(typed, unpack(x, typed.source))
        return pack(out.value, typed.target)
    return _fast.run_packed(typed, x)


def eval_ext(typed: TypedDag, input: Value, env: TxEnv = EMPTY_ENV) -> EvalOutcome:
    """Denotation in the failure + transaction-environment monad."""
    _check_input(typed, input)
    if _fast.nesting_depth(typed) > _fast.MAX_NESTING:
        return eval_reference(typed, input, env)
    has_sighash = any(n.kind == SIGHASH for n in typed.nodes)
    if has_sighash:
        fn = _fast.compile_typed(typed, _packed_digest(env))[typed.root]
    else:
        fn = _fast.core_program(typed)
    try:
        out = fn(pack(input, typed.source))
    except _fast.Bottom:
        return BOTTOM
    return Ok(unpack(out, typed.target))


def eval_recording(typed: TypedDag, input: Value, env: TxEnv = EMPTY_ENV) -> tuple[EvalOutcome, set]:
    """Like ``eval_ext`` but also returns the set of taken case branches
    as ``(dag node index, 0 for left | 1 for right)``."""
    _check_input(typed, input)
    record: set = set()
    fn = _fast.compile_typed(typed, _packed_digest(env), record=record)[typed.root]
    try:
        out = fn(pack(input, typed.source))
    except _fast.Bottom:
        return BOTTOM, record
    return Ok(unpack(out, typed.target)), record


def eval_reference(typed: TypedDag, input: Value, env: TxEnv = EMPTY_ENV) -> EvalOutcome:
    """Direct reading of the defining equations over ``Value`` objects.

    Uses an explicit work stack, so nesting depth is unbounded. Slow; it is the
    independent oracle for the compiled evaluators.
    """
    nodes = typed.nodes
    dag_nodes = typed.dag.nodes
    # frames: (typed index, input, stage, saved)
    stack = [(typed.root, input, 0, None)]
    ret: Value | None = None
    while stack:
        i, x, stage, saved = stack.pop()
        tn = nodes[i]
        k = tn.kind
        ch = tn.children
        if k == IDEN:
            ret = x
        elif k == UNIT_T:
            ret = UNIT_VALUE
        elif k in (INJL, INJR):
            if stage == 0:
                stack.append((i, x, 1, None))
                stack.append((ch[0], x, 0, None))
            else:
                ret = LeftV(ret) if k == INJL else RightV(ret)
        elif k == TAKE:
            stack.append((ch[0], x.first, 0, None))
        elif k == DROP:
            stack.append((ch[0], x.second, 0, None))
        elif k == COMP:
            if stage == 0:
                stack.append((i, x, 1, None))
                stack.append((ch[0], x, 0, None))
            else:
                stack.append((ch[1], ret, 0, None))
        elif k == PAIR:
            if stage == 0:
                stack.append((i, x, 1, None))
                stack.append((ch[0], x, 0, None))
            elif stage == 1:
                stack.append((i, x, 2, ret))
                stack.append((ch[1], x, 0, None))
            else:
                ret = PairV(saved, ret)
        elif k in (CASE, ASSERTL, ASSERTR):
            tag, c = x.first, x.second
            if isinstance(tag, LeftV):
                if k == ASSERTR:
                    return BOTTOM
                stack.append((ch[0], PairV(tag.inner, c), 0, None))
            else:
                if k == ASSERTL:
                    return BOTTOM
                stack.append((ch[-1], PairV(tag.inner, c), 0, None))
        elif k == FAIL:
            return BOTTOM
        elif k == WITNESS:
            ret = dag_nodes[tn.node].value
            if ret is None:
                raise MissingWitness(f"witness node {tn.node} has no value")
        elif k == SIGHASH:
            ret = make_sighash(x, env)
        else:  # pragma: no cover
            raise AssertionError(k)
    return Ok(ret)


# ---------------------------------------------------------------------------
# finitary completeness


def scribe(v: Value) -> Term:
    """A term mapping any input to the constant ``v``."""
    if isinstance(v, LeftV):
        return injl(scribe(v.inner))
    if isinstance(v, RightV):
        return injr(scribe(v.inner))
    if isinstance(v, PairV):
        return pair(scribe(v.first), scribe(v.second))
    return unit()


def compile_lookup_table(
    table: Mapping[Value, Value] | Callable[[Value], Value], A: Ty, B: Ty
) -> TermDag:
    """Core term computing ``table`` on ``A``, built by repeated case analysis."""
    if value_count(A) > LOOKUP_TABLE_LIMIT:
        raise TooLarge(f"{A} has more than {LOOKUP_TABLE_LIMIT} values")
    if callable(table) and not isinstance(table, Mapping):
        fn = table
    else:
        def fn(v, _t=table):
            try:
                return _t[v]
            except KeyError:
                raise TypeMismatch(f"lookup table has no entry for {v!r}") from None
    outputs: dict[Value, Value] = {}
    for v in enumerate_values(A):
        out = fn(v)
        if not value_has_type(out, B):
            raise TypeMismatch(f"table output {out!r} does not have type {B}")
        outputs[v] = out
    term = _build_table(A, outputs.__getitem__)
    return TermDag.from_term(term)


def _build_table(A: Ty, f: Callable[[Value], Value]) -> Term:
    values = list(enumerate_values(A))
    first = f(values[0])
    if all(f(v) == first for v in values[1:]):
        return scribe(first)
    if A.kind == SUM_KIND:
        left = _build_table(A.left, lambda x: f(LeftV(x)))
        right = _build_table(A.right, lambda y: f(RightV(y)))
        return comp(pair(iden(), unit()), case(take(left), take(right)))
    P, Q = A.left, A.right
    if P.kind == UNIT_KIND:
        return drop(_build_table(Q, lambda q: f(PairV(UNIT_VALUE, q))))
    if P.kind == SUM_KIND:
        left = _build_table(prod(P.left, Q), lambda v: f(PairV(LeftV(v.first), v.second)))
        right = _build_table(prod(P.right, Q), lambda v: f(PairV(RightV(v.first), v.second)))
        return case(left, right)
    # (P1 x P2) x Q  ->  P1 x (P2 x Q)
    P1, P2 = P.left, P.right
    reassoc = pair(take(take(iden())), pair(take(drop(iden())), drop(iden())))
    inner = _build_table(
        prod(P1, prod(P2, Q)),
        lambda v: f(PairV(PairV(v.first, v.second.first), v.second.second)),
    )
    return comp(reassoc, inner)


__all__ = [
    "BOTTOM",
    "EMPTY_ENV",
    "EvalOutcome",
    "LOOKUP_TABLE_LIMIT",
    "Ok",
    "TxEnv",
    "compile_lookup_table",
    "eval_core",
    "eval_core_packed",
    "eval_ext",
    "eval_recording",
    "eval_reference",
    "make_sighash",
    "scribe",
    "sighash_mode_byte",
]
