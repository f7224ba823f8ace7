"""Text serialization of programs, values, types, witness and transaction files.

Programs are S-expressions with optional ``let NAME = expr;`` bindings for
explicit sharing::

    let f = (comp (pair iden unit) (case (injr unit) (injl unit)));
    (comp f f)
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable

from .errors import CountMismatch, DuplicateLet, ParseError, UnboundName, WitnessTypeMismatch
from .semantics import TxEnv
from .term import (
    ASSERTL,
    ASSERTR,
    FAIL,
    IDEN,
    SIGHASH,
    UNIT_T,
    WITNESS,
    Term,
    TermDag,
    _term,
    infer_types,
    witness,
)
from .ty import BIT, UNIT, Ty, format_type, prod, sum_, word
from .value import UNIT_VALUE, LeftV, PairV, RightV, Value, interp_word, repr_word, value_has_type

OPS = {"comp": 2, "injl": 1, "injr": 1, "case": 2, "pair": 2, "take": 1, "drop": 1}
ATOMS = {"iden": IDEN, "unit": UNIT_T, "fail": FAIL, "sighash": SIGHASH}
KEYWORDS = set(OPS) | set(ATOMS) | {"let", "assertl", "assertr", "witness", "u", "L", "R"}

_TOKEN = re.compile(
    r"""
    (?P<ws>\s+|//[^\n]*)
  | (?P<hash>\#[0-9a-fA-F]+)
  | (?P<word>0x[0-9a-fA-F]+:[0-9]+)
  | (?P<pow>2\^[0-9]+)
  | (?P<sym>::|[(),;=+*_])
  | (?P<num>[0-9]+)
  | (?P<name>[A-Za-z][A-Za-z0-9_\-]*)
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int
    col: int


def tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    pos = 0
    line = 1
    line_start = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        if kind != "ws":
            tokens.append(Token(kind, m.group(), line, pos - line_start + 1))
        chunk = m.group()
        nl = chunk.count("\n")
        if nl:
            line += nl
            line_start = pos + chunk.rfind("\n") + 1
        pos = m.end()
    tokens.append(Token("eof", "", line, pos - line_start + 1))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.toks = tokenize(text)
        self.i = 0

    def peek(self, k: int = 0) -> Token:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def next(self) -> Token:
        t = self.toks[self.i]
        if t.kind != "eof":
            self.i += 1
        return t

    def error(self, msg: str, tok: Token | None = None, cls=ParseError):
        tok = tok or self.peek()
        found = "end of input" if tok.kind == "eof" else repr(tok.text)
        return cls(f"{msg} (found {found})", tok.line, tok.col)

    def expect(self, text: str) -> Token:
        t = self.peek()
        if t.text != text or t.kind == "eof":
            raise self.error(f"expected {text!r}")
        return self.next()

    # values -------------------------------------------------------------

    def value(self) -> Value:
        t = self.peek()
        if t.kind == "name" and t.text == "u":
            self.next()
            return UNIT_VALUE
        if t.kind == "word":
            self.next()
            digits, width = t.text[2:].split(":")
            n = int(width)
            k = int(digits, 16)
            if n < 1 or n & (n - 1):
                raise self.error("word width must be a power of two", t)
            if k >= 1 << n:
                raise self.error(f"{t.text} does not fit in {n} bits", t)
            return repr_word(k, n)
        if t.text == "(":
            self.next()
            h = self.peek()
            if h.kind == "name" and h.text in ("L", "R"):
                self.next()
                inner = self.value()
                self.expect(")")
                return LeftV(inner) if h.text == "L" else RightV(inner)
            first = self.value()
            self.expect(",")
            second = self.value()
            self.expect(")")
            return PairV(first, second)
        raise self.error("expected a value")

    # types --------------------------------------------------------------

    def type(self) -> Ty:
        t = self.peek()
        if t.kind == "num" and t.text in ("1", "2"):
            self.next()
            return UNIT if t.text == "1" else BIT
        if t.kind == "pow":
            self.next()
            n = int(t.text[2:])
            if n < 1 or n & (n - 1):
                raise self.error("word width must be a power of two", t)
            return word(n)
        if t.text == "(":
            self.next()
            left = self.type()
            op = self.next()
            if op.text not in ("+", "*"):
                raise self.error("expected '+' or '*'", op)
            right = self.type()
            self.expect(")")
            return sum_(left, right) if op.text == "+" else prod(left, right)
        raise self.error("expected a type")

    # expressions --------------------------------------------------------

    def expr(self, env: dict[str, Term]) -> Term:
        t = self.next()
        if t.kind == "name":
            if t.text in ATOMS:
                return _term(ATOMS[t.text])
            if t.text in env:
                return env[t.text]
            if t.text in KEYWORDS:
                raise self.error("keyword used as an expression", t)
            raise UnboundName(f"unbound name {t.text!r}", t.line, t.col)
        if t.text != "(":
            raise self.error("expected an expression", t)
        head = self.next()
        op = head.text
        if head.kind != "name":
            raise self.error("expected a combinator", head)
        if op in OPS:
            args = [self.expr(env) for _ in range(OPS[op])]
            self.expect(")")
            return _term(op, tuple(args))
        if op == "assertl":
            s = self.expr(env)
            h = self.hash()
            self.expect(")")
            return _term(ASSERTL, (s,), hash=h)
        if op == "assertr":
            h = self.hash()
            s = self.expr(env)
            self.expect(")")
            return _term(ASSERTR, (s,), hash=h)
        if op == "witness":
            if self.peek().text == "_":
                self.next()
                v = None
            else:
                v = self.value()
            declared = None
            if self.peek().text == "::":
                self.next()
                declared = self.type()
            self.expect(")")
            return witness(v, declared)
        if op in ATOMS:
            raise self.error(f"{op} takes no arguments", head)
        raise self.error("unknown combinator", head)

    def hash(self) -> bytes:
        t = self.next()
        if t.kind != "hash" or len(t.text) != 65:
            raise self.error("expected '#' followed by 64 hex digits", t)
        return bytes.fromhex(t.text[1:])

    def program(self) -> Term:
        env: dict[str, Term] = {}
        while self.peek().kind == "name" and self.peek().text == "let":
            self.next()
            name = self.next()
            if name.kind != "name" or name.text in KEYWORDS:
                raise self.error("expected a binding name", name)
            if name.text in env:
                raise DuplicateLet(f"name {name.text!r} is already bound", name.line, name.col)
            self.expect("=")
            env[name.text] = self.expr(env)
            self.expect(";")
        body = self.expr(env)
        if self.peek().text == ";":
            self.next()
        if self.peek().kind != "eof":
            raise self.error("unexpected trailing input")
        return body


def parse(text: str) -> TermDag:
    """Parse program text into a canonical (maximally shared) DAG."""
    return TermDag.from_term(_Parser(text).program())


def parse_value(text: str) -> Value:
    p = _Parser(text)
    v = p.value()
    if p.peek().kind != "eof":
        raise p.error("unexpected trailing input")
    return v


def parse_type(text: str) -> Ty:
    p = _Parser(text)
    t = p.type()
    if p.peek().kind != "eof":
        raise p.error("unexpected trailing input")
    return t


def parse_values(text: str) -> list[Value]:
    """A whitespace separated list of values (a witness file)."""
    p = _Parser(text)
    out = []
    while p.peek().kind != "eof":
        out.append(p.value())
    return out


# ---------------------------------------------------------------------------
# printing


def _word_shape(v: Value) -> int | None:
    """Width n if ``v`` is a value of 2^n with n >= 2, else None."""
    if not isinstance(v, PairV):
        return None

    def width(x) -> int | None:
        if isinstance(x, (LeftV, RightV)):
            return 1 if x.inner is UNIT_VALUE or x.inner == UNIT_VALUE else None
        if isinstance(x, PairV):
            a = width(x.first)
            if a is None:
                return None
            b = width(x.second)
            return a * 2 if a == b else None
        return None

    return width(v)


def format_value(v: Value) -> str:
    n = _word_shape(v)
    if n is not None:
        digits = (n + 3) // 4
        return f"0x{interp_word(v, n):0{digits}x}:{n}"
    if isinstance(v, LeftV):
        return f"(L {format_value(v.inner)})"
    if isinstance(v, RightV):
        return f"(R {format_value(v.inner)})"
    if isinstance(v, PairV):
        return f"({format_value(v.first)}, {format_value(v.second)})"
    return "u"


def format_dag(dag: TermDag) -> str:
    """Canonical text: every node used more than once gets a let binding
    (except the nullary atoms), in topological order."""
    dag = dag.canonical()
    refs = [0] * len(dag.nodes)
    for node in dag.nodes:
        for c in node.children:
            refs[c] += 1
    names: dict[int, str] = {}
    rendered: list[str | None] = [None] * len(dag.nodes)
    lines: list[str] = []
    for i, node in enumerate(dag.nodes):
        k = node.kind
        kids = [names.get(c) or rendered[c] for c in node.children]
        if k in (IDEN, UNIT_T, FAIL, SIGHASH):
            text = {IDEN: "iden", UNIT_T: "unit", FAIL: "fail", SIGHASH: "sighash"}[k]
        elif k == ASSERTL:
            text = f"(assertl {kids[0]} #{node.hash.hex()})"
        elif k == ASSERTR:
            text = f"(assertr #{node.hash.hex()} {kids[0]})"
        elif k == WITNESS:
            v = "_" if node.value is None else format_value(node.value)
            decl = "" if node.declared is None else f" :: {format_type(node.declared)}"
            text = f"(witness {v}{decl})"
        else:
            text = f"({k} {' '.join(kids)})"
        rendered[i] = text
        if refs[i] > 1 and k not in (IDEN, UNIT_T, FAIL, SIGHASH) and i != dag.root:
            name = f"x{len(names)}"
            names[i] = name
            lines.append(f"let {name} = {text};")
    lines.append(rendered[dag.root])
    return "\n".join(lines) + "\n"


def format_values(values: Iterable[Value]) -> str:
    return "".join(format_value(v) + "\n" for v in values)


# ---------------------------------------------------------------------------
# witnesses and transactions


def substitute_witnesses(dag: TermDag, values: list[Value]) -> TermDag:
    """Fill ``(witness _)`` placeholders, in node-index order.

    Raises CountMismatch or WitnessTypeMismatch; the commitment root is
    unchanged because witness payloads are not committed.
    """
    holes = dag.placeholders()
    if len(holes) != len(values):
        raise CountMismatch(f"program has {len(holes)} witness placeholders, file has {len(values)} values")
    typed = infer_types(dag)
    types: dict[int, set] = {}
    for tn in typed.nodes:
        if tn.node in holes:
            types.setdefault(tn.node, set()).add(tn.ty_out)
    for idx, v in zip(holes, values):
        for ty in types.get(idx, ()):
            if not value_has_type(v, ty):
                raise WitnessTypeMismatch(idx, f"witness value {format_value(v)} does not have type {format_type(ty)}")
    return dag.replace_witnesses(dict(zip(holes, values)))


def parse_tx(text: str) -> TxEnv:
    hexdigits = "".join(text.split())
    try:
        return TxEnv(bytes.fromhex(hexdigits))
    except ValueError as exc:
        raise ParseError(f"transaction file is not hex: {exc}") from None


def format_tx(env: TxEnv) -> str:
    return env.tx_bytes.hex() + "\n"
