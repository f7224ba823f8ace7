"""Expression DAGs, type inference and the typing discipline.

There are two layers:

* ``Term`` objects are hash-consed builder nodes. Structurally equal terms are
  the same Python object, so generators can reuse sub-expressions freely.
* ``TermDag`` is the canonical, topologically indexed, *untyped* form. It is
  what gets serialized and what Merkle roots are computed over.

``infer_types`` computes a principal type scheme for every DAG node by
first-order unification and then instantiates the root, filling residual type
variables with the unit type. A structural node that is used at several types
(``iden`` is the usual example) becomes several typed nodes, one per distinct
typing; this is the "unique typed sub-expression" view of the DAG.
"""

from __future__ import annotations

import itertools
import weakref
from dataclasses import dataclass
from typing import Iterable, NamedTuple

from .errors import (
    MalformedDag,
    OccursCheck,
    RuleViolation,
    UnificationClash,
    WitnessTypeMismatch,
)
from .ty import (
    PROD_KIND,
    SIGHASH_TYPE,
    SUM_KIND,
    UNIT,
    UNIT_KIND,
    Ty,
    format_type,
    prod,
    sum_,
    word,
)
from .value import LeftV, PairV, RightV, Value, value_has_type

IDEN = "iden"
COMP = "comp"
UNIT_T = "unit"
INJL = "injl"
INJR = "injr"
CASE = "case"
PAIR = "pair"
TAKE = "take"
DROP = "drop"
ASSERTL = "assertl"
ASSERTR = "assertr"
FAIL = "fail"
WITNESS = "witness"
SIGHASH = "sighash"

CORE_KINDS = frozenset({IDEN, COMP, UNIT_T, INJL, INJR, CASE, PAIR, TAKE, DROP})
LEAF_KINDS = frozenset({IDEN, UNIT_T, FAIL, WITNESS, SIGHASH})
UNARY_KINDS = frozenset({INJL, INJR, TAKE, DROP, ASSERTL, ASSERTR})
BINARY_KINDS = frozenset({COMP, CASE, PAIR})
ALL_KINDS = CORE_KINDS | {ASSERTL, ASSERTR, FAIL, WITNESS, SIGHASH}


@dataclass(frozen=True, slots=True)
class Node:
    """One DAG entry. ``children`` are indices of earlier nodes."""

    kind: str
    children: tuple[int, ...] = ()
    hash: bytes | None = None
    value: Value | None = None
    declared: Ty | None = None


# ---------------------------------------------------------------------------
# builder terms


class Term:
    __slots__ = ("kind", "children", "hash", "value", "declared", "__weakref__")

    def __repr__(self) -> str:
        return f"<Term {self.kind} #{id(self):x}>"

    @property
    def is_placeholder(self) -> bool:
        return self.kind == WITNESS and self.value is None


_interned: weakref.WeakValueDictionary = weakref.WeakValueDictionary()


def _term(kind, children=(), hash=None, value=None, declared=None) -> Term:
    key = (kind, tuple(id(c) for c in children), hash, value, None if declared is None else id(declared))
    t = _interned.get(key)
    if t is None:
        t = object.__new__(Term)
        t.kind = kind
        t.children = tuple(children)
        t.hash = hash
        t.value = value
        t.declared = declared
        t = _interned.setdefault(key, t)
    return t


def iden() -> Term:
    return _term(IDEN)


def unit() -> Term:
    return _term(UNIT_T)


def injl(t: Term) -> Term:
    return _term(INJL, (t,))


def injr(t: Term) -> Term:
    return _term(INJR, (t,))


def take(t: Term) -> Term:
    return _term(TAKE, (t,))


def drop(t: Term) -> Term:
    return _term(DROP, (t,))


def comp(s: Term, t: Term) -> Term:
    return _term(COMP, (s, t))


def case(s: Term, t: Term) -> Term:
    return _term(CASE, (s, t))


def pair(s: Term, t: Term) -> Term:
    return _term(PAIR, (s, t))


def _check_hash(h: bytes) -> bytes:
    if not isinstance(h, (bytes, bytearray)) or len(h) != 32:
        raise ValueError("assertion hashes must be 32 bytes")
    return bytes(h)


def assertl(s: Term, h: bytes) -> Term:
    return _term(ASSERTL, (s,), hash=_check_hash(h))


def assertr(h: bytes, t: Term) -> Term:
    return _term(ASSERTR, (t,), hash=_check_hash(h))


def fail() -> Term:
    return _term(FAIL)


def sighash() -> Term:
    return _term(SIGHASH)


def witness(value: Value | None = None, declared: Ty | None = None) -> Term:
    """A witness node; ``value=None`` is a placeholder filled at redemption.

    Placeholders are never shared: each call yields a distinct node.
    """
    if value is None:
        t = object.__new__(Term)
        t.kind = WITNESS
        t.children = ()
        t.hash = None
        t.value = None
        t.declared = declared
        return t
    return _term(WITNESS, value=value, declared=declared)


def _node_of(t: Term, children: tuple[int, ...]) -> Node:
    return Node(t.kind, children, t.hash, t.value, t.declared)


# ---------------------------------------------------------------------------
# the DAG


class TermDag:
    """Untyped expression DAG in topological order (children before parents)."""

    __slots__ = ("nodes", "root", "_memo")

    def __init__(self, nodes: Iterable[Node], root: int | None = None):
        self.nodes = tuple(nodes)
        if not self.nodes:
            raise MalformedDag("empty DAG")
        self.root = len(self.nodes) - 1 if root is None else root
        self._memo: dict = {}
        self._validate()

    def _validate(self) -> None:
        n = len(self.nodes)
        if not 0 <= self.root < n:
            raise MalformedDag(f"root index {self.root} out of range")
        for i, node in enumerate(self.nodes):
            if node.kind not in ALL_KINDS:
                raise MalformedDag(f"node {i}: unknown combinator {node.kind!r}")
            arity = 0 if node.kind in LEAF_KINDS else 1 if node.kind in UNARY_KINDS else 2
            if len(node.children) != arity:
                raise MalformedDag(f"node {i}: {node.kind} takes {arity} children")
            for c in node.children:
                if not 0 <= c < i:
                    raise MalformedDag(f"node {i}: child {c} is not an earlier node")
            if node.kind in (ASSERTL, ASSERTR) and (node.hash is None or len(node.hash) != 32):
                raise MalformedDag(f"node {i}: assertion needs a 32-byte hash")
        seen = bytearray(n)
        seen[self.root] = 1
        for i in range(self.root, -1, -1):
            if seen[i]:
                for c in self.nodes[i].children:
                    seen[c] = 1
        if not all(seen):
            missing = seen.index(0)
            raise MalformedDag(f"node {missing} is unreachable from the root")

    def __len__(self) -> int:
        return len(self.nodes)

    def __eq__(self, other) -> bool:
        if not isinstance(other, TermDag):
            return NotImplemented
        return self.root == other.root and self.nodes == other.nodes

    def __hash__(self) -> int:
        return hash((self.root, self.nodes))

    def __repr__(self) -> str:
        return f"TermDag({len(self.nodes)} nodes)"

    @classmethod
    def from_term(cls, term: Term) -> TermDag:
        index: dict[int, int] = {}
        nodes: list[Node] = []
        stack = [(term, False)]
        while stack:
            t, expanded = stack.pop()
            if id(t) in index:
                continue
            if expanded:
                index[id(t)] = len(nodes)
                nodes.append(_node_of(t, tuple(index[id(c)] for c in t.children)))
            else:
                stack.append((t, True))
                for c in reversed(t.children):
                    if id(c) not in index:
                        stack.append((c, False))
        return cls(nodes)

    def terms(self) -> list[Term]:
        """Builder terms for every node (placeholders stay distinct)."""
        out: list[Term] = []
        for node in self.nodes:
            kids = tuple(out[c] for c in node.children)
            if node.kind == WITNESS:
                out.append(witness(node.value, node.declared))
            else:
                out.append(_term(node.kind, kids, node.hash, node.value, node.declared))
        return out

    def term(self) -> Term:
        return self.terms()[self.root]

    def canonical(self) -> TermDag:
        """Maximally shared, DFS-ordered copy."""
        return TermDag.from_term(self.term())

    def placeholders(self) -> list[int]:
        return [i for i, n in enumerate(self.nodes) if n.kind == WITNESS and n.value is None]

    def is_core(self) -> bool:
        return all(n.kind in CORE_KINDS for n in self.nodes)

    def core_flags(self) -> list[bool]:
        """Per node: True when its whole sub-DAG uses only core combinators."""
        hit = self._memo.get("core_flags")
        if hit is None:
            hit = []
            for node in self.nodes:
                hit.append(node.kind in CORE_KINDS and all(hit[c] for c in node.children))
            self._memo["core_flags"] = hit
        return hit

    def structural_ids(self) -> list[int]:
        """Canonical id per node; equal ids mean structurally identical sub-DAGs."""
        hit = self._memo.get("structural_ids")
        if hit is None:
            table: dict = {}
            hit = []
            for i, node in enumerate(self.nodes):
                if node.kind == WITNESS and node.value is None:
                    key = ("placeholder", i)
                else:
                    key = (node.kind, tuple(hit[c] for c in node.children), node.hash, node.value,
                           None if node.declared is None else id(node.declared))
                hit.append(table.setdefault(key, len(table)))
            self._memo["structural_ids"] = hit
        return hit

    def tree_sizes(self) -> list[int]:
        hit = self._memo.get("tree_sizes")
        if hit is None:
            hit = []
            for node in self.nodes:
                hit.append(1 + sum(hit[c] for c in node.children))
            self._memo["tree_sizes"] = hit
        return hit

    def replace_witnesses(self, values: dict[int, Value]) -> TermDag:
        nodes = list(self.nodes)
        for i, v in values.items():
            old = nodes[i]
            if old.kind != WITNESS:
                raise MalformedDag(f"node {i} is not a witness")
            nodes[i] = Node(WITNESS, (), None, v, old.declared)
        return TermDag(nodes, self.root)


def unshare(dag: TermDag, limit: int = 10**6) -> TermDag:
    """Fully expanded tree form of ``dag`` (every occurrence its own node)."""
    sizes = dag.tree_sizes()
    if sizes[dag.root] > limit:
        raise MalformedDag(f"tree has {sizes[dag.root]} nodes, above the limit {limit}")
    nodes: list[Node] = []

    def emit(i: int) -> int:
        node = dag.nodes[i]
        kids = tuple(emit(c) for c in node.children)
        nodes.append(Node(node.kind, kids, node.hash, node.value, node.declared))
        return len(nodes) - 1

    emit(dag.root)
    return TermDag(nodes)


# ---------------------------------------------------------------------------
# unification


class _Var:
    __slots__ = ("ref", "id")
    _ids = itertools.count()

    def __init__(self):
        self.ref = None
        self.id = next(_Var._ids)

    def __repr__(self) -> str:
        return f"t{self.id}"


class _TT:
    """A compound type containing variables."""

    __slots__ = ("kind", "left", "right")

    def __init__(self, kind, left, right):
        self.kind = kind
        self.left = left
        self.right = right


def _mk(kind: str, left, right):
    if type(left) is Ty and type(right) is Ty:
        return sum_(left, right) if kind == SUM_KIND else prod(left, right)
    return _TT(kind, left, right)


def _find(t):
    while type(t) is _Var and t.ref is not None:
        t = t.ref
    return t


def _describe(t) -> str:
    t = _find(t)
    if type(t) is Ty:
        return format_type(t)
    if type(t) is _Var:
        return repr(t)
    op = "+" if t.kind == SUM_KIND else "*"
    return f"({_describe(t.left)} {op} {_describe(t.right)})"


def _occurs(v: _Var, t) -> bool:
    stack = [t]
    while stack:
        t = _find(stack.pop())
        if t is v:
            return True
        if type(t) is _TT:
            stack.append(t.left)
            stack.append(t.right)
    return False


def _unify(a, b, node: int) -> None:
    stack = [(a, b)]
    while stack:
        a, b = stack.pop()
        a = _find(a)
        b = _find(b)
        if a is b:
            continue
        if type(a) is _Var:
            a, b = a, b
        elif type(b) is _Var:
            a, b = b, a
        else:
            if a.kind != b.kind:
                raise UnificationClash(
                    node, f"cannot unify {_describe(a)} with {_describe(b)} ({a.kind} vs {b.kind})"
                )
            if a.kind == UNIT_KIND:
                continue
            if type(a) is Ty and type(b) is Ty:
                raise UnificationClash(node, f"cannot unify {_describe(a)} with {_describe(b)}")
            stack.append((a.left, b.left))
            stack.append((a.right, b.right))
            continue
        if type(b) is not Ty and _occurs(a, b):
            raise OccursCheck(node, f"{a!r} occurs in {_describe(b)} (infinite type)")
        a.ref = b


def _zonk(t, memo: dict):
    t = _find(t)
    if type(t) is not _TT:
        return t
    hit = memo.get(id(t))
    if hit is not None:
        return hit
    out = _mk(t.kind, _zonk(t.left, memo), _zonk(t.right, memo))
    memo[id(t)] = out
    return out


def _ground(t, memo: dict) -> Ty:
    """Zonk and replace remaining variables with the unit type."""
    t = _find(t)
    if type(t) is Ty:
        return t
    if type(t) is _Var:
        return UNIT
    hit = memo.get(id(t))
    if hit is not None:
        return hit
    l = _ground(t.left, memo)
    r = _ground(t.right, memo)
    out = sum_(l, r) if t.kind == SUM_KIND else prod(l, r)
    memo[id(t)] = out
    return out


def _instantiate(t, mapping: dict):
    if type(t) is Ty:
        return t
    if type(t) is _Var:
        v = mapping.get(t)
        if v is None:
            v = mapping[t] = _Var()
        return v
    key = id(t)
    hit = mapping.get(key)
    if hit is not None:
        return hit
    out = _TT(t.kind, _instantiate(t.left, mapping), _instantiate(t.right, mapping))
    mapping[key] = out
    return out


def _value_scheme(v: Value):
    """Most general type of a value: unused sum sides stay variables."""
    if isinstance(v, PairV):
        return _mk(PROD_KIND, _value_scheme(v.first), _value_scheme(v.second))
    if isinstance(v, LeftV):
        return _mk(SUM_KIND, _value_scheme(v.inner), _Var())
    if isinstance(v, RightV):
        return _mk(SUM_KIND, _Var(), _value_scheme(v.inner))
    return UNIT


def _inst(scheme):
    mapping: dict = {}
    return _instantiate(scheme[0], mapping), _instantiate(scheme[1], mapping)


# Schemes are never mutated once computed (only fresh instances are unified),
# so they are shared between DAGs by a global key on the kind and the
# children's keys. Payloads do not influence schemes and are left out.
_SCHEME_IDS: dict[tuple, int] = {}
_SCHEME_TABLE: list[tuple] = []
_MID_CACHE: dict[tuple, Ty] = {}


def _scheme_ids(dag: TermDag) -> list[int]:
    _schemes(dag)
    return dag._memo["scheme_ids"]


def _schemes(dag: TermDag) -> list[tuple]:
    """Principal (input, output) type scheme of every node."""
    hit = dag._memo.get("schemes")
    if hit is not None:
        return hit
    schemes: list[tuple] = []
    gids: list[int] = []
    for i, node in enumerate(dag.nodes):
        k = node.kind
        ch = node.children
        if node.declared is not None:
            payload = id(node.declared)
        elif k == WITNESS:
            payload = node.value
        else:
            payload = None
        key = (k, tuple(gids[c] for c in ch), payload)
        gid = _SCHEME_IDS.get(key)
        if gid is not None:
            gids.append(gid)
            schemes.append(_SCHEME_TABLE[gid])
            continue
        if k == IDEN:
            a = _Var()
            sch = (a, a)
        elif k == UNIT_T:
            sch = (_Var(), UNIT)
        elif k in (INJL, INJR):
            ti, to = _inst(schemes[ch[0]])
            other = _Var()
            sch = (ti, _mk(SUM_KIND, to, other) if k == INJL else _mk(SUM_KIND, other, to))
        elif k == TAKE:
            ti, to = _inst(schemes[ch[0]])
            sch = (_mk(PROD_KIND, ti, _Var()), to)
        elif k == DROP:
            ti, to = _inst(schemes[ch[0]])
            sch = (_mk(PROD_KIND, _Var(), ti), to)
        elif k == COMP:
            si, so = _inst(schemes[ch[0]])
            ti, to = _inst(schemes[ch[1]])
            _unify(so, ti, i)
            sch = (si, to)
        elif k == PAIR:
            si, so = _inst(schemes[ch[0]])
            ti, to = _inst(schemes[ch[1]])
            _unify(si, ti, i)
            sch = (si, _mk(PROD_KIND, so, to))
        elif k in (CASE, ASSERTL, ASSERTR):
            a, b, c = _Var(), _Var(), _Var()
            out = _Var()
            if k in (CASE, ASSERTL):
                si, so = _inst(schemes[ch[0]])
                _unify(si, _TT(PROD_KIND, a, c), i)
                _unify(so, out, i)
            if k in (CASE, ASSERTR):
                ti, to = _inst(schemes[ch[-1]])
                _unify(ti, _TT(PROD_KIND, b, c), i)
                _unify(to, out, i)
            sch = (_TT(PROD_KIND, _TT(SUM_KIND, a, b), c), out)
        elif k == FAIL:
            sch = (_Var(), _Var())
        elif k == WITNESS:
            if node.declared is not None:
                out = node.declared
            elif node.value is not None:
                out = _value_scheme(node.value)
            else:
                out = _Var()
            sch = (_Var(), out)
        elif k == SIGHASH:
            sch = (SIGHASH_TYPE, word(256))
        else:  # pragma: no cover - rejected by TermDag validation
            raise MalformedDag(f"unknown combinator {k}")
        memo: dict = {}
        sch = (_zonk(sch[0], memo), _zonk(sch[1], memo))
        gid = len(_SCHEME_TABLE)
        _SCHEME_TABLE.append(sch)
        _SCHEME_IDS[key] = gid
        gids.append(gid)
        schemes.append(sch)
    dag._memo["schemes"] = schemes
    dag._memo["scheme_ids"] = gids
    return schemes


def principal_type(dag: TermDag) -> tuple:
    """Root type scheme before unit filling, with variables as opaque objects."""
    return _schemes(dag)[dag.root]


def scheme_matches(scheme, ground: Ty, mapping: dict | None = None) -> bool:
    """Is ``ground`` an instance of ``scheme``? ``mapping`` is extended in place."""
    if mapping is None:
        mapping = {}
    stack = [(scheme, ground)]
    while stack:
        s, g = stack.pop()
        if type(s) is _Var:
            bound = mapping.get(s)
            if bound is None:
                mapping[s] = g
            elif bound is not g:
                return False
            continue
        if type(s) is Ty:
            if s is not g:
                return False
            continue
        if s.kind != g.kind:
            return False
        stack.append((s.left, g.left))
        stack.append((s.right, g.right))
    return True


def format_scheme(t) -> str:
    return _describe(t)


# ---------------------------------------------------------------------------
# typed DAGs


@dataclass(frozen=True, slots=True, eq=False)
class TypedNode:
    node: int
    kind: str
    children: tuple[int, ...]
    ty_in: Ty
    ty_out: Ty


class TypedDag:
    """A DAG whose nodes are typed instances of ``dag`` nodes."""

    __slots__ = ("dag", "nodes", "root", "_memo", "__weakref__")

    def __init__(self, dag: TermDag, nodes: Iterable[TypedNode], root: int | None = None):
        self.dag = dag
        self.nodes = tuple(nodes)
        self.root = len(self.nodes) - 1 if root is None else root
        self._memo: dict = {}

    @property
    def ty_in(self) -> list[Ty]:
        return [n.ty_in for n in self.nodes]

    @property
    def ty_out(self) -> list[Ty]:
        return [n.ty_out for n in self.nodes]

    @property
    def source(self) -> Ty:
        return self.nodes[self.root].ty_in

    @property
    def target(self) -> Ty:
        return self.nodes[self.root].ty_out

    def dag_node(self, i: int) -> Node:
        return self.dag.nodes[self.nodes[i].node]

    def is_core(self) -> bool:
        return all(n.kind in CORE_KINDS for n in self.nodes)

    def canonical_ids(self) -> list[int]:
        """Equal ids mean equal structure *and* equal types."""
        hit = self._memo.get("canonical_ids")
        if hit is None:
            sids = self.dag.structural_ids()
            table: dict = {}
            hit = [
                table.setdefault((sids[n.node], id(n.ty_in), id(n.ty_out)), len(table))
                for n in self.nodes
            ]
            self._memo["canonical_ids"] = hit
        return hit

    def __repr__(self) -> str:
        return f"TypedDag({len(self.nodes)} typed nodes, {self.source} |- {self.target})"


def infer_types(dag: TermDag, ty_in: Ty | None = None, ty_out: Ty | None = None) -> TypedDag:
    """Principal typing of ``dag`` with residual variables set to unit.

    ``ty_in`` / ``ty_out`` optionally constrain the root before unit filling.
    Raises UnificationClash, OccursCheck or WitnessTypeMismatch.
    """
    schemes = _schemes(dag)
    gids = dag._memo["scheme_ids"]
    root_in, root_out = _inst(schemes[dag.root])
    if ty_in is not None:
        _unify(root_in, ty_in, dag.root)
    if ty_out is not None:
        _unify(root_out, ty_out, dag.root)
    memo: dict = {}
    a = _ground(root_in, memo)
    b = _ground(root_out, memo)

    nodes = dag.nodes
    index: dict[tuple, int] = {}
    typed: list[TypedNode] = []
    # iterative post-order over (dag index, input type, output type)
    stack = [((dag.root, a, b), None)]
    while stack:
        key, kids = stack.pop()
        if key in index:
            continue
        i, A, B = key
        if kids is None:
            kids = _child_types(nodes[i], i, A, B, schemes, gids)
            stack.append((key, kids))
            for k in reversed(kids):
                if k not in index:
                    stack.append((k, None))
            continue
        node = nodes[i]
        if node.kind == WITNESS and node.value is not None and not value_has_type(node.value, B):
            raise WitnessTypeMismatch(i, f"witness value {node.value!r} does not have type {B}")
        index[key] = len(typed)
        typed.append(TypedNode(i, node.kind, tuple(index[k] for k in kids), A, B))
    return TypedDag(dag, typed)


def _child_types(node: Node, i: int, A: Ty, B: Ty, schemes, gids) -> tuple:
    k = node.kind
    ch = node.children
    if k in (IDEN, UNIT_T, FAIL, WITNESS, SIGHASH):
        return ()
    if k == INJL:
        return ((ch[0], A, B.left),)
    if k == INJR:
        return ((ch[0], A, B.right),)
    if k == TAKE:
        return ((ch[0], A.left, B),)
    if k == DROP:
        return ((ch[0], A.right, B),)
    if k == PAIR:
        return ((ch[0], A, B.left), (ch[1], A, B.right))
    if k == CASE:
        s = A.left
        return ((ch[0], prod(s.left, A.right), B), (ch[1], prod(s.right, A.right), B))
    if k == ASSERTL:
        return ((ch[0], prod(A.left.left, A.right), B),)
    if k == ASSERTR:
        return ((ch[0], prod(A.left.right, A.right), B),)
    # comp: the intermediate type comes from unifying the children's schemes
    s_in, s_out = schemes[ch[0]]
    if type(s_out) is Ty and type(s_in) is Ty:
        return ((ch[0], A, s_out), (ch[1], s_out, B))
    t_in, t_out = schemes[ch[1]]
    if type(t_in) is Ty and type(t_out) is Ty:
        return ((ch[0], A, t_in), (ch[1], t_in, B))
    key = (gids[i], id(A), id(B))
    mid = _MID_CACHE.get(key)
    if mid is None:
        si, so = _inst(schemes[ch[0]])
        ti, to = _inst(schemes[ch[1]])
        _unify(si, A, i)
        _unify(to, B, i)
        _unify(so, ti, i)
        mid = _MID_CACHE[key] = _ground(so, {})
    return ((ch[0], A, mid), (ch[1], mid, B))


def check_typing(typed: TypedDag) -> None:
    """Confirm every typed node instantiates its typing rule exactly.

    Raises RuleViolation naming the first offending typed node.
    """
    nodes = typed.nodes
    dag = typed.dag
    for idx, tn in enumerate(nodes):
        if not 0 <= tn.node < len(dag.nodes):
            raise RuleViolation(idx, "structure", "dangling DAG index")
        dn = dag.nodes[tn.node]
        if dn.kind != tn.kind or len(dn.children) != len(tn.children):
            raise RuleViolation(idx, "structure", "typed node disagrees with its DAG node")
        for c_typed, c_dag in zip(tn.children, dn.children):
            if not 0 <= c_typed < idx or nodes[c_typed].node != c_dag:
                raise RuleViolation(idx, "structure", "child does not match the DAG")
        A, B = tn.ty_in, tn.ty_out
        kids = [nodes[c] for c in tn.children]
        k = tn.kind
        ok = True
        if k == IDEN:
            ok = A is B
        elif k == UNIT_T:
            ok = B is UNIT
        elif k in (INJL, INJR):
            t = kids[0]
            ok = B.is_sum and t.ty_in is A and t.ty_out is (B.left if k == INJL else B.right)
        elif k in (TAKE, DROP):
            t = kids[0]
            ok = A.is_prod and t.ty_in is (A.left if k == TAKE else A.right) and t.ty_out is B
        elif k == COMP:
            s, t = kids
            ok = s.ty_in is A and s.ty_out is t.ty_in and t.ty_out is B
        elif k == PAIR:
            s, t = kids
            ok = B.is_prod and s.ty_in is A and t.ty_in is A and s.ty_out is B.left and t.ty_out is B.right
        elif k in (CASE, ASSERTL, ASSERTR):
            ok = A.is_prod and A.left.is_sum
            if ok:
                left_in = prod(A.left.left, A.right)
                right_in = prod(A.left.right, A.right)
                if k == CASE:
                    s, t = kids
                    ok = s.ty_in is left_in and t.ty_in is right_in and s.ty_out is B and t.ty_out is B
                elif k == ASSERTL:
                    ok = kids[0].ty_in is left_in and kids[0].ty_out is B
                else:
                    ok = kids[0].ty_in is right_in and kids[0].ty_out is B
        elif k == WITNESS:
            if dn.declared is not None and dn.declared is not B:
                ok = False
            elif dn.value is not None:
                ok = value_has_type(dn.value, B)
        elif k == SIGHASH:
            ok = A is SIGHASH_TYPE and B is word(256)
        if not ok:
            raise RuleViolation(idx, k, f"{A} |- {B}")


class NodeCounts(NamedTuple):
    total_tree_nodes: int
    unique_dag_nodes: int
    unique_typed_nodes: int | None


def node_counts(dag: TermDag, typed: TypedDag | None = None) -> NodeCounts:
    """Tree size, structurally unique nodes and unique typed nodes.

    Tree size is computed per node arithmetically, never by expansion.
    """
    total = dag.tree_sizes()[dag.root]
    unique = len(set(dag.structural_ids()))
    if typed is None:
        try:
            typed = infer_types(dag)
        except Exception:
            typed = None
    unique_typed = None if typed is None else len(set(typed.canonical_ids()))
    return NodeCounts(total, unique, unique_typed)
