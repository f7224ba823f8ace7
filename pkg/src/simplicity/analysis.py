"""Static cell bounds and an aggregate analysis report."""

from __future__ import annotations

from dataclasses import dataclass

from .term import (
    ASSERTL,
    ASSERTR,
    CASE,
    COMP,
    DROP,
    INJL,
    INJR,
    PAIR,
    TAKE,
    NodeCounts,
    TypedDag,
    node_counts,
)


@dataclass(frozen=True)
class TcoBound:
    n1: int
    n2: int


class _Memo:
    """Per-invocation memo over unique typed nodes, with hit and visit counters."""

    def __init__(self, typed: TypedDag):
        self.ids = typed.canonical_ids()
        self.table: dict[int, tuple[int, int, int]] = {}
        self.hits = 0
        self.visits = 0


def _bounds(typed: TypedDag, memo: _Memo) -> list[tuple[int, int, int]]:
    """(ecb, n1, n2) for every typed node in one bottom-up pass."""
    out: list[tuple[int, int, int]] = []
    nodes = typed.nodes
    for i, tn in enumerate(nodes):
        key = memo.ids[i]
        hit = memo.table.get(key)
        if hit is not None:
            memo.hits += 1
            out.append(hit)
            continue
        memo.visits += 1
        k = tn.kind
        c = tn.children
        if k == COMP:
            e0, n1, n2 = out[c[0]]
            e1, m1, m2 = out[c[1]]
            b = nodes[c[0]].ty_out.bit_size
            v = (b + max(e0, e1), max(b + n1, m1, b + m2), b + n2)
        elif k == CASE:
            e0, n1, n2 = out[c[0]]
            e1, m1, m2 = out[c[1]]
            v = (max(e0, e1), max(n1, m1), max(n2, m2))
        elif k == PAIR:
            e0, n1, n2 = out[c[0]]
            e1, m1, m2 = out[c[1]]
            v = (max(e0, e1), m1, max(n1, n2, m2))
        elif k in (INJL, INJR, TAKE, DROP, ASSERTL, ASSERTR):
            v = out[c[0]]
        else:
            v = (0, 0, 0)
        memo.table[key] = v
        out.append(v)
    return out


def ecb_all(typed: TypedDag) -> list[int]:
    """Extra-cell bound of every typed node."""
    return [e for e, _, _ in _bounds(typed, _Memo(typed))]


def tco_all(typed: TypedDag) -> list[tuple[int, int]]:
    return [(n1, n2) for _, n1, n2 in _bounds(typed, _Memo(typed))]


def cb(typed: TypedDag) -> int:
    """Cell bound for the standard translation."""
    ecb = _bounds(typed, _Memo(typed))[typed.root][0]
    return typed.source.bit_size + typed.target.bit_size + ecb


def cb_tco(typed: TypedDag) -> tuple[int, TcoBound]:
    """Cell bound for the TCO translation, with the root's (n1, n2) pair."""
    _, n1, n2 = _bounds(typed, _Memo(typed))[typed.root]
    return typed.source.bit_size + typed.target.bit_size + max(n1, n2), TcoBound(n1, n2)


@dataclass(frozen=True)
class AnalysisReport:
    cb: int
    cb_tco: int
    tco_pair: TcoBound
    bits_in: int
    bits_out: int
    counts: NodeCounts
    merkle_root: bytes
    memo_hits: int
    memo_visits: int

    def as_pairs(self) -> list[tuple[str, object]]:
        return [
            ("cb", self.cb),
            ("cb_tco", self.cb_tco),
            ("tco_n1", self.tco_pair.n1),
            ("tco_n2", self.tco_pair.n2),
            ("bits_in", self.bits_in),
            ("bits_out", self.bits_out),
            ("total_tree_nodes", self.counts.total_tree_nodes),
            ("unique_dag_nodes", self.counts.unique_dag_nodes),
            ("unique_typed_nodes", self.counts.unique_typed_nodes),
            ("merkle_root", self.merkle_root.hex()),
            ("memo_hits", self.memo_hits),
            ("memo_visits", self.memo_visits),
        ]


def analyze_report(typed: TypedDag) -> AnalysisReport:
    from .merkle import merkle_root

    memo = _Memo(typed)
    ecb, n1, n2 = _bounds(typed, memo)[typed.root]
    a = typed.source.bit_size
    b = typed.target.bit_size
    return AnalysisReport(
        cb=a + b + ecb,
        cb_tco=a + b + max(n1, n2),
        tco_pair=TcoBound(n1, n2),
        bits_in=a,
        bits_out=b,
        counts=node_counts(typed.dag, typed),
        merkle_root=merkle_root(typed.dag),
        memo_hits=memo.hits,
        memo_visits=memo.visits,
    )
