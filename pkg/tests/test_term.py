from __future__ import annotations

import pytest

from simplicity.errors import MalformedDag, OccursCheck, RuleViolation, UnificationClash, WitnessTypeMismatch
from simplicity.stdlib import gen_flip, gen_half_adder, gen_sha256_block
from simplicity.term import (
    Node,
    TermDag,
    TypedDag,
    TypedNode,
    case,
    check_typing,
    comp,
    drop,
    iden,
    infer_types,
    injl,
    injr,
    node_counts,
    pair,
    principal_type,
    scheme_matches,
    take,
    unit,
    unshare,
    witness,
)
from simplicity.ty import BIT, UNIT, prod, sum_, word
from simplicity.value import ZERO, repr_word

import randterms


def test_flip_types():
    typed = infer_types(gen_flip())
    assert typed.source is BIT and typed.target is BIT
    check_typing(typed)


def test_iden_unit_filled():
    typed = infer_types(TermDag.from_term(iden()))
    assert typed.source is UNIT and typed.target is UNIT


def test_root_constraints():
    typed = infer_types(TermDag.from_term(iden()), word(8), word(8))
    assert typed.source is word(8)


def test_unification_clash_names_node():
    with pytest.raises(UnificationClash) as info:
        infer_types(TermDag.from_term(comp(injl(unit()), take(iden()))))
    assert info.value.node == 4


def test_occurs_check():
    with pytest.raises(OccursCheck):
        infer_types(TermDag.from_term(case(iden(), drop(iden()))))


def test_half_adder_type():
    typed = infer_types(gen_half_adder())
    assert typed.source is prod(BIT, BIT)
    assert typed.target is word(2)
    check_typing(typed)


def test_check_typing_catches_tampered_comp():
    typed = infer_types(gen_flip())
    nodes = list(typed.nodes)
    root = nodes[typed.root]
    s = nodes[root.children[0]]
    nodes[root.children[0]] = TypedNode(s.node, s.kind, s.children, s.ty_in, prod(BIT, BIT))
    with pytest.raises(RuleViolation) as info:
        check_typing(TypedDag(typed.dag, nodes, typed.root))
    assert info.value.node in (root.children[0], typed.root)


def test_sharing_is_maximal():
    h = pair(iden(), iden())
    dag = TermDag.from_term(comp(h, h))
    assert len(dag.nodes) == 3
    assert node_counts(dag)[:2] == (7, 3)


def test_shared_node_typed_per_use():
    # the same pair node is used at two different types
    h = pair(iden(), iden())
    typed = infer_types(TermDag.from_term(comp(h, h)))
    check_typing(typed)
    assert node_counts(typed.dag, typed).unique_typed_nodes == 5


def test_node_counts_iden_and_flip():
    assert tuple(node_counts(TermDag.from_term(iden()))) == (1, 1, 1)
    # tree: comp, pair, iden, unit, case, injr, unit, injl, unit
    assert tuple(node_counts(gen_flip())) == (9, 7, 8)


def _brute_counts(typed):
    """Walk the typed tree explicitly; subtrees are compared as nested tuples."""
    dag = typed.dag
    keys = {}

    def key(i):
        if i not in keys:
            n = dag.nodes[i]
            keys[i] = (n.kind, n.hash, n.value, tuple(key(c) for c in n.children))
        return keys[i]

    total = 0
    shapes, typed_shapes = set(), set()
    stack = [typed.root]
    while stack:
        tn = typed.nodes[stack.pop()]
        total += 1
        shapes.add(key(tn.node))
        typed_shapes.add((key(tn.node), tn.ty_in, tn.ty_out))
        stack.extend(tn.children)
    return total, len(shapes), len(typed_shapes)


def test_node_counts_match_brute_force():
    samples = [infer_types(gen_flip())] + [s.typed for s in randterms.corpus(30, seed=31, inputs_per_term=0)]
    for typed in samples:
        if node_counts(typed.dag).total_tree_nodes > 20_000:
            continue
        assert tuple(node_counts(typed.dag, typed)) == _brute_counts(typed)


def test_sha_counts_scale():
    c = node_counts(gen_sha256_block())
    assert 3 * 10**5 <= c.total_tree_nodes <= 3 * 10**7
    assert c.unique_typed_nodes <= 10**4


def test_malformed_dags():
    with pytest.raises(MalformedDag):
        TermDag([])
    with pytest.raises(MalformedDag):
        TermDag([Node("comp", (0, 0), None, None, None)])
    with pytest.raises(MalformedDag):
        TermDag([Node("iden", (), None, None, None), Node("unit", (), None, None, None)])
    with pytest.raises(MalformedDag):
        TermDag([Node("bogus", (), None, None, None)])


def test_placeholders_never_shared():
    dag = TermDag.from_term(pair(witness(), witness()))
    assert dag.placeholders() == [0, 1]


def test_witness_value_checked():
    t = comp(witness(ZERO), take(iden()))
    with pytest.raises(UnificationClash):
        infer_types(TermDag.from_term(t))
    with pytest.raises(WitnessTypeMismatch):
        infer_types(TermDag.from_term(witness(ZERO, declared=word(2))))


def test_witness_minimal_type():
    typed = infer_types(TermDag.from_term(comp(witness(), injl(iden()))))
    assert typed.target is sum_(UNIT, UNIT)


def test_principality_on_hand_typed_terms():
    cases = [
        (gen_flip(), BIT, BIT),
        (TermDag.from_term(take(iden())), prod(word(4), BIT), word(4)),
        (TermDag.from_term(pair(iden(), unit())), word(8), prod(word(8), UNIT)),
        (TermDag.from_term(injr(drop(iden()))), prod(BIT, BIT), sum_(UNIT, BIT)),
        (TermDag.from_term(comp(pair(iden(), iden()), take(iden()))), sum_(BIT, UNIT), sum_(BIT, UNIT)),
    ]
    for dag, a, b in cases:
        scheme = principal_type(dag)
        mapping: dict = {}
        assert scheme_matches(scheme[0], a, mapping) and scheme_matches(scheme[1], b, mapping)
        check_typing(infer_types(dag, a, b))


def test_unshare_preserves_tree():
    dag = TermDag.from_term(comp(pair(iden(), iden()), pair(iden(), iden())))
    tree = unshare(dag, 100)
    assert len(tree.nodes) == node_counts(dag).total_tree_nodes == 7


def test_word_constant_types():
    from simplicity.semantics import scribe

    typed = infer_types(TermDag.from_term(scribe(repr_word(5, 8))))
    assert typed.target is word(8)
