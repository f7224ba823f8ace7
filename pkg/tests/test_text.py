from __future__ import annotations

import random

import pytest

from simplicity import stdlib
from simplicity.errors import CountMismatch, DuplicateLet, ParseError, UnboundName, WitnessTypeMismatch
from simplicity.merkle import merkle_root
from simplicity.semantics import BOTTOM, TxEnv, eval_ext, make_sighash
from simplicity.term import TermDag, infer_types, node_counts
from simplicity.text import (
    format_dag,
    format_tx,
    format_value,
    format_values,
    parse,
    parse_tx,
    parse_type,
    parse_value,
    parse_values,
    substitute_witnesses,
)
from simplicity.ty import BIT, UNIT, format_type, prod, sum_, word
from simplicity.value import UNIT_VALUE, LeftV, PairV, RightV, bytes_to_word, random_value, repr_word, word_to_bytes

from randterms import BASE_TYPES, corpus


def test_flip_round_trip():
    dag = stdlib.gen_flip()
    text = format_dag(dag)
    assert parse(text) == dag
    assert format_dag(parse(text)) == text


def test_sha_round_trip():
    dag = stdlib.gen_sha256_block()
    text = format_dag(dag)
    back = parse(text)
    assert back == dag.canonical()
    assert merkle_root(back) == merkle_root(dag)


def test_corpus_round_trip():
    for s in corpus(60, seed=11, inputs_per_term=0):
        text = format_dag(s.dag)
        assert parse(text) == s.dag.canonical()
        assert format_dag(parse(text)) == text


def test_whitespace_and_comments_ignored():
    a = parse("(comp (pair iden unit) (case (injr unit) (injl unit)))")
    b = parse("// flip\n(comp\n  (pair iden unit)\n  (case (injr unit)   (injl unit)))\n")
    assert a == b


def test_let_sharing():
    dag = parse("let h = (pair iden iden); (comp h h)")
    counts = node_counts(dag)
    assert counts.unique_dag_nodes == 3
    assert counts.total_tree_nodes == 7
    assert parse("(comp (pair iden iden) (pair iden iden))") == dag


def test_let_may_reference_earlier_lets():
    dag = parse("let a = (injl unit); let b = (pair a a); b")
    assert format_dag(dag) == "let x0 = (injl unit);\n(pair x0 x0)\n"


def test_syntax_errors():
    with pytest.raises(ParseError) as e:
        parse("(comp iden")
    assert e.value.line == 1 and e.value.column == 11
    with pytest.raises(ParseError) as e:
        parse("(comp iden\n  (bogus iden))")
    assert e.value.line == 2 and e.value.column == 4
    for bad in ["(pair iden)", "iden iden", "(iden)", "(assertl iden #00)", "$", "let iden = unit; iden"]:
        with pytest.raises(ParseError):
            parse(bad)


def test_unbound_and_duplicate():
    with pytest.raises(UnboundName):
        parse("(comp f iden)")
    with pytest.raises(DuplicateLet):
        parse("let f = iden; let f = unit; f")


def test_values():
    for text, v in [
        ("u", UNIT_VALUE),
        ("(L u)", LeftV(UNIT_VALUE)),
        ("((R u), u)", PairV(RightV(UNIT_VALUE), UNIT_VALUE)),
        ("0xff:8", repr_word(255, 8)),
        ("0x5:4", repr_word(5, 4)),
    ]:
        assert parse_value(text) == v
    assert parse_value("0x0a:8") == parse_value("0xa:8")
    for bad in ["0x100:8", "0x1:3", "(L)", "(u u)", "u u"]:
        with pytest.raises(ParseError):
            parse_value(bad)


def test_value_format_round_trip():
    rng = random.Random(12)
    for ty in BASE_TYPES + [word(256), sum_(word(8), UNIT)]:
        for _ in range(10):
            v = random_value(ty, rng)
            assert parse_value(format_value(v)) == v
    assert format_value(repr_word(0xAB, 8)) == "0xab:8"
    assert format_value(LeftV(UNIT_VALUE)) == "(L u)"
    vals = [repr_word(3, 4), UNIT_VALUE]
    assert parse_values(format_values(vals)) == vals


def test_types():
    assert parse_type("1") is UNIT
    assert parse_type("(1 + 1)") is BIT
    assert parse_type("2^8") is word(8)
    t = prod(sum_(UNIT, BIT), word(4))
    assert parse_type(format_type(t)) is t
    with pytest.raises(ParseError):
        parse_type("(1 - 1)")


def test_witness_syntax():
    dag = parse("(comp (witness 0x3:4 :: 2^4) iden)")
    typed = infer_types(dag)
    assert typed.source is UNIT and typed.target is word(4)
    assert parse(format_dag(dag)) == dag
    assert parse("(witness _)").placeholders() == [0]


def _template():
    return parse("(pair (witness _ :: 2^2) (comp (witness _) (injl iden)))")


def test_substitute_witnesses():
    dag = _template()
    out = substitute_witnesses(dag, parse_values("0x1:2 u"))
    assert merkle_root(out) == merkle_root(dag)
    typed = infer_types(out)
    assert eval_ext(typed, UNIT_VALUE).value == PairV(repr_word(1, 2), LeftV(UNIT_VALUE))


def test_substitute_count_mismatch():
    with pytest.raises(CountMismatch):
        substitute_witnesses(_template(), parse_values("u"))
    with pytest.raises(CountMismatch):
        substitute_witnesses(_template(), parse_values("u u u"))


def test_substitute_type_mismatch():
    dag = parse("(comp (witness _) (comp (pair iden unit) (case (injr unit) (injl unit))))")
    with pytest.raises(WitnessTypeMismatch):
        substitute_witnesses(dag, parse_values("u"))
    ok = substitute_witnesses(dag, parse_values("(R u)"))
    assert eval_ext(infer_types(ok), UNIT_VALUE).value == LeftV(UNIT_VALUE)


def test_basic_verify_template_with_witness_file():
    env = TxEnv(bytes.fromhex("0011"))
    mode = parse_value("((L u), (L u))")
    digest = word_to_bytes(make_sighash(mode, env), 256)
    sig, pk = stdlib.toy_keypair(digest, random.Random(13))
    template = parse(format_dag(stdlib.gen_basic_verify(pk)))
    wfile = format_values([bytes_to_word(sig), mode])
    filled = substitute_witnesses(template, parse_values(wfile))
    assert merkle_root(filled) == merkle_root(template)
    assert not eval_ext(infer_types(filled), UNIT_VALUE, env).is_bottom
    other = substitute_witnesses(template, [bytes_to_word(bytes(64)), mode])
    assert eval_ext(infer_types(other), UNIT_VALUE, env) is BOTTOM


def test_tx_files():
    env = parse_tx("deadBEEF\n")
    assert env.tx_bytes == bytes.fromhex("deadbeef")
    assert parse_tx(format_tx(env)) == env
    with pytest.raises(ParseError):
        parse_tx("xyz")


def test_format_is_deterministic():
    dag = TermDag.from_term(stdlib.full_adder(4))
    assert format_dag(dag) == format_dag(parse(format_dag(dag)))
