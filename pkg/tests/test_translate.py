from __future__ import annotations

import random

import pytest

import randterms
from simplicity.analysis import cb, cb_tco, tco_all
from simplicity.bitmachine import (
    Frame,
    MachineState,
    bwd,
    cells_of_value,
    copy,
    drop_frame,
    exec_program,
    flatten,
    fwd,
    skip,
    write,
)
from simplicity.errors import TypeMismatch
from simplicity.semantics import BOTTOM, eval_core, eval_ext
from simplicity.stdlib import gen_flip, gen_full_adder
from simplicity.term import TermDag, comp, drop, fail, iden, infer_types, injl, unit, witness
from simplicity.translate import compile_bm, compile_tco_on, run_machine, run_term
from simplicity.ty import BIT, prod, sum_, word
from simplicity.value import ONE, UNIT_VALUE, ZERO, random_value, repr_word


def typed_of(t, a=None, b=None):
    return infer_types(TermDag.from_term(t), a, b)


def test_iden_clause():
    assert flatten(compile_bm(typed_of(iden(), BIT, BIT))) == [copy(1)]


def test_unit_clause_is_nop():
    typed = typed_of(unit())
    out, stats = run_term(typed, UNIT_VALUE)
    assert out.value == UNIT_VALUE and stats.instructions == 1


def test_drop_clause():
    typed = typed_of(drop(iden()), prod(word(2), BIT), BIT)
    assert flatten(compile_bm(typed)) == [fwd(2), copy(1), bwd(2)]


def test_injl_clause_pads():
    typed = typed_of(injl(iden()), BIT, sum_(BIT, word(4)))
    assert flatten(compile_bm(typed)) == [write(0), skip(3), copy(1)]


def test_case_framing():
    typed = infer_types(gen_flip())
    prog = flatten(compile_bm(typed))
    assert prog[0].op == 6  # newFrame
    # the read instruction carries fwd(1 + padl) framing in both branches
    branch = [p for p in prog if p.op == 13][0]
    assert branch.arg[0][0] == fwd(1) and branch.arg[0][-1] == bwd(1)


def test_tco_on_clauses():
    assert flatten(compile_tco_on(typed_of(iden(), BIT, BIT))) == [copy(1), drop_frame()]
    assert flatten(compile_tco_on(typed_of(unit()))) == [drop_frame()]


def test_iden_stats():
    out, stats, state = run_machine(typed_of(iden(), BIT, BIT), ONE)
    assert out.value == ONE
    assert stats.instructions == 1 and stats.cells_copied == 1
    assert state.write_stack[0].cursor == 1


def test_flip_all_modes():
    typed = infer_types(gen_flip())
    for tco in (False, True):
        for jets in (False, True):
            assert run_term(typed, ZERO, tco=tco, jets=jets)[0].value == ONE


def test_fail_is_bottom():
    assert run_term(typed_of(fail()), UNIT_VALUE)[0] is BOTTOM


def test_input_type_checked():
    with pytest.raises(TypeMismatch):
        run_term(infer_types(gen_flip()), UNIT_VALUE)


def test_witness_write_const():
    v = repr_word(0x3C, 8)
    typed = typed_of(comp(unit(), witness(v)), BIT)
    for tco in (False, True):
        assert run_term(typed, ONE, tco=tco)[0].value == v


def test_full_adder_jets_transparent():
    typed = infer_types(gen_full_adder(32))
    rng = random.Random(2)
    for _ in range(20):
        x = random_value(typed.source, rng)
        on, s_on = run_term(typed, x, jets=True)
        off, s_off = run_term(typed, x, jets=False)
        assert on.value == off.value
        assert s_on.jet_calls == 1 and s_off.jet_calls == 0


def test_corpus_operational_correctness():
    for sample in randterms.corpus(150, seed=21):
        a_size = sample.typed.source.bit_size
        for x in sample.inputs:
            expected = eval_core(sample.typed, x)
            for tco in (False, True):
                out, stats, state = run_machine(sample.typed, x, tco=tco, jets=False)
                assert out.value == expected
                if not tco:
                    assert len(state.read_stack) == 1 and state.read_stack[0].cursor == 0
                    assert len(state.read_stack[0].cells) == a_size
                assert len(state.write_stack) == 1
                assert state.write_stack[0].cursor == len(state.write_stack[0].cells)
                assert stats.peak_cells <= (cb_tco(sample.typed)[0] if tco else cb(sample.typed))


def test_undef_blindness():
    for sample in randterms.corpus(80, seed=22):
        for x in sample.inputs:
            outs = [run_machine(sample.typed, x, jets=False, undef_fill=f)[0] for f in (0, 1)]
            assert outs[0].value == outs[1].value == eval_core(sample.typed, x)


def test_extended_agreement():
    rng = random.Random(23)
    bottoms = 0
    for sample in randterms.corpus(150, seed=23):
        dag = randterms.extend(sample.dag, rng)
        typed = infer_types(dag, sample.typed.source, sample.typed.target)
        for x in sample.inputs:
            expected = eval_ext(typed, x)
            bottoms += expected is BOTTOM
            for tco in (False, True):
                out, _ = run_term(typed, x, tco=tco, jets=False)
                assert out == expected
    assert bottoms > 0


def test_tco_off_drop_equals_on():
    rng = random.Random(24)
    checked = 0
    for sample in randterms.corpus(40, seed=24):
        for i in rng.sample(range(len(sample.typed.nodes)), min(5, len(sample.typed.nodes))):
            a, b = randterms.tco_state_pair(sample.typed, i, rng)
            assert a == b
            checked += 1
    assert checked >= 100


def test_tco_intermediate_bound():
    # extra cells of a TCO-on fragment stay within max(n1 - m, n2)
    rng = random.Random(25)
    for sample in randterms.corpus(40, seed=25):
        typed = sample.typed
        pairs = tco_all(typed)
        for i, tn in enumerate(typed.nodes):
            x = random_value(tn.ty_in, rng)
            read = cells_of_value(x, tn.ty_in)
            state = MachineState(
                [Frame(bytearray(), 0), Frame(read, 0)],
                [Frame(bytearray([2] * tn.ty_out.bit_size), 0)],
            )
            start = len(read) + tn.ty_out.bit_size
            out, stats = exec_program(compile_tco_on(typed, node=i), state)
            assert isinstance(out, MachineState)
            n1, n2 = pairs[i]
            assert stats.peak_cells - start <= max(n1 - len(read), n2, 0)
