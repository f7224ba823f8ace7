from __future__ import annotations

import pytest

from simplicity.bitmachine import (
    CrashReason,
    Frame,
    MachineState,
    bwd,
    cells_of_value,
    cells_to_str,
    copy,
    crash,
    drop_frame,
    exec_program,
    fwd,
    init_state,
    move_frame,
    new_frame,
    nop,
    read_branch,
    seq,
    sighash_prim,
    skip,
    step,
    value_of_cells,
    write,
    write_const,
)
from simplicity.errors import MalformedCells, TypeMismatch
from simplicity.semantics import TxEnv, make_sighash
from simplicity.ty import BIT, SIGHASH_TYPE, UNIT, sum_, word
from simplicity.value import ONE, UNIT_VALUE, ZERO, LeftV, PairV, RightV, pack, repr_word

U = 2


def state(read, write, rc=0, wc=0):
    return MachineState([Frame(bytearray(read), rc)], [Frame(bytearray(write), wc)])


def test_cell_codec_examples():
    t = sum_(word(2), BIT)
    assert cells_to_str(cells_of_value(LeftV(repr_word(3, 2)), t)) == "011"
    assert cells_to_str(cells_of_value(RightV(ZERO), t)) == "1?0"
    assert cells_of_value(UNIT_VALUE, UNIT) == bytearray()
    assert value_of_cells(bytes([0, 1, 1]), t) == LeftV(repr_word(3, 2))
    assert value_of_cells(b"", UNIT) == UNIT_VALUE


def test_value_of_cells_rejects_undef_tag():
    with pytest.raises(MalformedCells):
        value_of_cells(bytes([U]), BIT)
    with pytest.raises(MalformedCells):
        value_of_cells(bytes([0, 1]), BIT)


def test_init_state():
    s = init_state(ONE, BIT, BIT)
    assert bytes(s.read_stack[0].cells) == b"\x01" and s.read_stack[0].cursor == 0
    assert bytes(s.write_stack[0].cells) == bytes([U])
    s = init_state(repr_word(5, 4), word(4), word(4))
    assert bytes(s.read_stack[0].cells) == bytes([0, 1, 0, 1])
    with pytest.raises(TypeMismatch):
        init_state(UNIT_VALUE, BIT, BIT)


def test_copy():
    out = step(state([1], [U]), copy(1))
    assert bytes(out.write_stack[0].cells) == b"\x01" and out.write_stack[0].cursor == 1


def test_copy_moves_undefined_cells():
    out = step(state([U, 1], [U, U]), copy(2))
    assert cells_to_str(out.write_stack[0].cells) == "?1"


def test_step_does_not_mutate():
    s = state([1], [U])
    step(s, copy(1))
    assert s.write_stack[0].cells == bytearray([U])


def test_crash_reasons():
    assert step(state([], [1]), write(0)) is CrashReason.DOUBLE_WRITE
    assert step(state([], []), write(0)) is CrashReason.WRITE_PAST_END
    assert step(state([], [U]), skip(2)) is CrashReason.SKIP_PAST_END
    assert step(state([1], [U, U]), copy(2)) is CrashReason.READ_PAST_END
    assert step(state([1, 1], [U]), copy(2)) is CrashReason.WRITE_PAST_END
    assert step(state([1], []), fwd(2)) is CrashReason.FWD_PAST_END
    assert step(state([1], [], rc=0), bwd(1)) is CrashReason.BWD_BEFORE_START
    assert step(state([1], []), move_frame()) is CrashReason.EMPTY_WRITE_STACK
    assert step(state([1], []), drop_frame()) is CrashReason.EMPTY_READ_STACK
    assert step(state([U], [U]), read_branch((), ())) is CrashReason.READ_UNDEFINED
    assert step(state([], []), read_branch((), ())) is CrashReason.READ_PAST_END
    assert step(state([], []), crash()) is CrashReason.EXPLICIT_CRASH


def test_frames():
    s = step(state([1], [U]), new_frame(3))
    assert len(s.write_stack) == 2 and bytes(s.write_stack[-1].cells) == bytes([U] * 3)
    s.write_stack[-1].cursor = 2
    s = step(s, move_frame())
    assert len(s.read_stack) == 2 and s.read_stack[-1].cursor == 0
    s = step(s, drop_frame())
    assert len(s.read_stack) == 1


def test_branch_runs_selected_program():
    s = state([1], [U])
    out, stats = exec_program((read_branch((write(0),), (write(1),)),), s)
    assert bytes(out.write_stack[0].cells) == b"\x01"
    assert stats.instructions == 2


def test_write_const_counts_cells():
    s = state([], [U, U, U])
    out, stats = exec_program((write_const(bytes([1, U, 0])),), s)
    assert cells_to_str(out.write_stack[0].cells) == "1?0"
    assert out.write_stack[0].cursor == 3
    assert stats.instructions == 3


def test_seq_and_stats():
    s = state([1, 0], [U, U])
    out, stats = exec_program((seq((copy(1), fwd(1))), copy(1), bwd(1), nop()), s)
    assert bytes(out.write_stack[0].cells) == b"\x01\x00"
    assert stats.instructions == 5
    assert stats.cells_copied == 2
    assert stats.peak_cells == 4 and stats.peak_frames == 2


def test_sighash_prim_reads_in_place():
    mode = PairV(RightV(ONE), ONE)
    env = TxEnv(b"abc")
    s = MachineState([Frame(cells_of_value(mode, SIGHASH_TYPE), 0)], [Frame(bytearray([U] * 256), 0)])
    out, _ = exec_program((sighash_prim(),), s, env)
    assert out.read_stack[0].cursor == 0
    digest = pack(make_sighash(mode, env), word(256))
    assert int("".join(map(str, out.write_stack[0].cells)), 2) == digest


def test_crash_returns_partial_stats():
    reason, stats = exec_program((nop(), crash(), nop()), state([], []))
    assert reason is CrashReason.EXPLICIT_CRASH
    assert stats.instructions == 2


def test_trace_callback():
    seen = []
    exec_program((new_frame(2), drop_frame()), state([1], []), trace=lambda *a: seen.append(a))
    # dropFrame on a single read frame crashes, trace stops after the first step
    assert [a[0] for a in seen] == [1]
    assert seen[0][2:] == (3, 3)
