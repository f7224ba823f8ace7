"""The Bit Machine: two stacks of cell frames and a small instruction set.

Cells are stored in ``bytearray`` frames using 0, 1 and ``UNDEF`` (2).
Programs are tuples of ``Instr``; a ``SEQ`` instruction embeds another program
so compiled code can be shared instead of expanded.
"""

from __future__ import annotations

import enum
import functools
from dataclasses import dataclass
from typing import Callable, NamedTuple

from .errors import MalformedCells, TypeMismatch
from .ty import SIGHASH_TYPE, SUM_KIND, UNIT_KIND, Ty, word
from .value import LeftV, PairV, RightV, UNIT_VALUE, Value, pack, value_has_type

UNDEF = 2

_TO_ASCII = bytes.maketrans(b"\x00\x01\x02", b"010")
_FROM_ASCII = bytes.maketrans(b"01", b"\x00\x01")
_TO_DISPLAY = bytes.maketrans(b"\x00\x01\x02", b"01?")


class CrashReason(enum.Enum):
    DOUBLE_WRITE = "DoubleWrite"
    WRITE_PAST_END = "WritePastEnd"
    SKIP_PAST_END = "SkipPastEnd"
    READ_PAST_END = "ReadPastEnd"
    FWD_PAST_END = "FwdPastEnd"
    BWD_BEFORE_START = "BwdBeforeStart"
    EMPTY_WRITE_STACK = "EmptyWriteStack"
    EMPTY_READ_STACK = "EmptyReadStack"
    READ_UNDEFINED = "ReadUndefined"
    EXPLICIT_CRASH = "ExplicitCrash"

    def __str__(self) -> str:
        return self.value


class MachineCrash(Exception):
    def __init__(self, reason: CrashReason, stats: "ExecStats | None" = None):
        super().__init__(str(reason))
        self.reason = reason
        self.stats = stats


# ---------------------------------------------------------------------------
# instructions

(
    OP_NOP,
    OP_WRITE,
    OP_COPY,
    OP_SKIP,
    OP_FWD,
    OP_BWD,
    OP_NEW_FRAME,
    OP_MOVE_FRAME,
    OP_DROP_FRAME,
    OP_CRASH,
    OP_WRITE_CONST,
    OP_SIGHASH,
    OP_JET,
    OP_BRANCH,
    OP_SEQ,
) = range(15)

OP_NAMES = {
    OP_NOP: "nop",
    OP_WRITE: "write",
    OP_COPY: "copy",
    OP_SKIP: "skip",
    OP_FWD: "fwd",
    OP_BWD: "bwd",
    OP_NEW_FRAME: "newFrame",
    OP_MOVE_FRAME: "moveFrame",
    OP_DROP_FRAME: "dropFrame",
    OP_CRASH: "crash",
    OP_WRITE_CONST: "writeConst",
    OP_SIGHASH: "sigHash",
    OP_JET: "jet",
    OP_BRANCH: "read",
    OP_SEQ: "seq",
}


class Instr(NamedTuple):
    op: int
    arg: object = None

    def __str__(self) -> str:
        return format_instr(self)


Program = tuple  # tuple[Instr, ...]


def nop() -> Instr:
    return Instr(OP_NOP)


def write(b: int) -> Instr:
    if b not in (0, 1):
        raise ValueError("write takes a bit")
    return Instr(OP_WRITE, b)


def copy(n: int) -> Instr:
    return Instr(OP_COPY, n)


def skip(n: int) -> Instr:
    return Instr(OP_SKIP, n)


def fwd(n: int) -> Instr:
    return Instr(OP_FWD, n)


def bwd(n: int) -> Instr:
    return Instr(OP_BWD, n)


def new_frame(n: int) -> Instr:
    return Instr(OP_NEW_FRAME, n)


def move_frame() -> Instr:
    return Instr(OP_MOVE_FRAME)


def drop_frame() -> Instr:
    return Instr(OP_DROP_FRAME)


def crash() -> Instr:
    return Instr(OP_CRASH)


def write_const(cells) -> Instr:
    return Instr(OP_WRITE_CONST, bytes(cells))


def sighash_prim() -> Instr:
    return Instr(OP_SIGHASH)


def read_branch(on_zero: Program, on_one: Program) -> Instr:
    return Instr(OP_BRANCH, (tuple(on_zero), tuple(on_one)))


def seq(program: Program) -> Instr:
    return Instr(OP_SEQ, tuple(program))


class JetCall(NamedTuple):
    """Payload of a jet instruction: native function over cell arrays."""

    name: str
    in_size: int
    out_size: int
    fn: Callable[[bytes], bytes]


def jet_call(call: JetCall) -> Instr:
    return Instr(OP_JET, call)


def format_instr(ins: Instr) -> str:
    op, arg = ins
    name = OP_NAMES[op]
    if op in (OP_WRITE, OP_COPY, OP_SKIP, OP_FWD, OP_BWD, OP_NEW_FRAME):
        return f"{name}({arg})"
    if op == OP_WRITE_CONST:
        return f"{name}({cells_to_str(arg)})"
    if op == OP_JET:
        return f"{name}({arg.name})"
    if op == OP_BRANCH:
        return f"{name}()"
    return f"{name}()"


def flatten(program: Program) -> list[Instr]:
    """Expand SEQ steps (for inspection of small programs)."""
    out: list[Instr] = []
    stack = [iter(program)]
    while stack:
        ins = next(stack[-1], None)
        if ins is None:
            stack.pop()
        elif ins.op == OP_SEQ:
            stack.append(iter(ins.arg))
        else:
            out.append(ins)
    return out


def program_size(program: Program) -> int:
    """Number of Instr objects in the shared representation."""
    seen: set[int] = set()
    total = 0
    stack = [program]
    while stack:
        p = stack.pop()
        if id(p) in seen:
            continue
        seen.add(id(p))
        for ins in p:
            total += 1
            if ins.op == OP_SEQ:
                stack.append(ins.arg)
            elif ins.op == OP_BRANCH:
                stack.extend(ins.arg)
    return total


# ---------------------------------------------------------------------------
# cell codecs


def cells_to_str(cells) -> str:
    return bytes(cells).translate(_TO_DISPLAY).decode()


def cells_of_value(v: Value, ty: Ty) -> bytearray:
    """Cell array for ``v`` (tag, Undef padding, payload for sums)."""
    if not value_has_type(v, ty):
        raise TypeMismatch(f"value {v!r} does not have type {ty}")
    out = bytearray()
    stack = [(v, ty)]
    while stack:
        v, ty = stack.pop()
        kind = ty.kind
        if kind == UNIT_KIND:
            continue
        if kind == SUM_KIND:
            if isinstance(v, LeftV):
                out.append(0)
                out.extend(b"\x02" * (ty.bit_size - 1 - ty.left.bit_size))
                stack.append((v.inner, ty.left))
            else:
                out.append(1)
                out.extend(b"\x02" * (ty.bit_size - 1 - ty.right.bit_size))
                stack.append((v.inner, ty.right))
        else:
            stack.append((v.second, ty.right))
            stack.append((v.first, ty.left))
    return out


def value_of_cells(cells, ty: Ty) -> Value:
    """Inverse of ``cells_of_value``; padding cells are ignored."""
    cells = bytes(cells)
    if len(cells) != ty.bit_size:
        raise MalformedCells(f"expected {ty.bit_size} cells for {ty}, got {len(cells)}")
    return _decode(cells, 0, ty)


def _decode(cells: bytes, pos: int, ty: Ty) -> Value:
    kind = ty.kind
    if kind == UNIT_KIND:
        return UNIT_VALUE
    if kind == SUM_KIND:
        tag = cells[pos]
        if tag == UNDEF:
            raise MalformedCells(f"undefined tag cell at {pos}")
        if tag not in (0, 1):
            raise MalformedCells(f"invalid cell {tag} at {pos}")
        branch = ty.right if tag else ty.left
        inner = _decode(cells, pos + ty.bit_size - branch.bit_size, branch)
        return RightV(inner) if tag else LeftV(inner)
    left = _decode(cells, pos, ty.left)
    return PairV(left, _decode(cells, pos + ty.left.bit_size, ty.right))


def cells_to_int(cells) -> int:
    """Packed integer of a cell slice, Undef read as 0."""
    if not cells:
        return 0
    return int(bytes(cells).translate(_TO_ASCII), 2)


def int_to_cells(x: int, ty: Ty) -> bytes:
    """Cells for the packed integer ``x`` of type ``ty`` (padding as Undef)."""
    n = ty.bit_size
    if n == 0:
        return b""
    raw = bytearray(format(x, f"0{n}b").encode().translate(_FROM_ASCII))
    if _has_sums_with_padding(ty):
        _mark_padding(raw, 0, ty)
    return bytes(raw)


@functools.lru_cache(maxsize=None)
def _has_sums_with_padding(ty: Ty) -> bool:
    if ty.kind == UNIT_KIND:
        return False
    if ty.kind == SUM_KIND:
        if ty.left.bit_size != ty.right.bit_size:
            return True
    return _has_sums_with_padding(ty.left) or _has_sums_with_padding(ty.right)


def _mark_padding(raw: bytearray, pos: int, ty: Ty) -> None:
    stack = [(pos, ty)]
    while stack:
        pos, ty = stack.pop()
        if not _has_sums_with_padding(ty):
            continue
        if ty.kind == SUM_KIND:
            branch = ty.right if raw[pos] else ty.left
            start = pos + ty.bit_size - branch.bit_size
            raw[pos + 1 : start] = b"\x02" * (start - pos - 1)
            stack.append((start, branch))
        else:
            stack.append((pos, ty.left))
            stack.append((pos + ty.left.bit_size, ty.right))


# ---------------------------------------------------------------------------
# machine state


@dataclass(slots=True)
class Frame:
    cells: bytearray
    cursor: int = 0

    def __repr__(self) -> str:
        s = cells_to_str(self.cells)
        return f"[{s[: self.cursor]}^{s[self.cursor :]}]"


@dataclass
class MachineState:
    read_stack: list[Frame]
    write_stack: list[Frame]

    def total_cells(self) -> int:
        return sum(len(f.cells) for f in self.read_stack) + sum(len(f.cells) for f in self.write_stack)

    def total_frames(self) -> int:
        return len(self.read_stack) + len(self.write_stack)

    def snapshot(self) -> tuple:
        return (
            tuple((bytes(f.cells), f.cursor) for f in self.read_stack),
            tuple((bytes(f.cells), f.cursor) for f in self.write_stack),
        )

    def clone(self) -> MachineState:
        return MachineState(
            [Frame(bytearray(f.cells), f.cursor) for f in self.read_stack],
            [Frame(bytearray(f.cells), f.cursor) for f in self.write_stack],
        )


@dataclass
class ExecStats:
    instructions: int = 0
    cells_copied: int = 0
    peak_cells: int = 0
    peak_frames: int = 0
    jet_calls: int = 0

    def as_dict(self) -> dict:
        return {
            "instructions": self.instructions,
            "cellsCopied": self.cells_copied,
            "peakCells": self.peak_cells,
            "peakFrames": self.peak_frames,
            "jetCalls": self.jet_calls,
        }


def init_state(v: Value, A: Ty, B: Ty) -> MachineState:
    cells = cells_of_value(v, A)
    return MachineState([Frame(cells, 0)], [Frame(bytearray(b"\x02" * B.bit_size), 0)])


def init_state_packed(x: int, A: Ty, B: Ty) -> MachineState:
    return MachineState(
        [Frame(bytearray(int_to_cells(x, A)), 0)], [Frame(bytearray(b"\x02" * B.bit_size), 0)]
    )


def step(state: MachineState, instr: Instr, env=None) -> MachineState | CrashReason:
    """Apply one instruction to a copy of ``state``."""
    new = state.clone()
    result, _ = exec_program((instr,), new, env)
    return result


def _sighash_cells(env, mode_cells: bytes) -> bytes:
    from .semantics import EMPTY_ENV, make_sighash

    mode = value_of_cells(mode_cells, SIGHASH_TYPE)
    digest = make_sighash(mode, env if env is not None else EMPTY_ENV)
    return int_to_cells(pack(digest, word(256)), word(256))


def exec_program(
    program: Program,
    state: MachineState,
    env=None,
    *,
    trace: Callable[[int, Instr, int, int], None] | None = None,
    undef_fill: int | None = None,
) -> tuple[MachineState | CrashReason, ExecStats]:
    """Run ``program`` on ``state`` (mutated in place).

    Returns the final state, or the crash reason, with the statistics.
    ``trace(step, instr, total_cells, total_frames)`` is called after each
    instruction.
    ``undef_fill`` (0 or 1) backs new frames with that bit instead of Undef
    and disables the Undef-sensitive checks.
    """
    stats = ExecStats()
    try:
        _run(program, state, env, stats, trace, undef_fill)
    except MachineCrash as exc:
        return exc.reason, stats
    return state, stats


def run_checked(program, state, env=None, *, trace=None, undef_fill=None) -> ExecStats:
    """Like ``exec_program`` but raises MachineCrash (with stats attached)."""
    stats = ExecStats()
    try:
        _run(program, state, env, stats, trace, undef_fill)
    except MachineCrash as exc:
        exc.stats = stats
        raise
    return stats


def _run(program, state: MachineState, env, stats: ExecStats, trace, undef_fill) -> None:
    rstack = state.read_stack
    wstack = state.write_stack
    if not rstack or not wstack:
        raise ValueError("machine state needs non-empty stacks")
    strict = undef_fill is None
    fill = b"\x02" if strict else bytes([undef_fill])
    rframe = rstack.pop()
    wframe = wstack.pop()
    rcells, rc = rframe.cells, rframe.cursor
    wcells, wc = wframe.cells, wframe.cursor
    total_cells = sum(len(f.cells) for f in rstack) + sum(len(f.cells) for f in wstack)
    total_cells += len(rcells) + len(wcells)
    total_frames = len(rstack) + len(wstack) + 2
    peak_cells = max(stats.peak_cells, total_cells)
    peak_frames = max(stats.peak_frames, total_frames)
    count = 0
    copied = 0
    jets = 0

    def sync():
        rframe.cells, rframe.cursor = rcells, rc
        wframe.cells, wframe.cursor = wcells, wc
        rstack.append(rframe)
        wstack.append(wframe)
        stats.instructions += count
        stats.cells_copied += copied
        stats.peak_cells = peak_cells
        stats.peak_frames = peak_frames
        stats.jet_calls += jets

    def fail(reason):
        sync()
        raise MachineCrash(reason)

    conts: list = []
    prog = program
    pc = 0
    end = len(prog)
    while True:
        if pc == end:
            if not conts:
                break
            prog, pc = conts.pop()
            end = len(prog)
            continue
        op, arg = prog[pc]
        pc += 1
        if op == OP_SEQ:
            conts.append((prog, pc))
            prog = arg
            pc = 0
            end = len(prog)
            continue
        count += 1
        if op == OP_COPY:
            if rc + arg > len(rcells):
                fail(CrashReason.READ_PAST_END)
            if wc + arg > len(wcells):
                fail(CrashReason.WRITE_PAST_END)
            if strict and arg and (wcells.find(0, wc, wc + arg) >= 0 or wcells.find(1, wc, wc + arg) >= 0):
                fail(CrashReason.DOUBLE_WRITE)
            wcells[wc : wc + arg] = rcells[rc : rc + arg]
            wc += arg
            copied += arg
        elif op == OP_FWD:
            if rc + arg > len(rcells):
                fail(CrashReason.FWD_PAST_END)
            rc += arg
        elif op == OP_BWD:
            if rc - arg < 0:
                fail(CrashReason.BWD_BEFORE_START)
            rc -= arg
        elif op == OP_BRANCH:
            if rc >= len(rcells):
                fail(CrashReason.READ_PAST_END)
            b = rcells[rc]
            if b == UNDEF and strict:
                fail(CrashReason.READ_UNDEFINED)
            if trace is not None:
                trace(count, prog[pc - 1], total_cells, total_frames)
            conts.append((prog, pc))
            prog = arg[b & 1]
            pc = 0
            end = len(prog)
            continue
        elif op == OP_NEW_FRAME:
            wstack.append(Frame(wcells, wc))
            wcells = bytearray(fill * arg)
            wc = 0
            total_cells += arg
            total_frames += 1
            if total_cells > peak_cells:
                peak_cells = total_cells
            if total_frames > peak_frames:
                peak_frames = total_frames
        elif op == OP_MOVE_FRAME:
            if not wstack:
                fail(CrashReason.EMPTY_WRITE_STACK)
            rstack.append(Frame(rcells, rc))
            rcells = wcells
            rc = 0
            below = wstack.pop()
            wcells, wc = below.cells, below.cursor
        elif op == OP_DROP_FRAME:
            if not rstack:
                fail(CrashReason.EMPTY_READ_STACK)
            total_cells -= len(rcells)
            total_frames -= 1
            below = rstack.pop()
            rcells, rc = below.cells, below.cursor
        elif op == OP_WRITE:
            if wc >= len(wcells):
                fail(CrashReason.WRITE_PAST_END)
            if strict and wcells[wc] != UNDEF:
                fail(CrashReason.DOUBLE_WRITE)
            wcells[wc] = arg
            wc += 1
        elif op == OP_SKIP:
            if wc + arg > len(wcells):
                fail(CrashReason.SKIP_PAST_END)
            wc += arg
        elif op == OP_NOP:
            pass
        elif op == OP_CRASH:
            fail(CrashReason.EXPLICIT_CRASH)
        elif op == OP_WRITE_CONST:
            n = len(arg)
            count += n - 1
            if wc + n > len(wcells):
                fail(CrashReason.WRITE_PAST_END)
            for j in range(n):
                c = arg[j]
                if c != UNDEF:
                    if strict and wcells[wc + j] != UNDEF:
                        fail(CrashReason.DOUBLE_WRITE)
                    wcells[wc + j] = c
            wc += n
        elif op == OP_JET:
            # one synthetic instruction plus one write per output cell
            count += arg.out_size
            if rc + arg.in_size > len(rcells):
                fail(CrashReason.READ_PAST_END)
            if wc + arg.out_size > len(wcells):
                fail(CrashReason.WRITE_PAST_END)
            out = arg.fn(bytes(rcells[rc : rc + arg.in_size]))
            if strict and (wcells.find(0, wc, wc + arg.out_size) >= 0 or wcells.find(1, wc, wc + arg.out_size) >= 0):
                fail(CrashReason.DOUBLE_WRITE)
            wcells[wc : wc + arg.out_size] = out
            wc += arg.out_size
            jets += 1
        elif op == OP_SIGHASH:
            if rc + 3 > len(rcells):
                fail(CrashReason.READ_PAST_END)
            if wc + 256 > len(wcells):
                fail(CrashReason.WRITE_PAST_END)
            mode = bytes(rcells[rc : rc + 3])
            if strict and (mode[0] == UNDEF or (mode[0] == 1 and mode[1] == UNDEF) or mode[2] == UNDEF):
                fail(CrashReason.READ_UNDEFINED)
            if not strict:
                mode = bytes(c & 1 if c != UNDEF else 0 for c in mode)
            if strict and (wcells.find(0, wc, wc + 256) >= 0 or wcells.find(1, wc, wc + 256) >= 0):
                fail(CrashReason.DOUBLE_WRITE)
            wcells[wc : wc + 256] = _sighash_cells(env, mode)
            wc += 256
        else:
            raise ValueError(f"unknown opcode {op}")
        if trace is not None:
            trace(count, prog[pc - 1], total_cells, total_frames)
    sync()


__all__ = [
    "CrashReason",
    "ExecStats",
    "Frame",
    "Instr",
    "JetCall",
    "MachineCrash",
    "MachineState",
    "UNDEF",
    "bwd",
    "cells_of_value",
    "cells_to_int",
    "copy",
    "crash",
    "drop_frame",
    "exec_program",
    "flatten",
    "format_instr",
    "fwd",
    "init_state",
    "int_to_cells",
    "jet_call",
    "move_frame",
    "new_frame",
    "nop",
    "program_size",
    "read_branch",
    "run_checked",
    "seq",
    "sighash_prim",
    "skip",
    "step",
    "value_of_cells",
    "write",
    "write_const",
]
