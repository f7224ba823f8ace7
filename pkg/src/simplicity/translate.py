"""Compilation of typed terms to Bit Machine programs, and the term runner."""

from __future__ import annotations

from .bitmachine import (
    CrashReason,
    ExecStats,
    MachineCrash,
    MachineState,
    bwd,
    cells_of_value,
    copy,
    crash,
    drop_frame,
    fwd,
    init_state,
    jet_call,
    move_frame,
    new_frame,
    nop,
    read_branch,
    run_checked,
    seq,
    sighash_prim,
    skip,
    value_of_cells,
    write,
    write_const,
)
from .errors import InternalCrash, MissingWitness, TypeMismatch
from .semantics import BOTTOM, EMPTY_ENV, EvalOutcome, Ok, TxEnv
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
from .ty import pad_l, pad_r
from .value import Value, value_has_type

INLINE_LIMIT = 4

_NOP = nop()
_MOVE = move_frame()
_DROP = drop_frame()
_CRASH = crash()
_SIGHASH = sighash_prim()


def _emb(p: tuple) -> tuple:
    """Steps that embed program ``p``: inline when short, else one SEQ."""
    if len(p) <= INLINE_LIMIT:
        return p
    return (seq(p),)


def _jet_calls(typed: TypedDag, registry) -> list:
    """Jet instruction per typed node, or None."""
    out = [None] * len(typed.nodes)
    if registry is None:
        return out
    from .merkle import merkle_roots

    sigs = registry.signatures()
    core = typed.dag.core_flags()
    roots = None
    for i, tn in enumerate(typed.nodes):
        if tn.kind in (IDEN, UNIT_T) or (tn.ty_in, tn.ty_out) not in sigs or not core[tn.node]:
            continue
        if roots is None:
            roots = merkle_roots(typed.dag)
        jet = registry.lookup(roots[tn.node], tn.ty_in, tn.ty_out)
        if jet is not None:
            out[i] = jet_call(jet.call())
    return out


def _witness_cells(typed: TypedDag, i: int) -> bytes:
    tn = typed.nodes[i]
    v = typed.dag.nodes[tn.node].value
    if v is None:
        raise MissingWitness(f"witness node {tn.node} has no value")
    return bytes(cells_of_value(v, tn.ty_out))


def _std_node(typed: TypedDag, i: int, progs: list, jets: list) -> tuple:
    tn = typed.nodes[i]
    if jets[i] is not None:
        return (jets[i],)
    k = tn.kind
    A, B = tn.ty_in, tn.ty_out
    ch = [progs[c] for c in tn.children]
    if k == IDEN:
        return (copy(A.bit_size),)
    if k == UNIT_T:
        return (_NOP,)
    if k == INJL:
        return (write(0), skip(pad_l(B.left, B.right))) + _emb(ch[0])
    if k == INJR:
        return (write(1), skip(pad_r(B.left, B.right))) + _emb(ch[0])
    if k == TAKE:
        return ch[0]
    if k == DROP:
        n = A.left.bit_size
        return (fwd(n),) + _emb(ch[0]) + (bwd(n),)
    if k == COMP:
        mid = typed.nodes[tn.children[0]].ty_out
        return (new_frame(mid.bit_size),) + _emb(ch[0]) + (_MOVE,) + _emb(ch[1]) + (_DROP,)
    if k == PAIR:
        return _emb(ch[0]) + _emb(ch[1])
    if k in (CASE, ASSERTL, ASSERTR):
        s = A.left
        nl = 1 + pad_l(s.left, s.right)
        nr = 1 + pad_r(s.left, s.right)
        if k == CASE:
            on0 = (fwd(nl),) + _emb(ch[0]) + (bwd(nl),)
            on1 = (fwd(nr),) + _emb(ch[1]) + (bwd(nr),)
        elif k == ASSERTL:
            on0 = (fwd(nl),) + _emb(ch[0]) + (bwd(nl),)
            on1 = (_CRASH,)
        else:
            on0 = (_CRASH,)
            on1 = (fwd(nr),) + _emb(ch[0]) + (bwd(nr),)
        return (read_branch(on0, on1),)
    if k == FAIL:
        return (_CRASH,)
    if k == WITNESS:
        return (write_const(_witness_cells(typed, i)),)
    if k == SIGHASH:
        return (_SIGHASH,)
    raise AssertionError(k)


def compile_bm(typed: TypedDag, registry=None) -> tuple:
    """Standard translation; ``registry`` enables jet substitution."""
    key = ("bm", id(registry))
    hit = typed._memo.get(key)
    if hit is not None and hit[0] is registry:
        return hit[1]
    jets = _jet_calls(typed, registry)
    progs: list = [None] * len(typed.nodes)
    for i in range(len(typed.nodes)):
        progs[i] = _std_node(typed, i, progs, jets)
    prog = progs[typed.root]
    typed._memo[key] = (registry, prog)
    return prog


def _tco_nodes(typed: TypedDag, registry=None) -> tuple[list, list]:
    """(off, on) programs per typed node."""
    key = ("tco", id(registry))
    hit = typed._memo.get(key)
    if hit is not None and hit[0] is registry:
        return hit[1]
    jets = _jet_calls(typed, registry)
    n = len(typed.nodes)
    off: list = [None] * n
    on: list = [None] * n
    for i, tn in enumerate(typed.nodes):
        k = tn.kind
        A, B = tn.ty_in, tn.ty_out
        c = tn.children
        if jets[i] is not None:
            off[i] = (jets[i],)
            on[i] = (jets[i], _DROP)
            continue
        if k == COMP:
            mid = typed.nodes[c[0]].ty_out
            off[i] = (new_frame(mid.bit_size),) + _emb(off[c[0]]) + (_MOVE,) + _emb(on[c[1]])
            on[i] = (new_frame(mid.bit_size),) + _emb(on[c[0]]) + (_MOVE,) + _emb(on[c[1]])
            continue
        off[i] = _std_node(typed, i, off, jets)
        if k == IDEN:
            on[i] = (copy(A.bit_size), _DROP)
        elif k == UNIT_T:
            on[i] = (_DROP,)
        elif k == INJL:
            on[i] = (write(0), skip(pad_l(B.left, B.right))) + _emb(on[c[0]])
        elif k == INJR:
            on[i] = (write(1), skip(pad_r(B.left, B.right))) + _emb(on[c[0]])
        elif k == TAKE:
            on[i] = on[c[0]]
        elif k == DROP:
            on[i] = (fwd(A.left.bit_size),) + _emb(on[c[0]])
        elif k == PAIR:
            on[i] = _emb(off[c[0]]) + _emb(on[c[1]])
        elif k in (CASE, ASSERTL, ASSERTR):
            s = A.left
            nl = 1 + pad_l(s.left, s.right)
            nr = 1 + pad_r(s.left, s.right)
            if k == CASE:
                on0 = (fwd(nl),) + _emb(on[c[0]])
                on1 = (fwd(nr),) + _emb(on[c[1]])
            elif k == ASSERTL:
                on0 = (fwd(nl),) + _emb(on[c[0]])
                on1 = (_CRASH,)
            else:
                on0 = (_CRASH,)
                on1 = (fwd(nr),) + _emb(on[c[0]])
            on[i] = (read_branch(on0, on1),)
        elif k == FAIL:
            on[i] = (_CRASH,)
        elif k in (WITNESS, SIGHASH):
            on[i] = off[i] + (_DROP,)
        else:  # pragma: no cover
            raise AssertionError(k)
    typed._memo[key] = (registry, (off, on))
    return off, on


def compile_tco(typed: TypedDag, registry=None) -> tuple:
    """Tail-call-optimized translation (TCO-off at the top level)."""
    return _tco_nodes(typed, registry)[0][typed.root]


def compile_tco_on(typed: TypedDag, registry=None, node: int | None = None) -> tuple:
    """TCO-on program of ``node`` (default the root)."""
    return _tco_nodes(typed, registry)[1][typed.root if node is None else node]


def compile_tco_off(typed: TypedDag, registry=None, node: int | None = None) -> tuple:
    return _tco_nodes(typed, registry)[0][typed.root if node is None else node]


def _resolve_registry(jets, registry):
    if not jets:
        return None
    if registry is None:
        from .jets import default_registry

        registry = default_registry()
    return registry


def run_machine(
    typed: TypedDag,
    input: Value,
    *,
    tco: bool = False,
    jets: bool = True,
    env: TxEnv = EMPTY_ENV,
    registry=None,
    trace=None,
    undef_fill: int | None = None,
) -> tuple[EvalOutcome, ExecStats, MachineState | CrashReason]:
    """Run ``typed`` on the machine; also returns the final state (or crash)."""
    if not value_has_type(input, typed.source):
        raise TypeMismatch(f"input {input!r} does not have type {typed.source}")
    reg = _resolve_registry(jets, registry)
    prog = compile_tco(typed, reg) if tco else compile_bm(typed, reg)
    state = init_state(input, typed.source, typed.target)
    if undef_fill is not None:
        for f in state.read_stack + state.write_stack:
            f.cells[:] = bytes(undef_fill if c == 2 else c for c in f.cells)
    try:
        stats = run_checked(prog, state, env, trace=trace, undef_fill=undef_fill)
    except MachineCrash as exc:
        if exc.reason is CrashReason.EXPLICIT_CRASH:
            return BOTTOM, exc.stats, exc.reason
        raise InternalCrash(exc.reason) from None
    out = state.write_stack[-1]
    return Ok(value_of_cells(out.cells, typed.target)), stats, state


def run_term(
    typed: TypedDag,
    input: Value,
    *,
    tco: bool = False,
    jets: bool = True,
    env: TxEnv = EMPTY_ENV,
    registry=None,
    trace=None,
) -> tuple[EvalOutcome, ExecStats]:
    """Execute on the Bit Machine: explicit crashes are Bottom, anything else
    is an InternalCrash."""
    outcome, stats, _ = run_machine(
        typed, input, tco=tco, jets=jets, env=env, registry=registry, trace=trace
    )
    return outcome, stats


__all__ = [
    "compile_bm",
    "compile_tco",
    "compile_tco_off",
    "compile_tco_on",
    "run_machine",
    "run_term",
]
