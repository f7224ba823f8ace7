"""Command-line interface.

Exit codes: 0 success, 1 program failure (Bottom), 2 usage, parse or type errors.
"""

from __future__ import annotations

import argparse
import random
import sys
from pathlib import Path

from . import stdlib
from .analysis import analyze_report
from .bitmachine import format_instr
from .errors import EvaluationFailed, SimplicityError
from .merkle import merkle_root, prune
from .semantics import EMPTY_ENV, TxEnv, eval_ext, make_sighash
from .term import TermDag, infer_types
from .text import (
    format_dag,
    format_value,
    format_values,
    parse,
    parse_tx,
    parse_value,
    parse_values,
    substitute_witnesses,
)
from .translate import run_machine
from .ty import format_type
from .value import bytes_to_word, word_to_bytes

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_USAGE = 2

DEFAULT_MODE = "((L u), (L u))"


class UsageError(Exception):
    pass


def _read(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None


def _write(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    try:
        Path(path).write_text(text)
    except OSError as exc:
        raise UsageError(f"cannot write {path}: {exc.strerror}") from None


def _load(args) -> TermDag:
    dag = parse(_read(args.file))
    wfile = getattr(args, "witness", None)
    if wfile:
        dag = substitute_witnesses(dag, parse_values(_read(wfile)))
    return dag


def _env(args) -> TxEnv:
    tx = getattr(args, "tx", None)
    return parse_tx(_read(tx)) if tx else EMPTY_ENV


def _input(args):
    return parse_value(args.input)


def _print_outcome(outcome) -> int:
    if outcome.is_bottom:
        print("bottom")
        return EXIT_FAIL
    print(format_value(outcome.value))
    return EXIT_OK


# ---------------------------------------------------------------------------
# commands


def cmd_check(args) -> int:
    typed = infer_types(_load(args))
    print(f"{format_type(typed.source)} |- {format_type(typed.target)}")
    return EXIT_OK


def cmd_eval(args) -> int:
    typed = infer_types(_load(args))
    return _print_outcome(eval_ext(typed, _input(args), _env(args)))


def _print_trace(count, instr, cells, frames) -> None:
    sys.stdout.write(f"{count} {format_instr(instr)} cells={cells} frames={frames}\n")


def cmd_run(args) -> int:
    typed = infer_types(_load(args))
    trace = _print_trace if args.trace else None

    outcome, stats, _ = run_machine(
        typed, _input(args), tco=args.tco, jets=not args.no_jets, env=_env(args), trace=trace
    )
    code = _print_outcome(outcome)
    if args.stats:
        for key, value in stats.as_dict().items():
            print(f"{key}={value}")
    return code


def cmd_analyze(args) -> int:
    report = analyze_report(infer_types(_load(args)))
    pairs = report.as_pairs()
    if args.human:
        width = max(len(k) for k, _ in pairs)
        for key, value in pairs:
            print(f"{key.replace('_', ' '):<{width}}  {value}")
    else:
        for key, value in pairs:
            print(f"{key}={value}")
    return EXIT_OK


def cmd_merkle(args) -> int:
    print(merkle_root(_load(args)).hex())
    return EXIT_OK


def cmd_prune(args) -> int:
    dag = _load(args)
    try:
        pruned = prune(dag, _input(args), _env(args))
    except EvaluationFailed as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL
    _write(args.output, format_dag(pruned))
    return EXIT_OK


def cmd_gen(args) -> int:
    what = args.what
    n = args.n
    needs_width = what in ("fulladder", "multiplier", "eq")
    if needs_width and n is None:
        raise UsageError(f"gen {what} needs a width")
    if not needs_width and n is not None:
        raise UsageError(f"gen {what} takes no width")
    if what == "basicverify":
        return _gen_basic_verify(args)
    if what == "flip":
        dag = stdlib.gen_flip()
    elif what == "adder":
        dag = stdlib.gen_half_adder()
    elif what == "fulladder":
        dag = stdlib.gen_full_adder(n)
    elif what == "multiplier":
        dag = stdlib.gen_multiplier(n)
    elif what == "eq":
        dag = stdlib.gen_eq(n)
    else:
        dag = stdlib.gen_sha256_block()
    _write(args.output, format_dag(dag))
    return EXIT_OK


def _gen_basic_verify(args) -> int:
    """Template with two witness holes (signature, mode) plus a witness file
    holding a valid signature for the given transaction."""
    env = _env(args)
    mode = parse_value(args.mode)
    digest = word_to_bytes(make_sighash(mode, env), 256)
    sig, pubkey = stdlib.toy_keypair(digest, random.Random(args.seed))
    dag = stdlib.gen_basic_verify(pubkey)
    _write(args.output, format_dag(dag))
    if args.witness_out:
        _write(args.witness_out, format_values([bytes_to_word(sig), mode]))
    return EXIT_OK


def cmd_jets(args) -> int:
    from .jets import default_registry

    for jet in sorted(default_registry(), key=lambda j: j.name):
        print(jet.describe())
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="simplicity", description="Simplicity terms, Bit Machine and commitments.")
    sub = p.add_subparsers(dest="command", required=True)

    def program_cmd(name, fn, help, witness=True):
        sp = sub.add_parser(name, help=help)
        sp.add_argument("file", help="program text file")
        if witness:
            sp.add_argument("--witness", metavar="WFILE", help="values for (witness _) placeholders")
        sp.set_defaults(fn=fn)
        return sp

    def exec_opts(sp, default_input="u"):
        sp.add_argument("--input", default=default_input, metavar="VALUE", help="input value (default: u)")
        sp.add_argument("--tx", metavar="TXFILE", help="hex-encoded transaction")

    program_cmd("check", cmd_check, "infer and print the program's type")
    sp = program_cmd("eval", cmd_eval, "denotational evaluation")
    exec_opts(sp)
    sp = program_cmd("run", cmd_run, "Bit Machine execution")
    exec_opts(sp)
    sp.add_argument("--tco", action="store_true", help="use the tail composition optimized translation")
    sp.add_argument("--no-jets", action="store_true", help="disable the jet registry")
    sp.add_argument("--trace", action="store_true", help="print one line per executed instruction")
    sp.add_argument("--stats", action="store_true", help="print execution statistics as key=value")
    sp = program_cmd("analyze", cmd_analyze, "static bounds, node counts and commitment root")
    sp.add_argument("--human", action="store_true", help="aligned text instead of key=value")
    program_cmd("merkle", cmd_merkle, "print the commitment root")
    sp = program_cmd("prune", cmd_prune, "prune unused case branches for one input")
    sp.add_argument("--input", required=True, metavar="VALUE")
    sp.add_argument("--tx", metavar="TXFILE")
    sp.add_argument("-o", "--output", required=True, metavar="OUT")

    sp = sub.add_parser("gen", help="generate standard library programs")
    sp.add_argument(
        "what", choices=["flip", "adder", "fulladder", "multiplier", "eq", "sha256", "basicverify"]
    )
    sp.add_argument("n", nargs="?", type=int, help="word width for fulladder, multiplier and eq")
    sp.add_argument("-o", "--output", metavar="OUT")
    sp.add_argument("--tx", metavar="TXFILE", help="transaction to sign (basicverify)")
    sp.add_argument("--mode", default=DEFAULT_MODE, metavar="VALUE", help="sighash mode (basicverify)")
    sp.add_argument("--seed", type=int, default=0, help="signature RNG seed (basicverify)")
    sp.add_argument("--witness-out", metavar="WFILE", help="write the valid witness values (basicverify)")
    sp.set_defaults(fn=cmd_gen)

    sp = sub.add_parser("jets", help="jet registry")
    jsub = sp.add_subparsers(dest="jets_command", required=True)
    jl = jsub.add_parser("list", help="print root, name and type of every built-in jet")
    jl.set_defaults(fn=cmd_jets)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except (UsageError, SimplicityError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except RecursionError:
        print("error: program nesting too deep", file=sys.stderr)
        return EXIT_USAGE
    except BrokenPipeError:
        sys.stderr.close()
        return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
