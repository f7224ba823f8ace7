"""Simplicity: typed combinator terms, the Bit Machine, static cell bounds,
Merkle commitments with pruning, jets and a small standard library."""

from __future__ import annotations

from .analysis import AnalysisReport, TcoBound, analyze_report, cb, cb_tco
from .errors import SimplicityError
from .merkle import merkle_root, prune, sha256_compress
from .semantics import BOTTOM, EMPTY_ENV, Ok, TxEnv, eval_core, eval_ext
from .term import TermDag, TypedDag, infer_types, node_counts
from .text import format_dag, format_value, parse, parse_value, substitute_witnesses
from .translate import compile_bm, compile_tco, run_term
from .ty import Ty, format_type, word
from .value import Value, interp_word, repr_word

__all__ = [
    "AnalysisReport",
    "BOTTOM",
    "EMPTY_ENV",
    "Ok",
    "SimplicityError",
    "TcoBound",
    "TermDag",
    "Ty",
    "TxEnv",
    "TypedDag",
    "Value",
    "analyze_report",
    "cb",
    "cb_tco",
    "compile_bm",
    "compile_tco",
    "eval_core",
    "eval_ext",
    "format_dag",
    "format_type",
    "format_value",
    "infer_types",
    "interp_word",
    "merkle_root",
    "node_counts",
    "parse",
    "parse_value",
    "prune",
    "repr_word",
    "run_term",
    "sha256_compress",
    "substitute_witnesses",
    "word",
]
