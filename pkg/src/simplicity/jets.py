"""Jets: native implementations keyed by the commitment root of the
expression they replace."""

from __future__ import annotations

import functools
import random
from dataclasses import dataclass, field
from typing import Callable, Iterable, Iterator

from ._fast import MAX_NESTING, core_program, nesting_depth
from .bitmachine import JetCall, _has_sums_with_padding, cells_to_int, int_to_cells
from .errors import DuplicateRoot, SpecMismatch, WitnessInJet
from .merkle import merkle_root, sha256_compress_int
from .semantics import eval_core_packed
from .term import WITNESS, TermDag, TypedDag, infer_types
from .ty import Ty, format_type, value_count
from .value import enumerate_values, pack, random_value
from . import stdlib

EXHAUSTIVE_LIMIT = 1 << 16
DEFAULT_SAMPLES = 1000
REGISTRATION_SAMPLES = 4


@dataclass(eq=False)
class Jet:
    name: str
    spec: TermDag
    ty_in: Ty
    ty_out: Ty
    packed: Callable[[int], int]
    root: bytes = b""
    _typed: TypedDag | None = field(default=None, repr=False)
    _call: JetCall | None = field(default=None, repr=False)

    def __post_init__(self):
        if not self.root:
            self.root = merkle_root(self.spec)

    def native(self, cells: bytes) -> bytes:
        """Cell-array calling convention used by the Bit Machine."""
        return int_to_cells(self.packed(cells_to_int(cells)), self.ty_out)

    def typed(self) -> TypedDag:
        if self._typed is None:
            self._typed = infer_types(self.spec, self.ty_in, self.ty_out)
        return self._typed

    def call(self) -> JetCall:
        if self._call is None:
            self._call = JetCall(self.name, self.ty_in.bit_size, self.ty_out.bit_size, self.native)
        return self._call

    def describe(self) -> str:
        return f"{self.root.hex()} {self.name} : {format_type(self.ty_in)} |- {format_type(self.ty_out)}"


@dataclass
class JetVerdict:
    ok: bool
    cases: int
    exhaustive: bool
    counterexample: int | None = None
    expected: int | None = None
    actual: int | None = None

    def __bool__(self) -> bool:
        return self.ok


def verify_jet(
    jet: Jet,
    exhaustive_up_to: int = EXHAUSTIVE_LIMIT,
    samples: int = DEFAULT_SAMPLES,
    rng: random.Random | None = None,
) -> JetVerdict:
    """Compare the native function against the specification term.

    Exhaustive when the input type has at most ``exhaustive_up_to`` values,
    otherwise ``samples`` random inputs. Comparison is on output cells.
    """
    typed = jet.typed()
    A, B = jet.ty_in, jet.ty_out
    exhaustive = value_count(A) <= exhaustive_up_to
    if exhaustive and not _has_sums_with_padding(A):
        inputs: Iterable[int] = range(1 << A.bit_size)
    elif exhaustive:
        inputs = (pack(v, A) for v in enumerate_values(A))
    else:
        rng = rng or random.Random(0)
        inputs = (pack(random_value(A, rng), A) for _ in range(samples))
    spec = eval_core_packed if typed.is_core() else None
    if spec is None:
        raise WitnessInJet(f"jet {jet.name} specification is not a core term")
    cases = 0
    if not _has_sums_with_padding(A) and not _has_sums_with_padding(B):
        # without padding, packed integers and cell arrays are in bijection
        fn = core_program(typed) if nesting_depth(typed) <= MAX_NESTING else (lambda x: spec(typed, x))
        native = jet.packed
        for x in inputs:
            cases += 1
            expected = fn(x)
            actual = native(x)
            if expected != actual:
                return JetVerdict(False, cases, exhaustive, x, expected, actual)
        return JetVerdict(True, cases, exhaustive)
    for x in inputs:
        cases += 1
        expected = int_to_cells(spec(typed, x), B)
        actual = jet.native(int_to_cells(x, A))
        if expected != actual:
            return JetVerdict(False, cases, exhaustive, x, cells_to_int(expected), cells_to_int(actual))
    return JetVerdict(True, cases, exhaustive)


class JetRegistry:
    def __init__(self):
        self._by_root: dict[bytes, Jet] = {}
        self._sigs: set[tuple[Ty, Ty]] = set()

    def register(self, jet: Jet, samples: int = REGISTRATION_SAMPLES) -> JetRegistry:
        if any(n.kind == WITNESS for n in jet.spec.nodes):
            raise WitnessInJet(f"jet {jet.name} specification contains a witness")
        if jet.root in self._by_root:
            raise DuplicateRoot(f"jet {jet.name} has the same root as {self._by_root[jet.root].name}")
        if samples:
            verdict = verify_jet(jet, exhaustive_up_to=samples, samples=samples)
            if not verdict.ok:
                raise SpecMismatch(
                    f"jet {jet.name} disagrees with its specification on input {verdict.counterexample:#x}"
                )
        self._by_root[jet.root] = jet
        self._sigs.add((jet.ty_in, jet.ty_out))
        return self

    def lookup(self, root: bytes, ty_in: Ty | None = None, ty_out: Ty | None = None) -> Jet | None:
        jet = self._by_root.get(root)
        if jet is None:
            return None
        if ty_in is not None and (jet.ty_in is not ty_in or jet.ty_out is not ty_out):
            return None
        return jet

    def signatures(self) -> set[tuple[Ty, Ty]]:
        return self._sigs

    def __iter__(self) -> Iterator[Jet]:
        return iter(self._by_root.values())

    def __len__(self) -> int:
        return len(self._by_root)

    def __contains__(self, root: bytes) -> bool:
        return root in self._by_root


# ---------------------------------------------------------------------------
# built-ins

WORD_WIDTHS = (8, 16, 32, 64, 128, 256)
MUL_WIDTHS = (8, 16, 32, 64, 128)


def _jet(name: str, term, packed, ty_in: Ty, ty_out: Ty) -> Jet:
    # signatures are declared so that building the registry needs no inference;
    # the test suite checks them against the principal types
    return Jet(name, TermDag.from_term(term), ty_in, ty_out, packed)


def builtin_jets() -> list[Jet]:
    from .ty import BIT, UNIT, prod, word

    jets: list[Jet] = []
    for n in WORD_WIDTHS:
        mask = (1 << n) - 1
        w, ww = word(n), word(2 * n)
        with_carry = prod(ww, BIT)

        def fa(x, n=n, mask=mask):
            c = x & 1
            ab = x >> 1
            return (ab >> n) + (ab & mask) + c  # carry bit is the high bit of an (n+1)-bit result

        def sub(x, n=n, mask=mask):
            bin_ = x & 1
            ab = x >> 1
            d = (ab >> n) - (ab & mask) - bin_
            return ((1 if d < 0 else 0) << n) | (d & mask)

        jets += [
            _jet(f"fulladder{n}", stdlib.full_adder(n), fa, with_carry, prod(BIT, w)),
            _jet(f"add{n}", stdlib.adder(n), lambda x, n=n, m=mask: ((x >> n) + (x & m)) & m, ww, w),
            _jet(f"sub{n}", stdlib.full_subtractor(n), sub, with_carry, prod(BIT, w)),
            _jet(f"lt{n}", stdlib.lt_word(n), lambda x, n=n, m=mask: int((x >> n) < (x & m)), ww, BIT),
            _jet(f"le{n}", stdlib.le_word(n), lambda x, n=n, m=mask: int((x >> n) <= (x & m)), ww, BIT),
            _jet(f"eq{n}", stdlib.eq_word(n), lambda x, n=n, m=mask: int((x >> n) == (x & m)), ww, BIT),
            _jet(f"and{n}", stdlib.bitwise2("and", n), lambda x, n=n, m=mask: (x >> n) & x & m, ww, w),
            _jet(f"or{n}", stdlib.bitwise2("or", n), lambda x, n=n, m=mask: ((x >> n) | x) & m, ww, w),
            _jet(f"xor{n}", stdlib.bitwise2("xor", n), lambda x, n=n, m=mask: ((x >> n) ^ x) & m, ww, w),
        ]
    for n in MUL_WIDTHS:
        ww = word(2 * n)
        jets.append(_jet(f"mul{n}", stdlib.multiplier(n), lambda x, n=n, m=(1 << n) - 1: (x >> n) * (x & m), ww, ww))
    for k in range(256):
        jets.append(_jet(f"const8_{k:02x}", stdlib.const_word(k, 8), lambda x, k=k: k, UNIT, word(8)))
    jets.append(_jet("sha256_compress", stdlib.sha256_block(), sha256_compress_int, prod(word(256), word(512)), word(256)))

    def checksig(x):
        m = x & ((1 << 256) - 1)
        p = (x >> 256) & ((1 << 256) - 1)
        s = x >> 512
        return int(sha256_compress_int((m << 512) | s) == p)

    jets.append(_jet("checksig_toy", stdlib.checksig_toy(), checksig, word(1024), BIT))
    return jets


@functools.lru_cache(maxsize=1)
def default_registry() -> JetRegistry:
    """The built-in jets. They are registered without the sampled startup
    check; the test suite verifies every one of them in full."""
    reg = JetRegistry()
    for jet in builtin_jets():
        reg.register(jet, samples=0)
    return reg
