"""Simplicity types: unit, sums and products.

Types are hash-consed, so two structurally equal types are the same object
and equality is an identity check. This keeps unification and memo keys cheap
even for wide word types such as ``2^512``.
"""

from __future__ import annotations

import functools

from .errors import OutOfRange

UNIT_KIND = "unit"
SUM_KIND = "sum"
PROD_KIND = "prod"


class Ty:
    __slots__ = ("kind", "left", "right", "bit_size", "depth")

    def __repr__(self) -> str:
        return f"Ty({format_type(self)})"

    def __str__(self) -> str:
        return format_type(self)

    def __reduce__(self):
        if self.kind == UNIT_KIND:
            return (_unit, ())
        return (_make, (self.kind, self.left, self.right))

    @property
    def is_unit(self) -> bool:
        return self.kind == UNIT_KIND

    @property
    def is_sum(self) -> bool:
        return self.kind == SUM_KIND

    @property
    def is_prod(self) -> bool:
        return self.kind == PROD_KIND


_table: dict[tuple, Ty] = {}


def _make(kind: str, left: Ty | None, right: Ty | None) -> Ty:
    key = (kind, id(left), id(right))
    ty = _table.get(key)
    if ty is not None:
        return ty
    ty = object.__new__(Ty)
    ty.kind = kind
    ty.left = left
    ty.right = right
    if kind == UNIT_KIND:
        ty.bit_size = 0
        ty.depth = 0
    elif kind == SUM_KIND:
        ty.bit_size = 1 + max(left.bit_size, right.bit_size)
        ty.depth = 1 + max(left.depth, right.depth)
    else:
        ty.bit_size = left.bit_size + right.bit_size
        ty.depth = 1 + max(left.depth, right.depth)
    return _table.setdefault(key, ty)


UNIT = _make(UNIT_KIND, None, None)


def _unit() -> Ty:
    return UNIT


def sum_(left: Ty, right: Ty) -> Ty:
    return _make(SUM_KIND, left, right)


def prod(left: Ty, right: Ty) -> Ty:
    return _make(PROD_KIND, left, right)


BIT = sum_(UNIT, UNIT)


@functools.lru_cache(maxsize=None)
def word(n: int) -> Ty:
    """The word type ``2^n`` for a power of two ``n``."""
    if n < 1 or n & (n - 1):
        raise OutOfRange(f"word width must be a power of two, got {n}")
    if n == 1:
        return BIT
    half = word(n // 2)
    return prod(half, half)


def word_width(ty: Ty) -> int | None:
    """Return ``n`` if ``ty`` is ``2^n``, else None."""
    return _word_widths().get(ty)


@functools.lru_cache(maxsize=1)
def _word_widths() -> dict[Ty, int]:
    return {word(1 << k): 1 << k for k in range(12)}


# (1 + 2) x 2, six possible modes.
SIGHASH_TYPE = prod(sum_(UNIT, BIT), BIT)


def bit_size(ty: Ty) -> int:
    return ty.bit_size


def pad_l(a: Ty, b: Ty) -> int:
    return max(a.bit_size, b.bit_size) - a.bit_size


def pad_r(a: Ty, b: Ty) -> int:
    return max(a.bit_size, b.bit_size) - b.bit_size


def value_count(ty: Ty) -> int:
    """Number of values inhabiting ``ty`` (arbitrary precision)."""
    memo: dict[int, int] = {}

    def go(t: Ty) -> int:
        hit = memo.get(id(t))
        if hit is not None:
            return hit
        if t.kind == UNIT_KIND:
            n = 1
        elif t.kind == SUM_KIND:
            n = go(t.left) + go(t.right)
        else:
            n = go(t.left) * go(t.right)
        memo[id(t)] = n
        return n

    return go(ty)


def format_type(ty: Ty, sugar: bool = True) -> str:
    """Render a type. With ``sugar`` words print as ``2`` / ``2^n``."""
    if sugar:
        n = word_width(ty)
        if n == 1:
            return "2"
        if n is not None:
            return f"2^{n}"
    if ty.kind == UNIT_KIND:
        return "1"
    op = "+" if ty.kind == SUM_KIND else "*"
    return f"({format_type(ty.left, sugar)} {op} {format_type(ty.right, sugar)})"
