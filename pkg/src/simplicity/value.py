"""Semantic values and their word / packed-integer encodings."""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Iterator

from .errors import OutOfRange, TypeMismatch
from .ty import SUM_KIND, UNIT_KIND, Ty, word


class Value:
    __slots__ = ()


@dataclass(frozen=True, slots=True)
class UnitV(Value):
    def __repr__(self) -> str:
        return "u"


@dataclass(frozen=True, slots=True)
class LeftV(Value):
    inner: Value

    def __repr__(self) -> str:
        return f"(L {self.inner!r})"


@dataclass(frozen=True, slots=True)
class RightV(Value):
    inner: Value

    def __repr__(self) -> str:
        return f"(R {self.inner!r})"


@dataclass(frozen=True, slots=True)
class PairV(Value):
    first: Value
    second: Value

    def __repr__(self) -> str:
        return f"({self.first!r}, {self.second!r})"


UNIT_VALUE = UnitV()
ZERO = LeftV(UNIT_VALUE)
ONE = RightV(UNIT_VALUE)


def bit(b: int | bool) -> Value:
    return ONE if b else ZERO


def value_has_type(v: Value, ty: Ty) -> bool:
    stack = [(v, ty)]
    while stack:
        v, ty = stack.pop()
        kind = ty.kind
        if kind == UNIT_KIND:
            if not isinstance(v, UnitV):
                return False
        elif kind == SUM_KIND:
            if isinstance(v, LeftV):
                stack.append((v.inner, ty.left))
            elif isinstance(v, RightV):
                stack.append((v.inner, ty.right))
            else:
                return False
        else:
            if not isinstance(v, PairV):
                return False
            stack.append((v.first, ty.left))
            stack.append((v.second, ty.right))
    return True


def _check_width(n: int) -> None:
    if n < 1 or n & (n - 1):
        raise OutOfRange(f"word width must be a power of two, got {n}")


def interp_word(v: Value, n: int) -> int:
    """Big-endian number denoted by a value of type ``2^n``."""
    _check_width(n)
    if not value_has_type(v, word(n)):
        raise TypeMismatch(f"{v!r} is not a value of 2^{n}")
    return _interp(v)


def _interp(v: Value) -> int:
    if isinstance(v, PairV):
        # widths of the two halves are equal for words
        acc = 0
        bits = []
        _collect_bits(v, bits)
        for b in bits:
            acc = (acc << 1) | b
        return acc
    return 1 if isinstance(v, RightV) else 0


def _collect_bits(v: Value, out: list[int]) -> None:
    stack = [v]
    while stack:
        v = stack.pop()
        if isinstance(v, PairV):
            stack.append(v.second)
            stack.append(v.first)
        else:
            out.append(1 if isinstance(v, RightV) else 0)


def repr_word(k: int, n: int) -> Value:
    """The value of ``2^n`` denoting ``k``."""
    _check_width(n)
    if not 0 <= k < (1 << n):
        raise OutOfRange(f"{k} does not fit in {n} bits")
    return _repr(k, n)


def _repr(k: int, n: int) -> Value:
    if n == 1:
        return ONE if k else ZERO
    half = n // 2
    return PairV(_repr(k >> half, half), _repr(k & ((1 << half) - 1), half))


def pack(v: Value, ty: Ty) -> int:
    """Encode a value as the integer whose big-endian bits are its cells.

    Undefined padding cells are encoded as zero bits. Raises TypeMismatch.
    """
    kind = ty.kind
    if kind == UNIT_KIND:
        if v is UNIT_VALUE or isinstance(v, UnitV):
            return 0
    elif kind == SUM_KIND:
        if isinstance(v, LeftV):
            return pack(v.inner, ty.left)
        if isinstance(v, RightV):
            return (1 << (ty.bit_size - 1)) | pack(v.inner, ty.right)
    elif isinstance(v, PairV):
        return (pack(v.first, ty.left) << ty.right.bit_size) | pack(v.second, ty.right)
    raise TypeMismatch(f"value {v!r} does not have type {ty}")


def unpack(x: int, ty: Ty) -> Value:
    kind = ty.kind
    if kind == UNIT_KIND:
        return UNIT_VALUE
    if kind == SUM_KIND:
        if (x >> (ty.bit_size - 1)) & 1:
            return RightV(unpack(x & ((1 << ty.right.bit_size) - 1), ty.right))
        return LeftV(unpack(x & ((1 << ty.left.bit_size) - 1), ty.left))
    rs = ty.right.bit_size
    return PairV(unpack(x >> rs, ty.left), unpack(x & ((1 << rs) - 1), ty.right))


def random_value(ty: Ty, rng: random.Random) -> Value:
    kind = ty.kind
    if kind == UNIT_KIND:
        return UNIT_VALUE
    if kind == SUM_KIND:
        if rng.getrandbits(1):
            return RightV(random_value(ty.right, rng))
        return LeftV(random_value(ty.left, rng))
    return PairV(random_value(ty.left, rng), random_value(ty.right, rng))


def enumerate_values(ty: Ty) -> Iterator[Value]:
    """All values of ``ty`` in a fixed order (left before right, first-major)."""
    kind = ty.kind
    if kind == UNIT_KIND:
        yield UNIT_VALUE
    elif kind == SUM_KIND:
        for a in enumerate_values(ty.left):
            yield LeftV(a)
        for b in enumerate_values(ty.right):
            yield RightV(b)
    else:
        seconds = list(enumerate_values(ty.right))
        for a in enumerate_values(ty.left):
            for b in seconds:
                yield PairV(a, b)


def word_to_bytes(v: Value, n: int) -> bytes:
    return interp_word(v, n).to_bytes(n // 8, "big")


def bytes_to_word(data: bytes) -> Value:
    return repr_word(int.from_bytes(data, "big"), len(data) * 8)
