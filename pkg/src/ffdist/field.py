"""Prime fields, subsets of F_p as bitsets, and set-level additive algebra.

An :class:`FpSet` stores its members as the bits of a Python integer, so a
cyclic shift of the whole set is a couple of big-int shifts.  The sumset fast
path ORs together one rotation of ``C`` per element of ``B``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, lru_cache
from typing import Callable, Iterable, Iterator, Sequence

import numpy as np

from .errors import EmptySetError, FieldMismatchError

__all__ = [
    "PrimeField",
    "FpSet",
    "RepHistogram",
    "DoublingStats",
    "is_prime",
    "difference_set",
    "square_set",
    "sumset",
    "sumset_naive",
    "iterated_sumset",
    "rep_function",
    "rep_function_naive",
    "difference_histogram",
    "square_histogram",
    "cyclic_convolve",
    "doubling_stats",
]

MAX_PRIME = 2**31


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    for f in range(3, math.isqrt(n) + 1, 2):
        if n % f == 0:
            return False
    return True


@lru_cache(maxsize=64)
def _inverse_table(p: int) -> np.ndarray:
    table = np.zeros(p, dtype=np.int64)
    for x in range(1, p):
        table[x] = pow(x, -1, p)
    return table


@dataclass(frozen=True)
class PrimeField:
    p: int

    def __post_init__(self):
        if not isinstance(self.p, int) or isinstance(self.p, bool):
            raise TypeError(f"modulus must be an int, got {self.p!r}")
        if self.p < 3 or self.p >= MAX_PRIME or not is_prime(self.p):
            raise ValueError(f"{self.p} is not an odd prime below 2^31")

    def __repr__(self) -> str:
        return f"F_{self.p}"

    def reduce(self, x: int) -> int:
        return x % self.p

    def inv(self, x: int) -> int:
        x %= self.p
        if x == 0:
            raise ZeroDivisionError("0 has no inverse")
        return pow(x, -1, self.p)

    def inverse_table(self) -> np.ndarray:
        """``table[x] = x^-1`` for ``x != 0``; ``table[0] = 0``."""
        return _inverse_table(self.p).copy()

    @property
    def minus_one_is_square(self) -> bool:
        # nonzero isotropic vectors in F_p^2 exist exactly in this case
        return self.p % 4 == 1

    def check_same(self, other: "PrimeField") -> None:
        if self.p != other.p:
            raise FieldMismatchError(f"field mismatch: F_{self.p} vs F_{other.p}")


def _rotate(bits: int, k: int, p: int, mask: int) -> int:
    """Cyclic shift of a p-bit set by k positions, i.e. translation x -> x + k."""
    k %= p
    if k == 0:
        return bits
    return ((bits << k) | (bits >> (p - k))) & mask


@dataclass(frozen=True)
class FpSet:
    """An immutable subset of F_p; bit ``x`` of ``bits`` is set iff ``x`` is a member."""

    field: PrimeField
    bits: int

    def __post_init__(self):
        if self.bits < 0 or self.bits >> self.field.p:
            raise ValueError("membership bits outside 0..p-1")

    @classmethod
    def of(cls, field: PrimeField, members: Iterable[int]) -> "FpSet":
        bits = 0
        for x in members:
            bits |= 1 << (int(x) % field.p)
        return cls(field, bits)

    @classmethod
    def full(cls, field: PrimeField) -> "FpSet":
        return cls(field, (1 << field.p) - 1)

    @classmethod
    def empty(cls, field: PrimeField) -> "FpSet":
        return cls(field, 0)

    @classmethod
    def from_indicator(cls, field: PrimeField, indicator: np.ndarray) -> "FpSet":
        arr = np.asarray(indicator).astype(bool)
        if arr.shape != (field.p,):
            raise ValueError(f"indicator must have shape ({field.p},)")
        return cls(field, int.from_bytes(np.packbits(arr, bitorder="little").tobytes(), "little"))

    @property
    def p(self) -> int:
        return self.field.p

    @cached_property
    def size(self) -> int:
        return self.bits.bit_count()

    def __len__(self) -> int:
        return self.size

    def __bool__(self) -> bool:
        return self.bits != 0

    def __contains__(self, x: int) -> bool:
        return bool(self.bits >> (x % self.p) & 1)

    def __iter__(self) -> Iterator[int]:
        return iter(self.members())

    def members(self) -> list[int]:
        return np.flatnonzero(self.indicator()).tolist()

    def indicator(self) -> np.ndarray:
        nbytes = (self.p + 7) // 8
        raw = np.frombuffer(self.bits.to_bytes(nbytes, "little"), dtype=np.uint8)
        return np.unpackbits(raw, bitorder="little")[: self.p].astype(bool)

    @property
    def is_full(self) -> bool:
        return self.size == self.p

    def complement(self) -> "FpSet":
        return FpSet(self.field, ((1 << self.p) - 1) ^ self.bits)

    def union(self, other: "FpSet") -> "FpSet":
        self.field.check_same(other.field)
        return FpSet(self.field, self.bits | other.bits)

    def translate(self, t: int) -> "FpSet":
        return FpSet(self.field, _rotate(self.bits, t, self.p, (1 << self.p) - 1))

    def negate(self) -> "FpSet":
        return FpSet.of(self.field, (-x for x in self))

    def map(self, f: Callable[[int], int]) -> "FpSet":
        return FpSet.of(self.field, (f(x) for x in self))

    def to_json(self) -> dict:
        return {"p": self.p, "members": self.members()}

    @classmethod
    def from_json(cls, data: dict) -> "FpSet":
        field = PrimeField(int(data["p"]))
        members = [int(x) for x in data["members"]]
        bad = [x for x in members if not 0 <= x < field.p]
        if bad:
            raise ValueError(f"members out of range for F_{field.p}: {bad[:5]}")
        return cls.of(field, members)

    def __repr__(self) -> str:
        shown = self.members()
        body = ", ".join(map(str, shown[:12])) + (", ..." if len(shown) > 12 else "")
        return f"FpSet(p={self.p}, size={self.size}, {{{body}}})"


def _require_nonempty(A: FpSet) -> None:
    if not A:
        raise EmptySetError("empty set")


def sumset(B: FpSet, C: FpSet) -> FpSet:
    """B + C via rotate-OR over the bitset words."""
    B.field.check_same(C.field)
    if B.size > C.size:
        B, C = C, B
    p, mask = B.p, (1 << B.p) - 1
    out = 0
    for b in B:
        out |= _rotate(C.bits, b, p, mask)
        if out == mask:
            break
    return FpSet(B.field, out)


def sumset_naive(B: FpSet, C: FpSet) -> FpSet:
    B.field.check_same(C.field)
    p = B.p
    return FpSet.of(B.field, {(b + c) % p for b in B for c in C})


def difference_set(A: FpSet) -> FpSet:
    _require_nonempty(A)
    return sumset(A, A.negate())


def square_set(A: FpSet) -> FpSet:
    p = A.p
    return FpSet.of(A.field, (x * x % p for x in A))


def iterated_sumset(S: FpSet, k: int) -> FpSet:
    """k-fold sumset S + ... + S, by repeated doubling."""
    if k < 1:
        raise ValueError(f"k must be a positive integer, got {k}")
    result, power = None, S
    while True:
        if k & 1:
            result = power if result is None else sumset(result, power)
        k >>= 1
        if not k:
            return result
        power = sumset(power, power)


@dataclass(frozen=True)
class RepHistogram:
    """Exact counts ``counts[x]`` of representations of each residue x."""

    field: PrimeField
    counts: tuple[int, ...]

    def __post_init__(self):
        if len(self.counts) != self.field.p:
            raise ValueError("histogram length must equal p")
        if any(c < 0 for c in self.counts):
            raise ValueError("negative count")

    @classmethod
    def from_array(cls, field: PrimeField, arr: Sequence[int]) -> "RepHistogram":
        return cls(field, tuple(int(c) for c in arr))

    @classmethod
    def indicator_of(cls, S: FpSet) -> "RepHistogram":
        return cls.from_array(S.field, S.indicator().astype(np.int64))

    def __getitem__(self, x: int) -> int:
        return self.counts[x % self.field.p]

    @cached_property
    def mass(self) -> int:
        return sum(self.counts)

    def support(self) -> FpSet:
        return FpSet.of(self.field, (x for x, c in enumerate(self.counts) if c))

    def second_moment(self, skip_zero: bool = False) -> int:
        return sum(c * c for x, c in enumerate(self.counts) if not (skip_zero and x == 0))

    def as_array(self) -> np.ndarray:
        dtype = np.int64 if self.mass < 2**62 else object
        return np.array(self.counts, dtype=dtype)


def _as_histogram(X: FpSet | RepHistogram) -> RepHistogram:
    return X if isinstance(X, RepHistogram) else RepHistogram.indicator_of(X)


def cyclic_convolve(f: FpSet | RepHistogram, g: FpSet | RepHistogram) -> RepHistogram:
    """Exact cyclic convolution over Z/p.  int64 when the total mass allows, else Python ints."""
    f, g = _as_histogram(f), _as_histogram(g)
    f.field.check_same(g.field)
    p = f.field.p
    if f.mass * g.mass < 2**62:
        full = np.convolve(np.asarray(f.counts, dtype=np.int64), np.asarray(g.counts, dtype=np.int64))
    else:
        full = np.convolve(np.array(f.counts, dtype=object), np.array(g.counts, dtype=object))
    out = full[:p].copy()
    out[: p - 1] += full[p:]
    return RepHistogram.from_array(f.field, out)


def rep_function_naive(B: FpSet, C: FpSet) -> RepHistogram:
    B.field.check_same(C.field)
    p = B.p
    counts = [0] * p
    cs = C.members()
    for b in B:
        for c in cs:
            counts[(b + c) % p] += 1
    return RepHistogram(B.field, tuple(counts))


def rep_function(B: FpSet, C: FpSet, method: str = "naive") -> RepHistogram:
    """counts[x] = #{(b, c) in B x C : b + c = x}.

    ``method="convolve"`` selects the exact integer-convolution fast path.
    """
    if method == "naive":
        return rep_function_naive(B, C)
    if method == "convolve":
        return cyclic_convolve(B, C)
    raise ValueError(f"unknown method {method!r}")


def difference_histogram(A: FpSet) -> RepHistogram:
    """counts[x] = #{(a, a') in A x A : a - a' = x}."""
    _require_nonempty(A)
    return cyclic_convolve(A, A.negate())


def square_histogram(h: RepHistogram) -> RepHistogram:
    """Push-forward of a histogram along x -> x^2."""
    p = h.field.p
    counts = [0] * p
    for x, c in enumerate(h.counts):
        if c:
            counts[x * x % p] += c
    return RepHistogram(h.field, tuple(counts))


@dataclass(frozen=True)
class DoublingStats:
    size_a: int
    size_d: int
    K: Fraction


def doubling_stats(A: FpSet) -> DoublingStats:
    _require_nonempty(A)
    D = difference_set(A)
    return DoublingStats(A.size, D.size, Fraction(D.size, A.size))
