"""Bit-vector algebra over B^n using int bitsets.

An element of B^n is stored as an int ``bits`` whose binary expansion is
q_1 q_2 ... q_n, most significant digit first, so q = sum q_i 2^(n-i).
Objects, questions and secrets all share this convention.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np

MAX_DIM = 24


class DimensionError(ValueError):
    """Raised when vectors of different dimensions are combined."""


def _check_dim(n: int) -> None:
    if not 1 <= n <= MAX_DIM:
        raise ValueError(f"dimension must be in [1, {MAX_DIM}], got {n}")


@dataclass(frozen=True, order=True)
class BitVec:
    bits: int
    n: int

    def __post_init__(self) -> None:
        _check_dim(self.n)
        if not 0 <= self.bits < (1 << self.n):
            raise ValueError(f"bits {self.bits} out of range for n={self.n}")

    @classmethod
    def parse(cls, text: str) -> "BitVec":
        """Build from a 0/1 string, q_1 first."""
        text = text.strip()
        if not text or set(text) - {"0", "1"}:
            raise ValueError(f"not a 0/1 string: {text!r}")
        return cls(int(text, 2), len(text))

    def __str__(self) -> str:
        return format(self.bits, f"0{self.n}b")

    def __int__(self) -> int:
        return self.bits

    def __xor__(self, other: "BitVec") -> "BitVec":
        _same_dim(self, other)
        return BitVec(self.bits ^ other.bits, self.n)

    def digits(self) -> Tuple[int, ...]:
        return tuple(int(c) for c in str(self))


def _same_dim(*vs: BitVec) -> int:
    dims = {v.n for v in vs}
    if len(dims) > 1:
        raise DimensionError(f"dimension mismatch: {sorted(dims)}")
    return dims.pop()


def parity(x: int) -> int:
    return bin(x).count("1") & 1


def dot(q: BitVec, x: BitVec) -> int:
    """Inner product mod 2."""
    _same_dim(q, x)
    return parity(q.bits & x.bits)


@lru_cache(maxsize=None)
def parity_table(n: int) -> np.ndarray:
    """Parity of every integer in [0, 2^n) as a read-only uint8 array."""
    _check_dim(n)
    table = np.zeros(1, dtype=np.uint8)
    for _ in range(n):
        table = np.concatenate([table, table ^ 1])
    table.setflags(write=False)
    return table


@lru_cache(maxsize=None)
def questions(n: int) -> np.ndarray:
    """All questions 0..2^n - 1 in ascending order."""
    q = np.arange(1 << n, dtype=np.int64)
    q.setflags(write=False)
    return q


def dot_all(x: int, n: int) -> np.ndarray:
    """Vector of q . x over all q in B^n (uint8, indexed by q)."""
    return parity_table(n)[questions(n) & x]


def _reduce(rows: Sequence[int]) -> Tuple[List[Tuple[int, int, int]], Optional[int]]:
    """Gaussian elimination keeping track of which inputs built each row.

    Returns the pivot rows as (pivot_bit, row, combination_mask) and, when a
    row reduces to zero, the combination mask of inputs that XOR to zero.
    """
    pivots: List[Tuple[int, int, int]] = []
    for idx, row in enumerate(rows):
        combo = 1 << idx
        for pbit, prow, pcombo in pivots:
            if row & pbit:
                row ^= prow
                combo ^= pcombo
        if row == 0:
            return pivots, combo
        pivots.append((row & -row, row, combo))
    return pivots, None


def rank(vs: Iterable[BitVec]) -> int:
    rows = [v.bits for v in vs]
    count = 0
    pivots: List[Tuple[int, int]] = []
    for row in rows:
        for pbit, prow in pivots:
            if row & pbit:
                row ^= prow
        if row:
            pivots.append((row & -row, row))
            count += 1
    return count


def is_independent(vs: Sequence[BitVec]) -> bool:
    """True iff no nonempty subset XORs to zero. The empty list is independent."""
    if not vs:
        return True
    _same_dim(*vs)
    _, witness = _reduce([v.bits for v in vs])
    return witness is None


def dependency_witness(vs: Sequence[BitVec]) -> Optional[List[int]]:
    """Indices of a nonempty subset of ``vs`` XORing to zero, or None."""
    if not vs:
        return None
    _same_dim(*vs)
    _, witness = _reduce([v.bits for v in vs])
    if witness is None:
        return None
    return [i for i in range(len(vs)) if witness >> i & 1]


@dataclass(frozen=True)
class Subspace:
    """Span of linearly independent vectors in B^n."""

    basis: Tuple[int, ...]
    n: int

    def __post_init__(self) -> None:
        _check_dim(self.n)
        for b in self.basis:
            if not 0 <= b < (1 << self.n):
                raise ValueError(f"basis vector {b} out of range for n={self.n}")
        if _reduce(list(self.basis))[1] is not None:
            raise ValueError("basis vectors are linearly dependent")

    @classmethod
    def span(cls, vs: Iterable[BitVec], n: Optional[int] = None) -> "Subspace":
        """Subspace spanned by arbitrary vectors (dependent ones are dropped)."""
        vs = list(vs)
        if n is None:
            if not vs:
                raise ValueError("need n for an empty span")
            n = _same_dim(*vs)
        basis: List[int] = []
        pivots: List[Tuple[int, int]] = []
        for v in vs:
            if v.n != n:
                raise DimensionError(f"dimension mismatch: {v.n} != {n}")
            row = v.bits
            for pbit, prow in pivots:
                if row & pbit:
                    row ^= prow
            if row:
                pivots.append((row & -row, row))
                basis.append(v.bits)
        return cls(tuple(basis), n)

    @classmethod
    def whole(cls, n: int) -> "Subspace":
        return cls(tuple(1 << i for i in range(n)), n)

    @property
    def dim(self) -> int:
        return len(self.basis)

    def __len__(self) -> int:
        return 1 << self.dim

    def elements(self) -> np.ndarray:
        """All 2^dim elements, sorted ascending."""
        out = np.zeros(1, dtype=np.int64)
        for b in self.basis:
            out = np.concatenate([out, out ^ b])
        out.sort()
        return out

    def __contains__(self, v: BitVec) -> bool:
        if v.n != self.n:
            return False
        return rank([BitVec(b, self.n) for b in self.basis] + [v]) == self.dim

    def canonical(self) -> Tuple[int, ...]:
        """Reduced row echelon basis; equal subspaces give equal tuples."""
        rows: List[int] = []
        for b in self.basis:
            for r in rows:
                if b >> (r.bit_length() - 1) & 1:
                    b ^= r
            if b:
                lead = 1 << (b.bit_length() - 1)
                rows = [r ^ b if r & lead else r for r in rows]
                rows.append(b)
        return tuple(sorted(rows, reverse=True))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Subspace):
            return NotImplemented
        return self.n == other.n and self.canonical() == other.canonical()

    def __hash__(self) -> int:
        return hash((self.n, self.canonical()))


def orthocomplement(g: Subspace) -> Subspace:
    """{q : q . x = 0 for all x in g}, of dimension n - dim(g)."""
    n = g.n
    # reduced row echelon form with pivot columns = lowest set bit
    rows: List[int] = []
    for b in g.basis:
        for r in rows:
            if b & (r & -r):
                b ^= r
        if b:
            low = b & -b
            rows = [r ^ b if r & low else r for r in rows]
            rows.append(b)
    pivot_cols = {(r & -r).bit_length() - 1: r for r in rows}
    basis = []
    for free in range(n):
        if free in pivot_cols:
            continue
        v = 1 << free
        for col, r in pivot_cols.items():
            if r >> free & 1:
                v |= 1 << col
        basis.append(v)
    return Subspace(tuple(basis), n)


def separating_question(
    x1: BitVec, x2: BitVec, x3: BitVec, x4: BitVec
) -> Optional[BitVec]:
    """Lowest q with q.x1 = q.x2 != q.x3 = q.x4, or None if there is none."""
    n = _same_dim(x1, x2, x3, x4)
    if len({x1.bits, x2.bits, x3.bits, x4.bits}) != 4:
        raise ValueError("separating_question needs four distinct vectors")
    d1, d2, d3, d4 = (dot_all(x.bits, n) for x in (x1, x2, x3, x4))
    hits = np.flatnonzero((d1 == d2) & (d3 == d4) & (d1 != d3))
    if hits.size == 0:
        return None
    return BitVec(int(hits[0]), n)
