"""Exact classical simulation of one Deutsch-Jozsa run against an answer table.

After H^n, the oracle and H^n again, the question register holds
sum_j (C_j / N) |j> with C_j = sum_q (-1)^(j.q + f(q)). The trailing
|0> - |1> qubit only carries the phase kickback and is dropped. All C_j are
integers, computed by an integer fast Walsh-Hadamard transform, so every
probability is an exact rational.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Dict, Iterable, List, Sequence, Tuple, Union

import numpy as np

from .adversary import OracleTable
from .gf2 import BitVec, parity_table

SeedLike = Union[int, Sequence[int], np.random.SeedSequence, None]


def fwht(values: np.ndarray) -> np.ndarray:
    """In-place integer fast Walsh-Hadamard transform (unnormalised).

    ``values`` must be a 1-d int64 array whose length is a power of two.
    """
    size = values.shape[0]
    if size & (size - 1) or size == 0:
        raise ValueError(f"length {size} is not a power of two")
    if values.dtype != np.int64:
        raise TypeError("fwht works on int64 arrays")
    h = 1
    while h < size:
        view = values.reshape(-1, 2, h)
        lo = view[:, 0, :].copy()
        view[:, 0, :] += view[:, 1, :]
        view[:, 1, :] = lo - view[:, 1, :]
        h <<= 1
    return values


def wht_reference(signs: Sequence[int]) -> np.ndarray:
    """Walsh-Hadamard transform straight from the definition, O(N^2)."""
    signs = np.asarray(signs, dtype=np.int64)
    size = signs.shape[0]
    if size == 0 or size & (size - 1):
        raise ValueError(f"length {size} is not a power of two")
    n = size.bit_length() - 1
    par = parity_table(n) if n else np.zeros(1, dtype=np.uint8)
    idx = np.arange(size)
    out = np.empty(size, dtype=np.int64)
    for j in range(size):
        chars = 1 - 2 * par[idx & j].astype(np.int64)
        out[j] = int(chars @ signs)
    return out


@dataclass(frozen=True, eq=False)
class AmplitudeSpectrum:
    """Amplitudes C_j / N stored as the integer numerators C_j."""

    coefficients: np.ndarray
    n: int

    @property
    def denominator(self) -> int:
        return 1 << self.n

    def coefficient(self, j: Union[int, BitVec]) -> Fraction:
        return Fraction(int(self.coefficients[int(j)]), self.denominator)

    def probability(self, j: Union[int, BitVec]) -> Fraction:
        c = int(self.coefficients[int(j)])
        return Fraction(c * c, self.denominator ** 2)

    def support(self) -> np.ndarray:
        return np.flatnonzero(self.coefficients)

    def squared(self) -> np.ndarray:
        """C_j^2 as int64; sums to N^2."""
        return self.coefficients * self.coefficients

    def top(self, t: int) -> List[Tuple[int, int, Fraction]]:
        """The t most likely outcomes as (index, C_j, probability); ties by index.

        Zero-probability outcomes are never listed.
        """
        sq = self.squared()
        order = np.lexsort((np.arange(sq.size), -sq))[: min(t, int(np.count_nonzero(sq)))]
        return [(int(j), int(self.coefficients[j]), self.probability(int(j))) for j in order]

    def to_dict(self) -> Dict[str, Any]:
        nz = self.support()
        return {
            "n": self.n,
            "denominator": self.denominator,
            "coefficients": {str(int(j)): int(self.coefficients[j]) for j in nz},
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "AmplitudeSpectrum":
        n = int(data["n"])
        if int(data.get("denominator", 1 << n)) != 1 << n:
            raise ValueError("denominator must equal 2^n")
        coeffs = np.zeros(1 << n, dtype=np.int64)
        for j, c in data["coefficients"].items():
            coeffs[int(j)] = int(c)
        return cls(coeffs, n)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, AmplitudeSpectrum):
            return NotImplemented
        return self.n == other.n and bool(np.array_equal(self.coefficients, other.coefficients))


def _spectrum(table: OracleTable) -> AmplitudeSpectrum:
    # the table is immutable, so the transform is computed once per table
    if table._spectrum is None:
        signs = 1 - 2 * table.bits().astype(np.int64)
        coeffs = fwht(signs)
        coeffs.setflags(write=False)
        table._spectrum = AmplitudeSpectrum(coeffs, table.n)
    return table._spectrum


def amplitudes(table: OracleTable) -> AmplitudeSpectrum:
    """Run the circuit once (one oracle call) and return the exact spectrum."""
    table.charge(1)
    return _spectrum(table)


def success_probability(spectrum: AmplitudeSpectrum, secrets: Iterable[BitVec]) -> Fraction:
    """Probability that the measurement lands on one of the (distinct) secrets."""
    total = Fraction(0)
    for x in {s.bits: s for s in secrets}.values():
        if x.n != spectrum.n:
            raise ValueError(f"secret has dimension {x.n}, spectrum has {spectrum.n}")
        total += spectrum.probability(x)
    return total


def sample(spectrum: AmplitudeSpectrum, rng_seed: SeedLike, count: int) -> List[BitVec]:
    """Draw ``count`` measurement outcomes with P(j) = (C_j/N)^2.

    Uses integer cumulative weights C_j^2 out of N^2 and integer uniforms, so
    outcomes of probability zero can never be drawn.
    """
    rng = np.random.default_rng(rng_seed)
    return [BitVec(int(j), spectrum.n) for j in sample_indices(spectrum, rng, count)]


def sample_indices(spectrum: AmplitudeSpectrum, rng: np.random.Generator, count: int) -> np.ndarray:
    cum = np.cumsum(spectrum.squared())
    total = int(cum[-1])
    if total != spectrum.denominator ** 2:
        raise ValueError("spectrum is not normalised")
    draws = rng.integers(0, total, size=count, dtype=np.int64)
    return np.searchsorted(cum, draws, side="right")


def run(table: OracleTable, rng: np.random.Generator, count: int = 1) -> np.ndarray:
    """``count`` independent Deutsch-Jozsa runs: one oracle call and one outcome each."""
    table.charge(count)
    return sample_indices(_spectrum(table), rng, count)
