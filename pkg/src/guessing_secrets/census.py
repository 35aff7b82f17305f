"""Agreement censuses and closed-form success bounds.

Subsets M of the k secrets are bitmasks: bit i-1 set means secret i agrees
with the answer. S_M counts the questions whose agreeing set is exactly M.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Dict, List, Sequence

import numpy as np

from .adversary import OracleTable
from .gf2 import BitVec, _same_dim, dependency_witness, dot_all

MAX_SECRETS = 16


class DependentSecretsError(ValueError):
    def __init__(self, witness: List[int]):
        self.witness = witness
        super().__init__(f"secrets {witness} XOR to zero")


@dataclass(frozen=True, eq=False)
class AgreementCensus:
    counts: np.ndarray
    k: int
    n: int

    def __getitem__(self, mask: int) -> int:
        return int(self.counts[mask])

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def to_dict(self) -> Dict[str, Any]:
        return {
            "n": self.n,
            "k": self.k,
            "counts": {str(m): int(c) for m, c in enumerate(self.counts) if c},
        }


def census(table: OracleTable, secrets: Sequence[BitVec]) -> AgreementCensus:
    k = len(secrets)
    if not 1 <= k <= MAX_SECRETS:
        raise ValueError(f"need 1..{MAX_SECRETS} secrets, got {k}")
    n = _same_dim(*secrets)
    if n != table.n:
        raise ValueError(f"secrets have dimension {n}, table has {table.n}")
    answers = table.bits()
    masks = np.zeros(table.size, dtype=np.int64)
    for i, x in enumerate(secrets):
        masks |= (dot_all(x.bits, n) == answers).astype(np.int64) << i
    return AgreementCensus(np.bincount(masks, minlength=1 << k), k, n)


def reconstruct_coefficients(c: AgreementCensus) -> List[Fraction]:
    """C_{X_i} / N for each secret from the census alone.

    C_{X_i} = sum_M eps(i, M) S_M with eps = +1 when i is in M, else -1.
    """
    N = 1 << c.n
    masks = np.arange(1 << c.k)
    out = []
    for i in range(c.k):
        eps = np.where(masks >> i & 1, 1, -1)
        out.append(Fraction(int(eps @ c.counts), N))
    return out


def symmetry_counts(secrets: Sequence[BitVec]) -> Dict[int, int]:
    """How many questions produce each joint answer pattern.

    Pattern v packs (q.X_1, ..., q.X_k) with q.X_1 as the most significant
    digit. Requires independent secrets.
    """
    witness = dependency_witness(list(secrets))
    if witness is not None:
        raise DependentSecretsError(witness)
    n = _same_dim(*secrets)
    k = len(secrets)
    patterns = np.zeros(1 << n, dtype=np.int64)
    for x in secrets:
        patterns = (patterns << 1) | dot_all(x.bits, n)
    counts = np.bincount(patterns, minlength=1 << k)
    return {v: int(c) for v, c in enumerate(counts)}


def p_k(k: int) -> Fraction:
    """Success lower bound for k independent secrets under the majority promise."""
    if k < 1:
        raise ValueError("k must be at least 1")
    central = math.comb(k - 1, math.ceil((k - 1) / 2))
    return Fraction(k * central * central, 4 ** (k - 1))


def coefficient_sum(k: int) -> Fraction:
    """sum_i C_{X_i} / N for independent secrets: k C(k-1, ceil((k-1)/2)) / 2^(k-1)."""
    if k < 1:
        raise ValueError("k must be at least 1")
    return Fraction(k * math.comb(k - 1, math.ceil((k - 1) / 2)), 2 ** (k - 1))


def subgroup_success(k: int) -> Fraction:
    """Success probability when the secrets are the nonzero elements of a subgroup."""
    if k < 1 or (k + 1) & k:
        raise ValueError(f"k + 1 must be a power of two, got k={k}")
    return Fraction(4 * k, (k + 1) ** 2)


def bounds_rows(k_max: int) -> List[Dict[str, Any]]:
    rows = []
    for k in range(1, k_max + 1):
        pk = p_k(k)
        sub = subgroup_success(k) if not (k + 1) & k else None
        rows.append(
            {
                "k": k,
                "p_k": str(pk),
                "p_k_decimal": f"{float(pk):.12f}",
                "subgroup": "" if sub is None else str(sub),
                "inverse_k": str(Fraction(1, k)),
            }
        )
    return rows


def bounds_csv(k_max: int) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(
        buf, fieldnames=["k", "p_k", "p_k_decimal", "subgroup", "inverse_k"], lineterminator="\n"
    )
    writer.writeheader()
    writer.writerows(bounds_rows(k_max))
    return buf.getvalue()


def independence_lower_bound(k: int, n: int) -> float:
    """1 - 2^(k-n): lower bound on the chance k uniform vectors are independent."""
    return 1.0 - 2.0 ** (k - n)


def exact_independence_probability(k: int, n: int) -> Fraction:
    """Exact chance that k uniform vectors in B^n are independent."""
    N = 1 << n
    out = Fraction(1)
    for i in range(k):
        out *= Fraction(N - (1 << i), N)
    return out


def is_majority_census(c: AgreementCensus) -> bool:
    need = math.ceil(c.k / 2)
    small = [m for m in range(1 << c.k) if bin(m).count("1") < need]
    return not any(c.counts[m] for m in small)

