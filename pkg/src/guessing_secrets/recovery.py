"""Turning repeated measurement outcomes into knowledge about the secret pair.

Run the circuit m times, count how often each object appears (F), and
compare against the binomial threshold m/2 - d. One object above the
threshold is the centre of a star (case 2). Otherwise every pair whose
counts sum past the threshold stays a candidate edge (case 1), and classical
separating questions prune that graph down to a star or a triangle.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from .adversary import OracleTable
from .engine import _spectrum
from .gf2 import BitVec, dot, separating_question

Edge = FrozenSet[int]
Number = Union[float, str, Fraction]


def _as_fraction(x: Number) -> Fraction:
    # decimal strings and floats both mean the decimal the user typed
    if isinstance(x, Fraction):
        return x
    return Fraction(str(x))


def binomial_tail(m: int, t: Union[int, Fraction]) -> Fraction:
    """P(Binomial(m, 1/2) <= t), exactly."""
    top = math.floor(t)
    if top < 0:
        return Fraction(0)
    top = min(top, m)
    return Fraction(sum(math.comb(m, i) for i in range(top + 1)), 1 << m)


@dataclass(frozen=True)
class StoppingRule:
    epsilon: Fraction
    m: int
    d: int

    @property
    def threshold(self) -> Fraction:
        return Fraction(self.m, 2) - self.d

    @property
    def tail(self) -> Fraction:
        return binomial_tail(self.m, self.threshold)

    def to_dict(self) -> Dict[str, Any]:
        return {"epsilon": str(self.epsilon), "m": self.m, "d": self.d}


def stopping_rule(epsilon: Number, m: int) -> StoppingRule:
    """Smallest d with P(Binomial(m, 1/2) <= m/2 - d) < epsilon."""
    eps = _as_fraction(epsilon)
    if not 0 < eps < 1:
        raise ValueError(f"epsilon must lie in (0, 1), got {epsilon}")
    if m < 1:
        raise ValueError("m must be positive")
    for d in range(m // 2 + 1):
        if binomial_tail(m, Fraction(m, 2) - d) < eps:
            return StoppingRule(eps, m, d)
    raise ValueError(f"m={m} is too small for epsilon={epsilon}")


def default_rule(epsilon: Number = Fraction(1, 100), m_max: int = 10_000) -> StoppingRule:
    """Smallest m whose minimal d satisfies d <= m/4."""
    for m in range(1, m_max + 1):
        try:
            rule = stopping_rule(epsilon, m)
        except ValueError:
            continue
        if 4 * rule.d <= m:
            return rule
    raise ValueError(f"no m <= {m_max} works for epsilon={epsilon}")


# -- graphs ------------------------------------------------------------------


def _edge(a: int, b: int) -> Edge:
    if a == b:
        raise ValueError("self-loops are not candidate pairs")
    return frozenset((a, b))


def _sorted_edges(edges: Iterable[Edge]) -> List[Tuple[int, int]]:
    return sorted(tuple(sorted(e)) for e in edges)


@dataclass(frozen=True)
class KnowledgeGraph:
    """Candidate secret pairs as undirected edges over B^n."""

    edges: FrozenSet[Edge]
    n: int

    @classmethod
    def from_pairs(cls, pairs: Iterable[Tuple[int, int]], n: int) -> "KnowledgeGraph":
        return cls(frozenset(_edge(int(a), int(b)) for a, b in pairs), n)

    @property
    def vertices(self) -> List[int]:
        return sorted(set().union(*self.edges)) if self.edges else []

    def pairs(self) -> List[Tuple[int, int]]:
        return _sorted_edges(self.edges)

    def is_star(self) -> bool:
        """Nonempty and every edge shares one common vertex."""
        if not self.edges:
            return False
        return bool(frozenset.intersection(*self.edges))

    def centers(self) -> List[int]:
        if not self.edges:
            return []
        return sorted(frozenset.intersection(*self.edges))

    def is_triangle(self) -> bool:
        return len(self.edges) == 3 and len(self.vertices) == 3

    def disjoint_pair(self) -> Optional[Tuple[Tuple[int, int], Tuple[int, int]]]:
        """First pair of vertex-disjoint edges in sorted order, if any."""
        edges = self.pairs()
        for i, e in enumerate(edges):
            for f in edges[i + 1 :]:
                if not set(e) & set(f):
                    return e, f
        return None

    @property
    def has_disjoint_edges(self) -> bool:
        return self.disjoint_pair() is not None

    def contains(self, a: int, b: int) -> bool:
        return a != b and frozenset((a, b)) in self.edges

    def to_dict(self) -> Dict[str, Any]:
        return {
            "n": self.n,
            "edges": [[str(BitVec(a, self.n)), str(BitVec(b, self.n))] for a, b in self.pairs()],
            "star": self.is_star(),
            "triangle": self.is_triangle(),
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "KnowledgeGraph":
        n = int(data["n"])
        pairs = [(BitVec.parse(a).bits, BitVec.parse(b).bits) for a, b in data["edges"]]
        return cls.from_pairs(pairs, n)


def build_graph(candidates: Iterable[Tuple[int, int]], n: int) -> KnowledgeGraph:
    return KnowledgeGraph.from_pairs(candidates, n)


@dataclass(frozen=True)
class Query:
    question: int
    answer: int
    removed: Tuple[Tuple[int, int], ...]


def reduce_graph(graph: KnowledgeGraph, table: OracleTable) -> Tuple[KnowledgeGraph, List[Query]]:
    """Ask separating questions until no two candidate edges are disjoint.

    Each question costs one oracle call. An edge {u, v} is refuted when
    q.u = q.v and the answer differs, since both objects would have forced
    the same reply.
    """
    if graph.n != table.n:
        raise ValueError(f"graph has dimension {graph.n}, table has {table.n}")
    n = graph.n
    edges = set(graph.edges)
    log: List[Query] = []
    current = graph
    while True:
        pair = current.disjoint_pair()
        if pair is None:
            return current, log
        (a, b), (c, d) = pair
        q = separating_question(*(BitVec(v, n) for v in (a, b, c, d)))
        if q is None:
            raise RuntimeError(f"no separating question for disjoint edges {pair}")
        answer = table.query(q)
        removed = []
        for e in _sorted_edges(edges):
            u, v = (BitVec(x, n) for x in e)
            du = dot(q, u)
            if du == dot(q, v) and du != answer:
                removed.append(e)
        for e in removed:
            edges.discard(frozenset(e))
        log.append(Query(q.bits, answer, tuple(removed)))
        current = KnowledgeGraph(frozenset(edges), n)


# -- classification ----------------------------------------------------------


@dataclass(frozen=True)
class Classification:
    case: int
    center: Optional[int] = None
    candidates: Tuple[Tuple[int, int], ...] = ()
    tie: bool = False
    leaves: Tuple[int, ...] = ()

    def to_dict(self, n: int) -> Dict[str, Any]:
        s = lambda x: str(BitVec(x, n))  # noqa: E731
        if self.case == 2:
            return {
                "case": 2,
                "center": s(self.center),
                "tie": self.tie,
                "observed_leaves": [s(x) for x in self.leaves],
            }
        return {"case": 1, "candidates": [[s(a), s(b)] for a, b in self.candidates]}


def frequencies(outcomes: Iterable[int]) -> Dict[int, int]:
    return dict(sorted(Counter(int(x) for x in outcomes).items()))


def classify(outcomes: Sequence[int], rule: StoppingRule) -> Classification:
    """Case 2 (star centre) if some F(X) >= m/2 - d, otherwise case 1 (candidate pairs).

    With several objects past the threshold the centre is the one with the
    largest count, then the smallest index, and ``tie`` is set.
    """
    if len(outcomes) != rule.m:
        raise ValueError(f"expected {rule.m} outcomes, got {len(outcomes)}")
    freq = frequencies(outcomes)
    threshold = rule.threshold
    dominant = [x for x, f in freq.items() if f >= threshold]
    if dominant:
        center = min(dominant, key=lambda x: (-freq[x], x))
        leaves = tuple(x for x in freq if x != center)
        return Classification(2, center=center, tie=len(dominant) > 1, leaves=leaves)
    seen = list(freq)
    pairs = tuple(
        (a, b)
        for i, a in enumerate(seen)
        for b in seen[i + 1 :]
        if freq[a] + freq[b] >= threshold
    )
    return Classification(1, candidates=pairs)


# -- experiments -------------------------------------------------------------


def run_words(seed: int, m: int, experiment: int = 0) -> np.ndarray:
    """One uniform 64-bit word per run, from the seed sequence (seed, experiment, run)."""
    return np.array(
        [
            np.random.SeedSequence([seed, experiment, i]).generate_state(1, np.uint64)[0]
            for i in range(m)
        ],
        dtype=np.uint64,
    )


def sample_runs(table: OracleTable, seed: int, m: int, experiment: int = 0) -> np.ndarray:
    """m independent circuit runs, each charged as one oracle call.

    Outcome probabilities are C_j^2 / 2^(2n), so the top 2n bits of a uniform
    word give an exact uniform draw against the integer cumulative weights.
    """
    spectrum = _spectrum(table)
    table.charge(m)
    cum = np.cumsum(spectrum.squared())
    draws = (run_words(seed, m, experiment) >> np.uint64(64 - 2 * table.n)).astype(np.int64)
    return np.searchsorted(cum, draws, side="right")


@dataclass
class ExperimentRecord:
    n: int
    rule: StoppingRule
    seed: int
    experiment: int
    outcomes: List[int]
    classification: Classification
    secrets: Optional[Tuple[int, ...]] = None
    reduction: Optional[List[Query]] = None
    final_graph: Optional[KnowledgeGraph] = None
    adversary: Optional[Dict[str, Any]] = None
    frequency: Dict[int, int] = field(init=False)

    def __post_init__(self) -> None:
        self.frequency = frequencies(self.outcomes)

    @property
    def success_count(self) -> Optional[int]:
        """E = number of runs that returned one of the secrets."""
        if self.secrets is None:
            return None
        return sum(self.frequency.get(x, 0) for x in set(self.secrets))

    def to_dict(self) -> Dict[str, Any]:
        s = lambda x: str(BitVec(x, self.n))  # noqa: E731
        out: Dict[str, Any] = {
            "n": self.n,
            "adversary": self.adversary,
            "epsilon": str(self.rule.epsilon),
            "m": self.rule.m,
            "d": self.rule.d,
            "seed": self.seed,
            "experiment": self.experiment,
            "outcomes": [s(x) for x in self.outcomes],
            "F": {s(x): f for x, f in self.frequency.items()},
            "classification": self.classification.to_dict(self.n),
        }
        if self.secrets is not None:
            out["secrets"] = [s(x) for x in self.secrets]
            out["E"] = self.success_count
        if self.reduction is not None:
            out["reduction"] = [
                {
                    "question": s(q.question),
                    "answer": q.answer,
                    "removed": [[s(a), s(b)] for a, b in q.removed],
                }
                for q in self.reduction
            ]
            out["final_graph"] = self.final_graph.to_dict()
        return out


def run_experiment(
    table: OracleTable,
    rule: StoppingRule,
    seed: int,
    secrets: Optional[Sequence[BitVec]] = None,
    experiment: int = 0,
    reduce: bool = False,
    adversary: Optional[Dict[str, Any]] = None,
) -> ExperimentRecord:
    """Sample m runs, classify, and optionally prune a case-1 graph."""
    outcomes = [int(x) for x in sample_runs(table, seed, rule.m, experiment)]
    cls = classify(outcomes, rule)
    record = ExperimentRecord(
        n=table.n,
        rule=rule,
        seed=seed,
        experiment=experiment,
        outcomes=outcomes,
        classification=cls,
        secrets=None if secrets is None else tuple(x.bits for x in secrets),
        adversary=adversary,
    )
    if reduce and cls.case == 1:
        graph = build_graph(cls.candidates, table.n)
        record.final_graph, record.reduction = reduce_graph(graph, table)
    return record
