"""Adversary strategies and the answer tables they compile to.

A table holds A_q = f(q) for every question q in B^n. Strategies are plain
frozen dataclasses; ``compile_spec`` turns any of them into an
:class:`OracleTable`, and ``spec_from_json`` / ``spec_to_json`` give the
JSON form (discriminated by a ``"variant"`` field).
"""

from __future__ import annotations

import itertools
import json
import math
import threading
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, Iterator, List, Optional, Sequence, Tuple, Union

import jsonschema
import numpy as np

from .gf2 import BitVec, Subspace, _same_dim, dot_all, orthocomplement

ENUMERATION_CAP = 1 << 20


class PromiseError(ValueError):
    """A table violates the answer-matches-a-secret promise."""


class OracleTable:
    """Bit-packed answer table plus an oracle-call counter.

    The answers are immutable. ``call_counter`` counts oracle applications:
    one per Deutsch-Jozsa run and one per classical ``query``. Reading the
    table for bookkeeping (census, promise checks) does not count.
    """

    __slots__ = ("n", "_packed", "_calls", "_lock", "_spectrum")

    def __init__(self, answers: np.ndarray, n: int):
        answers = np.asarray(answers, dtype=np.uint8)
        if answers.shape != (1 << n,):
            raise ValueError(f"table needs exactly {1 << n} entries, got {answers.shape}")
        if answers.size and answers.max() > 1:
            raise ValueError("answers must be 0/1")
        self.n = n
        self._packed = np.packbits(answers, bitorder="big")
        self._packed.setflags(write=False)
        self._calls = 0
        self._lock = threading.Lock()
        self._spectrum = None

    @property
    def size(self) -> int:
        return 1 << self.n

    def bits(self) -> np.ndarray:
        """Unpacked answers A_0..A_{N-1} (uint8). Does not count as a call."""
        return np.unpackbits(self._packed, count=self.size, bitorder="big")

    @property
    def call_counter(self) -> int:
        return self._calls

    def charge(self, calls: int = 1) -> None:
        if calls < 0:
            raise ValueError("cannot refund oracle calls")
        with self._lock:
            self._calls += calls

    def query(self, q: BitVec) -> int:
        """Classical single-question query; costs one oracle call."""
        if q.n != self.n:
            raise ValueError(f"question has dimension {q.n}, table has {self.n}")
        self.charge(1)
        byte = int(self._packed[q.bits >> 3])
        return byte >> (7 - (q.bits & 7)) & 1

    def to_hex(self) -> str:
        """ceil(N/4) hex digits; A_0 is the most significant bit of the first digit."""
        digits = (self.size + 3) // 4
        return self._packed.tobytes().hex()[:digits]

    @classmethod
    def from_hex(cls, text: str, n: int) -> "OracleTable":
        N = 1 << n
        digits = (N + 3) // 4
        if len(text) != digits:
            raise ValueError(f"expected {digits} hex digits for n={n}, got {len(text)}")
        padded = text + "0" * (len(text) % 2)
        raw = np.frombuffer(bytes.fromhex(padded), dtype=np.uint8)
        bits = np.unpackbits(raw, bitorder="big")
        if bits[N:].any():
            raise ValueError("nonzero padding bits in table hex")
        return cls(bits[:N], n)

    def to_dict(self) -> Dict[str, Any]:
        return {"n": self.n, "answers": self.to_hex()}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "OracleTable":
        return cls.from_hex(data["answers"], int(data["n"]))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, OracleTable):
            return NotImplemented
        return self.n == other.n and bool(np.array_equal(self._packed, other._packed))

    def __hash__(self) -> int:
        return hash((self.n, self._packed.tobytes()))

    def __repr__(self) -> str:
        body = self.to_hex()
        if len(body) > 16:
            body = body[:16] + "..."
        return f"OracleTable(n={self.n}, answers={body}, calls={self._calls})"


# -- strategies --------------------------------------------------------------


@dataclass(frozen=True)
class FullStar:
    x1: BitVec


@dataclass(frozen=True)
class Triangle:
    x1: BitVec
    x2: BitVec
    xstar: BitVec


@dataclass(frozen=True)
class Biased:
    """Answer for x1 on a ``bias`` fraction of the questions where x1, x2 differ.

    ``tie_rule="ascending"`` picks the lowest such questions; ``"random"``
    picks a uniformly random subset of the right size from ``seed``.
    """

    x1: BitVec
    x2: BitVec
    bias: Fraction
    tie_rule: str = "ascending"
    seed: Optional[int] = None


@dataclass(frozen=True)
class Minority:
    x1: BitVec
    x2: BitVec
    x3: BitVec


@dataclass(frozen=True)
class MajorityTable:
    """Explicit answers that must agree with at least half of ``secrets``."""

    secrets: Tuple[BitVec, ...]
    answers: bytes = field(repr=False)


@dataclass(frozen=True)
class Subgroup:
    group: Subspace


@dataclass(frozen=True)
class RawTable:
    """One byte (0 or 1) per question, copied verbatim."""

    answers: bytes = field(repr=False)
    n: int = 0


AdversarySpec = Union[FullStar, Triangle, Biased, Minority, MajorityTable, Subgroup, RawTable]


def spec_dim(spec: AdversarySpec) -> int:
    if isinstance(spec, FullStar):
        return spec.x1.n
    if isinstance(spec, Triangle):
        return _same_dim(spec.x1, spec.x2, spec.xstar)
    if isinstance(spec, Biased):
        return _same_dim(spec.x1, spec.x2)
    if isinstance(spec, Minority):
        return _same_dim(spec.x1, spec.x2, spec.x3)
    if isinstance(spec, MajorityTable):
        return _same_dim(*spec.secrets)
    if isinstance(spec, Subgroup):
        return spec.group.n
    if isinstance(spec, RawTable):
        return spec.n
    raise TypeError(f"unknown adversary spec {type(spec).__name__}")


def spec_secrets(spec: AdversarySpec) -> Optional[List[BitVec]]:
    """The secrets the strategy answers on behalf of, if it has any."""
    if isinstance(spec, FullStar):
        return [spec.x1]
    if isinstance(spec, (Triangle, Biased)):
        return [spec.x1, spec.x2]
    if isinstance(spec, Minority):
        return [spec.x1, spec.x2, spec.x3]
    if isinstance(spec, MajorityTable):
        return list(spec.secrets)
    if isinstance(spec, Subgroup):
        return [BitVec(int(g), spec.group.n) for g in spec.group.elements() if g]
    return None


def promise_threshold(spec: AdversarySpec) -> int:
    """Minimum number of secrets each answer must agree with for this variant."""
    if isinstance(spec, (MajorityTable, Subgroup)):
        secrets = spec_secrets(spec)
        return math.ceil(len(secrets) / 2)
    return 1


def _distinct(*vs: BitVec) -> None:
    if len({v.bits for v in vs}) != len(vs):
        raise ValueError("secrets must be pairwise distinct")


def _biased_answers(spec: Biased) -> np.ndarray:
    n = _same_dim(spec.x1, spec.x2)
    _distinct(spec.x1, spec.x2)
    bias = Fraction(spec.bias)
    if not 0 <= bias <= 1:
        raise ValueError(f"bias must lie in [0, 1], got {bias}")
    half = 1 << (n - 1)
    count = bias * half
    if count.denominator != 1:
        raise ValueError(f"bias {bias} times N/2 = {half} is not an integer")
    a1 = dot_all(spec.x1.bits, n)
    a2 = dot_all(spec.x2.bits, n)
    choice = np.flatnonzero(a1 != a2)
    if spec.tie_rule == "ascending":
        favoured = choice[: int(count)]
    elif spec.tie_rule == "random":
        rng = np.random.default_rng(spec.seed)
        favoured = rng.choice(choice, size=int(count), replace=False)
    else:
        raise ValueError(f"unknown tie rule {spec.tie_rule!r}")
    answers = a2.copy()
    answers[favoured] = a1[favoured]
    return answers


def compile_spec(spec: AdversarySpec) -> OracleTable:
    """Build the answer table for a strategy."""
    n = spec_dim(spec)
    if isinstance(spec, FullStar):
        answers = dot_all(spec.x1.bits, n)
    elif isinstance(spec, Triangle):
        _distinct(spec.x1, spec.x2, spec.xstar)
        a1 = dot_all(spec.x1.bits, n)
        a2 = dot_all(spec.x2.bits, n)
        answers = np.where(a1 != a2, dot_all(spec.xstar.bits, n), a1)
    elif isinstance(spec, Biased):
        answers = _biased_answers(spec)
    elif isinstance(spec, Minority):
        _distinct(spec.x1, spec.x2, spec.x3)
        answers = dot_all(spec.x1.bits ^ spec.x2.bits ^ spec.x3.bits, n)
    elif isinstance(spec, MajorityTable):
        _distinct(*spec.secrets)
        answers = np.frombuffer(spec.answers, dtype=np.uint8)
    elif isinstance(spec, Subgroup):
        perp = orthocomplement(spec.group)
        if len(perp) * len(spec.group) != 1 << n:
            raise ValueError("orthogonal complement has the wrong size")
        answers = np.ones(1 << n, dtype=np.uint8)
        answers[perp.elements()] = 0
    elif isinstance(spec, RawTable):
        answers = np.frombuffer(spec.answers, dtype=np.uint8)
    else:
        raise TypeError(f"unknown adversary spec {type(spec).__name__}")
    table = OracleTable(answers, n)
    if isinstance(spec, MajorityTable):
        if not promise_holds(table, list(spec.secrets), promise_threshold(spec)):
            raise PromiseError("majority table violates the majority promise")
    return table


def agreement_counts(table: OracleTable, secrets: Sequence[BitVec]) -> np.ndarray:
    """Per question, how many secrets agree with the table's answer."""
    n = _same_dim(*secrets)
    if n != table.n:
        raise ValueError(f"secrets have dimension {n}, table has {table.n}")
    answers = table.bits()
    counts = np.zeros(table.size, dtype=np.int64)
    for x in secrets:
        counts += dot_all(x.bits, n) == answers
    return counts


def promise_holds(table: OracleTable, secrets: Sequence[BitVec], min_agree: int) -> bool:
    """True iff every answer agrees with at least ``min_agree`` of the secrets."""
    if not secrets:
        raise ValueError("need at least one secret")
    if min_agree > len(secrets):
        raise ValueError(f"min_agree={min_agree} exceeds k={len(secrets)}")
    return bool((agreement_counts(table, secrets) >= min_agree).all())


def allowed_answers(secrets: Sequence[BitVec], min_agree: int) -> Tuple[np.ndarray, np.ndarray]:
    """Boolean masks (answer 0 allowed, answer 1 allowed) per question."""
    n = _same_dim(*secrets)
    ones = np.zeros(1 << n, dtype=np.int64)
    for x in secrets:
        ones += dot_all(x.bits, n)
    zeros = len(secrets) - ones
    return zeros >= min_agree, ones >= min_agree


def enumerate_valid_tables(
    secrets: Sequence[BitVec], min_agree: int, cap: int = ENUMERATION_CAP
) -> Iterator[OracleTable]:
    """Every table satisfying the promise, exactly once.

    Free questions (both answers allowed) are listed in ascending order and
    the tables follow the binary counter over them, so the order is fixed.
    """
    if not secrets:
        raise ValueError("need at least one secret")
    if min_agree > len(secrets):
        raise ValueError(f"min_agree={min_agree} exceeds k={len(secrets)}")
    n = _same_dim(*secrets)
    zero_ok, one_ok = allowed_answers(secrets, min_agree)
    if not (zero_ok | one_ok).all():
        return
    free = np.flatnonzero(zero_ok & one_ok)
    if (1 << free.size) > cap:
        raise OverflowError(f"2^{free.size} valid tables exceeds the cap of {cap}")
    base = np.where(zero_ok, 0, 1).astype(np.uint8)
    for choice in itertools.product((0, 1), repeat=free.size):
        answers = base.copy()
        answers[free] = choice
        yield OracleTable(answers, n)


def count_valid_tables(secrets: Sequence[BitVec], min_agree: int) -> int:
    zero_ok, one_ok = allowed_answers(secrets, min_agree)
    if not (zero_ok | one_ok).all():
        return 0
    return 1 << int((zero_ok & one_ok).sum())


def random_majority_table(
    secrets: Sequence[BitVec], rng: np.random.Generator, min_agree: Optional[int] = None
) -> OracleTable:
    """Uniformly random answer per question among those meeting the promise."""
    n = _same_dim(*secrets)
    if min_agree is None:
        min_agree = math.ceil(len(secrets) / 2)
    zero_ok, one_ok = allowed_answers(secrets, min_agree)
    if not (zero_ok | one_ok).all():
        raise PromiseError("no answer meets the promise for some question")
    coin = rng.integers(0, 2, size=1 << n, dtype=np.uint8)
    answers = np.where(zero_ok & one_ok, coin, np.where(zero_ok, 0, 1)).astype(np.uint8)
    return OracleTable(answers, n)


# -- JSON --------------------------------------------------------------------

_BITSTR = {"type": "string", "pattern": "^[01]{1,24}$"}

SPEC_SCHEMA: Dict[str, Any] = {
    "type": "object",
    "required": ["variant"],
    "properties": {
        "variant": {
            "enum": ["full_star", "triangle", "biased", "minority", "majority_table", "subgroup", "raw"]
        }
    },
    "allOf": [
        {
            "if": {"properties": {"variant": {"const": "full_star"}}},
            "then": {"required": ["x1"], "properties": {"x1": _BITSTR}},
        },
        {
            "if": {"properties": {"variant": {"const": "triangle"}}},
            "then": {
                "required": ["x1", "x2", "xstar"],
                "properties": {"x1": _BITSTR, "x2": _BITSTR, "xstar": _BITSTR},
            },
        },
        {
            "if": {"properties": {"variant": {"const": "biased"}}},
            "then": {
                "required": ["x1", "x2", "bias"],
                "properties": {
                    "x1": _BITSTR,
                    "x2": _BITSTR,
                    "bias": {"type": "string", "pattern": r"^\d+(/\d+)?$"},
                    "tie_rule": {"enum": ["ascending", "random"]},
                    "seed": {"type": ["integer", "null"]},
                },
            },
        },
        {
            "if": {"properties": {"variant": {"const": "minority"}}},
            "then": {
                "required": ["x1", "x2", "x3"],
                "properties": {"x1": _BITSTR, "x2": _BITSTR, "x3": _BITSTR},
            },
        },
        {
            "if": {"properties": {"variant": {"const": "majority_table"}}},
            "then": {
                "required": ["secrets"],
                "properties": {
                    "secrets": {"type": "array", "items": _BITSTR, "minItems": 1, "maxItems": 16},
                    "answers": {"type": "string", "pattern": "^[0-9a-f]+$"},
                    "seed": {"type": "integer"},
                },
                "oneOf": [{"required": ["answers"]}, {"required": ["seed"]}],
            },
        },
        {
            "if": {"properties": {"variant": {"const": "subgroup"}}},
            "then": {
                "required": ["basis", "n"],
                "properties": {
                    "basis": {"type": "array", "items": _BITSTR},
                    "n": {"type": "integer", "minimum": 1, "maximum": 24},
                },
            },
        },
        {
            "if": {"properties": {"variant": {"const": "raw"}}},
            "then": {
                "required": ["answers", "n"],
                "properties": {
                    "answers": {"type": "string", "pattern": "^[0-9a-f]+$"},
                    "n": {"type": "integer", "minimum": 1, "maximum": 24},
                },
            },
        },
    ],
}


def spec_from_json(data: Union[str, Dict[str, Any]]) -> AdversarySpec:
    if isinstance(data, str):
        data = json.loads(data)
    jsonschema.validate(data, SPEC_SCHEMA)
    v = BitVec.parse
    variant = data["variant"]
    if variant == "full_star":
        return FullStar(v(data["x1"]))
    if variant == "triangle":
        return Triangle(v(data["x1"]), v(data["x2"]), v(data["xstar"]))
    if variant == "biased":
        return Biased(
            v(data["x1"]),
            v(data["x2"]),
            Fraction(data["bias"]),
            data.get("tie_rule", "ascending"),
            data.get("seed"),
        )
    if variant == "minority":
        return Minority(v(data["x1"]), v(data["x2"]), v(data["x3"]))
    if variant == "majority_table":
        secrets = tuple(v(s) for s in data["secrets"])
        n = _same_dim(*secrets)
        if "answers" in data:
            table = OracleTable.from_hex(data["answers"], n)
        else:
            table = random_majority_table(secrets, np.random.default_rng(data["seed"]))
        return MajorityTable(secrets, table.bits().tobytes())
    if variant == "subgroup":
        n = int(data["n"])
        return Subgroup(Subspace.span([v(b) for b in data["basis"]], n))
    table = OracleTable.from_hex(data["answers"], int(data["n"]))
    return RawTable(table.bits().tobytes(), table.n)


def spec_to_json(spec: AdversarySpec) -> Dict[str, Any]:
    if isinstance(spec, FullStar):
        return {"variant": "full_star", "x1": str(spec.x1)}
    if isinstance(spec, Triangle):
        return {"variant": "triangle", "x1": str(spec.x1), "x2": str(spec.x2), "xstar": str(spec.xstar)}
    if isinstance(spec, Biased):
        out = {
            "variant": "biased",
            "x1": str(spec.x1),
            "x2": str(spec.x2),
            "bias": str(Fraction(spec.bias)),
            "tie_rule": spec.tie_rule,
        }
        if spec.seed is not None:
            out["seed"] = spec.seed
        return out
    if isinstance(spec, Minority):
        return {"variant": "minority", "x1": str(spec.x1), "x2": str(spec.x2), "x3": str(spec.x3)}
    if isinstance(spec, MajorityTable):
        n = _same_dim(*spec.secrets)
        table = OracleTable(np.frombuffer(spec.answers, dtype=np.uint8), n)
        return {
            "variant": "majority_table",
            "secrets": [str(s) for s in spec.secrets],
            "answers": table.to_hex(),
        }
    if isinstance(spec, Subgroup):
        g = spec.group
        return {"variant": "subgroup", "n": g.n, "basis": [str(BitVec(b, g.n)) for b in g.basis]}
    if isinstance(spec, RawTable):
        table = OracleTable(np.frombuffer(spec.answers, dtype=np.uint8), spec.n)
        return {"variant": "raw", "n": spec.n, "answers": table.to_hex()}
    raise TypeError(f"unknown adversary spec {type(spec).__name__}")
