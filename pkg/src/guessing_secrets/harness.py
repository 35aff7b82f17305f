"""Batch drivers: reproduce the worked examples, brute-force certify the bounds,
and run experiments described by a JSON config."""

from __future__ import annotations

import itertools
import json
import math
import os
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

import jsonschema
import numpy as np

from . import adversary as adv
from .census import bounds_csv, bounds_rows, p_k, subgroup_success
from .engine import amplitudes, success_probability
from .gf2 import BitVec, Subspace, is_independent
from .recovery import default_rule, run_experiment, stopping_rule

SEED_ENV = "GUESSING_SECRETS_SEED"
EXHAUSTIVE_MAX_N = {1: 12, 2: 4}
EXHAUSTIVE_MAX_TABLES = 1 << 20


def default_seed() -> int:
    return int(os.environ.get(SEED_ENV, "20240101"))


def _fmt(value: Any) -> str:
    if isinstance(value, (list, tuple)):
        return "[" + ", ".join(_fmt(v) for v in value) + "]"
    return str(value)


@dataclass
class Check:
    name: str
    expected: str
    computed: str
    passed: bool

    def to_dict(self) -> Dict[str, Any]:
        return {"name": self.name, "expected": self.expected, "computed": self.computed, "passed": self.passed}


@dataclass
class Report:
    title: str
    checks: List[Check] = field(default_factory=list)
    data: Dict[str, Any] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def add(self, name: str, expected: Any, computed: Any, passed: Optional[bool] = None) -> Check:
        if passed is None:
            passed = expected == computed
        check = Check(name, _fmt(expected), _fmt(computed), bool(passed))
        self.checks.append(check)
        return check

    def to_dict(self) -> Dict[str, Any]:
        return {
            "title": self.title,
            "passed": self.passed,
            "checks": [c.to_dict() for c in self.checks],
            **self.data,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def to_text(self) -> str:
        lines = [self.title]
        for c in self.checks:
            mark = "PASS" if c.passed else "FAIL"
            lines.append(f"  [{mark}] {c.name}: expected {c.expected}, computed {c.computed}")
        lines.append("all checks passed" if self.passed else "SOME CHECKS FAILED")
        return "\n".join(lines) + "\n"


# -- worked examples ---------------------------------------------------------


def reproduce_examples(n: int = 4) -> Report:
    """Exact values of the worked examples and the closed-form bounds."""
    if n < 3:
        raise ValueError("the examples need n >= 3")
    v = lambda b: BitVec(b, n)  # noqa: E731
    x1, x2, xstar, x3 = v(0b101), v(0b011), v(0b100), v(0b001)
    report = Report(f"worked examples at n={n}")

    table = adv.compile_spec(adv.FullStar(x1))
    spec = amplitudes(table)
    report.add("full star P(X1)", Fraction(1), spec.probability(x1))
    report.add("oracle calls per run", 1, table.call_counter)

    spec = amplitudes(adv.compile_spec(adv.Triangle(x1, x2, xstar)))
    support = sorted(int(j) for j in spec.support())
    expected = sorted({x1.bits, x2.bits, xstar.bits, x1.bits ^ x2.bits ^ xstar.bits})
    report.add("triangle support", expected, support)
    report.add(
        "triangle probabilities",
        [Fraction(1, 4)] * 4,
        [spec.probability(j) for j in expected],
    )

    spec = amplitudes(adv.compile_spec(adv.Biased(x1, x2, Fraction(3, 4))))
    report.add("biased P(X1)", Fraction(9, 16), spec.probability(x1))
    report.add("biased P(X2)", Fraction(1, 16), spec.probability(x2))
    others = spec.squared().copy()
    others[[x1.bits, x2.bits]] = 0
    worst = Fraction(int(others.max()), 1 << (2 * n))
    report.add("biased max other", "<= 1/16", worst, worst <= Fraction(1, 16))

    spec = amplitudes(adv.compile_spec(adv.Minority(x1, x2, x3)))
    report.add("minority C_Xi", [0, 0, 0], [int(spec.coefficients[x.bits]) for x in (x1, x2, x3)])

    report.add("p_2", Fraction(1, 2), p_k(2))
    report.add("p_3", Fraction(3, 4), p_k(3))

    g = Subspace.span([x1, x2])
    sub = adv.Subgroup(g)
    spec = amplitudes(adv.compile_spec(sub))
    report.add("subgroup k=3 success", Fraction(3, 4), success_probability(spec, adv.spec_secrets(sub)))
    report.add("subgroup k=3 closed form", Fraction(3, 4), subgroup_success(3))

    rows = bounds_rows(40)
    report.data["bounds"] = rows
    report.data["two_over_pi"] = f"{2 / math.pi:.12f}"
    even = [p_k(k) for k in range(2, 41, 2)]
    odd = [p_k(k) for k in range(3, 42, 2)]
    report.add("p_2m increasing", True, all(a < b for a, b in zip(even, even[1:])))
    report.add("p_2m+1 decreasing", True, all(a > b for a, b in zip(odd, odd[1:])))
    gaps = [abs(float(p) - 2 / math.pi) for p in even + odd]
    shrinking = all(a > b for a, b in zip(gaps[:19], gaps[1:20])) and all(
        a > b for a, b in zip(gaps[20:], gaps[21:])
    )
    report.add("|p_k - 2/pi| shrinking within each parity", True, shrinking)
    return report


# -- exhaustive certification ------------------------------------------------


def _dominance_ok(coeffs: np.ndarray, secrets: List[int]) -> bool:
    others = np.abs(coeffs).copy()
    others[secrets] = -1
    top = int(others.max())
    return all(int(coeffs[s]) >= top for s in secrets)


def exhaustive_verify(n: int, k: int) -> Report:
    """Every secret set and every valid table at small n.

    k <= 2 uses the guessing-secrets promise (one secret agrees); k >= 3 uses
    the majority promise (at least half agree).
    """
    if k < 1 or n < 1:
        raise ValueError("need n >= 1 and k >= 1")
    if k > (1 << n):
        raise ValueError(f"cannot choose {k} distinct secrets from 2^{n} objects")
    cap = EXHAUSTIVE_MAX_N.get(k, 4)
    if n > cap:
        raise ValueError(f"exhaustive verification is capped at n <= {cap} for k={k}")
    N = 1 << n
    min_agree = 1 if k <= 2 else math.ceil(k / 2)
    report = Report(f"exhaustive verification n={n} k={k} min_agree={min_agree}")

    tables = 0
    violations: Dict[str, int] = {}
    minima: Dict[str, Tuple[Fraction, Any]] = {}

    def note_min(key: str, value: Fraction, witness: Any) -> None:
        if key not in minima or value < minima[key][0]:
            minima[key] = (value, witness)

    def violate(key: str) -> None:
        violations[key] = violations.get(key, 0) + 1

    for combo in itertools.combinations(range(N), k):
        secrets = [BitVec(b, n) for b in combo]
        count = adv.count_valid_tables(secrets, min_agree)
        if count > EXHAUSTIVE_MAX_TABLES:
            raise ValueError(f"{count} tables for secrets {combo} exceeds the cap")
        independent = is_independent(secrets)
        for table in adv.enumerate_valid_tables(secrets, min_agree):
            tables += 1
            spec = amplitudes(table)
            if table.call_counter != 1:
                violate("oracle calls")
            prob = success_probability(spec, secrets)
            witness = {"secrets": [str(s) for s in secrets], "table": table.to_hex()}
            note_min("success", prob, witness)
            if k == 1 and prob != 1:
                violate("k=1 probability 1")
            if k == 2:
                if prob < Fraction(1, 2):
                    violate("success >= 1/2")
                if int(spec.coefficients[list(combo)].sum()) != N:
                    violate("C_X1 + C_X2 = N")
                if not _dominance_ok(spec.coefficients, list(combo)):
                    violate("C_Xi >= |C_X|")
            if k >= 3:
                if independent:
                    note_min("success (independent)", prob, witness)
                    if prob < p_k(k):
                        violate("success >= p_k")
                else:
                    note_min("success (dependent)", prob, witness)
                if k % 2 and prob < Fraction(1, k):
                    violate("success >= 1/k")

    report.data["tables"] = tables
    report.data["minima"] = {
        key: {"value": str(val), "witness": wit} for key, (val, wit) in sorted(minima.items())
    }
    report.add("tables enumerated", "> 0", tables, tables > 0)
    if k == 1:
        report.add("success always 1", 0, violations.get("k=1 probability 1", 0))
    if k == 2:
        for key in ("success >= 1/2", "C_X1 + C_X2 = N", "C_Xi >= |C_X|"):
            report.add(f"violations of {key}", 0, violations.get(key, 0))
        report.add("minimum success", Fraction(1, 2), minima["success"][0])
    if k >= 3:
        if "success (independent)" in minima:
            report.add(
                "min success (independent)",
                f">= {p_k(k)}",
                minima["success (independent)"][0],
                violations.get("success >= p_k", 0) == 0,
            )
        if k % 2:
            report.add(
                "min success (any)", f">= 1/{k}", minima["success"][0], violations.get("success >= 1/k", 0) == 0
            )
    report.add("runs with oracle calls != 1", 0, violations.get("oracle calls", 0))
    return report


# -- config-driven runs ------------------------------------------------------

CONFIG_SCHEMA: Dict[str, Any] = {
    "type": "object",
    "required": ["mode"],
    "properties": {
        "mode": {"enum": ["exact-spectrum", "sample-run", "bounds-table", "exhaustive-verify"]},
        "n": {"type": "integer", "minimum": 1, "maximum": 24},
        "k": {"type": "integer", "minimum": 1, "maximum": 16},
        "adversary": {"type": "object"},
        "epsilon": {"type": ["number", "string"]},
        "m": {"type": "integer", "minimum": 1},
        "seed": {"type": "integer"},
        "experiments": {"type": "integer", "minimum": 1},
        "reduce": {"type": "boolean"},
        "top": {"type": "integer", "minimum": 1},
        "k_max": {"type": "integer", "minimum": 1, "maximum": 200},
        "out": {"type": "string"},
    },
    "allOf": [
        {
            "if": {"properties": {"mode": {"enum": ["exact-spectrum", "sample-run"]}}},
            "then": {"required": ["adversary"]},
        },
        {
            "if": {"properties": {"mode": {"const": "exhaustive-verify"}}},
            "then": {"required": ["n", "k"]},
        },
    ],
}


@dataclass
class ExperimentConfig:
    mode: str
    n: Optional[int] = None
    k: Optional[int] = None
    adversary: Optional[Dict[str, Any]] = None
    epsilon: Any = "0.01"
    m: Optional[int] = None
    seed: int = field(default_factory=default_seed)
    experiments: int = 1
    reduce: bool = False
    top: int = 10
    k_max: int = 40
    out: Optional[str] = None

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "ExperimentConfig":
        jsonschema.validate(data, CONFIG_SCHEMA)
        cfg = cls(**data)
        if cfg.mode == "exhaustive-verify" and cfg.k == 2 and cfg.n > EXHAUSTIVE_MAX_N[2]:
            raise ValueError(f"exhaustive-verify refuses n > {EXHAUSTIVE_MAX_N[2]} for k=2")
        if cfg.adversary is not None:
            spec = adv.spec_from_json(cfg.adversary)
            if cfg.n is not None and adv.spec_dim(spec) != cfg.n:
                raise ValueError(f"adversary has dimension {adv.spec_dim(spec)}, config says n={cfg.n}")
        return cfg

    @classmethod
    def load(cls, path: Path) -> "ExperimentConfig":
        return cls.from_dict(json.loads(Path(path).read_text()))


def spectrum_csv(spec_json: Dict[str, Any], top: int) -> Tuple[str, Dict[str, Any]]:
    spec = adv.spec_from_json(spec_json)
    table = adv.compile_spec(spec)
    spectrum = amplitudes(table)
    n = table.n
    lines = ["index,C_j,probability"]
    for j, c, p in spectrum.top(top):
        lines.append(f"{BitVec(j, n)},{c},{p}")
    payload = spectrum.to_dict()
    payload["oracle_calls"] = table.call_counter
    secrets = adv.spec_secrets(spec)
    if secrets:
        payload["success_probability"] = str(success_probability(spectrum, secrets))
    return "\n".join(lines) + "\n", payload


def sample_experiments(
    spec_json: Dict[str, Any],
    epsilon: Any,
    m: Optional[int],
    seed: int,
    experiments: int = 1,
    reduce: bool = False,
) -> List[Dict[str, Any]]:
    spec = adv.spec_from_json(spec_json)
    rule = stopping_rule(epsilon, m) if m is not None else default_rule(epsilon)
    secrets = adv.spec_secrets(spec)
    records = []
    for e in range(experiments):
        # fresh table per experiment so call counts are per experiment
        table = adv.compile_spec(spec)
        rec = run_experiment(
            table,
            rule,
            seed,
            secrets=secrets,
            experiment=e,
            reduce=reduce,
            adversary=adv.spec_to_json(spec),
        )
        payload = rec.to_dict()
        payload["oracle_calls"] = table.call_counter
        records.append(payload)
    return records


def run_config(cfg: ExperimentConfig) -> Tuple[str, bool]:
    """Execute a config; returns (text output, all checks passed)."""
    if cfg.mode == "exact-spectrum":
        csv_text, _ = spectrum_csv(cfg.adversary, cfg.top)
        return csv_text, True
    if cfg.mode == "sample-run":
        records = sample_experiments(
            cfg.adversary, cfg.epsilon, cfg.m, cfg.seed, cfg.experiments, cfg.reduce
        )
        return json.dumps(records, indent=2, sort_keys=True) + "\n", True
    if cfg.mode == "bounds-table":
        return bounds_csv(cfg.k_max), True
    report = exhaustive_verify(cfg.n, cfg.k)
    return report.to_json(), report.passed

