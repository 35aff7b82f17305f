"""Executable exit criteria. Each ``criterion_*`` returns a :class:`Report`."""

from __future__ import annotations

import itertools
import math
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import adversary as adv
from .census import p_k, subgroup_success, symmetry_counts
from .engine import amplitudes, fwht, success_probability, wht_reference
from .gf2 import BitVec, Subspace, is_independent
from .harness import Report, exhaustive_verify
from .recovery import build_graph, reduce_graph, run_experiment, stopping_rule

SEED = 1729


def _rng(tag: int, seed: Optional[int] = None) -> np.random.Generator:
    return np.random.default_rng([SEED if seed is None else seed, tag])


def _distinct(rng: np.random.Generator, n: int, k: int) -> List[BitVec]:
    picks = rng.choice(1 << n, size=k, replace=False)
    return [BitVec(int(b), n) for b in picks]


def _independent(rng: np.random.Generator, n: int, k: int) -> List[BitVec]:
    while True:
        vs = _distinct(rng, n, k)
        if is_independent(vs):
            return vs


def _parseval_ok(spectrum) -> bool:
    return int(spectrum.squared().sum()) == spectrum.denominator ** 2


def criterion_1(seed: Optional[int] = None) -> Report:
    report = Report("1. full star: P(X1) = 1 exactly, n = 2..12")
    rng = _rng(1, seed)
    bad = 0
    cases = 0
    for n in range(2, 13):
        picks = {0, (1 << n) - 1} | {int(b) for b in rng.integers(0, 1 << n, size=8)}
        for b in sorted(picks):
            x1 = BitVec(b, n)
            spec = amplitudes(adv.compile_spec(adv.FullStar(x1)))
            cases += 1
            if spec.probability(x1) != 1 or len(spec.support()) != 1:
                bad += 1
    report.add(f"tables with P(X1) != 1 (of {cases})", 0, bad)
    return report


def criterion_2(seed: Optional[int] = None) -> Report:
    report = Report("2. triangle: four outcomes at exactly 1/4 each, n <= 12, 100 triples per n")
    rng = _rng(2, seed)
    bad = 0
    for n in range(2, 13):
        for _ in range(100):
            x1, x2, xs = _distinct(rng, n, 3)
            spec = amplitudes(adv.compile_spec(adv.Triangle(x1, x2, xs)))
            want = {x1.bits, x2.bits, xs.bits, x1.bits ^ x2.bits ^ xs.bits}
            got = {int(j) for j in spec.support()}
            if got != want or any(spec.probability(j) != Fraction(1, 4) for j in want):
                bad += 1
    report.add("triples failing (of 1100)", 0, bad)
    return report


def criterion_3(seed: Optional[int] = None) -> Report:
    report = Report("3. 3/4 bias: P(X1) = 9/16, P(X2) = 1/16, others <= 1/16, n = 3..12")
    rng = _rng(3, seed)
    bad = 0
    worst = Fraction(0)
    for n in range(3, 13):
        for _ in range(20):
            x1, x2 = _distinct(rng, n, 2)
            spec = amplitudes(adv.compile_spec(adv.Biased(x1, x2, Fraction(3, 4))))
            others = spec.squared().copy()
            others[[x1.bits, x2.bits]] = 0
            other = Fraction(int(others.max()), spec.denominator ** 2)
            worst = max(worst, other)
            if (
                spec.probability(x1) != Fraction(9, 16)
                or spec.probability(x2) != Fraction(1, 16)
                or other > Fraction(1, 16)
            ):
                bad += 1
    report.add("pairs failing (of 200)", 0, bad)
    report.add("largest non-secret probability", "<= 1/16", worst, worst <= Fraction(1, 16))
    return report


def criterion_4(seed: Optional[int] = None) -> Report:
    inner = exhaustive_verify(3, 2)
    report = Report("4. exhaustive k=2 at n=3: success >= 1/2 and C_X1 + C_X2 = N on all tables")
    report.checks.extend(inner.checks)
    report.add("tables enumerated", 28 * 16, inner.data["tables"])
    report.data["minimum"] = inner.data["minima"]["success"]
    return report


def criterion_5(seed: Optional[int] = None) -> Report:
    report = Report("5. minority rule: C_Xi = 0 for all three secrets, independent triples, n <= 10")
    rng = _rng(5, seed)
    bad = 0
    cases = 0

    def check(secrets: Sequence[BitVec]) -> None:
        nonlocal bad, cases
        cases += 1
        spec = amplitudes(adv.compile_spec(adv.Minority(*secrets)))
        if any(spec.coefficients[x.bits] for x in secrets):
            bad += 1

    for n in range(3, 6):
        for combo in itertools.combinations(range(1 << n), 3):
            secrets = [BitVec(b, n) for b in combo]
            if is_independent(secrets):
                check(secrets)
    for n in range(6, 11):
        for _ in range(200):
            check(_independent(rng, n, 3))
    report.add(f"triples with a nonzero C_Xi (of {cases})", 0, bad)
    return report


def criterion_6(seed: Optional[int] = None) -> Report:
    report = Report("6. p_k: p_2 = 1/2, p_3 = 3/4, parity-wise monotone, within 1e-3 of 2/pi by k = 40")
    report.add("p_2", Fraction(1, 2), p_k(2))
    report.add("p_3", Fraction(3, 4), p_k(3))
    even = [p_k(k) for k in range(2, 41, 2)]
    odd = [p_k(k) for k in range(3, 40, 2)]
    report.add("p_2m strictly increasing (k <= 40)", True, all(a < b for a, b in zip(even, even[1:])))
    report.add("p_2m+1 strictly decreasing (k <= 40)", True, all(a > b for a, b in zip(odd, odd[1:])))
    two_pi = 2 / math.pi
    gap_even = abs(float(p_k(40)) - two_pi)
    gap_odd = abs(float(p_k(39)) - two_pi)
    report.add("|p_40 - 2/pi|", "< 1e-3", f"{gap_even:.4e}", gap_even < 1e-3)
    report.add("|p_39 - 2/pi|", "< 1e-3", f"{gap_odd:.4e}", gap_odd < 1e-3)
    return report


def criterion_7(seed: Optional[int] = None) -> Report:
    report = Report("7. symmetry: every pattern hit exactly 2^(n-k) times, n = 8, k <= 4")
    rng = _rng(7, seed)
    n = 8
    bad = 0
    for k in range(1, 5):
        for _ in range(100):
            counts = symmetry_counts(_independent(rng, n, k))
            if len(counts) != 1 << k or set(counts.values()) != {1 << (n - k)}:
                bad += 1
    report.add("draws failing (of 400)", 0, bad)
    return report


def criterion_8(seed: Optional[int] = None) -> Report:
    report = Report("8. subgroup adversary: success = 4k/(k+1)^2 for k = 3 and k = 7")
    rng = _rng(8, seed)
    for k, dim, n_lo in ((3, 2, 2), (7, 3, 3)):
        bad = 0
        for n in range(n_lo, 13):
            for _ in range(5):
                g = Subspace(tuple(v.bits for v in _independent(rng, n, dim)), n)
                spec = adv.Subgroup(g)
                table = adv.compile_spec(spec)
                got = success_probability(amplitudes(table), adv.spec_secrets(spec))
                if got != subgroup_success(k) or not adv.promise_holds(
                    table, adv.spec_secrets(spec), adv.promise_threshold(spec)
                ):
                    bad += 1
        report.add(f"k={k} closed form", Fraction(4 * k, (k + 1) ** 2), subgroup_success(k))
        report.add(f"k={k} simulated mismatches", 0, bad)
    return report


def criterion_9(seed: Optional[int] = None, trials: int = 1000) -> Report:
    report = Report("9. random majority tables: success >= p_k (independent), >= 1/k (odd k, any)")
    rng = _rng(9, seed)
    for k in (3, 4, 5):
        bad = 0
        worst = Fraction(1)
        for t in range(trials):
            n = 6 + t % 3
            secrets = _independent(rng, n, k)
            table = adv.random_majority_table(secrets, rng)
            prob = success_probability(amplitudes(table), secrets)
            worst = min(worst, prob)
            bad += prob < p_k(k)
        report.add(f"k={k} independent: violations of p_k = {p_k(k)}", 0, bad)
        report.data[f"min_independent_k{k}"] = str(worst)
    for k in (3, 5, 7):
        bad = 0
        dependent = 0
        worst = Fraction(1)
        for t in range(trials):
            n = 3 + t % 3
            secrets = _distinct(rng, n, k)
            dependent += not is_independent(secrets)
            table = adv.random_majority_table(secrets, rng)
            prob = success_probability(amplitudes(table), secrets)
            worst = min(worst, prob)
            bad += prob < Fraction(1, k)
        report.add(f"k={k} any secrets: violations of 1/{k}", 0, bad)
        report.data[f"min_any_k{k}"] = str(worst)
        report.data[f"dependent_sets_k{k}"] = dependent
    return report


def criterion_10(seed: Optional[int] = None, experiments: int = 1000, m: int = 200) -> Report:
    report = Report(f"10. finishing procedure at n=8, epsilon=0.01, m={m}, {experiments} experiments")
    base = SEED if seed is None else seed
    rng = _rng(10, seed)
    n = 8
    rule = stopping_rule("0.01", m)
    report.data["rule"] = rule.to_dict()

    wrong = 0
    for e in range(experiments):
        x1 = BitVec(int(rng.integers(0, 1 << n)), n)
        rec = run_experiment(adv.compile_spec(adv.FullStar(x1)), rule, base, [x1], experiment=e)
        c = rec.classification
        wrong += not (c.case == 2 and c.center == x1.bits)
    report.add("full star: experiments without case 2 at X1", 0, wrong)

    contained = 0
    over_budget = 0
    lost = 0
    unfinished = 0
    max_queries = 0
    for e in range(experiments):
        x1, x2, xs = _distinct(rng, n, 3)
        table = adv.compile_spec(adv.Triangle(x1, x2, xs))
        rec = run_experiment(table, rule, base + 1, [x1, x2], experiment=e)
        c = rec.classification
        if c.case != 1:
            continue
        graph = build_graph(c.candidates, n)
        had_pair = graph.contains(x1.bits, x2.bits)
        contained += had_pair
        before = table.call_counter
        final, log = reduce_graph(graph, table)
        queries = table.call_counter - before
        max_queries = max(max_queries, queries)
        over_budget += queries > 3 or queries != len(log)
        unfinished += final.has_disjoint_edges
        lost += had_pair and not final.contains(x1.bits, x2.bits)
    rate = Fraction(contained, experiments)
    report.add("triangle: case 1 containing the true pair", ">= 99%", f"{float(rate):.1%}", rate >= Fraction(99, 100))
    report.add("triangle: reductions over 3 queries", 0, over_budget)
    report.add("triangle: reductions losing the true pair", 0, lost)
    report.add("triangle: reductions ending with disjoint edges", 0, unfinished)
    report.data["max_queries"] = max_queries
    return report


def criterion_11(seed: Optional[int] = None, trials: int = 1000) -> Report:
    report = Report("11. engine: fast WHT = reference, Parseval exact, one oracle call per run")
    rng = _rng(11, seed)
    mismatched = 0
    for t in range(trials):
        n = 1 + t % 12
        signs = rng.choice(np.array([-1, 1], dtype=np.int64), size=1 << n)
        if not np.array_equal(fwht(signs.copy()), wht_reference(signs)):
            mismatched += 1
    report.add(f"random inputs where fast != reference (of {trials})", 0, mismatched)

    strategies = []
    for n in (3, 4, 5, 8, 12):
        x1, x2, x3 = _distinct(rng, n, 3)
        strategies += [
            adv.FullStar(x1),
            adv.Triangle(x1, x2, x3),
            adv.Biased(x1, x2, Fraction(3, 4)),
            adv.Biased(x1, x2, Fraction(1, 2), tie_rule="random", seed=int(rng.integers(1 << 31))),
            adv.Minority(x1, x2, x3),
            adv.Subgroup(Subspace.span([x1, x2])),
        ]
    parseval_bad = calls_bad = structured_bad = 0
    for spec in strategies:
        table = adv.compile_spec(spec)
        spectrum = amplitudes(table)
        parseval_bad += not _parseval_ok(spectrum)
        calls_bad += table.call_counter != 1
        amplitudes(table)
        calls_bad += table.call_counter != 2
        if table.n <= 8:
            signs = 1 - 2 * table.bits().astype(np.int64)
            structured_bad += not np.array_equal(wht_reference(signs), spectrum.coefficients)
    report.add(f"compiled tables failing Parseval (of {len(strategies)})", 0, parseval_bad)
    report.add("tables with wrong oracle-call count", 0, calls_bad)
    report.add("structured tables where fast != reference", 0, structured_bad)
    return report


CRITERIA: Dict[int, Callable[..., Report]] = {
    1: criterion_1,
    2: criterion_2,
    3: criterion_3,
    4: criterion_4,
    5: criterion_5,
    6: criterion_6,
    7: criterion_7,
    8: criterion_8,
    9: criterion_9,
    10: criterion_10,
    11: criterion_11,
}


def run_all(seed: Optional[int] = None) -> List[Tuple[int, Report]]:
    return [(i, fn(seed)) for i, fn in CRITERIA.items()]
