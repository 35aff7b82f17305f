import itertools
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from guessing_secrets import adversary as adv
from guessing_secrets.engine import (
    AmplitudeSpectrum,
    amplitudes,
    fwht,
    run,
    sample,
    success_probability,
    wht_reference,
)
from guessing_secrets.gf2 import BitVec, Subspace, dot


def bv(s):
    return BitVec.parse(s)


def coefficient_by_counting(table, j):
    """#{q : j.q = f(q)} - #{q : j.q != f(q)}, one question at a time."""
    n = table.n
    bits = table.bits()
    jv = BitVec(j, n)
    agree = sum(1 for q in range(1 << n) if dot(jv, BitVec(q, n)) == bits[q])
    return agree - ((1 << n) - agree)


def random_pair(rng, n):
    a, b = rng.choice(1 << n, 2, replace=False)
    return BitVec(int(a), n), BitVec(int(b), n)


class TestTransform:
    def test_reference_all_ones(self):
        assert list(wht_reference([1] * 8)) == [8, 0, 0, 0, 0, 0, 0, 0]

    def test_reference_character(self):
        x1 = bv("0110")
        signs = 1 - 2 * adv.compile_spec(adv.FullStar(x1)).bits().astype(np.int64)
        out = wht_reference(signs)
        assert out[x1.bits] == 16
        assert np.count_nonzero(out) == 1

    @pytest.mark.parametrize("length", [0, 3, 6, 12])
    def test_power_of_two_required(self, length):
        with pytest.raises(ValueError):
            wht_reference([1] * length)
        with pytest.raises(ValueError):
            fwht(np.ones(length, dtype=np.int64))

    def test_fwht_needs_int64(self):
        with pytest.raises(TypeError):
            fwht(np.ones(4))

    @settings(max_examples=60, deadline=None)
    @given(st.integers(0, 10).flatmap(lambda n: st.lists(st.sampled_from([-1, 1]), min_size=1 << n, max_size=1 << n)))
    def test_fast_matches_reference(self, signs):
        signs = np.array(signs, dtype=np.int64)
        assert np.array_equal(fwht(signs.copy()), wht_reference(signs))

    def test_fwht_is_in_place(self):
        values = np.array([1, -1, -1, 1], dtype=np.int64)
        out = fwht(values)
        assert out is values
        assert list(values) == [0, 0, 0, 4]


class TestAmplitudes:
    def test_full_star(self):
        x1 = bv("1011")
        spec = amplitudes(adv.compile_spec(adv.FullStar(x1)))
        assert spec.coefficient(x1) == 1
        assert list(spec.support()) == [x1.bits]

    def test_triangle(self):
        x1, x2, xs = bv("0011"), bv("0101"), bv("1000")
        spec = amplitudes(adv.compile_spec(adv.Triangle(x1, x2, xs)))
        support = {x1.bits, x2.bits, xs.bits, x1.bits ^ x2.bits ^ xs.bits}
        assert set(spec.support()) == support
        assert all(abs(spec.coefficient(j)) == Fraction(1, 2) for j in support)

    def test_minority(self):
        secrets = (bv("1000"), bv("0100"), bv("0010"))
        spec = amplitudes(adv.compile_spec(adv.Minority(*secrets)))
        assert [spec.coefficient(x) for x in secrets] == [0, 0, 0]

    def test_biased(self):
        x1, x2 = bv("0101"), bv("0011")
        spec = amplitudes(adv.compile_spec(adv.Biased(x1, x2, Fraction(3, 4))))
        assert spec.coefficient(x1) == Fraction(3, 4)
        assert spec.coefficient(x2) == Fraction(1, 4)
        assert spec.probability(x1) == Fraction(9, 16)

    @pytest.mark.parametrize("n", [1, 2, 3])
    def test_matches_counting_definition_on_every_table(self, n):
        for answers in itertools.product((0, 1), repeat=1 << n):
            table = adv.OracleTable(np.array(answers, dtype=np.uint8), n)
            spec = amplitudes(table)
            assert [int(c) for c in spec.coefficients] == [
                coefficient_by_counting(table, j) for j in range(1 << n)
            ]

    def test_one_call_per_run(self):
        table = adv.compile_spec(adv.FullStar(bv("101")))
        for calls in range(1, 4):
            amplitudes(table)
            assert table.call_counter == calls
        run(table, np.random.default_rng(0), count=5)
        assert table.call_counter == 8


def strategy_tables(n, rng):
    x1, x2 = random_pair(rng, n)
    x3 = BitVec(int(rng.integers(0, 1 << n)), n)
    while x3 in (x1, x2):
        x3 = BitVec(int(rng.integers(0, 1 << n)), n)
    specs = [adv.FullStar(x1), adv.Triangle(x1, x2, x3), adv.Minority(x1, x2, x3)]
    if n >= 3:
        specs.append(adv.Biased(x1, x2, Fraction(3, 4)))
        specs.append(adv.Biased(x1, x2, Fraction(1, 4), tie_rule="random", seed=n))
    specs.append(adv.Subgroup(Subspace.span([x1, x2])))
    return [(s, adv.compile_spec(s)) for s in specs]


class TestInvariants:
    @pytest.mark.parametrize("n", range(2, 17))
    def test_parseval_and_parity(self, n):
        rng = np.random.default_rng(n)
        N = 1 << n
        for _, table in strategy_tables(n, rng):
            c = amplitudes(table).coefficients
            assert int((c * c).sum()) == N * N
            assert int(np.abs(c).max()) <= N
            assert ((c - N) % 2 == 0).all()

    @pytest.mark.parametrize("n", range(2, 17))
    def test_pair_coefficients_sum_to_n_for_strategies(self, n):
        rng = np.random.default_rng(100 + n)
        for spec, table in strategy_tables(n, rng):
            if isinstance(spec, (adv.FullStar, adv.Minority, adv.Subgroup)):
                continue
            c = amplitudes(table).coefficients
            assert int(c[spec.x1.bits] + c[spec.x2.bits]) == 1 << n

    @pytest.mark.parametrize("n", [2, 3, 4])
    def test_pair_coefficients_sum_to_n_exhaustively(self, n):
        for a, b in itertools.combinations(range(1 << n), 2):
            secrets = [BitVec(a, n), BitVec(b, n)]
            for table in adv.enumerate_valid_tables(secrets, 1):
                c = amplitudes(table).coefficients
                assert int(c[a] + c[b]) == 1 << n

    def test_success_at_least_half_exhaustive_n3(self):
        worst = Fraction(1)
        for a, b in itertools.combinations(range(8), 2):
            secrets = [BitVec(a, 3), BitVec(b, 3)]
            for table in adv.enumerate_valid_tables(secrets, 1):
                worst = min(worst, success_probability(amplitudes(table), secrets))
        assert worst == Fraction(1, 2)

    def test_success_at_least_half_random_n10(self):
        rng = np.random.default_rng(10)
        n = 10
        for _ in range(10_000):
            secrets = list(random_pair(rng, n))
            table = adv.random_majority_table(secrets, rng, min_agree=1)
            assert success_probability(amplitudes(table), secrets) >= Fraction(1, 2)

    def test_dominance_exhaustive_n3(self):
        for a, b in itertools.combinations(range(8), 2):
            for table in adv.enumerate_valid_tables([BitVec(a, 3), BitVec(b, 3)], 1):
                c = amplitudes(table).coefficients
                others = np.delete(np.abs(c), [a, b])
                assert c[a] >= others.max() and c[b] >= others.max()

    def test_dominance_random_n10(self):
        rng = np.random.default_rng(11)
        for _ in range(2_000):
            x1, x2 = random_pair(rng, 10)
            table = adv.random_majority_table([x1, x2], rng, min_agree=1)
            c = amplitudes(table).coefficients
            others = np.delete(np.abs(c), [x1.bits, x2.bits])
            assert min(c[x1.bits], c[x2.bits]) >= others.max()


class TestSuccessProbability:
    def test_full_star(self):
        x1, x2 = bv("011"), bv("110")
        spec = amplitudes(adv.compile_spec(adv.FullStar(x1)))
        assert success_probability(spec, [x1, x2]) == 1

    def test_triangle_pair_gets_half(self):
        for trip in itertools.permutations(range(8), 3):
            x1, x2, xs = (BitVec(b, 3) for b in trip)
            spec = amplitudes(adv.compile_spec(adv.Triangle(x1, x2, xs)))
            assert success_probability(spec, [x1, x2]) == Fraction(1, 2)

    def test_subgroup_three(self):
        spec = adv.Subgroup(Subspace.span([bv("0110"), bv("0011")]))
        secrets = adv.spec_secrets(spec)
        assert len(secrets) == 3
        assert success_probability(amplitudes(adv.compile_spec(spec)), secrets) == Fraction(3, 4)

    def test_duplicates_counted_once(self):
        x1 = bv("01")
        spec = amplitudes(adv.compile_spec(adv.FullStar(x1)))
        assert success_probability(spec, [x1, x1]) == 1


class TestSampling:
    def test_point_mass(self):
        x1 = bv("10110")
        spec = amplitudes(adv.compile_spec(adv.FullStar(x1)))
        for seed in (0, 1, 2**63 - 1):
            assert sample(spec, seed, 100) == [x1] * 100

    def test_triangle_frequencies_within_three_sigma(self):
        x1, x2, xs = bv("0011"), bv("0101"), bv("1000")
        spec = amplitudes(adv.compile_spec(adv.Triangle(x1, x2, xs)))
        draws = [v.bits for v in sample(spec, 12345, 100_000)]
        support = {x1.bits, x2.bits, xs.bits, x1.bits ^ x2.bits ^ xs.bits}
        assert set(draws) == support
        sigma = (100_000 * 0.25 * 0.75) ** 0.5
        for j in support:
            assert abs(draws.count(j) - 25_000) <= 3 * sigma

    def test_reproducible(self):
        spec = amplitudes(adv.compile_spec(adv.Biased(bv("0101"), bv("0011"), Fraction(3, 4))))
        assert sample(spec, 99, 50) == sample(spec, 99, 50)
        assert sample(spec, 99, 50) != sample(spec, 98, 50)

    def test_never_emits_zero_probability(self):
        spec = amplitudes(adv.compile_spec(adv.Biased(bv("010101"), bv("001111"), Fraction(3, 4))))
        support = set(int(j) for j in spec.support())
        assert {v.bits for v in sample(spec, 4, 20_000)} <= support

    def test_total_variation_shrinks(self):
        spec = amplitudes(adv.compile_spec(adv.Biased(bv("010101"), bv("001111"), Fraction(3, 4))))
        exact = spec.squared() / float(spec.denominator ** 2)

        def tv(count):
            draws = np.array([v.bits for v in sample(spec, 7, count)])
            emp = np.bincount(draws, minlength=exact.size) / count
            return 0.5 * np.abs(emp - exact).sum()

        assert tv(100) > tv(10_000) > tv(200_000)


class TestSpectrumExport:
    def test_json_round_trip(self):
        spec = amplitudes(adv.compile_spec(adv.Triangle(bv("0011"), bv("0101"), bv("1000"))))
        data = spec.to_dict()
        assert data["denominator"] == 16
        assert len(data["coefficients"]) == 4
        assert AmplitudeSpectrum.from_dict(data) == spec

    def test_top_outcomes(self):
        x1, x2 = bv("0101"), bv("0011")
        spec = amplitudes(adv.compile_spec(adv.Biased(x1, x2, Fraction(3, 4))))
        top = spec.top(2)
        assert top[0] == (x1.bits, 12, Fraction(9, 16))
        assert top[1][2] == Fraction(1, 16)
