import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from collnorm import (
    ExplicitDistribution,
    InvalidDistribution,
    SampleOracle,
    BudgetExceeded,
    chebyshev_tail,
    collision_variance_bound,
    delta_vector,
    exact_l2_sq,
    exact_l3_cube,
    exact_t,
    parse_dist_spec,
    read_csv,
    tv_distance,
    write_csv,
    zoo,
)
from collnorm.oracle import AliasTable, count_fixed, derive_seed, make_rng
from collnorm.zoo import SpecError, zoo_names
from oracles import l2_rational, l3_rational, t_rational
from zoo_sets import FINITE

D = ExplicitDistribution.from_masses


class TestConstruction:
    def test_rejects_bad_sum(self):
        with pytest.raises(InvalidDistribution):
            D([0.5, 0.4])

    def test_rejects_negative(self):
        with pytest.raises(InvalidDistribution):
            D([1.2, -0.2])

    def test_rejects_duplicate_labels(self):
        with pytest.raises(InvalidDistribution):
            D([0.5, 0.5], labels=[3, 3])

    def test_zero_mass_entries_allowed(self):
        d = D([0.5, 0.5, 0.0])
        assert d.n == 3
        assert list(d.support()) == [0, 1]


class TestExactFunctionals:
    def test_l2_examples(self):
        assert exact_l2_sq(zoo("uniform", n=4)) == 0.25
        assert exact_l2_sq(zoo("point")) == 1.0
        assert exact_l2_sq(D([0.4, 0.2, 0.2, 0.2])) == pytest.approx(float(l2_rational(["0.4", "0.2", "0.2", "0.2"])), abs=1e-15)
        assert float(l2_rational(["0.4", "0.2", "0.2", "0.2"])) == 0.28

    def test_l3_examples(self):
        assert exact_l3_cube(zoo("uniform", n=10)) == pytest.approx(1 / 100, abs=1e-15)
        assert exact_l3_cube(zoo("point")) == 1.0
        assert l3_rational([Fraction(3, 4), Fraction(1, 4)]) == Fraction(28, 64)
        assert exact_l3_cube(D([0.75, 0.25])) == 0.4375

    def test_t_examples(self):
        assert exact_t(zoo("uniform", n=37)) == pytest.approx(0.0, abs=1e-12)
        assert exact_t(zoo("point", n=3)) == 0.0
        assert t_rational([Fraction(3, 4), Fraction(1, 4)]) == Fraction(12, 100)
        assert exact_t(D([0.75, 0.25])) == pytest.approx(0.12, abs=1e-15)

    def test_delta_examples(self):
        assert np.allclose(delta_vector(zoo("uniform", n=9)), 0.0)
        assert np.allclose(delta_vector(D([0.4, 0.2, 0.2, 0.2])), [0.6, -0.2, -0.2, -0.2], atol=1e-15)

    def test_tv_examples(self):
        a = D([0.5, 0.5])
        assert tv_distance(a, a) == 0.0
        assert tv_distance(D([1.0], [1]), D([1.0], [2])) == 1.0
        assert tv_distance(a, D([0.6, 0.4])) == pytest.approx(0.1, abs=1e-15)

    def test_variance_bound_examples(self):
        assert collision_variance_bound(7, 1.0, 1.0) == math.comb(7, 2)
        assert collision_variance_bound(2, 0.5, 0.25) == 0.5
        with pytest.raises(ValueError):
            collision_variance_bound(1, 0.5, 0.25)

    @pytest.mark.parametrize("spec", FINITE)
    def test_cauchy_schwarz(self, spec):
        d = parse_dist_spec(spec)
        assert exact_t(d) >= 0
        assert exact_l3_cube(d) >= exact_l2_sq(d) ** 2 - 1e-12

    @pytest.mark.parametrize("spec", FINITE)
    def test_delta_identities(self, spec):
        d = parse_dist_spec(spec)
        n = d.n
        delta = delta_vector(d)
        s2 = math.fsum((delta ** 2).tolist())
        s3 = math.fsum((delta ** 3).tolist())
        assert abs(math.fsum(delta.tolist())) <= 1e-9
        assert n * exact_l2_sq(d) - 1 == pytest.approx(s2 / n, abs=1e-9)
        assert n * n * exact_l3_cube(d) == pytest.approx(1 + 3 * s2 / n + s3 / n, abs=1e-9)
        t_delta = (1 + 3 * s2 / n + s3 / n) / (1 + s2 / n) ** 2 - 1
        assert exact_t(d) == pytest.approx(t_delta, abs=1e-9)

    @pytest.mark.parametrize("spec", FINITE)
    def test_chebyshev_inequality(self, spec):
        d = parse_dist_spec(spec)
        t = exact_t(d)
        for alpha in np.arange(0.1, 3.01, 0.1):
            assert alpha ** 2 * chebyshev_tail(d, alpha) <= t + 1e-12

    @given(st.lists(st.floats(0.0, 1.0), min_size=1, max_size=40).filter(lambda w: sum(w) > 1e-3))
    def test_functionals_match_rationals(self, w):
        d = ExplicitDistribution.from_weights(w)
        ms = [Fraction(x) for x in d.masses.tolist()]
        assert exact_l2_sq(d) == pytest.approx(float(l2_rational(ms)), rel=1e-12, abs=1e-15)
        assert exact_l3_cube(d) == pytest.approx(float(l3_rational(ms)), rel=1e-12, abs=1e-15)


class TestZoo:
    def test_examples(self):
        d = zoo("uniform", n=100)
        assert d.n == 100 and np.all(d.masses == 0.01)
        d = zoo("two_level", n=100, heavy=1, heavy_mass=0.5)
        assert d.masses[0] == 0.5 and np.allclose(d.masses[1:], 0.5 / 99)
        d = zoo("paired_flat", j=8)
        odd, even = d.masses[0::2], d.masses[1::2]
        assert d.n == 16 and np.all(even <= odd) and np.all(odd <= math.sqrt(2) * even)

    def test_paired_constraint(self):
        d = zoo("paired", j=50, seed=7)
        odd, even = d.masses[0::2], d.masses[1::2]
        assert np.all(even <= odd) and np.all(odd <= math.sqrt(2) * even)

    def test_unknown(self):
        with pytest.raises(InvalidDistribution):
            zoo("nope", n=3)
        with pytest.raises(InvalidDistribution):
            zoo("uniform", n=3, bogus=1)

    def test_enough_families(self):
        assert len(zoo_names()) >= 10

    def test_deterministic(self):
        assert np.array_equal(zoo("paired", j=5, seed=2).masses, zoo("paired", j=5, seed=2).masses)


class TestSpecParsing:
    def test_basic(self):
        d = parse_dist_spec("uniform:n=4")
        assert d.n == 4 and np.all(d.masses == 0.25)

    def test_csv_roundtrip(self, tmp_path):
        d = zoo("zipf", n=13, s=1.3)
        p = tmp_path / "d.csv"
        write_csv(d, p)
        e = parse_dist_spec(f"@{p}")
        assert np.array_equal(d.labels, e.labels) and np.array_equal(d.masses, e.masses)
        assert np.array_equal(read_csv(p).masses, d.masses)

    @pytest.mark.parametrize("bad", ["uniform:n=0", "zzz:n=3", "uniform:n", "uniform:n=x", ":n=3", "@/no/such.csv"])
    def test_errors(self, bad):
        with pytest.raises(InvalidDistribution):
            parse_dist_spec(bad)

    def test_error_position(self):
        with pytest.raises(SpecError) as info:
            parse_dist_spec("zipf:n=5,s=abc")
        assert info.value.pos == 11


class TestOracle:
    def test_same_seed_same_stream(self):
        d = zoo("zipf", n=50)
        a, b = SampleOracle(d, 11), SampleOracle(d, 11)
        assert np.array_equal(a.draw(5000), b.draw(5000))

    def test_different_seeds_differ(self):
        d = zoo("uniform", n=1000)
        differ = sum(
            not np.array_equal(SampleOracle(d, s).draw(1000), SampleOracle(d, s + 1).draw(1000)) for s in range(50)
        )
        assert differ == 50

    @given(st.lists(st.integers(1, 9000), min_size=1, max_size=8))
    def test_chunking_does_not_change_stream(self, sizes):
        d = zoo("geometric", n=20, ratio=0.8)
        ref = SampleOracle(d, 5).draw(sum(sizes))
        o = SampleOracle(d, 5)
        parts = []
        for n in sizes:
            o.peek(n + 17)
            parts.append(o.draw(n))
        assert np.array_equal(np.concatenate(parts), ref)
        assert o.drawn == sum(sizes)

    def test_drawn_counts_each_sample(self):
        o = SampleOracle(zoo("uniform", n=3), 0)
        o.draw_one()
        o.peek(100)
        assert o.drawn == 1
        o.consume(10)
        assert o.drawn == 11

    def test_cap_raises(self):
        o = SampleOracle(zoo("uniform", n=3), 0, cap=10)
        o.draw(10)
        with pytest.raises(BudgetExceeded):
            o.draw(1)
        o = SampleOracle(zoo("uniform", n=3), 0, cap=10)
        with pytest.raises(BudgetExceeded):
            count_fixed(o, 11)
        assert o.drawn == 0

    def test_zero_mass_never_emitted(self):
        d = D([0.5, 0.0, 0.5], labels=[10, 20, 30])
        assert 20 not in set(SampleOracle(d, 1).draw(20000).tolist())

    def test_alias_frequencies(self):
        from scipy.stats import chisquare

        m = np.array([0.5, 0.25, 0.125, 0.0625, 0.0625])
        tab = AliasTable(m)
        x = tab.sample(make_rng(3), 200_000)
        obs = np.bincount(x, minlength=5)
        assert chisquare(obs, m * x.size).pvalue > 1e-3

    def test_derive_seed(self):
        assert derive_seed(1, 2) == derive_seed(1, 2)
        assert derive_seed(1, 2) != derive_seed(1, 3) != derive_seed(2, 2)
        assert 0 <= derive_seed(0, 0) < 2 ** 64

    def test_mean_pair_collisions(self):
        d = zoo("uniform", n=4)
        o = SampleOracle(d, 2024)
        runs = 10_000
        s2 = np.array([count_fixed(o, 20).s2 for _ in range(runs)], dtype=float)
        target = math.comb(20, 2) * 0.25
        assert abs(s2.mean() - target) <= 3 * s2.std(ddof=1) / math.sqrt(runs)

    def test_variance_bound_holds_empirically(self):
        d = zoo("uniform", n=4)
        o = SampleOracle(d, 99)
        s2 = np.array([count_fixed(o, 10).s2 for _ in range(100_000)], dtype=float)
        assert s2.var(ddof=1) <= collision_variance_bound(10, 0.25, 1 / 16)

    def test_variance_two_points(self):
        o = SampleOracle(zoo("uniform", n=2), 4)
        s2 = np.array([count_fixed(o, 2).s2 for _ in range(20_000)], dtype=float)
        assert abs(s2.var() - 0.25) < 0.01
        assert 0.25 <= collision_variance_bound(2, 0.5, 0.25)
