import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from collnorm import (
    ConditionalOracle,
    IndicatorOracle,
    RejectionCrash,
    SampleOracle,
    amplify_median,
    conditional_draw,
    estimate_indicator_additive,
    zoo,
)
from collnorm.dist import ExplicitDistribution
from collnorm.primitives import CRASH, amplification_count, lower_median, member_of, not_member_of
from oracles import amplification_copies


class TestAmplify:
    def test_single_run_at_one_third(self):
        calls = []
        assert amplify_median(lambda: calls.append(1) or 4.0, 1 / 3) == 4.0
        assert len(calls) == 1

    def test_copy_count(self):
        calls = []
        amplify_median(lambda: calls.append(1) or 0.0, 0.01)
        assert len(calls) == 83 == amplification_copies(0.01)

    @given(st.floats(1e-9, 0.5))
    def test_count_matches_formula(self, eta):
        assert amplification_count(eta) == amplification_copies(eta)

    def test_constant(self):
        for eta in (0.3, 0.1, 1e-4):
            assert amplify_median(lambda: 7.0, eta) == 7.0

    @given(st.lists(st.floats(-1e6, 1e6), min_size=1, max_size=50))
    def test_lower_median(self, v):
        m = lower_median(v)
        assert sum(x <= m for x in v) >= math.ceil(len(v) / 2)
        assert sum(x >= m for x in v) >= len(v) // 2 + 1

    @pytest.mark.parametrize("k", [1, 3, 5, 7, 9])
    def test_median_inflation_few_copies(self, k):
        # Pareto(1.5) on [1, inf): mean 3, infinite variance
        rng = np.random.default_rng(k)
        copies = rng.pareto(1.5, size=(20_000, k)) + 1.0
        med = np.array([lower_median(row.tolist()) for row in copies])
        assert med.mean() <= 9 * 3.0

    @pytest.mark.parametrize("eta", [0.3, 0.1, 0.01])
    def test_median_inflation_amplified(self, eta):
        rng = np.random.default_rng(int(eta * 1000))
        out = np.array([amplify_median(lambda: rng.pareto(1.5) + 1.0, eta) for _ in range(2000)])
        assert out.mean() <= 12 * 3.0


def _ind(d, labels, seed):
    return IndicatorOracle(SampleOracle(d, seed), member_of(labels))


class TestIndicator:
    def test_always_true(self):
        d = zoo("uniform", n=3)
        rep = estimate_indicator_additive(_ind(d, [0, 1, 2], 1), 0.1, 0.1)
        assert rep.value == 1.0

    def test_always_false(self):
        d = zoo("uniform", n=3)
        ind = _ind(d, [], 1)
        rep = estimate_indicator_additive(ind, 0.1, 0.1)
        assert rep.value == 0.0
        assert rep.info["m2"] == math.ceil(6 * math.log(100) / 0.1)

    def test_consumes_m1_plus_m2(self):
        d = zoo("uniform", n=10)
        ind = _ind(d, [0, 1, 2], 4)
        rep = estimate_indicator_additive(ind, 0.05, 0.1)
        assert rep.samples == ind.drawn == rep.info["m1"] + rep.info["m2"]
        assert rep.info["m1"] == math.ceil(12 * math.log(100) / 0.05)
        assert rep.info["m2"] == math.ceil(6 * math.log(100) * (rep.info["s1"] / rep.info["m1"] + 0.05) / 0.05 ** 2)

    def test_single_call(self):
        d = zoo("uniform", n=2)
        ind = _ind(d, [0], 8)
        vals = [ind() for _ in range(10)]
        assert ind.drawn == 10 and all(isinstance(v, bool) for v in vals)


class TestConditional:
    def test_whole_support_never_crashes(self):
        d = zoo("zipf", n=20)
        base = SampleOracle(d, 3)
        ref = SampleOracle(d, 3).draw(2000)
        c = ConditionalOracle(base, member_of(d.labels.tolist()), 1 / 3)
        out = c.draw(2000)
        assert np.array_equal(out, ref)
        assert base.drawn == 2000 and c.drawn == 2000

    def test_budget_formula(self):
        d = zoo("uniform", n=2)
        c = ConditionalOracle(SampleOracle(d, 0), member_of([0]), 1 / 3)
        assert c.slack == 14
        assert c.budget(1) == 4 * (1 + 14)

    def test_empty_set_crashes_after_budget(self):
        d = zoo("uniform", n=2)
        base = SampleOracle(d, 0)
        c = ConditionalOracle(base, member_of([]), 0.1)
        assert conditional_draw(c) is CRASH
        assert base.drawn == c.budget(1)
        with pytest.raises(RejectionCrash):
            c.draw(1)

    def test_outputs_are_members_and_order_preserved(self):
        d = zoo("uniform", n=10)
        keep = [1, 3, 5]
        ref = SampleOracle(d, 9).draw(5000)
        expect = ref[np.isin(ref, keep)]
        c = ConditionalOracle(SampleOracle(d, 9), member_of(keep), 0.1)
        got = np.concatenate([c.draw(n) for n in (1, 7, 100, 3)])
        assert np.array_equal(got, expect[: got.size])

    def test_base_draws_stop_at_acceptance(self):
        d = zoo("uniform", n=4)
        base = SampleOracle(d, 12)
        ref = SampleOracle(d, 12).draw(100)
        c = ConditionalOracle(base, member_of([2]), 0.1)
        c.draw(1)
        assert base.drawn == int(np.flatnonzero(ref == 2)[0]) + 1

    def test_frequencies_match_conditional(self):
        from scipy.stats import chisquare

        d = ExplicitDistribution.from_masses([0.3, 0.2, 0.15, 0.1, 0.05, 0.2])
        keep = [0, 1, 2, 3, 4]
        c = ConditionalOracle(SampleOracle(d, 77), member_of(keep), 0.1)
        x = c.draw(100_000)
        obs = np.bincount(x, minlength=5)[:5]
        expect = d.masses[:5] / d.masses[:5].sum() * x.size
        assert chisquare(obs, expect).pvalue > 1e-3

    def test_stays_crashed(self):
        d = zoo("uniform", n=100)
        c = ConditionalOracle(SampleOracle(d, 1), member_of([0]), 1 / 3)
        crashed = False
        for _ in range(200):
            if conditional_draw(c) is CRASH:
                crashed = True
                break
        assert crashed
        assert conditional_draw(c) is CRASH

    def test_not_member(self):
        pred = not_member_of([1, 2])
        assert list(pred(np.array([0, 1, 2, 3]))) == [True, False, False, True]
