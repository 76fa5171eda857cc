import math
from types import SimpleNamespace

import numpy as np
import pytest

from collnorm import (
    SampleOracle,
    Scaling,
    estimate_t_directly,
    exact_l2_sq,
    exact_l3_cube,
    exact_t,
    find_advice_medium,
    find_advice_small,
    parse_dist_spec,
    zoo,
)
from collnorm import advice, norms

# factor from the examples plus ceilings; the inner accuracy targets (1/1000,
# delta/40) otherwise demand 10^9+ draws per run
PROFILE = Scaling(1e-6, max_samples=2000, max_collisions=100)


def _exact_stubs(monkeypatch, d):
    val = lambda x: SimpleNamespace(value=x)
    monkeypatch.setattr(norms, "estimate_l2_moments", lambda *a, **k: val(exact_l2_sq(d)))
    monkeypatch.setattr(norms, "estimate_l3", lambda *a, **k: val(exact_l3_cube(d)))
    monkeypatch.setattr(norms, "estimate_l3_amplified", lambda *a, **k: val(exact_l3_cube(d)))
    monkeypatch.setattr(norms, "estimate_l3_magnitude", lambda *a, **k: val(exact_l3_cube(d)))


def _trials(fn, spec, n, seed=0):
    d = parse_dist_spec(spec)
    o = SampleOracle(d, seed)
    return np.array([fn(o).r for _ in range(n)]), d


class TestDirect:
    @pytest.mark.parametrize("n", [4, 64, 1000])
    def test_uniform_with_exact_stubs(self, monkeypatch, n):
        d = zoo("uniform", n=n)
        _exact_stubs(monkeypatch, d)
        rep = estimate_t_directly(SampleOracle(d, 0), 0.01, 0.25)
        assert rep.info["y1"] == pytest.approx(0.0, abs=1e-12)
        assert rep.info["y2"] == pytest.approx(4.5)
        assert rep.r == pytest.approx(0.02, abs=1e-12)

    def test_point_with_exact_stubs(self, monkeypatch):
        d = zoo("point")
        _exact_stubs(monkeypatch, d)
        assert estimate_t_directly(SampleOracle(d, 0), 0.05, 0.25).r <= 0.1 + 1e-12

    def test_min_gate(self, monkeypatch):
        d = zoo("two_level", n=10, heavy=1, heavy_mass=0.6)
        _exact_stubs(monkeypatch, d)
        rep = estimate_t_directly(SampleOracle(d, 0), 0.5, 0.25)
        assert rep.r == min(2 * (rep.info["y1"] + 0.5), rep.info["y2"])

    def test_three_quarter_split(self):
        v, d = _trials(lambda o: estimate_t_directly(o, 0.05, 0.25, PROFILE), "two_level:n=2,heavy=1,heavy_mass=0.75", 500)
        t = exact_t(d)
        assert t == pytest.approx(0.12)
        assert np.mean(v >= t) >= 0.75
        assert v.mean() <= 15 * 0.12 + 3 * 0.05 + 3 * v.std(ddof=1) / math.sqrt(v.size)
        assert np.all(v >= 0)


class TestSmall:
    @pytest.mark.parametrize("n", [4, 100])
    def test_uniform_with_exact_stubs(self, monkeypatch, n):
        d = zoo("uniform", n=n)
        _exact_stubs(monkeypatch, d)
        rep = find_advice_small(SampleOracle(d, 0), 0.1, 0.25)
        a = rep.info["a"]
        assert rep.r == pytest.approx(1.005 * (1 + a ** 3 * n * n), rel=1e-12)
        assert rep.r >= 1 > exact_t(d)

    def test_a_formula(self, monkeypatch):
        d = zoo("uniform", n=25)
        _exact_stubs(monkeypatch, d)
        rep = find_advice_small(SampleOracle(d, 0), 0.1, 0.25)
        assert rep.info["a"] == pytest.approx((0.45 * 0.04 ** 1.5) ** (1 / 3))
        assert (0.45 * 0.008) ** (1 / 3) == pytest.approx(0.1533, abs=1e-4)

    def test_dominates_two_level(self):
        v, d = _trials(lambda o: find_advice_small(o, 0.1, 0.25, PROFILE), "two_level:n=64,heavy=1,heavy_mass=0.3", 500)
        assert np.mean(v >= exact_t(d)) >= 0.75
        assert np.all(v >= 0)


class TestMedium:
    def test_delta_formula(self, monkeypatch):
        seen = {}
        monkeypatch.setattr(norms, "estimate_l2_moments", lambda *a, **k: SimpleNamespace(value=0.04))
        monkeypatch.setattr(advice, "estimate_t_directly",
                            lambda o, delta, eta, scale: seen.setdefault("d", delta) and SimpleNamespace(r=0.0))
        find_advice_medium(SampleOracle(zoo("point"), 0), 0.01, 0.25)
        assert seen["d"] == pytest.approx(0.05)

    def test_delta_clamp(self, monkeypatch):
        monkeypatch.setattr(norms, "estimate_l2_moments", lambda *a, **k: SimpleNamespace(value=0.04))
        monkeypatch.setattr(advice, "estimate_t_directly", lambda o, delta, eta, scale: SimpleNamespace(r=delta))
        rep = find_advice_medium(SampleOracle(zoo("point"), 0), 0.5, 0.25)
        assert rep.info["delta"] == 1.0

    def test_uniform256(self):
        # mean advice relative to eps/||mu||_2 = 0.8; observed about 2, bound C = 4
        v, _ = _trials(lambda o: find_advice_medium(o, 0.05, 0.25, PROFILE), "uniform:n=256", 500)
        assert np.all(v >= 0)
        assert v.mean() <= 4 * 0.8
