import math

import mpmath
import numpy as np
import pytest

from alloc_design.models import (
    RNG_ALGORITHM,
    SuccessPair,
    make_model,
    make_rng,
    parse_model,
    sample,
    sample_means,
    tilted,
)
from alloc_design.numerics import DomainError

GRID = [
    ("bernoulli", {"p": 0.05}),
    ("bernoulli", {"p": 0.5}),
    ("bernoulli", {"p": 0.93}),
    ("poisson", {"lam": 0.3}),
    ("poisson", {"lam": 2.0}),
    ("poisson", {"lam": 40.0}),
    ("gamma", {"shape": 0.5, "scale": 0.5}),
    ("gamma", {"shape": 3.0, "scale": 2.0}),
    ("gamma", {"shape": 0.5, "rate": 0.9}),
    ("normal", {"mu": -1.0, "var": 0.25}),
    ("normal", {"mu": 3.0, "var": 9.0}),
]


@pytest.mark.parametrize("kind,params", GRID)
class TestDerivativeInvariants:
    def test_zero(self, kind, params):
        assert make_model(kind, **params).log_mgf(0.0) == 0.0

    def test_first_derivative_is_mean(self, kind, params):
        m = make_model(kind, **params)
        h = 1e-6
        d1 = (m.log_mgf(h) - m.log_mgf(-h)) / (2 * h)
        assert abs(d1 - m.mean) <= 1e-5

    def test_second_derivative_is_variance(self, kind, params):
        # a 1e-6 step loses too many digits for a second difference; 1e-4 keeps
        # the truncation error well below the tolerance
        m = make_model(kind, **params)
        h = 1e-4
        d2 = (m.log_mgf(h) - 2 * m.log_mgf(0.0) + m.log_mgf(-h)) / (h * h)
        assert abs(d2 - m.variance) <= 1e-4 * max(1.0, m.variance)

    def test_finite_exactly_on_domain(self, kind, params):
        m = make_model(kind, **params)
        dom = m.mgf_domain
        for t in (-50.0, -3.0, -0.1, 0.1, 1.0, 3.0):
            assert math.isfinite(m.log_mgf(t)) == (t in dom)
        if math.isfinite(dom.hi):
            assert m.log_mgf(dom.hi) == math.inf
            assert m.log_mgf(dom.hi + 1.0) == math.inf


class TestFamilies:
    def test_bernoulli_half(self):
        m = make_model("bernoulli", p=0.5)
        assert (m.mean, m.variance) == (0.5, 0.25)

    def test_poisson_two(self):
        m = make_model("poisson", lam=2)
        assert (m.mean, m.variance) == (2.0, 2.0)

    def test_gamma_scale(self):
        m = make_model("gamma", shape=0.5, scale=0.5)
        assert m.mean == pytest.approx(0.25)
        assert m.variance == pytest.approx(0.125)
        assert m.mgf_domain.hi == pytest.approx(2.0)

    def test_gamma_rate_is_reciprocal_scale(self):
        assert make_model("gamma", shape=2, rate=4).params["scale"] == 0.25

    @pytest.mark.parametrize("t", [-30.0, -1.0, 0.7, 5.0, 40.0])
    def test_log_mgf_formulas_against_mpmath(self, t):
        with mpmath.workdps(40):
            assert make_model("bernoulli", p=0.3).log_mgf(t) == pytest.approx(
                float(mpmath.log(0.7 + 0.3 * mpmath.exp(t))), rel=1e-14)
            if t < 10:
                assert make_model("poisson", lam=2.5).log_mgf(t) == pytest.approx(
                    float(2.5 * (mpmath.exp(t) - 1)), rel=1e-14)
            if t < 1.0:
                assert make_model("gamma", shape=1.5, scale=0.8).log_mgf(t) == pytest.approx(
                    float(-1.5 * mpmath.log(1 - 0.8 * mpmath.mpf(t))), rel=1e-14)
        assert make_model("normal", mu=1.0, var=2.0).log_mgf(t) == pytest.approx(t + t * t, rel=1e-15)

    def test_bernoulli_no_overflow(self):
        assert make_model("bernoulli", p=0.4).log_mgf(1e4) == pytest.approx(1e4 + math.log(0.4))

    def test_poisson_overflow_is_inf(self):
        assert make_model("poisson", lam=1.0).log_mgf(1e4) == math.inf

    def test_gamma_diverges_monotonically_at_pole(self):
        m = make_model("gamma", shape=0.5, scale=0.5)
        pole = m.mgf_domain.hi
        values = [m.log_mgf(pole * (1 - 10.0**-j)) for j in range(1, 15)]
        assert all(b > a for a, b in zip(values, values[1:]))
        assert values[-1] > 15.0

    def test_models_are_immutable(self):
        m = make_model("poisson", lam=2)
        with pytest.raises(TypeError):
            m.params["lam"] = 3.0
        with pytest.raises(AttributeError):
            m.kind = "normal"

    @pytest.mark.parametrize("kind,params", [
        ("bernoulli", {"p": 0.0}), ("bernoulli", {"p": 1.0}), ("poisson", {"lam": 0.0}),
        ("gamma", {"shape": -1, "scale": 1}), ("gamma", {"shape": 1, "scale": 0}),
        ("gamma", {"shape": 1, "scale": 1, "rate": 1}), ("normal", {"mu": 0, "var": 0}),
        ("normal", {"mu": 0}), ("weibull", {"k": 1}), ("poisson", {"mu": 1}),
    ])
    def test_parameter_domain_errors(self, kind, params):
        with pytest.raises(DomainError):
            make_model(kind, **params)


class TestParse:
    @pytest.mark.parametrize("text,kind,mean", [
        ("bernoulli:p=0.5", "bernoulli", 0.5),
        ("poisson:lambda=2", "poisson", 2.0),
        ("gamma:shape=0.5,scale=0.5", "gamma", 0.25),
        ("normal:mu=0,var=1", "normal", 0.0),
        ("poisson:3", "poisson", 3.0),
        ("Gamma:0.5,0.6", "gamma", 0.3),
    ])
    def test_documented_strings(self, text, kind, mean):
        m = parse_model(text)
        assert m.kind == kind
        assert m.mean == pytest.approx(mean)

    def test_positional_gamma_rate(self):
        assert parse_model("gamma:0.5,0.5", gamma_param="rate").mean == pytest.approx(1.0)

    def test_explicit_key_overrides_switch(self):
        assert parse_model("gamma:shape=0.5,scale=0.5", gamma_param="rate").mean == pytest.approx(0.25)

    @pytest.mark.parametrize("text", ["cauchy:1", "poisson:x", "poisson:1,2", "bernoulli:p=2"])
    def test_bad_strings(self, text):
        with pytest.raises(DomainError):
            parse_model(text)


class TestSuccessPair:
    def test_validation(self):
        with pytest.raises(DomainError):
            SuccessPair(0.0, 0.5)
        with pytest.raises(DomainError):
            SuccessPair(0.5, 1.0)

    def test_swap_and_reflect(self):
        p = SuccessPair(0.2, 0.7)
        assert p.swapped() == SuccessPair(0.7, 0.2)
        assert p.reflected() == SuccessPair(1 - 0.7, 1 - 0.2)


class TestSampling:
    def test_algorithm_is_named(self):
        assert type(make_rng(1).bit_generator).__name__ == "Philox"
        assert RNG_ALGORITHM.startswith("Philox")

    def test_bernoulli_mean(self):
        x = sample(make_model("bernoulli", p=0.5), make_rng(11), 10**6)
        assert abs(x.mean() - 0.5) <= 0.002

    def test_poisson_variance(self):
        x = sample(make_model("poisson", lam=3), make_rng(12), 10**6)
        assert abs(x.var(ddof=1) - 3.0) <= 0.02

    @pytest.mark.parametrize("text", ["bernoulli:p=0.3", "poisson:2", "gamma:0.5,0.5", "normal:1,2"])
    def test_determinism(self, text):
        m = parse_model(text)
        a = sample(m, make_rng(99), 1000)
        b = sample(m, make_rng(99), 1000)
        assert np.array_equal(a, b)

    def test_streams_differ(self):
        m = make_model("normal", mu=0, var=1)
        a = sample(m, make_rng(5, 0), 1000)
        b = sample(m, make_rng(5, 1), 1000)
        assert not np.array_equal(a, b)
        assert abs(np.corrcoef(a, b)[0, 1]) < 0.15

    @pytest.mark.parametrize("text", ["bernoulli:p=0.3", "poisson:2", "gamma:0.5,0.5", "normal:1,2"])
    def test_sample_means_moments(self, text):
        m = parse_model(text)
        means = sample_means(m, make_rng(3), 20, 200_000)
        assert abs(means.mean() - m.mean) <= 5 * m.sd / math.sqrt(20 * 200_000)
        assert means.var() == pytest.approx(m.variance / 20, rel=0.02)

    def test_bad_m(self):
        with pytest.raises(DomainError):
            sample(make_model("poisson", lam=1), make_rng(0), 0)


class TestTilting:
    @pytest.mark.parametrize("text,s", [
        ("bernoulli:p=0.3", 1.2), ("poisson:2", -0.7), ("gamma:0.5,0.5", 1.5), ("normal:1,2", 0.4),
    ])
    def test_tilted_cumulants(self, text, s):
        # the tilted log-MGF is K(s + u) - K(s)
        m = parse_model(text)
        t = tilted(m, s)
        for u in (-0.3, 0.1, 0.25):
            assert t.log_mgf(u) == pytest.approx(m.log_mgf(s + u) - m.log_mgf(s), rel=1e-12, abs=1e-14)

    def test_outside_domain(self):
        with pytest.raises(DomainError):
            tilted(make_model("gamma", shape=1, scale=0.5), 2.0)
