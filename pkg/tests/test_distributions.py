from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

import logipareto.distributions as D
from logipareto.distributions import (
    Beta,
    Exponential,
    Logistic,
    Normal,
    ParetoII,
    Uniform01,
    from_json,
)
from logipareto.errors import DomainError, ParameterError

# scipy counterparts; ParetoII(lam, power) is a log-logistic with c=power, scale=lam**(-1/power)
CASES = [
    (Uniform01(), stats.uniform()),
    (Exponential(2.5), stats.expon(scale=1 / 2.5)),
    (Logistic(1.5, 0.7), stats.logistic(loc=1.5, scale=0.7)),
    (ParetoII(2.0, 1.0), stats.fisk(c=1.0, scale=0.5)),
    (ParetoII(0.5, 3.0), stats.fisk(c=3.0, scale=0.5 ** (-1 / 3))),
    (Beta(1.0, 4.0), stats.beta(1.0, 4.0)),
    (Beta(2.5, 0.7), stats.beta(2.5, 0.7)),
    (Normal(-1.0, 2.0), stats.norm(-1.0, 2.0)),
]


@pytest.mark.parametrize("dist,ref", CASES, ids=lambda c: getattr(c, "family", ""))
class TestAgainstScipy:
    def test_cdf_sf_pdf(self, dist, ref):
        p = np.linspace(0.001, 0.999, 101)
        x = ref.ppf(p)
        np.testing.assert_allclose(dist.cdf(x), ref.cdf(x), rtol=1e-12, atol=1e-15)
        np.testing.assert_allclose(dist.sf(x), ref.sf(x), rtol=1e-12, atol=1e-15)
        np.testing.assert_allclose(dist.pdf(x), ref.pdf(x), rtol=1e-10)

    def test_quantile(self, dist, ref):
        p = np.linspace(0.001, 0.999, 101)
        np.testing.assert_allclose(dist.quantile(p), ref.ppf(p), rtol=1e-10, atol=1e-14)

    def test_outside_support(self, dist, ref):
        lo, hi = dist.support
        if math.isfinite(lo):
            assert dist.cdf(lo - 1.0) == 0.0 and dist.pdf(lo - 1.0) == 0.0
        if math.isfinite(hi):
            assert dist.cdf(hi + 1.0) == 1.0 and dist.sf(hi + 1.0) == 0.0

    def test_sampling_is_seeded_and_fits(self, dist, ref):
        a = dist.sample(np.random.default_rng(4), 4000)
        b = dist.sample(np.random.default_rng(4), 4000)
        np.testing.assert_array_equal(a, b)
        assert stats.kstest(a, ref.cdf).pvalue > 1e-4


class TestExamples:
    def test_logistic_median(self):
        assert Logistic().cdf(0.0) == 0.5

    def test_pareto_quantile(self):
        assert ParetoII(1.0, 1.0).quantile(0.75) == pytest.approx(3.0)

    def test_pareto_closed_form(self):
        y = np.array([0.1, 1.0, 7.0])
        np.testing.assert_allclose(ParetoII(2.0).cdf(y), 2 * y / (1 + 2 * y), rtol=1e-15)

    def test_functional_aliases(self):
        d = Exponential(1.0)
        assert D.cdf(d, 1.0) == d.cdf(1.0)
        assert D.quantile(d, 0.5) == pytest.approx(math.log(2))


class TestValidation:
    @pytest.mark.parametrize(
        "make",
        [lambda: Exponential(0.0), lambda: Logistic(0, -1), lambda: ParetoII(-1, 1),
         lambda: ParetoII(1, 0), lambda: Beta(0, 1), lambda: Normal(0, 0),
         lambda: Logistic(float("nan")), lambda: Exponential("1")],
    )
    def test_bad_parameters(self, make):
        with pytest.raises(ParameterError):
            make()

    @pytest.mark.parametrize("p", [0.0, 1.0, -0.1, float("nan")])
    def test_quantile_open_interval(self, p):
        with pytest.raises(DomainError):
            Logistic().quantile(p)

    def test_pdf_at_finite_endpoint(self):
        with pytest.raises(DomainError):
            Exponential().pdf(0.0)

    def test_sample_count(self):
        with pytest.raises(DomainError):
            Uniform01().sample(np.random.default_rng(0), 0)

    def test_json_round_trip(self):
        for dist, _ in CASES:
            assert from_json(dist.to_json()) == dist
        with pytest.raises(ParameterError):
            from_json({"family": "Cauchy", "params": {}})


@settings(max_examples=100, deadline=None)
@given(st.floats(-50, 50), st.floats(0.1, 10), st.floats(-30, 30))
def test_logistic_cdf_plus_sf_is_one(mu, scale, x):
    d = Logistic(mu, scale)
    assert d.cdf(x) + d.sf(x) == pytest.approx(1.0, abs=1e-15)


@settings(max_examples=100, deadline=None)
@given(st.floats(0.05, 20), st.floats(0.2, 5), st.floats(1e-6, 1 - 1e-6))
def test_pareto_quantile_round_trip(lam, power, p):
    d = ParetoII(lam, power)
    assert d.cdf(d.quantile(p)) == pytest.approx(p, rel=1e-11)
