from __future__ import annotations

import math

import numpy as np
import pytest
from scipy import integrate, stats

from logipareto.distributions import Beta, Exponential, Logistic, Normal, ParetoII, Uniform01
from logipareto.errors import DomainError, StructureError
from logipareto.expressions import (
    Leaf,
    Negate,
    Power,
    Product,
    Scale,
    Sum,
    difference,
    expr_cdf,
    expr_quantile,
    expr_sample,
    expr_support,
    is_simple,
    quotient,
)
from logipareto.ks import ks_2samp_stat, mc_bound
from logipareto.order_statistics import OrderStatSpec
from logipareto.quadrature import QuadSettings


def os_leaf(base, k, n, tag):
    return Leaf(OrderStatSpec(base, k, n), tag)


class TestExamples:
    def test_logistic_leaf_median(self):
        assert expr_cdf(Leaf(Logistic(), "x"), 0.0) == pytest.approx(0.5, abs=1e-15)

    def test_gamma_two_closed_form(self):
        e = Sum(Leaf(Exponential(), "a"), Leaf(Exponential(), "b"))
        assert expr_cdf(e, 1.0) == pytest.approx(1 - 2 * math.exp(-1), abs=1e-9)

    def test_gamma_two_on_grid(self):
        e = Leaf(Exponential(), "a") + Leaf(Exponential(), "b")
        x = np.linspace(0.0, 12.0, 41)
        np.testing.assert_allclose(expr_cdf(e, x), stats.gamma(2).cdf(x), atol=2e-9)

    def test_negated_exponential_at_zero(self):
        assert expr_cdf(Scale(Leaf(Exponential(), "x"), -1.0), 0.0) == 1.0

    def test_negate_node(self):
        e = Negate(Leaf(Exponential(), "x"))
        assert expr_cdf(e, -1.0) == pytest.approx(math.exp(-1), abs=1e-15)


class TestAnalyticTransforms:
    def test_scale(self):
        e = Scale(Leaf(Logistic(), "x"), 3.0)
        x = np.linspace(-10, 10, 9)
        np.testing.assert_allclose(expr_cdf(e, x), stats.logistic.cdf(x / 3.0), atol=1e-15)

    def test_power_of_uniform(self):
        e = Power(Leaf(Uniform01(), "u"), 0.5)
        x = np.linspace(0.05, 0.95, 7)
        np.testing.assert_allclose(expr_cdf(e, x), x**2, atol=1e-14)

    def test_inverse_power(self):
        # 1/U has survival 1/y on y >= 1
        e = Power(Leaf(Uniform01(), "u"), -1.0)
        y = np.array([1.5, 2.0, 10.0])
        np.testing.assert_allclose(expr_cdf(e, y), 1 - 1 / y, atol=1e-14)

    def test_mapped_leaf_is_simple(self):
        assert is_simple(Scale(Power(Leaf(Exponential(), "x"), 2.0), -1.5))
        assert not is_simple(Leaf(Exponential(), "a") + Leaf(Exponential(), "b"))

    def test_support_propagates(self):
        e = Scale(Leaf(Uniform01(), "u"), -2.0)
        assert expr_support(e) == (-2.0, 0.0)


class TestConvolutionOracles:
    def test_logistic_plus_exponential_vs_scipy(self):
        base = Logistic()
        e = Sum(os_leaf(base, 1, 3, "x"), Scale(Leaf(Exponential(), "xi"), 0.5))

        def oracle(y):
            f = lambda t: stats.expon.pdf(t, scale=0.5) * (1 - stats.logistic.sf(y - t) ** 3)
            return integrate.quad(f, 0, np.inf, epsabs=1e-13, epsrel=1e-12)[0]

        for y in (-3.0, -0.5, 0.0, 1.2, 4.0):
            assert expr_cdf(e, y) == pytest.approx(oracle(y), abs=1e-9)

    def test_product_of_uniforms(self):
        # P(UV <= t) = t (1 - log t)
        e = Product(Leaf(Uniform01(), "u"), Leaf(Uniform01(), "v"))
        t = np.array([0.01, 0.2, 0.5, 0.9])
        np.testing.assert_allclose(expr_cdf(e, t), t * (1 - np.log(t)), atol=1e-9)

    def test_quotient_pareto_over_uniform_root(self):
        # Y[1:2] / sqrt(U) with Y ~ ParetoII(1, 1): compare against scipy quad
        base = ParetoII(1.0, 1.0)
        e = quotient(os_leaf(base, 1, 2, "y"), Power(Leaf(Uniform01(), "u"), 0.5))

        def oracle(z):
            f = lambda u: 1 - (1 / (1 + z * math.sqrt(u))) ** 2
            return integrate.quad(f, 0, 1, epsabs=1e-13)[0]

        for z in (0.1, 1.0, 7.0):
            assert expr_cdf(e, z) == pytest.approx(oracle(z), abs=1e-9)

    def test_difference_of_exponentials_is_laplace(self):
        e = difference(Leaf(Exponential(), "a"), Leaf(Exponential(), "b"))
        x = np.linspace(-5, 5, 11)
        np.testing.assert_allclose(expr_cdf(e, x), stats.laplace.cdf(x), atol=2e-9)

    def test_nested_sum_chain(self):
        e = Leaf(Exponential(), "a") + Leaf(Exponential(), "b") + Leaf(Exponential(), "c")
        x = np.array([0.5, 2.0, 6.0])
        np.testing.assert_allclose(expr_cdf(e, x), stats.gamma(3).cdf(x), atol=5e-9)

    def test_beta_scaling_of_exponential(self):
        # xi * B with B ~ Beta(1, 1): CDF = 1 - E1-type integral, compare with scipy
        e = Product(Leaf(Exponential(), "x"), Leaf(Beta(2.0, 3.0), "b"))

        def oracle(t):
            f = lambda b: stats.beta(2, 3).pdf(b) * stats.expon.cdf(t / b)
            return integrate.quad(f, 0, 1, epsabs=1e-13)[0]

        for t in (0.05, 0.3, 1.5):
            assert expr_cdf(e, t) == pytest.approx(oracle(t), abs=1e-9)


class TestMonotonicity:
    @pytest.mark.parametrize(
        "expr",
        [
            Sum(Leaf(Logistic(), "x"), Leaf(Exponential(), "e")),
            Product(Leaf(ParetoII(), "y"), Power(Leaf(Uniform01(), "u"), 2.0)),
            difference(Leaf(Normal(), "z"), Leaf(Exponential(), "e")),
        ],
        ids=["logistic+exp", "pareto*u^2", "normal-exp"],
    )
    def test_nondecreasing_within_twice_tol(self, expr):
        quad = QuadSettings()
        x = np.asarray(expr_quantile(expr, np.linspace(1e-4, 1 - 1e-4, 201), quad))
        F = np.asarray(expr_cdf(expr, x, quad))
        assert np.min(np.diff(F)) >= -2 * quad.abs_tol
        assert np.all((F >= -2 * quad.abs_tol) & (F <= 1 + 2 * quad.abs_tol))

    def test_quantile_inverts_cdf(self):
        e = Sum(Leaf(Logistic(), "x"), Leaf(Exponential(), "e"))
        p = np.array([0.01, 0.3, 0.7, 0.99])
        np.testing.assert_allclose(expr_cdf(e, expr_quantile(e, p)), p, atol=1e-9)


class TestStructure:
    def test_power_needs_positive_operand(self):
        with pytest.raises(StructureError):
            Power(Leaf(Logistic(), "x"), 2.0)

    def test_product_needs_positive_operands(self):
        with pytest.raises(StructureError):
            Product(Leaf(Normal(), "x"), Leaf(Uniform01(), "u"))

    def test_shared_tags_rejected(self):
        x = Leaf(Exponential(), "x")
        with pytest.raises(StructureError):
            Sum(x, Scale(x, 2.0))

    def test_depth_limit(self):
        e = Leaf(Exponential(), "x")
        for _ in range(7):
            e = Scale(e, 1.0001)
        assert e.depth == 8
        with pytest.raises(StructureError):
            Scale(e, 2.0)

    @pytest.mark.parametrize("bad", [0.0, math.inf, math.nan])
    def test_bad_scale(self, bad):
        with pytest.raises(StructureError):
            Scale(Leaf(Exponential(), "x"), bad)

    def test_zero_power(self):
        with pytest.raises(StructureError):
            Power(Leaf(Exponential(), "x"), 0.0)

    def test_bad_leaf_law(self):
        with pytest.raises(StructureError):
            Leaf("logistic", "x")


class TestSampling:
    def test_deterministic_per_seed(self):
        e = Sum(os_leaf(Logistic(), 1, 2, "x"), Leaf(Exponential(), "xi"))
        a = expr_sample(e, np.random.default_rng(3), 1000)
        b = expr_sample(e, np.random.default_rng(3), 1000)
        np.testing.assert_array_equal(a, b)

    def test_uniform_leaf(self):
        s = expr_sample(Leaf(Uniform01(), "u"), np.random.default_rng(0), 20000)
        assert stats.kstest(s, "uniform").pvalue > 1e-3

    def test_shifted_minimum_matches_logistic(self):
        rng = np.random.default_rng(2024)
        n = 100_000
        e = Sum(os_leaf(Logistic(), 1, 2, "x"), Leaf(Exponential(), "xi"))
        lhs = expr_sample(e, rng, n)
        ref = Logistic().sample(rng, n)
        assert ks_2samp_stat(lhs, ref) < mc_bound(n, n)

    def test_product_of_uniforms_mean(self):
        n = 100_000
        e = Product(Leaf(Uniform01(), "a"), Leaf(Uniform01(), "b"))
        s = expr_sample(e, np.random.default_rng(11), n)
        sd = math.sqrt(1 / 9 - 1 / 16)
        assert abs(s.mean() - 0.25) < 3 * sd / math.sqrt(n)

    def test_sample_agrees_with_cdf(self):
        e = quotient(os_leaf(ParetoII(), 2, 3, "y"), Power(Leaf(Uniform01(), "u"), 1.0))
        s = expr_sample(e, np.random.default_rng(5), 50_000)
        x = np.quantile(s, [0.1, 0.5, 0.9])
        np.testing.assert_allclose(expr_cdf(e, x), [0.1, 0.5, 0.9], atol=0.01)

    @pytest.mark.parametrize("count", [0, -1, 2.5])
    def test_bad_count(self, count):
        with pytest.raises(DomainError):
            expr_sample(Leaf(Uniform01(), "u"), np.random.default_rng(0), count)
