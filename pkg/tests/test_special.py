from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import special as sc

from logipareto.errors import ParameterError
from logipareto.special import beta_pdf, beta_ppf, binom, reg_inc_beta

shape = st.floats(0.05, 40.0)
unit = st.floats(0.0, 1.0)


class TestRegIncBeta:
    @settings(max_examples=300, deadline=None)
    @given(shape, shape, unit)
    def test_matches_scipy_continued_fraction(self, a, b, u):
        assert reg_inc_beta(a, b, u) == pytest.approx(sc.betainc(a, b, u), abs=1e-13)

    @pytest.mark.parametrize("n", range(1, 13))
    def test_integer_series_matches_scipy(self, n):
        u = np.linspace(0, 1, 201)
        for k in range(1, n + 1):
            got = reg_inc_beta(k, n - k + 1, u)
            np.testing.assert_allclose(got, sc.betainc(k, n - k + 1, u), atol=1e-14)

    @settings(max_examples=100, deadline=None)
    @given(shape, shape, st.integers(0, 2**30))
    def test_reflection(self, a, b, i):
        u = i / 2**30  # dyadic, so 1 - u is exact
        assert reg_inc_beta(a, b, u) + reg_inc_beta(b, a, 1 - u) == pytest.approx(1.0, abs=1e-13)

    def test_endpoints_and_scalar_return(self):
        assert reg_inc_beta(2.5, 3.0, 0.0) == 0.0
        assert reg_inc_beta(2.5, 3.0, 1.0) == 1.0
        assert isinstance(reg_inc_beta(2, 3, 0.3), float)

    @pytest.mark.parametrize("a,b", [(0, 1), (1, -2), (np.nan, 1)])
    def test_rejects_bad_shapes(self, a, b):
        with pytest.raises(ParameterError):
            reg_inc_beta(a, b, 0.5)


class TestBetaPdfPpf:
    @pytest.mark.parametrize("a,b", [(1, 1), (1, 4), (3, 1), (0.5, 0.5), (2.5, 7.0)])
    def test_pdf_matches_scipy(self, a, b):
        u = np.linspace(0.001, 0.999, 57)
        np.testing.assert_allclose(beta_pdf(a, b, u), sc.gamma(a + b) / (sc.gamma(a) * sc.gamma(b))
                                   * u ** (a - 1) * (1 - u) ** (b - 1), rtol=1e-12)

    def test_pdf_endpoint_limits(self):
        assert beta_pdf(1, 3, 0.0) == pytest.approx(3.0)
        assert beta_pdf(3, 1, 1.0) == pytest.approx(3.0)
        assert beta_pdf(2, 2, 0.0) == 0.0

    @settings(max_examples=200, deadline=None)
    @given(shape, shape, st.floats(1e-10, 1 - 1e-10))
    def test_ppf_inverts_cdf(self, a, b, p):
        x = beta_ppf(a, b, p)
        # p lies between the CDF at the neighbouring floats (x may round to an endpoint)
        below = reg_inc_beta(a, b, np.nextafter(x, 0.0))
        above = reg_inc_beta(a, b, np.nextafter(x, 1.0))
        assert below * (1 - 1e-9) - 1e-13 <= p <= above * (1 + 1e-9) + 1e-13

    def test_ppf_closed_ends(self):
        np.testing.assert_array_equal(beta_ppf(2, 3, np.array([0.0, 1.0])), [0.0, 1.0])


def test_binom():
    assert binom(5, 2) == 10
    assert binom(4, 0) == 1
