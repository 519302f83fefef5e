from __future__ import annotations

import math

import numpy as np
import pytest

from logipareto.quadrature import QuadratureError, QuadSettings, integrate


class TestIntegrate:
    def test_polynomial_exact(self):
        val, err = integrate(lambda s: s[None, :] ** np.arange(6)[:, None], 0.0, 1.0)
        np.testing.assert_allclose(val, 1.0 / np.arange(1, 7), atol=1e-15)
        assert np.all(err >= 0)

    def test_batched_scales(self):
        c = np.array([0.5, 1.0, 3.0])
        val, _ = integrate(lambda s: np.exp(-np.outer(c, s)), 0.0, 2.0)
        np.testing.assert_allclose(val, (1 - np.exp(-2 * c)) / c, atol=1e-12)

    def test_endpoint_singularity_within_tolerance(self):
        val, _ = integrate(lambda s: 1.0 / np.sqrt(s), 0.0, 1.0, QuadSettings(abs_tol=1e-9))
        assert val == pytest.approx(2.0, abs=1e-7)

    def test_kink_is_resolved(self):
        val, _ = integrate(lambda s: np.abs(s - 1 / math.pi), 0.0, 1.0, QuadSettings(abs_tol=1e-12))
        a = 1 / math.pi
        assert val == pytest.approx(a * a / 2 + (1 - a) ** 2 / 2, abs=1e-11)

    def test_budget_exhaustion_raises_with_estimate(self):
        with pytest.raises(QuadratureError) as info:
            integrate(lambda s: np.sin(1.0 / s), 0.0, 1.0, QuadSettings(abs_tol=1e-15, max_panels=20))
        assert info.value.estimate is not None

    def test_zero_length(self):
        val, err = integrate(lambda s: s, 1.0, 1.0)
        assert val == 0.0 and err == 0.0
