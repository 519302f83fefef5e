"""Kolmogorov-Smirnov distances between samples and CDFs."""

from __future__ import annotations

import math

import numpy as np

__all__ = ["ks_2samp_stat", "ks_1samp_stat", "mc_bound"]


def ks_2samp_stat(a, b) -> float:
    """``sup_x |F_a(x) - F_b(x)|`` for the two empirical CDFs (ties handled)."""
    a = np.sort(np.asarray(a, dtype=float).ravel())
    b = np.sort(np.asarray(b, dtype=float).ravel())
    if a.size == 0 or b.size == 0:
        raise ValueError("both samples must be non-empty")
    pooled = np.concatenate([a, b])
    fa = np.searchsorted(a, pooled, side="right") / a.size
    fb = np.searchsorted(b, pooled, side="right") / b.size
    return float(np.max(np.abs(fa - fb)))


def ks_1samp_stat(sample, cdf) -> float:
    """``sup_x |F_n(x) - F(x)|`` against a continuous ``cdf`` callable."""
    x = np.sort(np.asarray(sample, dtype=float).ravel())
    n = x.size
    if n == 0:
        raise ValueError("sample must be non-empty")
    F = np.asarray(cdf(x), dtype=float)
    i = np.arange(1, n + 1)
    return float(max(np.max(i / n - F), np.max(F - (i - 1) / n)))


def mc_bound(n1: int, n2: int, c: float = 1.95) -> float:
    """Acceptance threshold ``c sqrt(1/n1 + 1/n2)`` for a two-sample distance."""
    return c * math.sqrt(1.0 / n1 + 1.0 / n2)
