"""Distribution of the k-th smallest of n i.i.d. draws.

The CDF of ``X_{k,n}`` is the Beta(k, n-k+1) CDF composed with the base CDF,
``F_{k,n}(x) = I_{F(x)}(k, n-k+1)``.  Sampling runs the same composition
backwards (beta quantile, then base quantile), so a variate costs O(1)
regardless of ``n``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .distributions import Distribution, Exponential, from_json, uniform_variates
from .errors import DomainError, ParameterError
from .special import MAX_N, beta_pdf, beta_ppf, reg_inc_beta

__all__ = [
    "OrderStatSpec",
    "reg_inc_beta",
    "order_stat_cdf",
    "order_stat_sf",
    "order_stat_pdf",
    "order_stat_quantile",
    "order_stat_sample",
    "exp_order_laplace",
]


def _check_kn(k, n) -> tuple[int, int]:
    if isinstance(k, bool) or isinstance(n, bool):
        raise ParameterError("k and n must be integers")
    if int(k) != k or int(n) != n:
        raise ParameterError(f"k and n must be integers, got k={k}, n={n}")
    k, n = int(k), int(n)
    if not 1 <= k <= n:
        raise ParameterError(f"order statistic needs 1 <= k <= n, got k={k}, n={n}")
    if n > MAX_N:
        raise ParameterError(f"sample size n={n} exceeds the supported maximum {MAX_N}")
    return k, n


@dataclass(frozen=True)
class OrderStatSpec:
    """The k-th smallest of ``n`` i.i.d. draws from ``base``."""

    base: Distribution
    k: int
    n: int

    def __post_init__(self):
        if not isinstance(self.base, Distribution):
            raise ParameterError(f"base must be a Distribution, got {self.base!r}")
        k, n = _check_kn(self.k, self.n)
        object.__setattr__(self, "k", k)
        object.__setattr__(self, "n", n)

    @property
    def beta_params(self) -> tuple[int, int]:
        return self.k, self.n - self.k + 1

    def to_json(self) -> dict:
        return {"base": self.base.to_json(), "k": self.k, "n": self.n}

    @classmethod
    def from_json(cls, obj: dict) -> "OrderStatSpec":
        return cls(from_json(obj["base"]), obj["k"], obj["n"])

    def label(self) -> str:
        return f"{self.base.label()}[{self.k}:{self.n}]"


def _cdf_sf(spec: OrderStatSpec, x) -> tuple[np.ndarray, np.ndarray]:
    a, b = spec.beta_params
    F = np.asarray(spec.base.cdf(x), dtype=float)
    S = np.asarray(spec.base.sf(x), dtype=float)
    low = F <= 0.5
    cdf = np.empty(F.shape)
    sf = np.empty(F.shape)
    # evaluate each side from whichever of F, 1-F is small
    if low.any():
        cdf[low] = reg_inc_beta(a, b, F[low])
        sf[low] = 1.0 - cdf[low]
    high = ~low
    if high.any():
        sf[high] = reg_inc_beta(b, a, S[high])
        cdf[high] = 1.0 - sf[high]
    return cdf, sf


def order_stat_cdf(spec: OrderStatSpec, x):
    """``P(X_{k,n} <= x)``."""
    cdf, _ = _cdf_sf(spec, x)
    return float(cdf) if cdf.ndim == 0 else cdf


def order_stat_sf(spec: OrderStatSpec, x):
    """``P(X_{k,n} > x)``, accurate in the upper tail."""
    _, sf = _cdf_sf(spec, x)
    return float(sf) if sf.ndim == 0 else sf


def order_stat_pdf(spec: OrderStatSpec, x):
    """Density ``b_{k,n-k+1}(F(x)) f(x)``; raises at finite support endpoints."""
    a, b = spec.beta_params
    f = np.asarray(spec.base.pdf(x), dtype=float)
    F = np.asarray(spec.base.cdf(x), dtype=float)
    out = np.asarray(beta_pdf(a, b, F)) * f
    return float(out) if out.ndim == 0 else out


def order_stat_quantile(spec: OrderStatSpec, p):
    arr = np.asarray(p, dtype=float)
    if np.any(np.isnan(arr)) or np.any((arr <= 0.0) | (arr >= 1.0)):
        raise DomainError("quantile: p must lie in the open interval (0, 1)")
    a, b = spec.beta_params
    out = np.asarray(spec.base.ppf_closed(beta_ppf(a, b, arr)), dtype=float)
    return float(out) if out.ndim == 0 else out


def order_stat_sample(spec: OrderStatSpec, rng: np.random.Generator, count: int) -> np.ndarray:
    """Beta-quantile composition sampler; deterministic per generator state."""
    if not isinstance(count, (int, np.integer)) or count < 1:
        raise DomainError(f"sample count must be a positive integer, got {count!r}")
    a, b = spec.beta_params
    v = beta_ppf(a, b, uniform_variates(rng, int(count)))
    return np.asarray(spec.base.ppf_closed(v), dtype=float)


def exp_order_laplace(k: int, n: int, s: float) -> float:
    """Laplace transform ``E exp(-s xi_{k,n})`` of a standard exponential order statistic.

    Equals ``prod_{j=1}^{k} (n-j+1) / (n-j+1+s)``.
    """
    try:
        k, n = _check_kn(k, n)
    except ParameterError as exc:
        raise DomainError(str(exc)) from exc
    if not s >= 0 or not math.isfinite(s):
        raise DomainError(f"Laplace argument must be a finite s >= 0, got {s}")
    out = 1.0
    for j in range(1, k + 1):
        out *= (n - j + 1) / (n - j + 1 + s)
    return out


def standard_exponential_order_stat(k: int, n: int) -> OrderStatSpec:
    """``xi_{k,n}``: order statistic of the unit-rate exponential."""
    return OrderStatSpec(Exponential(1.0), k, n)
