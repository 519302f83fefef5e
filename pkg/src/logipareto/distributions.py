"""Closed-form base laws: CDF, survival, density, quantile and sampling.

Every family is a frozen dataclass validated at construction.  Methods are
vectorized over ``x``/``p``; scalars in give floats out.

>>> Logistic().cdf(0.0)
0.5
>>> ParetoII(lam=1.0, power=1.0).quantile(0.75)
3.0
"""

from __future__ import annotations

import math
import numbers
from dataclasses import asdict, dataclass, fields
from typing import ClassVar

import numpy as np
from scipy.special import expit, logit, ndtr, ndtri

from .errors import DomainError, ParameterError
from .special import beta_pdf, beta_ppf, reg_inc_beta

__all__ = [
    "Distribution",
    "Uniform01",
    "Exponential",
    "Logistic",
    "ParetoII",
    "Beta",
    "Normal",
    "cdf",
    "sf",
    "pdf",
    "quantile",
    "sample",
    "uniform_variates",
    "from_json",
    "FAMILIES",
]


def _ret(arr: np.ndarray, scalar: bool):
    return float(arr) if scalar else arr


def uniform_variates(rng: np.random.Generator, count: int) -> np.ndarray:
    """``count`` uniforms strictly inside (0, 1) on the 2**-53 lattice."""
    return (rng.integers(0, 2**53, size=count) + 0.5) / 2.0**53


@dataclass(frozen=True)
class Distribution:
    """Base class; subclasses implement the ``_cdf``/``_sf``/``_pdf``/``_ppf`` kernels."""

    family: ClassVar[str] = ""
    lower: ClassVar[float] = -math.inf
    upper: ClassVar[float] = math.inf

    def __post_init__(self):
        for f in fields(self):
            val = getattr(self, f.name)
            if not isinstance(val, numbers.Real) or not math.isfinite(val):
                raise ParameterError(f"{self.family}.{f.name} must be a finite real, got {val!r}")
            object.__setattr__(self, f.name, float(val))
        self._validate()

    def _validate(self) -> None:
        pass

    # -- kernels (operate on float arrays strictly inside the support) --
    def _cdf(self, x):
        raise NotImplementedError

    def _sf(self, x):
        return 1.0 - self._cdf(x)

    def _pdf(self, x):
        raise NotImplementedError

    def _ppf(self, p):
        raise NotImplementedError

    # -- public API --
    @property
    def support(self) -> tuple[float, float]:
        return (self.lower, self.upper)

    @property
    def positive(self) -> bool:
        """True when the law is supported on ``[0, inf)``."""
        return self.lower >= 0.0

    def cdf(self, x):
        arr = np.asarray(x, dtype=float)
        inside = (arr > self.lower) & (arr < self.upper)
        out = np.where(arr >= self.upper, 1.0, 0.0)
        if inside.any():
            out[inside] = self._cdf(arr[inside])
        return _ret(out, arr.ndim == 0)

    def sf(self, x):
        arr = np.asarray(x, dtype=float)
        inside = (arr > self.lower) & (arr < self.upper)
        out = np.where(arr >= self.upper, 0.0, 1.0)
        if inside.any():
            out[inside] = self._sf(arr[inside])
        return _ret(out, arr.ndim == 0)

    def pdf(self, x):
        """Density on the open support; zero outside, error at a finite endpoint."""
        arr = np.asarray(x, dtype=float)
        if np.any((arr == self.lower) | (arr == self.upper)):
            raise DomainError(f"{self.family} density is not evaluated at support endpoints")
        inside = (arr > self.lower) & (arr < self.upper)
        out = np.zeros(arr.shape)
        if inside.any():
            out[inside] = self._pdf(arr[inside])
        return _ret(out, arr.ndim == 0)

    def quantile(self, p):
        arr = np.asarray(p, dtype=float)
        if np.any(np.isnan(arr)) or np.any((arr <= 0.0) | (arr >= 1.0)):
            raise DomainError("quantile: p must lie in the open interval (0, 1)")
        return _ret(np.asarray(self._ppf(arr), dtype=float), arr.ndim == 0)

    def ppf_closed(self, p):
        """Quantile on the closed interval ``[0, 1]``; endpoints map to the support ends."""
        arr = np.asarray(p, dtype=float)
        out = np.where(arr <= 0.0, self.lower, self.upper).astype(float)
        inside = (arr > 0.0) & (arr < 1.0)
        if inside.any():
            out[inside] = self._ppf(arr[inside])
        return _ret(out, arr.ndim == 0)

    def sample(self, rng: np.random.Generator, count: int) -> np.ndarray:
        """Inversion sampling; deterministic for a given generator state."""
        if not isinstance(count, (int, np.integer)) or count < 1:
            raise DomainError(f"sample count must be a positive integer, got {count!r}")
        return np.asarray(self._ppf(uniform_variates(rng, int(count))), dtype=float)

    @property
    def params(self) -> dict[str, float]:
        return asdict(self)

    def to_json(self) -> dict:
        return {"family": self.family, "params": self.params}

    def label(self) -> str:
        inner = ", ".join(f"{k}={v:g}" for k, v in self.params.items())
        return f"{self.family}({inner})"


@dataclass(frozen=True)
class Uniform01(Distribution):
    family: ClassVar[str] = "Uniform01"
    lower: ClassVar[float] = 0.0
    upper: ClassVar[float] = 1.0

    def _cdf(self, x):
        return x

    def _sf(self, x):
        return 1.0 - x

    def _pdf(self, x):
        return np.ones_like(x)

    def _ppf(self, p):
        return np.asarray(p, dtype=float)


@dataclass(frozen=True)
class Exponential(Distribution):
    rate: float = 1.0

    family: ClassVar[str] = "Exponential"
    lower: ClassVar[float] = 0.0

    def _validate(self):
        if self.rate <= 0:
            raise ParameterError(f"Exponential rate must be positive, got {self.rate}")

    def _cdf(self, x):
        return -np.expm1(-self.rate * x)

    def _sf(self, x):
        return np.exp(-self.rate * x)

    def _pdf(self, x):
        return self.rate * np.exp(-self.rate * x)

    def _ppf(self, p):
        return -np.log1p(-np.asarray(p, dtype=float)) / self.rate


@dataclass(frozen=True)
class Logistic(Distribution):
    mu: float = 0.0
    scale: float = 1.0

    family: ClassVar[str] = "Logistic"

    def _validate(self):
        if self.scale <= 0:
            raise ParameterError(f"Logistic scale must be positive, got {self.scale}")

    def _cdf(self, x):
        return expit((x - self.mu) / self.scale)

    def _sf(self, x):
        return expit(-(x - self.mu) / self.scale)

    def _pdf(self, x):
        z = (x - self.mu) / self.scale
        return expit(z) * expit(-z) / self.scale

    def _ppf(self, p):
        return self.mu + self.scale * logit(np.asarray(p, dtype=float))


@dataclass(frozen=True)
class ParetoII(Distribution):
    """``G(y) = lam y^power / (1 + lam y^power)`` on ``y >= 0`` (log-logistic)."""

    lam: float = 1.0
    power: float = 1.0

    family: ClassVar[str] = "ParetoII"
    lower: ClassVar[float] = 0.0

    def _validate(self):
        if self.lam <= 0 or self.power <= 0:
            raise ParameterError(
                f"ParetoII lam and power must be positive, got lam={self.lam}, power={self.power}"
            )

    def _logodds(self, y):
        return math.log(self.lam) + self.power * np.log(y)

    def _cdf(self, y):
        return expit(self._logodds(y))

    def _sf(self, y):
        return expit(-self._logodds(y))

    def _pdf(self, y):
        z = self._logodds(y)
        return self.power / y * expit(z) * expit(-z)

    def _ppf(self, p):
        p = np.asarray(p, dtype=float)
        return np.exp((logit(p) - math.log(self.lam)) / self.power)


@dataclass(frozen=True)
class Beta(Distribution):
    alpha: float = 1.0
    beta: float = 1.0

    family: ClassVar[str] = "Beta"
    lower: ClassVar[float] = 0.0
    upper: ClassVar[float] = 1.0

    def _validate(self):
        if self.alpha <= 0 or self.beta <= 0:
            raise ParameterError(
                f"Beta parameters must be positive, got alpha={self.alpha}, beta={self.beta}"
            )

    def _cdf(self, x):
        return reg_inc_beta(self.alpha, self.beta, x)

    def _sf(self, x):
        return reg_inc_beta(self.beta, self.alpha, 1.0 - x)

    def _pdf(self, x):
        return beta_pdf(self.alpha, self.beta, x)

    def _ppf(self, p):
        return beta_ppf(self.alpha, self.beta, p)


@dataclass(frozen=True)
class Normal(Distribution):
    """Gaussian law; used as a non-member alternative in discrimination checks."""

    mu: float = 0.0
    sigma: float = 1.0

    family: ClassVar[str] = "Normal"

    def _validate(self):
        if self.sigma <= 0:
            raise ParameterError(f"Normal sigma must be positive, got {self.sigma}")

    def _cdf(self, x):
        return ndtr((x - self.mu) / self.sigma)

    def _sf(self, x):
        return ndtr(-(x - self.mu) / self.sigma)

    def _pdf(self, x):
        z = (x - self.mu) / self.sigma
        return np.exp(-0.5 * z * z) / (self.sigma * math.sqrt(2.0 * math.pi))

    def _ppf(self, p):
        return self.mu + self.sigma * ndtri(np.asarray(p, dtype=float))


FAMILIES: dict[str, type[Distribution]] = {
    cls.family: cls for cls in (Uniform01, Exponential, Logistic, ParetoII, Beta, Normal)
}


def from_json(obj: dict) -> Distribution:
    """Inverse of :meth:`Distribution.to_json`."""
    try:
        cls = FAMILIES[obj["family"]]
    except KeyError as exc:
        raise ParameterError(f"unknown distribution family in {obj!r}") from exc
    return cls(**obj.get("params", {}))


# functional aliases


def cdf(dist: Distribution, x):
    return dist.cdf(x)


def sf(dist: Distribution, x):
    return dist.sf(x)


def pdf(dist: Distribution, x):
    return dist.pdf(x)


def quantile(dist: Distribution, p):
    return dist.quantile(p)


def sample(dist: Distribution, rng: np.random.Generator, count: int) -> np.ndarray:
    return dist.sample(rng, count)
