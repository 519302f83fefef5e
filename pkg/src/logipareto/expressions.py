"""Random expressions over independent leaves: exact CDFs and simulation.

An expression is a small tree of frozen dataclasses::

    Sum(Leaf(OrderStatSpec(Logistic(), 1, 2), "x"),
        Scale(Leaf(Exponential(), "xi"), 0.5))

Each leaf carries an independence tag; distinct tags are independent
draws.  Evaluation works on a compiled form in which every node is a *core*
(a leaf law or a sum of two compiled nodes) followed by a chain of monotone
maps (affine, power, log, exp).  Products are rewritten as
``exp(log a + log b)`` so that sums are the only operation needing an
integral.

For ``P(O + S <= y)`` with ``S`` a mapped leaf, the integral runs over the
probability scale of the leaf's base law::

    P(O + S <= y) = int_0^1 F_O(y - T(v)) w(v) dv

where ``T`` is the base quantile followed by the leaf's maps and ``w`` is
the Beta(k, n-k+1) density of an order-statistic leaf (1 for a plain leaf).
The ``v`` range is split at the points where ``y - T(v)`` crosses the
support of ``O``; outside that range the integrand is exactly 0 or 1.  When
``O`` is itself a sum its CDF is tabulated once by piecewise Chebyshev
interpolation, which keeps chains of sums linear in depth.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field
from typing import Union

import numpy as np
from numpy.polynomial import chebyshev as C

from .distributions import Distribution
from .errors import StructureError
from .order_statistics import OrderStatSpec, _cdf_sf, order_stat_quantile, order_stat_sample
from .quadrature import QuadSettings, integrate
from .special import beta_pdf, beta_ppf, reg_inc_beta

__all__ = [
    "RandomExpr",
    "Leaf",
    "Negate",
    "Scale",
    "Power",
    "Sum",
    "Product",
    "difference",
    "quotient",
    "expr_cdf",
    "expr_sample",
    "expr_quantile",
    "expr_support",
    "is_simple",
    "MAX_DEPTH",
]

MAX_DEPTH = 8


# ---------------------------------------------------------------------------
# public tree
# ---------------------------------------------------------------------------


class RandomExpr:
    """Base class of expression nodes."""

    depth: int
    tags: frozenset
    support: tuple[float, float]

    @property
    def positive(self) -> bool:
        return self.support[0] >= 0.0

    def _finish(self, depth: int, tags: frozenset, support: tuple[float, float]) -> None:
        if depth > MAX_DEPTH:
            raise StructureError(f"expression depth {depth} exceeds the limit {MAX_DEPTH}")
        object.__setattr__(self, "depth", depth)
        object.__setattr__(self, "tags", tags)
        object.__setattr__(self, "support", support)

    # operator sugar
    def __add__(self, other: "RandomExpr") -> "Sum":
        return Sum(self, other)

    def __sub__(self, other: "RandomExpr") -> "Sum":
        return difference(self, other)

    def __mul__(self, other):
        if isinstance(other, RandomExpr):
            return Product(self, other)
        return Scale(self, other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, RandomExpr):
            return quotient(self, other)
        return Scale(self, 1.0 / other)

    def __neg__(self) -> "Negate":
        return Negate(self)

    def __pow__(self, p: float) -> "Power":
        return Power(self, p)


@dataclass(frozen=True, eq=True)
class Leaf(RandomExpr):
    """A random variable with law ``law``; ``tag`` names its independent copy."""

    law: Union[Distribution, OrderStatSpec]
    tag: str
    depth: int = field(init=False, compare=False, repr=False)
    tags: frozenset = field(init=False, compare=False, repr=False)
    support: tuple = field(init=False, compare=False, repr=False)

    def __post_init__(self):
        if isinstance(self.law, Distribution):
            object.__setattr__(self, "law", OrderStatSpec(self.law, 1, 1))
        elif not isinstance(self.law, OrderStatSpec):
            raise StructureError(f"leaf law must be a Distribution or OrderStatSpec, got {self.law!r}")
        self._finish(1, frozenset([self.tag]), self.law.base.support)

    def __str__(self) -> str:
        spec = self.law
        if spec.n == 1:
            return f"{spec.base.label()}#{self.tag}"
        return f"{spec.base.label()}[{spec.k}:{spec.n}]#{self.tag}"


@dataclass(frozen=True, eq=True)
class Negate(RandomExpr):
    expr: RandomExpr
    depth: int = field(init=False, compare=False, repr=False)
    tags: frozenset = field(init=False, compare=False, repr=False)
    support: tuple = field(init=False, compare=False, repr=False)

    def __post_init__(self):
        lo, hi = self.expr.support
        self._finish(self.expr.depth + 1, self.expr.tags, (-hi, -lo))

    def __str__(self) -> str:
        return f"-({self.expr})"


@dataclass(frozen=True, eq=True)
class Scale(RandomExpr):
    expr: RandomExpr
    c: float
    depth: int = field(init=False, compare=False, repr=False)
    tags: frozenset = field(init=False, compare=False, repr=False)
    support: tuple = field(init=False, compare=False, repr=False)

    def __post_init__(self):
        c = float(self.c)
        if c == 0.0 or not math.isfinite(c):
            raise StructureError(f"scale factor must be finite and nonzero, got {self.c}")
        object.__setattr__(self, "c", c)
        lo, hi = self.expr.support
        sup = (c * lo, c * hi) if c > 0 else (c * hi, c * lo)
        self._finish(self.expr.depth + 1, self.expr.tags, sup)

    def __str__(self) -> str:
        return f"{self.c:g}*({self.expr})"


def _pow_interval(lo: float, hi: float, p: float) -> tuple[float, float]:
    with np.errstate(divide="ignore"):
        a, b = float(np.float64(lo) ** p), float(np.float64(hi) ** p)
    return (a, b) if p > 0 else (b, a)


@dataclass(frozen=True, eq=True)
class Power(RandomExpr):
    """``expr ** p`` for an expression supported on ``[0, inf)``."""

    expr: RandomExpr
    p: float
    depth: int = field(init=False, compare=False, repr=False)
    tags: frozenset = field(init=False, compare=False, repr=False)
    support: tuple = field(init=False, compare=False, repr=False)

    def __post_init__(self):
        p = float(self.p)
        if p == 0.0 or not math.isfinite(p):
            raise StructureError(f"power must be finite and nonzero, got {self.p}")
        object.__setattr__(self, "p", p)
        if not self.expr.positive:
            raise StructureError(f"Power needs a positive-valued operand, got {self.expr}")
        self._finish(self.expr.depth + 1, self.expr.tags, _pow_interval(*self.expr.support, p))

    def __str__(self) -> str:
        return f"({self.expr})^{self.p:g}"


def _check_disjoint(a: RandomExpr, b: RandomExpr) -> frozenset:
    shared = a.tags & b.tags
    if shared:
        raise StructureError(f"operands share independence tags {sorted(shared)}")
    return a.tags | b.tags


@dataclass(frozen=True, eq=True)
class Sum(RandomExpr):
    a: RandomExpr
    b: RandomExpr
    depth: int = field(init=False, compare=False, repr=False)
    tags: frozenset = field(init=False, compare=False, repr=False)
    support: tuple = field(init=False, compare=False, repr=False)

    def __post_init__(self):
        tags = _check_disjoint(self.a, self.b)
        sup = (self.a.support[0] + self.b.support[0], self.a.support[1] + self.b.support[1])
        self._finish(max(self.a.depth, self.b.depth) + 1, tags, sup)

    def __str__(self) -> str:
        return f"({self.a} + {self.b})"


@dataclass(frozen=True, eq=True)
class Product(RandomExpr):
    """Product of two positive-valued independent expressions."""

    a: RandomExpr
    b: RandomExpr
    depth: int = field(init=False, compare=False, repr=False)
    tags: frozenset = field(init=False, compare=False, repr=False)
    support: tuple = field(init=False, compare=False, repr=False)

    def __post_init__(self):
        if not (self.a.positive and self.b.positive):
            raise StructureError("Product needs positive-valued operands")
        tags = _check_disjoint(self.a, self.b)
        with np.errstate(invalid="ignore"):
            sup = (self.a.support[0] * self.b.support[0], self.a.support[1] * self.b.support[1])
        self._finish(max(self.a.depth, self.b.depth) + 1, tags, sup)

    def __str__(self) -> str:
        return f"({self.a} * {self.b})"


def difference(a: RandomExpr, b: RandomExpr) -> Sum:
    return Sum(a, Negate(b))


def quotient(a: RandomExpr, b: RandomExpr) -> Product:
    return Product(a, Power(b, -1.0))


# ---------------------------------------------------------------------------
# monotone maps
# ---------------------------------------------------------------------------

# op = (name, parameter); names: "affine", "pow", "log", "exp"


def _fwd(op, z):
    name, c = op
    with np.errstate(divide="ignore", over="ignore"):
        if name == "affine":
            return c * z
        if name == "pow":
            return np.power(z, c)
        if name == "log":
            return np.log(z)
        return np.exp(z)


def _inv(op, t):
    name, c = op
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        if name == "affine":
            return t / c
        if name == "pow":
            return np.power(t, 1.0 / c)
        if name == "log":
            return np.exp(t)
        return np.log(t)


def _op_increasing(op) -> bool:
    name, c = op
    if name in ("affine", "pow"):
        return c > 0
    return True


def _op_interval(op, lo: float, hi: float) -> tuple[float, float]:
    a = float(_fwd(op, np.float64(lo)))
    b = float(_fwd(op, np.float64(hi)))
    return (a, b) if a <= b else (b, a)


# ---------------------------------------------------------------------------
# compiled form
# ---------------------------------------------------------------------------


class _Node:
    """A core followed by monotone maps."""

    def __init__(self, core, ops: tuple = ()):
        self.core = core
        self.ops = ops
        inc = True
        lo, hi = core.support
        for op in ops:
            inc = inc == _op_increasing(op)
            lo, hi = _op_interval(op, lo, hi)
        self.increasing = inc
        self.support = (lo, hi)
        self._table = None

    def then(self, op) -> "_Node":
        return _Node(self.core, self.ops + (op,))

    @property
    def is_leaf(self) -> bool:
        return isinstance(self.core, _LeafCore)

    def forward(self, z):
        for op in self.ops:
            z = _fwd(op, z)
        return z

    def inverse(self, t):
        for op in reversed(self.ops):
            t = _inv(op, t)
        return t

    # CDF of the mapped variable
    def cdf(self, x, settings: QuadSettings) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        lo, hi = self.support
        out = np.where(x >= hi, 1.0, 0.0)
        inside = (x > lo) & (x < hi)
        if inside.any():
            z = self.inverse(x[inside])
            c, s = self.core.cdf_sf(z, settings)
            out[inside] = c if self.increasing else s
        return out

    def quantile(self, p: np.ndarray, settings: QuadSettings) -> np.ndarray:
        q = p if self.increasing else 1.0 - p
        return self.forward(self.core.quantile(q, settings))

    def eff_range(self, eps: float, settings: QuadSettings) -> tuple[float, float]:
        lo, hi = self.core.eff_range(eps, settings)
        for op in self.ops:
            lo, hi = _op_interval(op, lo, hi)
        return max(lo, self.support[0]), min(hi, self.support[1])

    # leaf-only helpers: the variable is T(v), v ~ Beta(k, n-k+1)
    def transform(self, v):
        return self.forward(self.core.spec.base.ppf_closed(v))

    def v_of(self, t) -> np.ndarray:
        """Base probability ``v`` with ``T(v) = t`` (clipped at the support ends)."""
        t = np.asarray(t, dtype=float)
        lo, hi = self.support
        below = 0.0 if self.increasing else 1.0
        out = np.where(t <= lo, below, 1.0 - below)
        inside = (t > lo) & (t < hi)
        if inside.any():
            out[inside] = self.core.spec.base.cdf(self.inverse(t[inside]))
        return out

    def weight_cdf(self, v):
        a, b = self.core.spec.beta_params
        if a == 1 and b == 1:
            return np.clip(v, 0.0, 1.0)
        return reg_inc_beta(a, b, np.clip(v, 0.0, 1.0))

    def weight_pdf(self, v):
        a, b = self.core.spec.beta_params
        if a == 1 and b == 1:
            return np.ones_like(v)
        return beta_pdf(a, b, v)

    # cached CDF table for composite operands
    def table(self, settings: QuadSettings) -> "_ChebTable":
        if self._table is None or self._table[0] != settings:
            a, b = self.eff_range(_TABLE_EPS, settings)
            tab = _ChebTable(lambda x: self.cdf(x, settings), a, b, tol=settings.abs_tol)
            self._table = (settings, tab)
        return self._table[1]


_TABLE_EPS = 1e-13


class _LeafCore:
    def __init__(self, spec: OrderStatSpec):
        self.spec = spec
        self.support = spec.base.support

    def cdf_sf(self, z, settings):
        return _cdf_sf(self.spec, z)

    def quantile(self, p, settings):
        return np.asarray(order_stat_quantile(self.spec, p), dtype=float)

    def eff_range(self, eps, settings):
        lo, hi = order_stat_quantile(self.spec, np.array([eps, 1.0 - eps]))
        return float(lo), float(hi)


def _prefer_as_shift(node: _Node) -> int:
    """Ordering key for the integration variable: plain leaves first."""
    if not node.is_leaf:
        return 2
    return 0 if node.core.spec.n == 1 else 1


class _SumCore:
    def __init__(self, a: _Node, b: _Node):
        if not (a.is_leaf or b.is_leaf):
            raise StructureError(
                "a sum needs at least one operand that is a (mapped) leaf; "
                "regroup the expression so that each sum adds a single leaf"
            )
        # integrate over the shift-like operand, keep the other inside the integrand
        if _prefer_as_shift(b) <= _prefer_as_shift(a):
            self.shift, self.other = b, a
        else:
            self.shift, self.other = a, b
        self.support = (a.support[0] + b.support[0], a.support[1] + b.support[1])
        self.parts = (a, b)

    def _other_cdf(self, x, settings):
        if self.other.is_leaf:
            return self.other.cdf(x, settings)
        return self.other.table(settings)(x)

    def cdf_sf(self, y, settings):
        y = np.asarray(y, dtype=float)
        shape = y.shape
        y = y.ravel()
        S = self.shift
        o_lo, o_hi = self.other.support
        with np.errstate(invalid="ignore"):
            v_full = S.v_of(y - o_hi)  # F_other == 1 beyond this point
            v_zero = S.v_of(y - o_lo)  # F_other == 0 beyond this point
        lo_v = np.minimum(v_full, v_zero)
        hi_v = np.maximum(v_full, v_zero)
        if S.increasing:
            ones = S.weight_cdf(v_full)
        else:
            ones = 1.0 - S.weight_cdf(v_full)
        width = hi_v - lo_v
        cdf = np.asarray(ones, dtype=float).copy()
        act = width > 0.0
        if act.any():
            ya, la, wa = y[act], lo_v[act], width[act]

            def integrand(s):
                v = la[:, None] + wa[:, None] * s[None, :]
                arg = ya[:, None] - S.transform(v)
                vals = self._other_cdf(arg.ravel(), settings).reshape(arg.shape)
                return vals * S.weight_pdf(v) * wa[:, None]

            val, _ = integrate(integrand, 0.0, 1.0, settings)
            cdf[act] += val
        cdf = np.clip(cdf, 0.0, 1.0).reshape(shape)
        return cdf, 1.0 - cdf

    def eff_range(self, eps, settings):
        a, b = self.parts
        alo, ahi = a.eff_range(eps / 2.0, settings)
        blo, bhi = b.eff_range(eps / 2.0, settings)
        return alo + blo, ahi + bhi


# ---------------------------------------------------------------------------
# piecewise Chebyshev table
# ---------------------------------------------------------------------------

_DEG = 32
_CHEB_T = np.cos(np.pi * (np.arange(_DEG + 1) + 0.5) / (_DEG + 1))  # first-kind nodes
_CHEB_M = C.chebvander(_CHEB_T, _DEG).T * (2.0 / (_DEG + 1))
_CHEB_M[0] *= 0.5


class _ChebTable:
    """Adaptive piecewise Chebyshev interpolant of a monotone function on ``[a, b]``.

    Returns 0 below ``a`` and 1 above ``b`` (the effective range of a CDF).
    """

    def __init__(self, func, a: float, b: float, tol: float, max_pieces: int = 2048):
        self.a, self.b = a, b
        pending = [(a, b)]
        done: list[tuple[float, float, np.ndarray]] = []
        min_width = max(abs(b - a), 1.0) * 1e-10
        while pending:
            lefts = np.array([p[0] for p in pending])
            rights = np.array([p[1] for p in pending])
            xs = 0.5 * (lefts + rights)[:, None] + 0.5 * (rights - lefts)[:, None] * _CHEB_T[None, :]
            vals = np.asarray(func(xs.ravel()), dtype=float).reshape(xs.shape)
            coefs = vals @ _CHEB_M.T
            tail = np.abs(coefs[:, -4:]).max(axis=1)
            nxt = []
            for i, (l, r) in enumerate(pending):
                if tail[i] <= tol or r - l <= min_width:
                    done.append((l, r, coefs[i]))
                else:
                    m = 0.5 * (l + r)
                    nxt.extend([(l, m), (m, r)])
            if len(done) + len(nxt) > max_pieces:
                raise ArithmeticError("CDF table exceeded its piece budget")
            pending = nxt
        done.sort(key=lambda t: t[0])
        self.breaks = np.array([d[0] for d in done] + [done[-1][1]])
        self.coefs = np.array([d[2] for d in done])

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        out = np.where(x >= self.b, 1.0, 0.0)
        inside = (x > self.a) & (x < self.b)
        if not inside.any():
            return out
        xi = x[inside]
        idx = np.clip(np.searchsorted(self.breaks, xi, side="right") - 1, 0, len(self.coefs) - 1)
        order = np.argsort(idx, kind="stable")
        sorted_idx = idx[order]
        res = np.empty_like(xi)
        bounds = np.searchsorted(sorted_idx, np.arange(len(self.coefs) + 1))
        for piece in range(len(self.coefs)):
            s, e = bounds[piece], bounds[piece + 1]
            if s == e:
                continue
            sel = order[s:e]
            l, r = self.breaks[piece], self.breaks[piece + 1]
            t = (2.0 * xi[sel] - (l + r)) / (r - l)
            res[sel] = C.chebval(t, self.coefs[piece])
        out[inside] = np.clip(res, 0.0, 1.0)
        return out


# ---------------------------------------------------------------------------
# compilation and public evaluation
# ---------------------------------------------------------------------------


@functools.lru_cache(maxsize=512)
def _compile(expr: RandomExpr) -> _Node:
    if isinstance(expr, Leaf):
        return _Node(_LeafCore(expr.law))
    if isinstance(expr, Negate):
        return _compile(expr.expr).then(("affine", -1.0))
    if isinstance(expr, Scale):
        return _compile(expr.expr).then(("affine", expr.c))
    if isinstance(expr, Power):
        return _compile(expr.expr).then(("pow", expr.p))
    if isinstance(expr, Sum):
        return _Node(_SumCore(_compile(expr.a), _compile(expr.b)))
    if isinstance(expr, Product):
        a = _compile(expr.a).then(("log", None))
        b = _compile(expr.b).then(("log", None))
        return _Node(_SumCore(a, b), (("exp", None),))
    raise StructureError(f"unknown expression node {expr!r}")


def is_simple(expr: RandomExpr) -> bool:
    """True when the expression is a single leaf under monotone maps."""
    return _compile(expr).is_leaf


def expr_support(expr: RandomExpr) -> tuple[float, float]:
    return _compile(expr).support


def expr_cdf(expr: RandomExpr, x, quad: QuadSettings | None = None):
    """``P(expr <= x)``, vectorized over ``x``.

    Raises
    ------
    QuadratureError
        If an integral cannot reach ``quad.abs_tol``; carries the estimate.
    StructureError
        If a sum has no leaf operand to integrate over.
    """
    quad = quad or QuadSettings()
    arr = np.asarray(x, dtype=float)
    out = _compile(expr).cdf(arr.ravel(), quad).reshape(arr.shape)
    return float(out) if out.ndim == 0 else out


def expr_quantile(expr: RandomExpr, p, quad: QuadSettings | None = None):
    """Quantile; closed form for mapped leaves, bisection on the CDF otherwise."""
    quad = quad or QuadSettings()
    arr = np.asarray(p, dtype=float)
    node = _compile(expr)
    if node.is_leaf:
        out = node.quantile(arr.ravel(), quad)
    else:
        # bisection on the mapped CDF
        lo, hi = node.eff_range(1e-14, quad)
        lo = np.full(arr.size, lo)
        hi = np.full(arr.size, hi)
        target = arr.ravel()
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            below = node.cdf(mid, quad) < target
            lo = np.where(below, mid, lo)
            hi = np.where(below, hi, mid)
            if np.all(hi - lo <= 1e-12 * np.maximum(1.0, np.abs(mid))):
                break
        out = 0.5 * (lo + hi)
    out = np.asarray(out, dtype=float).reshape(arr.shape)
    return float(out) if out.ndim == 0 else out


def _sample(expr: RandomExpr, rng: np.random.Generator, count: int) -> np.ndarray:
    if isinstance(expr, Leaf):
        return order_stat_sample(expr.law, rng, count)
    if isinstance(expr, Negate):
        return -_sample(expr.expr, rng, count)
    if isinstance(expr, Scale):
        return expr.c * _sample(expr.expr, rng, count)
    if isinstance(expr, Power):
        with np.errstate(divide="ignore"):
            return np.power(_sample(expr.expr, rng, count), expr.p)
    if isinstance(expr, Sum):
        return _sample(expr.a, rng, count) + _sample(expr.b, rng, count)
    if isinstance(expr, Product):
        return _sample(expr.a, rng, count) * _sample(expr.b, rng, count)
    raise StructureError(f"unknown expression node {expr!r}")


def expr_sample(expr: RandomExpr, rng: np.random.Generator, count: int) -> np.ndarray:
    """Simulate ``count`` independent copies of ``expr``.

    Leaves are drawn in left-to-right tree order from ``rng``, so the result
    is a deterministic function of the generator state.
    """
    if not isinstance(count, (int, np.integer)) or count < 1:
        from .errors import DomainError

        raise DomainError(f"sample count must be a positive integer, got {count!r}")
    return _sample(expr, rng, int(count))
