"""Catalog of distributional identities and their numerical verification.

Every record pairs two expression templates over the same base law.  A
record is instantiated at integer parameters ``(k, m, n)`` and a base
distribution, and verified by comparing the two CDFs on a grid (quadrature)
and, optionally, by a two-sample Kolmogorov distance between simulations.

Notation in the formulas: ``X`` is a draw from the base law, ``X[k:n]`` its
k-th order statistic out of n, ``xi`` a unit exponential, ``U`` a uniform on
(0, 1), ``U[k:n]``/``xi[k:n]`` their order statistics.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .distributions import Beta, Distribution, Exponential, Logistic, ParetoII, Uniform01
from .errors import DomainError, IdentityNotFound, QuadratureError
from .expressions import (
    Leaf,
    Power,
    Product,
    RandomExpr,
    Scale,
    Sum,
    difference,
    expr_cdf,
    expr_quantile,
    expr_sample,
    is_simple,
    quotient,
)
from .ks import ks_2samp_stat, mc_bound
from .order_statistics import OrderStatSpec
from .quadrature import QuadSettings

__all__ = [
    "GridSpec",
    "IdentityRecord",
    "MCSettings",
    "VerificationReport",
    "catalog",
    "get_identity",
    "demo_records",
    "scaled_pareto_record",
    "verify_identity",
    "task_seed_sequence",
    "FAMILY_BASES",
]

Params = tuple  # (k, m, n); m is None when unused

FAMILY_BASES: dict[str, Distribution] = {
    "ParetoII": ParetoII(1.0, 1.0),
    "Logistic": Logistic(0.0, 1.0),
    "ExponentialOrderStat": Exponential(1.0),
    "UniformOrderStat": Uniform01(),
}


# ---------------------------------------------------------------------------
# grids
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GridSpec:
    """Evaluation grid.

    With ``spacing="uniform"`` the nodes are ``linspace(lower, upper, points)``.
    With ``spacing="quantile"`` the bounds are probabilities and the nodes are
    quantiles of a reference law at equispaced probabilities in between.
    """

    lower: float
    upper: float
    points: int = 201
    spacing: str = "uniform"

    def __post_init__(self):
        if self.spacing not in ("uniform", "quantile"):
            raise DomainError(f"unknown grid spacing {self.spacing!r}")
        if int(self.points) != self.points or self.points < 3:
            raise DomainError(f"a grid needs at least 3 points, got {self.points}")
        if not self.lower < self.upper:
            raise DomainError(f"grid needs lower < upper, got {self.lower}, {self.upper}")
        if self.spacing == "quantile" and not (0.0 < self.lower and self.upper < 1.0):
            raise DomainError("quantile grid bounds are probabilities in (0, 1)")

    @classmethod
    def quantile(cls, points: int = 201, eps: float = 1e-4) -> "GridSpec":
        return cls(eps, 1.0 - eps, points, "quantile")

    def nodes(self, reference=None, quad: QuadSettings | None = None) -> np.ndarray:
        """Grid abscissae; ``reference`` (a law or expression) is needed for quantile spacing."""
        if self.spacing == "uniform":
            return np.linspace(self.lower, self.upper, self.points)
        if reference is None:
            raise DomainError("quantile spacing needs a reference law")
        probs = np.linspace(self.lower, self.upper, self.points)
        if isinstance(reference, Distribution):
            return np.asarray(reference.quantile(probs))
        return np.asarray(expr_quantile(reference, probs, quad))

    def to_json(self) -> dict:
        return {
            "lower": self.lower,
            "upper": self.upper,
            "points": self.points,
            "spacing": self.spacing,
        }


DEFAULT_GRID = GridSpec.quantile(201, 1e-4)


# ---------------------------------------------------------------------------
# records
# ---------------------------------------------------------------------------


def _os(base: Distribution, k: int, n: int, tag: str) -> Leaf:
    return Leaf(OrderStatSpec(base, k, n), tag)


@dataclass(frozen=True, eq=False)
class IdentityRecord:
    """One equality in distribution, ``lhs =d rhs``, as parametric templates."""

    id: str
    formula: str
    constraint_text: str
    family: str
    paper_tag: str
    uses_m: bool
    constraint: Callable[[int, Optional[int], int], bool] = field(repr=False)
    lhs: Callable[[int, Optional[int], int, Distribution], RandomExpr] = field(repr=False)
    rhs: Callable[[int, Optional[int], int, Distribution], RandomExpr] = field(repr=False)
    base_for: Optional[Callable[[int, Optional[int], int], Distribution]] = field(
        default=None, repr=False
    )

    def matching_base(self, params: Params) -> Distribution:
        """The base law the identity characterizes (at unit scale)."""
        if self.base_for is not None:
            return self.base_for(*params)
        return FAMILY_BASES[self.family]

    def check(self, params: Params) -> Params:
        k, m, n = params
        if not self.uses_m:
            m = None
        ints = [v for v in (k, m, n) if v is not None]
        if any(isinstance(v, bool) or int(v) != v for v in ints):
            raise DomainError(f"{self.id}: parameters must be integers, got {params}")
        k, n = int(k), int(n)
        m = None if m is None else int(m)
        if self.uses_m and m is None:
            raise DomainError(f"{self.id} needs the parameter m")
        if not self.constraint(k, m, n):
            raise DomainError(f"{self.id}: (k={k}, m={m}, n={n}) violates {self.constraint_text}")
        return (k, m, n)

    def build(self, params: Params, base: Distribution | None = None) -> tuple[RandomExpr, RandomExpr]:
        k, m, n = self.check(params)
        base = base if base is not None else self.matching_base((k, m, n))
        return self.lhs(k, m, n, base), self.rhs(k, m, n, base)

    def instances(self, n_max: int) -> list[Params]:
        """All valid ``(k, m, n)`` with ``n <= n_max``, in lexicographic order."""
        out = []
        for n in range(1, n_max + 1):
            for k in range(1, n + 1):
                ms = range(0, n + 1) if self.uses_m else [None]
                for m in ms:
                    if self.constraint(k, m, n):
                        out.append((k, m, n))
        return sorted(out, key=lambda p: (p[2], p[0], -1 if p[1] is None else p[1]))

    def to_json(self) -> dict:
        return {
            "id": self.id,
            "formula": self.formula,
            "constraint": self.constraint_text,
            "family": self.family,
            "paper_tag": self.paper_tag,
        }


def _exp_sum_chain(k: int, n: int, base: Distribution) -> RandomExpr:
    # sum_{j=1}^{k} X_{k-j+1} / (n-j+1), grouped left to right
    expr: RandomExpr = Scale(Leaf(base, f"x{k}"), 1.0 / n)
    for j in range(2, k + 1):
        expr = Sum(expr, Scale(Leaf(base, f"x{k - j + 1}"), 1.0 / (n - j + 1)))
    return expr


def _uniform_product_chain(k: int, n: int, base: Distribution) -> RandomExpr:
    expr: RandomExpr = Power(Leaf(base, "u1"), 1.0 / n)
    for j in range(2, k + 1):
        expr = Product(expr, Power(Leaf(base, f"u{j}"), 1.0 / (n - j + 1)))
    return expr


_XI = Exponential(1.0)
_U = Uniform01()


def _records() -> list[IdentityRecord]:
    R = IdentityRecord
    return [
        R(
            "L6ii", "xi[k:n] =d sum_{j=1..k} xi_{k-j+1}/(n-j+1)", "1 <= k <= n",
            "ExponentialOrderStat", "exponential spacings", False,
            lambda k, m, n: 1 <= k <= n,
            lambda k, m, n, b: _os(b, k, n, "lhs"),
            lambda k, m, n, b: _exp_sum_chain(k, n, b),
        ),
        R(
            "L6iii", "xi[m:n] =d xi[m-k:n-k] + xi'[k:n]", "1 <= k < m <= n",
            "ExponentialOrderStat", "exponential split", True,
            lambda k, m, n: 1 <= k < m <= n,
            lambda k, m, n, b: _os(b, m, n, "lhs"),
            lambda k, m, n, b: Sum(_os(b, m - k, n - k, "a"), _os(b, k, n, "b")),
        ),
        R(
            "L6iv", "U[n-k+1:n] =d prod_{j=1..k} U_j^(1/(n-j+1))", "1 <= k <= n",
            "UniformOrderStat", "uniform maximum product", False,
            lambda k, m, n: 1 <= k <= n,
            lambda k, m, n, b: _os(b, n - k + 1, n, "lhs"),
            lambda k, m, n, b: _uniform_product_chain(k, n, b),
        ),
        R(
            "L6v", "U[k:n] =d U[k:m-1] * U'[m:n]", "1 <= k < m <= n",
            "UniformOrderStat", "uniform split", True,
            lambda k, m, n: 1 <= k < m <= n,
            lambda k, m, n, b: _os(b, k, n, "lhs"),
            lambda k, m, n, b: Product(_os(b, k, m - 1, "a"), _os(b, m, n, "b")),
        ),
        R(
            "L7i", "1/Y[k:n] =d Y[n-k+1:n]", "1 <= k <= n",
            "ParetoII", "Pareto reciprocal", False,
            lambda k, m, n: 1 <= k <= n,
            lambda k, m, n, b: Power(_os(b, k, n, "lhs"), -1.0),
            lambda k, m, n, b: _os(b, n - k + 1, n, "y"),
        ),
        R(
            "L7ii", "Y[k:n-1] =d Y[k:n] / U^(1/(n-k))", "1 <= k <= n-1",
            "ParetoII", "Pareto uniform-power scaling", False,
            lambda k, m, n: 1 <= k <= n - 1,
            lambda k, m, n, b: _os(b, k, n - 1, "lhs"),
            lambda k, m, n, b: quotient(_os(b, k, n, "y"), Power(Leaf(_U, "u"), 1.0 / (n - k))),
        ),
        R(
            "L7iii", "Y[k:n-m] =d Y[k:n] / U[n-k-m+1:n-k]", "1 <= k <= n-m",
            "ParetoII", "Pareto uniform order-stat scaling", True,
            lambda k, m, n: m >= 1 and 1 <= k <= n - m,
            lambda k, m, n, b: _os(b, k, n - m, "lhs"),
            lambda k, m, n, b: quotient(_os(b, k, n, "y"), _os(_U, n - k - m + 1, n - k, "u")),
        ),
        R(
            "L7iv", "Y[k:n-1] =d Y[k+1:n] * U^(1/k)", "1 <= k <= n-1",
            "ParetoII", "Pareto neighbour scaling", False,
            lambda k, m, n: 1 <= k <= n - 1,
            lambda k, m, n, b: _os(b, k, n - 1, "lhs"),
            lambda k, m, n, b: Product(_os(b, k + 1, n, "y"), Power(Leaf(_U, "u"), 1.0 / k)),
        ),
        R(
            "L7v", "Y[m-k:n-k] =d Y[m:n] * U[m-k:m-1]", "2 <= k+1 <= m <= n",
            "ParetoII", "Pareto order-stat product", True,
            lambda k, m, n: 2 <= k + 1 <= m <= n,
            lambda k, m, n, b: _os(b, m - k, n - k, "lhs"),
            lambda k, m, n, b: Product(_os(b, m, n, "y"), _os(_U, m - k, m - 1, "u")),
        ),
        R(
            "L8i", "X[k:n-1] =d X[k:n] + xi/(n-k)", "1 <= k <= n-1",
            "Logistic", "logistic exponential shift", False,
            lambda k, m, n: 1 <= k <= n - 1,
            lambda k, m, n, b: _os(b, k, n - 1, "lhs"),
            lambda k, m, n, b: Sum(_os(b, k, n, "x"), Scale(Leaf(_XI, "xi"), 1.0 / (n - k))),
        ),
        R(
            "L8ii", "X[k:n-m] =d X[k:n] + xi[m:n-k]", "1 <= k <= n-m",
            "Logistic", "logistic exponential order-stat shift", True,
            lambda k, m, n: m >= 1 and 1 <= k <= n - m,
            lambda k, m, n, b: _os(b, k, n - m, "lhs"),
            lambda k, m, n, b: Sum(_os(b, k, n, "x"), _os(_XI, m, n - k, "xi")),
        ),
        R(
            "L8iii", "X[k:n-1] =d X[k+1:n] - xi/k", "1 <= k <= n-1",
            "Logistic", "logistic neighbour shift", False,
            lambda k, m, n: 1 <= k <= n - 1,
            lambda k, m, n, b: _os(b, k, n - 1, "lhs"),
            lambda k, m, n, b: difference(_os(b, k + 1, n, "x"), Scale(Leaf(_XI, "xi"), 1.0 / k)),
        ),
        R(
            "L8iv", "X[m-k:n-k] =d X[m:n] - xi[k:m-1]", "2 <= k+1 <= m <= n",
            "Logistic", "logistic order-stat difference", True,
            lambda k, m, n: 2 <= k + 1 <= m <= n,
            lambda k, m, n, b: _os(b, m - k, n - k, "lhs"),
            lambda k, m, n, b: difference(_os(b, m, n, "x"), _os(_XI, k, m - 1, "xi")),
        ),
        R(
            "PBmax", "Y[k:k] =d Y[k:n] / B, B ~ Beta(1, n-k)", "1 <= k <= n-1",
            "ParetoII", "Pareto beta scaling, maximum", False,
            lambda k, m, n: 1 <= k <= n - 1,
            lambda k, m, n, b: _os(b, k, k, "lhs"),
            lambda k, m, n, b: quotient(_os(b, k, n, "y"), Leaf(Beta(1.0, n - k), "B")),
        ),
        R(
            "PBmin", "Y[1:k] =d Y[n-k+1:n] * B, B ~ Beta(1, n-k)", "1 <= k <= n-1",
            "ParetoII", "Pareto beta scaling, minimum", False,
            lambda k, m, n: 1 <= k <= n - 1,
            lambda k, m, n, b: _os(b, 1, k, "lhs"),
            lambda k, m, n, b: Product(_os(b, n - k + 1, n, "y"), Leaf(Beta(1.0, n - k), "B")),
        ),
    ]


_CATALOG = _records()
_BY_ID = {r.id: r for r in _CATALOG}


def catalog() -> list[IdentityRecord]:
    """The fifteen parametric identity records, in id order."""
    return list(_CATALOG)


def demo_records() -> list[IdentityRecord]:
    """The two introductory equations with a unit exponential shift.

    ``MinShift``: ``X =d X[1:2] + xi``, solved by the logistic law.
    ``RevExp``: ``X - xi =d X[1:2]``, solved by the reversed exponential
    ``F(x) = exp(x/2)``, ``x <= 0`` (location fixed at 0), written here as
    ``X = -2 xi_0`` so that ``X[1:2] = -2 xi[2:2]``.
    """
    R = IdentityRecord
    return [
        R(
            "MinShift", "X =d X[1:2] + xi", "k = 1, n = 2",
            "Logistic", "logistic shifted minimum", False,
            lambda k, m, n: (k, n) == (1, 2),
            lambda k, m, n, b: Leaf(b, "lhs"),
            lambda k, m, n, b: Sum(_os(b, 1, 2, "x"), Leaf(_XI, "xi")),
        ),
        R(
            "RevExp", "X - xi =d X[1:2], X = -2 xi_0", "k = 1, n = 2",
            "NegativeExponential", "reversed exponential", False,
            lambda k, m, n: (k, n) == (1, 2),
            lambda k, m, n, b: difference(Scale(Leaf(b, "x"), -2.0), Leaf(_XI, "xi")),
            lambda k, m, n, b: Scale(_os(b, 2, 2, "y"), -2.0),
            base_for=lambda k, m, n: Exponential(1.0),
        ),
    ]


def scaled_pareto_record(alpha: float) -> IdentityRecord:
    """``Y[k:n-1] =d Y[k:n] / U^(1/alpha)``, matched by ParetoII(1, alpha/(n-k))."""
    alpha = float(alpha)
    if not alpha > 0:
        raise DomainError(f"alpha must be positive, got {alpha}")
    return IdentityRecord(
        f"C1[alpha={alpha:g}]", f"Y[k:n-1] =d Y[k:n] / U^(1/{alpha:g})", "1 <= k <= n-1",
        "ParetoII", "Pareto power scaling", False,
        lambda k, m, n: 1 <= k <= n - 1,
        lambda k, m, n, b: _os(b, k, n - 1, "lhs"),
        lambda k, m, n, b: quotient(_os(b, k, n, "y"), Power(Leaf(_U, "u"), 1.0 / alpha)),
        base_for=lambda k, m, n: ParetoII(1.0, alpha / (n - k)),
    )


def get_identity(identity_id: str) -> IdentityRecord:
    """Look up a catalog (or demo) record by id."""
    if identity_id in _BY_ID:
        return _BY_ID[identity_id]
    for rec in demo_records():
        if rec.id == identity_id:
            return rec
    raise IdentityNotFound(identity_id)


# ---------------------------------------------------------------------------
# verification
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MCSettings:
    size: int = 100_000
    seed: int = 0

    def __post_init__(self):
        if self.size < 2:
            raise DomainError("Monte Carlo size must be at least 2")


def task_seed_sequence(root_seed: int, record: IdentityRecord, params: Params) -> np.random.SeedSequence:
    """Per-task seed: ``SeedSequence(root_seed, spawn_key=(crc32(id), k, m or 0, n))``.

    The LHS and RHS simulations use the two children of ``.spawn(2)``.
    """
    import zlib

    k, m, n = params
    key = (zlib.crc32(record.id.encode()), int(k), int(m or 0), int(n))
    return np.random.SeedSequence(int(root_seed), spawn_key=key)


@dataclass
class VerificationReport:
    identity: str
    k: int
    m: Optional[int]
    n: int
    family: str
    base: dict
    grid: dict
    tolerance: float
    sup_cdf_distance: Optional[float] = None
    argmax_x: Optional[float] = None
    mc_two_sample_distance: Optional[float] = None
    mc_sample_size: Optional[int] = None
    mc_threshold: Optional[float] = None
    seed: Optional[int] = None
    quadrature_pass: Optional[bool] = None
    mc_pass: Optional[bool] = None
    error: Optional[str] = None

    @property
    def passed(self) -> bool:
        if self.error is not None or not self.quadrature_pass:
            return False
        return self.mc_pass is not False

    @property
    def verdict(self) -> str:
        return "pass" if self.passed else "fail"

    def to_json(self) -> dict:
        out = {k: v for k, v in self.__dict__.items()}
        out["verdict"] = self.verdict
        return out

    CSV_HEADER = ("id", "k", "m", "n", "family", "sup_dist", "mc_dist", "verdict")

    def csv_row(self) -> list[str]:
        def fmt(v):
            return "" if v is None else repr(float(v))

        return [
            self.identity,
            str(self.k),
            "" if self.m is None else str(self.m),
            str(self.n),
            self.family,
            fmt(self.sup_cdf_distance),
            fmt(self.mc_two_sample_distance),
            self.verdict,
        ]


def _grid_reference(lhs: RandomExpr, rhs: RandomExpr) -> RandomExpr:
    if is_simple(lhs):
        return lhs
    if is_simple(rhs):
        return rhs
    return lhs


def verify_identity(
    record: IdentityRecord,
    params: Params,
    base: Distribution | None = None,
    grid: GridSpec | None = None,
    tol: float = 1e-6,
    mc: MCSettings | None = None,
    quad: QuadSettings | None = None,
) -> VerificationReport:
    """Compare both sides of ``record`` at ``params`` over ``base``.

    The quadrature verdict is ``sup |F_lhs - F_rhs| < tol`` over the grid;
    quantile-spaced grids use the quantiles of the simpler side.  With ``mc``
    set, both sides are also simulated and the two-sample Kolmogorov
    distance is compared against ``1.95 sqrt(2 / size)``.

    Raises
    ------
    DomainError
        If ``params`` violate the record's constraint.
    QuadratureError
        If an integral fails; ``exc.report`` is the partial report.
    """
    k, m, n = record.check(params)
    base = base if base is not None else record.matching_base((k, m, n))
    grid = grid or DEFAULT_GRID
    quad = quad or QuadSettings()
    report = VerificationReport(
        identity=record.id, k=k, m=m, n=n, family=record.family,
        base=base.to_json(), grid=grid.to_json(), tolerance=float(tol),
    )
    lhs, rhs = record.build((k, m, n), base)
    try:
        x = grid.nodes(_grid_reference(lhs, rhs), quad)
        F_l = np.asarray(expr_cdf(lhs, x, quad))
        F_r = np.asarray(expr_cdf(rhs, x, quad))
    except QuadratureError as exc:
        report.error = str(exc)
        exc.report = report
        raise
    diff = np.abs(F_l - F_r)
    i = int(np.argmax(diff))
    report.sup_cdf_distance = float(diff[i])
    report.argmax_x = float(x[i])
    report.quadrature_pass = bool(report.sup_cdf_distance < tol)
    if mc is not None:
        ss = task_seed_sequence(mc.seed, record, (k, m, n))
        rng_l, rng_r = (np.random.default_rng(s) for s in ss.spawn(2))
        a = expr_sample(lhs, rng_l, mc.size)
        b = expr_sample(rhs, rng_r, mc.size)
        report.mc_two_sample_distance = float(ks_2samp_stat(a, b))
        report.mc_sample_size = int(mc.size)
        report.mc_threshold = mc_bound(mc.size, mc.size)
        report.seed = int(mc.seed)
        report.mc_pass = bool(report.mc_two_sample_distance < report.mc_threshold)
    return report


def verify_many(
    records: list[IdentityRecord],
    n_max: int,
    base: Distribution | None = None,
    grid: GridSpec | None = None,
    tol: float = 1e-6,
    mc: MCSettings | None = None,
    quad: QuadSettings | None = None,
) -> list[VerificationReport]:
    """Verify every valid instance with ``n <= n_max``; sorted by id then params."""
    out = []
    for rec in sorted(records, key=lambda r: r.id):
        for params in rec.instances(n_max):
            out.append(verify_identity(rec, params, base, grid, tol, mc, quad))
    return out
