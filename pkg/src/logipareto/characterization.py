"""Analytic side of the characterizations.

* Closed-form solutions of ``|x|^a F'(x) = theta F(x) (1 - F(x)^r)`` and
  their residuals.
* Residuals of the functional equations satisfied by the Pareto II law
  (``eq6``, ``eq9``, ``eq14`` below), for a closed-form law or for a CDF
  tabulated on a grid.
* A fixed-point solver that recovers the Pareto II CDF from ``eq9`` or
  ``eq14`` starting from an arbitrary CDF.

With ``G_{k,n}(y) = I_{G(y)}(k, n-k+1)`` the equations are::

    eq6:  y G'_{k,n-1}(y) = (n-k) [G_{k,n}(y) - G_{k,n-1}(y)]
    eq9:  G(y)^k = int_0^1 G_{k,n}(y u) dF_B(u),       B  ~ Beta(1, n-k)
    eq14: G_{k,n-m}(y) = int_0^1 G_{k,n}(y u) dF_B1(u), B1 ~ Beta(n-m-k+1, m)
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import PchipInterpolator
from scipy.special import expit, logit

from .distributions import Beta, Distribution, ParetoII, Uniform01
from .errors import ConfigurationError, DomainError, NonConvergenceError, ParameterError
from .identities import GridSpec
from .order_statistics import OrderStatSpec, order_stat_cdf, order_stat_pdf
from .quadrature import QuadSettings, integrate
from .special import beta_pdf, beta_ppf, reg_inc_beta

__all__ = [
    "Lemma5Params",
    "lemma5_solution",
    "lemma5_derivative",
    "lemma5_quantile",
    "ode_residual",
    "GridFunction",
    "EQUATIONS",
    "expected_shift_law",
    "functional_eq_residual",
    "pareto_reduced_residual",
    "fixed_point_grid",
    "FixedPointResult",
    "fixed_point_solve",
    "beta_moment",
]


# ---------------------------------------------------------------------------
# ODE solutions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Lemma5Params:
    """Parameters of ``|x|^a F' = theta F (1 - F^r)`` and of its solution family.

    For ``a < 1`` the ODE is read with ``|x|^a`` so that it makes sense on
    the whole line; the solution uses ``s(x) = sign(x) |x|^(1-a)``.
    """

    r: float
    theta: float
    a: float
    lam: float

    def __post_init__(self):
        for name in ("r", "theta", "a", "lam"):
            val = getattr(self, name)
            if isinstance(val, bool) or not isinstance(val, (int, float)) or not math.isfinite(val):
                raise ParameterError(f"{name} must be a finite real, got {val!r}")
            object.__setattr__(self, name, float(val))
        if self.r <= 0 or self.theta <= 0 or self.lam <= 0:
            raise ParameterError("r, theta and lam must be positive")
        if not 0.0 <= self.a <= 1.0:
            raise ParameterError(f"a must lie in [0, 1], got {self.a}")

    @property
    def support(self) -> tuple[float, float]:
        return (0.0, math.inf) if self.a == 1.0 else (-math.inf, math.inf)


def _logodds(p: Lemma5Params, x: np.ndarray) -> np.ndarray:
    # z(x) with F(x)^r = expit(z(x)); callers keep x > 0 on the a = 1 branch
    if p.a == 1.0:
        return math.log(p.lam) + p.r * p.theta * np.log(x)
    c = p.r * p.theta / (1.0 - p.a)
    return math.log(p.lam) + c * np.sign(x) * np.abs(x) ** (1.0 - p.a)


def lemma5_solution(p: Lemma5Params, x):
    """``F(x) = expit(z(x))^(1/r)``.

    ``a = 1``: ``z = log(lam) + r theta log x`` on ``x > 0``, and ``F = 0`` for ``x <= 0``.
    ``a < 1``: ``z = log(lam) + r theta s(x) / (1-a)`` on the whole line.
    """
    arr = np.asarray(x, dtype=float)
    out = np.zeros(arr.shape)
    mask = arr > 0 if p.a == 1.0 else np.ones(arr.shape, dtype=bool)
    if mask.any():
        out[mask] = expit(_logodds(p, arr[mask])) ** (1.0 / p.r)
    return float(out) if out.ndim == 0 else out


def lemma5_derivative(p: Lemma5Params, x):
    """Closed-form ``F'(x)`` by the chain rule; undefined at ``x = 0`` when ``a > 0``."""
    arr = np.asarray(x, dtype=float)
    if p.a > 0 and np.any(arr == 0):
        raise DomainError("the derivative is not evaluated at x = 0 when a > 0")
    if p.a == 1.0 and np.any(arr < 0):
        raise DomainError("x must be positive when a = 1")
    z = _logodds(p, arr)
    e = expit(z)
    # d/dz expit(z)^(1/r) = (1/r) expit^(1/r) (1 - expit)
    dFdz = e ** (1.0 / p.r) * expit(-z) / p.r
    if p.a == 1.0:
        dz = p.r * p.theta / arr
    else:
        dz = p.r * p.theta * np.abs(arr) ** (-p.a) if p.a > 0 else np.full(arr.shape, p.r * p.theta)
    out = dFdz * dz
    return float(out) if out.ndim == 0 else out


def lemma5_quantile(p: Lemma5Params, q):
    """Inverse of :func:`lemma5_solution` on (0, 1)."""
    arr = np.asarray(q, dtype=float)
    if np.any((arr <= 0) | (arr >= 1)):
        raise DomainError("quantile: q must lie in the open interval (0, 1)")
    z = logit(arr**p.r) - math.log(p.lam)
    if p.a == 1.0:
        out = np.exp(z / (p.r * p.theta))
    else:
        s = z * (1.0 - p.a) / (p.r * p.theta)
        out = np.sign(s) * np.abs(s) ** (1.0 / (1.0 - p.a))
    return float(out) if out.ndim == 0 else out


def _lemma5_nodes(p: Lemma5Params, grid: GridSpec) -> np.ndarray:
    if grid.spacing == "quantile":
        return np.asarray(lemma5_quantile(p, np.linspace(grid.lower, grid.upper, grid.points)))
    return grid.nodes()


def ode_residual(p: Lemma5Params, grid: GridSpec) -> float:
    """``max |(|x|^a F'(x)) - theta F(x)(1 - F(x)^r)|`` over the grid.

    Raises
    ------
    DomainError
        If ``a = 1`` and the grid reaches ``x <= 0``.
    """
    x = _lemma5_nodes(p, grid)
    if p.a == 1.0 and np.any(x <= 0):
        raise DomainError("for a = 1 the grid must lie in (0, inf)")
    F = np.asarray(lemma5_solution(p, x))
    if p.a == 1.0:
        lhs = x * np.asarray(lemma5_derivative(p, x))
    else:
        # |x|^a cancels the |x|^-a of dz/dx, so the product is finite at 0
        z = _logodds(p, x)
        lhs = expit(z) ** (1.0 / p.r) * expit(-z) * p.theta
    rhs = p.theta * F * (1.0 - F**p.r)
    return float(np.max(np.abs(lhs - rhs)))


# ---------------------------------------------------------------------------
# tabulated CDFs
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class GridFunction:
    """A CDF on ``(0, inf)`` known at increasing nodes ``y``.

    Between ``0`` (where it is 0) and the nodes it is piecewise linear; past
    the last node it takes the asymptotic value 1.
    """

    y: np.ndarray
    values: np.ndarray
    grid: GridSpec | None = field(default=None, compare=False)

    def __post_init__(self):
        y = np.asarray(self.y, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if y.ndim != 1 or y.shape != v.shape or y.size < 3:
            raise DomainError("a grid function needs matching 1-D arrays of at least 3 nodes")
        if np.any(np.diff(y) <= 0) or y[0] <= 0:
            raise DomainError("grid nodes must be positive and strictly increasing")
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "values", v)

    def is_cdf(self, tol: float = 0.0) -> bool:
        v = self.values
        return bool(np.all(v >= -tol) and np.all(v <= 1 + tol) and np.all(np.diff(v) >= -tol))

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        out = np.interp(t, np.concatenate([[0.0], self.y]), np.concatenate([[0.0], self.values]))
        out = np.where(t > self.y[-1], 1.0, out)
        out = np.where(t <= 0, 0.0, out)
        return float(out) if out.ndim == 0 else out

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["y", "F"])
        for a, b in zip(self.y, self.values):
            w.writerow([repr(float(a)), repr(float(b))])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "GridFunction":
        rows = [r for r in csv.reader(io.StringIO(text)) if r]
        if rows and rows[0][0].strip().lower() == "y":
            rows = rows[1:]
        try:
            arr = np.array([[float(a), float(b)] for a, b in rows])
        except ValueError as exc:
            raise DomainError(f"malformed grid-function CSV: {exc}") from exc
        return cls(arr[:, 0], arr[:, 1])


# ---------------------------------------------------------------------------
# functional equations
# ---------------------------------------------------------------------------

EQUATIONS = ("eq6", "eq9", "eq14")


def _normalize_eq(eq: str) -> str:
    key = str(eq).lower().replace("eq.", "eq").replace(" ", "")
    if key not in EQUATIONS:
        raise ConfigurationError(f"unknown equation {eq!r}; choose from {EQUATIONS}")
    return key


def _check_params(eq: str, k: int, n: int, m: int | None) -> None:
    if eq == "eq14":
        if m is None or not (m >= 1 and 1 <= k <= n - m):
            raise DomainError(f"eq14 needs 1 <= k <= n-m with m >= 1, got k={k}, m={m}, n={n}")
    elif not 1 <= k <= n - 1:
        raise DomainError(f"{eq} needs 1 <= k <= n-1, got k={k}, n={n}")


def expected_shift_law(eq: str, k: int, n: int, m: int | None = None) -> Beta:
    """The scale-mixing law of each equation.

    ``eq6`` comes from dividing by ``U^(1/(n-k))``, which is Beta(n-k, 1).
    """
    eq = _normalize_eq(eq)
    _check_params(eq, k, n, m)
    if eq == "eq6":
        return Beta(float(n - k), 1.0)
    if eq == "eq9":
        return Beta(1.0, float(n - k))
    return Beta(float(n - m - k + 1), float(m))


def _as_beta(law: Distribution) -> Distribution:
    return Beta(1.0, 1.0) if isinstance(law, Uniform01) else law


def _ostat_cdf(F, k: int, n: int, y: np.ndarray) -> np.ndarray:
    if isinstance(F, Distribution):
        return np.asarray(order_stat_cdf(OrderStatSpec(F, k, n), y))
    return np.asarray(reg_inc_beta(k, n - k + 1, np.clip(F(y), 0.0, 1.0)))


def _mixture(F, k: int, n: int, law: Beta, y: np.ndarray, quad: QuadSettings) -> np.ndarray:
    """``int_0^1 F_{k,n}(y u) dF_law(u)`` at every ``y``."""
    a, b = law.alpha, law.beta

    def integrand(u):
        vals = _ostat_cdf(F, k, n, np.outer(y, u).ravel()).reshape(y.size, u.size)
        return vals * np.asarray(beta_pdf(a, b, u))

    # Beta densities with a parameter below 1 are singular at an end; the
    # GK panels never touch the endpoints, and the mass there is tiny.
    value, _ = integrate(integrand, 0.0, 1.0, quad)
    return value


def _positive_nodes(F, grid: GridSpec | None) -> np.ndarray:
    if grid is None:
        if isinstance(F, GridFunction):
            return F.y
        grid = GridSpec.quantile(201, 1e-4)
    if grid.spacing == "quantile":
        if not isinstance(F, Distribution):
            raise DomainError("quantile spacing needs a closed-form law")
        y = np.asarray(F.quantile(np.linspace(grid.lower, grid.upper, grid.points)))
    else:
        y = grid.nodes()
    if np.any(y <= 0):
        raise DomainError("functional equations are checked on a positive grid")
    return y


def functional_eq_residual(
    eq: str,
    F,
    k: int,
    n: int,
    m: int | None = None,
    shift_law: Distribution | None = None,
    grid: GridSpec | None = None,
    quad: QuadSettings | None = None,
) -> float:
    """Largest absolute residual of ``eq`` for the CDF ``F`` over a positive grid.

    Parameters
    ----------
    eq : {"eq6", "eq9", "eq14"}
    F : Distribution or GridFunction
        Candidate CDF.  For ``eq6`` the derivative is analytic for a
        closed-form law and a central difference for a grid function
        (interior nodes only).
    k, n, m : int
        Order-statistic indices; ``m`` only for ``eq14``.
    shift_law : Beta, optional
        Must equal :func:`expected_shift_law`; defaults to it.
    grid : GridSpec, optional
        Quantile grid of ``F`` by default (the nodes of a grid function).

    Raises
    ------
    DomainError
        Indices outside the equation's range, or a non-positive grid.
    ConfigurationError
        ``shift_law`` is not the law the equation calls for.
    """
    eq = _normalize_eq(eq)
    expected = expected_shift_law(eq, k, n, m)
    if shift_law is not None and _as_beta(shift_law) != expected:
        raise ConfigurationError(
            f"{eq} with (k={k}, m={m}, n={n}) mixes over {expected.label()}, got {shift_law.label()}"
        )
    quad = quad or QuadSettings(abs_tol=1e-11)
    y = _positive_nodes(F, grid)

    if eq == "eq6":
        G_n = _ostat_cdf(F, k, n, y)
        G_n1 = _ostat_cdf(F, k, n - 1, y)
        if isinstance(F, Distribution):
            dG = np.asarray(order_stat_pdf(OrderStatSpec(F, k, n - 1), y))
            res = y * dG - (n - k) * (G_n - G_n1)
        else:
            dG = np.gradient(G_n1, y)
            res = (y * dG - (n - k) * (G_n - G_n1))[1:-1]
        return float(np.max(np.abs(res)))

    if eq == "eq9":
        lhs = np.asarray(F(y) if isinstance(F, GridFunction) else F.cdf(y)) ** k
    else:
        lhs = _ostat_cdf(F, k, n - m, y)
    rhs = _mixture(F, k, n, expected, y, quad)
    return float(np.max(np.abs(lhs - rhs)))


def pareto_reduced_residual(F, grid: GridSpec | None = None) -> float:
    """``max |y F'(y) - F(y)(1 - F(y))|``, the first-order form of ``eq6``."""
    y = _positive_nodes(F, grid)
    if isinstance(F, Distribution):
        Fy = np.asarray(F.cdf(y))
        res = y * np.asarray(F.pdf(y)) - Fy * (1 - Fy)
    else:
        Fy = np.asarray(F(y))
        res = (y * np.gradient(Fy, y) - Fy * (1 - Fy))[1:-1]
    return float(np.max(np.abs(res)))


def beta_moment(alpha: float, beta: float, power: float, quad: QuadSettings | None = None) -> float:
    """``E[B^power]`` for ``B ~ Beta(alpha, beta)`` by adaptive quadrature."""
    quad = quad or QuadSettings(abs_tol=1e-13)
    val, _ = integrate(lambda u: u**power * np.asarray(beta_pdf(alpha, beta, u)), 0.0, 1.0, quad)
    return float(val)


# ---------------------------------------------------------------------------
# fixed-point recovery
# ---------------------------------------------------------------------------


def fixed_point_grid(points: int = 400, lam: float = 1.0, tail: float = 1e-3, refine: int = 24) -> np.ndarray:
    """Fixed-point nodes: ``points`` in total, increasing.

    The last ``points - refine`` nodes are ParetoII(lam, 1) quantiles of
    ``i (1 - tail) / (points - refine)``.  Below the first of them sit
    ``refine`` nodes halving towards 0, so that cells near the origin are
    proportional to ``y`` and ``F(y)/y`` is resolved there.
    """
    points, refine = int(points), int(refine)
    if points - refine < 8 or refine < 0:
        raise DomainError("the fixed-point grid needs at least 8 quantile nodes")
    m = points - refine
    probs = np.arange(1, m + 1) * (1.0 - tail) / m
    body = np.asarray(ParetoII(lam, 1.0).quantile(probs))
    head = body[0] * 0.5 ** np.arange(refine, 0, -1)
    return np.concatenate([head, body])


@dataclass
class FixedPointResult:
    solution: GridFunction
    trace: list[float]
    converged: bool
    iterations: int
    slope_trace: list[float] = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "converged": self.converged,
            "iterations": self.iterations,
            "trace": [float(t) for t in self.trace],
            "slope_trace": [float(t) for t in self.slope_trace],
            "y": [float(v) for v in self.solution.y],
            "F": [float(v) for v in self.solution.values],
        }


class _MixingOperator:
    """``phi -> int_0^1 phi(y_i u) dF_law(u)`` for ``phi`` piecewise linear on the nodes.

    In ``t = y_i u`` the integral runs over the cells ``[y_{j-1}, y_j]``,
    ``j <= i`` (with ``y_{-1} = 0``).  Inside a cell ``phi`` is a polynomial
    of ``F`` and ``F`` is linear, while the beta density of ``t / y_i`` is a
    polynomial for integer parameters, so ``order`` Gauss points per cell
    make the rule exact.  Rows are built in blocks to bound memory.
    """

    _BLOCK_ENTRIES = 4_000_000

    def __init__(self, y: np.ndarray, law: Beta, order: int):
        gx, gw = np.polynomial.legendre.leggauss(order)
        self.s = 0.5 * (gx + 1.0)
        edges = np.concatenate([[0.0], y])
        h = np.diff(edges)
        self.y = y
        self.law = law
        self.order = order
        self.t = (edges[:-1, None] + h[:, None] * self.s[None, :]).ravel()
        self.cellw = (h[:, None] * (0.5 * gw)[None, :]).ravel()
        self.cell = np.repeat(np.arange(y.size), order)
        rows = max(1, self._BLOCK_ENTRIES // self.t.size)
        self.blocks = [(i, min(i + rows, y.size)) for i in range(0, y.size, rows)]
        self._cache = [self._rows(a, b) for a, b in self.blocks] if len(self.blocks) <= 4 else None

    def _rows(self, a: int, b: int) -> np.ndarray:
        yi = self.y[a:b, None]
        u = np.clip(self.t[None, :] / yi, 0.0, 1.0)
        dens = np.asarray(beta_pdf(self.law.alpha, self.law.beta, u))
        inside = self.cell[None, :] <= np.arange(a, b)[:, None]
        return np.where(inside, dens * self.cellw[None, :] / yi, 0.0)

    def points(self, F: np.ndarray, cubic: bool = True) -> np.ndarray:
        """Values of the interpolated ``F`` at the Gauss points.

        ``cubic`` selects the monotone (Fritsch-Carlson) cubic through the
        nodes, otherwise the piecewise-linear interpolant.
        """
        knots = np.concatenate([[0.0], self.y])
        vals = np.concatenate([[0.0], F])
        if cubic:
            return PchipInterpolator(knots, vals)(self.t)
        return np.interp(self.t, knots, vals)

    def apply(self, phi_at_points: np.ndarray) -> np.ndarray:
        out = np.empty(self.y.size)
        for idx, (a, b) in enumerate(self.blocks):
            W = self._cache[idx] if self._cache is not None else self._rows(a, b)
            out[a:b] = W @ phi_at_points
        return out


def _origin_slope(y: np.ndarray, F: np.ndarray, nodes: int = 8) -> float:
    """``lim_{y -> 0} F(y)/y`` estimated as the linear coefficient of a cubic fit.

    The constant term absorbs the ``O(h^2)`` offset that linear
    interpolation leaves near the origin, which would bias ``F/y`` itself.
    """
    coef = np.polynomial.polynomial.polyfit(y[:nodes] / y[nodes - 1], F[:nodes], 3)
    return float(coef[1] / y[nodes - 1])


def fixed_point_solve(
    eq: str,
    k: int,
    n: int,
    m: int | None = None,
    lam: float = 1.0,
    points: int = 400,
    init=None,
    max_iter: int = 200,
    tol: float = 1e-10,
    patience: int = 5,
    noise_floor: float = 1e-5,
) -> FixedPointResult:
    """Iterate ``eq9`` or ``eq14`` as a map on tabulated CDFs.

    One sweep evaluates the right-hand side ``R(y) = int_0^1 F_{k,n}(y u) dF(u)``
    at every node and solves the left side for the new iterate:
    ``R^(1/k)`` for ``eq9`` and the Beta(k, n-m-k+1) quantile of ``R`` for
    ``eq14``.  The result is clamped to [0, 1] and made nondecreasing.

    Both equations are invariant under ``F(y) -> F(c y)``, so the map has a
    neutral direction (the Pareto scale) and overwriting a single node does
    not hold ``lim F(y)/y = lam``.  Instead each sweep estimates that limit
    from the first nodes and rescales the argument to restore it.

    ``init`` is a callable CDF, a :class:`GridFunction`, or ``None`` for the
    clamped-linear ``min(lam y, 1)``.  The trace records the sup change
    between successive iterates; ``slope_trace`` the estimated limit before
    rescaling.

    A sweep counts towards ``patience`` only when its change exceeds both
    the previous change and ``noise_floor``.  Started at the exact solution,
    the iterate drifts by a few 1e-7 towards the discrete fixed point, which
    is not divergence.

    Raises
    ------
    DomainError
        Indices outside the equation's range or an invalid initial CDF.
    NonConvergenceError
        The change grew above ``noise_floor`` for ``patience`` consecutive sweeps.
    """
    eq = _normalize_eq(eq)
    if eq == "eq6":
        raise ConfigurationError("eq6 is a differential equation; iterate eq9 or eq14")
    law = expected_shift_law(eq, k, n, m)
    if not lam > 0:
        raise DomainError(f"lam must be positive, got {lam}")
    y = fixed_point_grid(points, lam)
    grid = GridSpec(float(y[0]), float(y[-1]), int(points), "uniform")

    if init is None:
        F = np.minimum(lam * y, 1.0)
    else:
        F = np.asarray(init(y), dtype=float)
    if np.any(~np.isfinite(F)) or np.any(F < 0) or np.any(F > 1) or np.any(np.diff(F) < 0):
        raise DomainError("the initial function must be a CDF on the grid")

    # a cubic F makes the cell integrand a polynomial of degree 3n + n - k - 1
    op = _MixingOperator(y, law, order=2 * n + 1)
    trace: list[float] = []
    slopes: list[float] = []
    rising = 0
    converged = False
    for _ in range(max_iter):
        Ft = np.clip(op.points(F), 0.0, 1.0)
        R = np.clip(op.apply(np.asarray(reg_inc_beta(k, n - k + 1, Ft))), 0.0, 1.0)
        if eq == "eq9":
            new = R ** (1.0 / k)
        else:
            new = np.asarray(beta_ppf(k, n - m - k + 1, R))
        new = np.maximum.accumulate(np.clip(new, 0.0, 1.0))
        slope = _origin_slope(y, new)
        slopes.append(slope)
        if slope > 0:
            # hold the last value past Q: the sweep never reads beyond it
            new = np.interp(y * (lam / slope), np.concatenate([[0.0], y]), np.concatenate([[0.0], new]))
        new[0] = lam * y[0]
        new = np.maximum.accumulate(new)
        change = float(np.max(np.abs(new - F)))
        if trace and change > trace[-1] and change > noise_floor:
            rising += 1
        else:
            rising = 0
        trace.append(change)
        F = new
        if rising >= patience:
            raise NonConvergenceError(f"fixed-point change grew for {patience} sweeps", trace)
        if change < tol:
            converged = True
            break
    return FixedPointResult(GridFunction(y, F, grid), trace, converged, len(trace), slopes)
