"""Goodness-of-fit test built on a characterizing identity.

For the logistic target the identity is ``X[k:n-1] =d X[k:n] + xi/(n-k)``;
for the Pareto II target it is ``Y[k:n-1] =d Y[k:n] / U^(1/(n-k))``.  The
data are split at random into disjoint blocks of sizes ``n-1`` and ``n``;
block order statistics give an LHS and an RHS sample (the RHS with its
independent exponential shift or uniform scaling), and the two are compared
with a Kolmogorov distance calibrated by permutation.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .distributions import Distribution
from .errors import DomainError

__all__ = [
    "GofConfig",
    "TestReport",
    "CalibrationSummary",
    "gof_test",
    "calibration_run",
    "identity_samples",
    "permutation_pvalue",
    "read_data",
]

TARGETS = ("Logistic", "ParetoII")


@dataclass(frozen=True)
class GofConfig:
    target: str = "Logistic"
    k: int = 1
    n: int = 2
    resamples: int = 999
    mc_block: int = 10_000
    seed: int = 0
    level: float = 0.05

    def __post_init__(self):
        if self.target not in TARGETS:
            raise DomainError(f"target must be one of {TARGETS}, got {self.target!r}")
        for name in ("k", "n", "resamples", "mc_block", "seed"):
            val = getattr(self, name)
            if isinstance(val, bool) or int(val) != val:
                raise DomainError(f"{name} must be an integer, got {val!r}")
            object.__setattr__(self, name, int(val))
        if not 1 <= self.k <= self.n - 1:
            raise DomainError(f"need 1 <= k <= n-1, got k={self.k}, n={self.n}")
        if self.resamples < 100:
            raise DomainError(f"resamples must be at least 100, got {self.resamples}")
        if self.mc_block < 10_000:
            raise DomainError(f"mc_block must be at least 10000, got {self.mc_block}")
        if self.seed < 0:
            raise DomainError("seed must be non-negative")
        if not 0.0 < self.level <= 0.5:
            raise DomainError(f"level must lie in (0, 0.5], got {self.level}")

    def to_json(self) -> dict:
        return asdict(self)


@dataclass
class TestReport:
    statistic: float
    p_value: float
    decision: str
    config: dict
    diagnostics: dict = field(default_factory=dict)

    __test__ = False  # not a pytest class

    @property
    def rejected(self) -> bool:
        return self.decision == "reject"

    def to_json(self) -> dict:
        return asdict(self)


@dataclass
class CalibrationSummary:
    truth: dict
    repetitions: int
    rejections: int
    rate: float
    se: float
    se_nominal: float
    config: dict

    def within(self, target: float, n_se: float = 3.0) -> bool:
        """True when ``|rate - target|`` is at most ``n_se`` binomial SEs at ``target``."""
        se = math.sqrt(target * (1 - target) / self.repetitions)
        return abs(self.rate - target) <= n_se * se

    def to_json(self) -> dict:
        return asdict(self)


def _streams(rng: np.random.Generator) -> tuple[np.random.Generator, ...]:
    # shuffle and shift draws come from separate children so that each
    # consumes a fixed pattern regardless of the data values
    seeds = rng.integers(0, 2**63, size=2)
    return tuple(np.random.default_rng(int(s)) for s in seeds)


def identity_samples(data, cfg: GofConfig, rng: np.random.Generator):
    """LHS and RHS samples of the identity, and block diagnostics."""
    x = np.asarray(data, dtype=float).ravel()
    n, k = cfg.n, cfg.k
    if x.size < 40 * n:
        raise DomainError(f"need at least {40 * n} observations for n={n}, got {x.size}")
    if not np.all(np.isfinite(x)):
        raise DomainError("data must be finite")
    if cfg.target == "ParetoII" and np.any(x <= 0):
        raise DomainError("Pareto II data must be positive")
    if cfg.target == "Logistic":
        x = x - np.median(x)
    shuffle_rng, shift_rng = _streams(rng)
    x = x[shuffle_rng.permutation(x.size)]
    blocks = x.size // (2 * n - 1)
    left = x[: blocks * (n - 1)].reshape(blocks, n - 1)
    right = x[blocks * (n - 1) : blocks * (2 * n - 1)].reshape(blocks, n)
    lhs = np.sort(left, axis=1)[:, k - 1]
    rhs = np.sort(right, axis=1)[:, k - 1]
    if cfg.target == "Logistic":
        rhs = rhs + shift_rng.exponential(1.0 / (n - k), size=blocks)
    else:
        u = (shift_rng.integers(0, 2**53, size=blocks) + 0.5) / 2.0**53
        rhs = rhs / u ** (1.0 / (n - k))
    diag = {
        "observations": int(x.size),
        "blocks": int(blocks),
        "lhs_size": int(lhs.size),
        "rhs_size": int(rhs.size),
        "unused": int(x.size - blocks * (2 * n - 1)),
    }
    return lhs, rhs, diag


def _ks_numerators(labels: np.ndarray, ends: np.ndarray, m1: int, m2: int) -> np.ndarray:
    """``m1 m2 sup|F1 - F2|`` for each row of boolean ``labels`` over the pooled order."""
    c1 = np.cumsum(labels, axis=-1, dtype=np.int64)[..., ends]
    c2 = (ends + 1) - c1
    return np.max(np.abs(c1 * m2 - c2 * m1), axis=-1)


def permutation_pvalue(a, b, resamples: int, rng: np.random.Generator, batch: int = 250):
    """Two-sample Kolmogorov statistic and its pooled-permutation p-value.

    Returns ``(statistic, p_value)`` with ``p = (1 + #{T* >= T}) / (R + 1)``.
    Statistics are compared as exact integers ``m1 m2 D``.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    m1, m2 = a.size, b.size
    pooled = np.concatenate([a, b])
    order = np.argsort(pooled, kind="stable")
    sorted_vals = pooled[order]
    # evaluate the ECDFs only after the last member of each tie group
    ends = np.flatnonzero(np.append(sorted_vals[1:] != sorted_vals[:-1], True))
    is_a = np.zeros(pooled.size, dtype=bool)
    is_a[:m1] = True
    observed = int(_ks_numerators(is_a[order], ends, m1, m2))
    exceed = 0
    done = 0
    while done < resamples:
        size = min(batch, resamples - done)
        labels = rng.permuted(np.broadcast_to(is_a, (size, pooled.size)), axis=1)
        exceed += int(np.sum(_ks_numerators(labels, ends, m1, m2) >= observed))
        done += size
    return observed / (m1 * m2), (1 + exceed) / (resamples + 1)


def gof_test(data, cfg: GofConfig, rng: np.random.Generator | None = None) -> TestReport:
    """Test whether ``data`` satisfy the target's characterizing identity.

    The generator defaults to ``default_rng(cfg.seed)``.  Logistic data are
    centred at their median first; Pareto II data are used as they are (the
    identity is scale-equivariant, so the statistic does not see the scale).

    Raises
    ------
    DomainError
        Fewer than ``40 n`` observations, non-finite data, or non-positive
        data under the Pareto II target.
    """
    rng = rng if rng is not None else np.random.default_rng(cfg.seed)
    lhs, rhs, diag = identity_samples(data, cfg, rng)
    perm_rng = np.random.default_rng(int(rng.integers(0, 2**63)))
    stat, p = permutation_pvalue(lhs, rhs, cfg.resamples, perm_rng)
    decision = "reject" if p <= cfg.level else "retain"
    return TestReport(float(stat), float(p), decision, cfg.to_json(), diag)


def calibration_run(
    cfg: GofConfig,
    truth: Distribution,
    repetitions: int,
    rng: np.random.Generator | None = None,
) -> CalibrationSummary:
    """Rejection frequency of :func:`gof_test` on ``repetitions`` samples of size ``cfg.mc_block`` from ``truth``."""
    if isinstance(repetitions, bool) or int(repetitions) != repetitions or repetitions < 50:
        raise DomainError(f"repetitions must be an integer of at least 50, got {repetitions!r}")
    repetitions = int(repetitions)
    rng = rng if rng is not None else np.random.default_rng(cfg.seed)
    children = np.random.SeedSequence(int(rng.integers(0, 2**63))).spawn(repetitions)
    rejections = 0
    for child in children:
        data_ss, test_ss = child.spawn(2)
        data = truth.sample(np.random.default_rng(data_ss), cfg.mc_block)
        report = gof_test(data, cfg, np.random.default_rng(test_ss))
        rejections += report.rejected
    rate = rejections / repetitions
    return CalibrationSummary(
        truth=truth.to_json(),
        repetitions=repetitions,
        rejections=int(rejections),
        rate=rate,
        se=math.sqrt(rate * (1 - rate) / repetitions),
        se_nominal=math.sqrt(cfg.level * (1 - cfg.level) / repetitions),
        config=cfg.to_json(),
    )


def read_data(path) -> np.ndarray:
    """One value per line; plain text or single-column CSV, optional header."""
    values = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            text = line.strip().split(",")[0].strip()
            if not text or text.startswith("#"):
                continue
            try:
                values.append(float(text))
            except ValueError:
                if values or lineno > 1:
                    raise DomainError(f"{path}:{lineno}: not a number: {text!r}") from None
    return np.asarray(values, dtype=float)
