"""Order-statistic identities characterizing the logistic and Pareto II laws.

Exact CDFs of random expressions over order statistics, catalog
verification, functional-equation residuals, fixed-point recovery of the
Pareto II CDF, and a goodness-of-fit test built on the identities.
"""

from __future__ import annotations

__version__ = "0.1.0"

from .distributions import Beta, Distribution, Exponential, Logistic, Normal, ParetoII, Uniform01
from .errors import (
    ConfigurationError,
    DomainError,
    IdentityNotFound,
    NonConvergenceError,
    ParameterError,
    QuadratureError,
    StructureError,
)
from .expressions import Leaf, Negate, Power, Product, Scale, Sum, expr_cdf, expr_sample
from .identities import GridSpec, MCSettings, catalog, get_identity, verify_identity
from .order_statistics import OrderStatSpec, exp_order_laplace, order_stat_cdf

__all__ = [
    "Beta",
    "Distribution",
    "Exponential",
    "Logistic",
    "Normal",
    "ParetoII",
    "Uniform01",
    "ConfigurationError",
    "DomainError",
    "IdentityNotFound",
    "NonConvergenceError",
    "ParameterError",
    "QuadratureError",
    "StructureError",
    "Leaf",
    "Negate",
    "Power",
    "Product",
    "Scale",
    "Sum",
    "expr_cdf",
    "expr_sample",
    "GridSpec",
    "MCSettings",
    "catalog",
    "get_identity",
    "verify_identity",
    "OrderStatSpec",
    "exp_order_laplace",
    "order_stat_cdf",
]
