"""Simulation and verification toolkit for the (p, q)-coloring process."""

from .core import (
    Color,
    Edge,
    Params,
    binom2,
    budget,
    budget_table,
    derive_params,
    fresh,
    kappa_from_mu,
    mu_weight,
    real,
    repeat_budget,
    repeats,
)
from .errors import EnumerationError, ParameterError, PQForgeError, PreconditionError, UnionError

# the Platonic color constructor lives in pqforge.core; pqforge.platonic is the subpackage

__version__ = "0.1.0"
