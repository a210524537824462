"""Elimination-order probabilities for multi-player gambler's ruin."""

from .core import (
    CapitalVector,
    OrderDistribution,
    PayoutSchedule,
    all_orders,
    canonicalize,
    icm_distribution,
    icm_probability,
    parse_order,
    winner_probability,
)
from .exact import exact_orders_3, exact_orders_4
from .jacobi import jacobi_solve, jacobi_solve_3, jacobi_solve_4

__all__ = [
    "CapitalVector",
    "OrderDistribution",
    "PayoutSchedule",
    "all_orders",
    "canonicalize",
    "exact_orders_3",
    "exact_orders_4",
    "icm_distribution",
    "icm_probability",
    "jacobi_solve",
    "jacobi_solve_3",
    "jacobi_solve_4",
    "parse_order",
    "winner_probability",
]
