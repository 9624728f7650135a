"""Finite-domain constraint network with hyper-arc-consistency propagation
and domain-splitting backtracking search."""

from .constraints import (
    And,
    Binary,
    CondEqual,
    Element,
    Member,
    Not,
    Or,
    Table,
    Ternary,
    vals,
)
from .network import FAILED, STABLE, Constraint, Network, mask_of, values_of
from .search import (
    BudgetExceeded,
    FirstFail,
    SearchStats,
    Split,
    SplitStrategy,
    SubclassSplit,
    load_subclass_family,
    solve,
    solve_all,
    solve_with,
    split,
)


def propagate(net: Network) -> str:
    return net.propagate()


__all__ = [
    "And", "Binary", "CondEqual", "Constraint", "Element", "FAILED", "FirstFail", "Member",
    "Network", "Not", "Or", "STABLE", "SearchStats", "Split", "SplitStrategy", "SubclassSplit",
    "Table", "Ternary", "BudgetExceeded", "load_subclass_family", "mask_of", "propagate",
    "solve", "solve_all", "solve_with", "split", "vals", "values_of",
]
