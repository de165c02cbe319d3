"""Seeded random instances on a value grid ``{0, 1/d, ..., 1}``."""

from __future__ import annotations

import itertools
import random
from fractions import Fraction

from .core import (
    MAX_TABLE_ITEMS,
    AdditiveValuation,
    BudgetAdditiveValuation,
    Instance,
    InputError,
    TableValuation,
    UnitDemandValuation,
)

KINDS = ("additive", "unit_demand", "budget_additive", "table")


def _grid_matrix(rng: random.Random, n: int, m: int, d: int):
    return [[Fraction(rng.randint(0, d), d) for _ in range(m)] for _ in range(n)]


def random_monotone_table(rng: random.Random, m: int, d: int) -> dict[frozenset, Fraction]:
    """Random monotone set function with marginals in [0, 1] on the 1/d grid.

    Subsets are filled by size. Each value is drawn between the largest
    value of its one-smaller subsets and the smallest such value plus one;
    that range is never empty because the subsets themselves differ by at
    most one.
    """
    table = {frozenset(): Fraction(0)}
    for size in range(1, m + 1):
        for combo in itertools.combinations(range(m), size):
            s = frozenset(combo)
            below = [table[s - {j}] for j in combo]
            lo, hi = max(below), min(below) + 1
            table[s] = Fraction(rng.randint(int(lo * d), int(hi * d)), d)
    return table


def generate_instance(n: int, m: int, kind: str = "additive", denominator: int = 10, seed: int = 0) -> Instance:
    """Deterministic random instance for the given seed."""
    if n < 1 or m < 0 or denominator < 1:
        raise InputError(f"need n >= 1, m >= 0, denominator >= 1 (got {n}, {m}, {denominator})")
    if kind not in KINDS:
        raise InputError(f"unknown kind {kind!r}; choose from {', '.join(KINDS)}")
    d = denominator
    rng = random.Random(f"{kind}:{n}:{m}:{d}:{seed}")
    if kind == "additive":
        val = AdditiveValuation(_grid_matrix(rng, n, m, d))
    elif kind == "unit_demand":
        val = UnitDemandValuation(_grid_matrix(rng, n, m, d))
    elif kind == "budget_additive":
        values = _grid_matrix(rng, n, m, d)
        caps = [Fraction(rng.randint(0, d), d) * m for _ in range(n)]
        val = BudgetAdditiveValuation(values, caps)
    else:
        if m > MAX_TABLE_ITEMS:
            raise InputError(f"table instances support at most {MAX_TABLE_ITEMS} items")
        val = TableValuation(m, [random_monotone_table(rng, m, d) for _ in range(n)])
    return Instance(n, m, val)
