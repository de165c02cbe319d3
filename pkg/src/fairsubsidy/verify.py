"""Independent checkers and a brute-force minimum-subsidy oracle.

Nothing here calls the solvers. The checkers evaluate the defining
inequalities directly; the oracle enumerates every ordered partition.
"""

from __future__ import annotations

import itertools
import os
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .core import ZERO, Allocation, Instance, InputError, check_allocation, to_value
from .envy_graph import NotEnvyFreeableError, envy_graph_from_values, heaviest_paths

DEFAULT_ORACLE_CAP = 2_000_000
ORACLE_CAP_ENV = "FAIRSUBSIDY_ORACLE_CAP"


class OracleSizeError(InputError):
    pass


@dataclass(frozen=True)
class Check:
    ok: bool
    violation: tuple | None = None

    def __bool__(self):
        return self.ok


def check_envy_free(instance: Instance, allocation: Allocation, payments: Sequence) -> Check:
    """``v_i(A_i) + p_i >= v_i(A_k) + p_k`` for every ordered pair.

    The first violating ``(i, k)`` in lexicographic order is reported.
    """
    check_allocation(instance, allocation)
    p = [to_value(x) for x in payments]
    if len(p) != instance.n:
        raise InputError(f"{len(p)} payments for {instance.n} agents")
    val = instance.valuation
    for i in range(instance.n):
        own = val.value(i, allocation[i]) + p[i]
        for k in range(instance.n):
            if k != i and val.value(i, allocation[k]) + p[k] > own:
                return Check(False, (i, k))
    return Check(True)


def check_ef1(instance: Instance, allocation: Allocation, partial: bool = False) -> Check:
    """Envy towards any non-empty bundle vanishes after dropping some item of it.

    ``partial`` allows allocations that leave items unassigned.
    """
    check_allocation(instance, allocation, partial)
    val = instance.valuation
    for i in range(instance.n):
        own = val.value(i, allocation[i])
        for k in range(instance.n):
            other = allocation[k]
            if k == i or not other:
                continue
            if not any(own >= val.value(i, other - {j}) for j in other):
                return Check(False, (i, k))
    return Check(True)


def check_balanced(allocation: Allocation, m: int | None = None) -> bool:
    """Every bundle has ``floor(m/n)`` or ``ceil(m/n)`` items."""
    sizes = allocation.sizes
    if not sizes:
        return True
    if m is None:
        m = sum(sizes)
    lo, hi = m // len(sizes), -(-m // len(sizes))
    return all(lo <= s <= hi for s in sizes)


def check_round_monotonicity(instance: Instance, trace) -> Check:
    """An agent's round-t item is worth at least any item left after round t."""
    values = instance.valuation.values
    remaining = set(range(instance.m))
    for t, row in enumerate(trace.matched):
        remaining -= {j for j in row if j is not None}
        for i, j in enumerate(row):
            mine = ZERO if j is None else values[i][j]
            for other in remaining:
                if values[i][other] > mine:
                    return Check(False, (t, i, other))
    return Check(True)


def welfare_maximal(table: Sequence[Sequence[Fraction]]) -> bool:
    """No permutation of bundles beats the identity, by enumeration."""
    n = len(table)
    base = sum((table[i][i] for i in range(n)), ZERO)
    return all(
        sum((table[i][p[i]] for i in range(n)), ZERO) <= base for p in itertools.permutations(range(n))
    )


def heaviest_paths_by_enumeration(table: Sequence[Sequence[Fraction]]) -> list[Fraction]:
    """Heaviest simple path from each vertex of the envy graph, by DFS.

    Only meaningful when there is no positive cycle; exponential in n.
    """
    n = len(table)
    w = [[table[i][k] - table[i][i] for k in range(n)] for i in range(n)]
    best = [ZERO] * n

    def walk(start, node, visited, total):
        if total > best[start]:
            best[start] = total
        for k in range(n):
            if k not in visited:
                walk(start, k, visited | {k}, total + w[node][k])

    for s in range(n):
        walk(s, s, frozenset([s]), ZERO)
    return best


@dataclass(frozen=True)
class BruteForceResult:
    optimal_total_subsidy: Fraction
    optimal_allocation: Allocation
    evaluated: int
    envy_freeable_count: int
    table: tuple[tuple[tuple[int, ...], bool, Fraction | None], ...] | None = None


class ConditionMismatch(AssertionError):
    pass


def oracle_cap() -> int:
    raw = os.environ.get(ORACLE_CAP_ENV)
    return int(raw) if raw else DEFAULT_ORACLE_CAP


def brute_force_min_subsidy(
    instance: Instance, cap: int | None = None, keep_table: bool = False, cross_check: bool | None = None
) -> BruteForceResult:
    """Minimum total subsidy over all ``n**m`` allocations.

    Each allocation is tested for positive cycles and, when ``n <= 4``
    (or ``cross_check`` is set), also against welfare-maximality over all
    ``n!`` bundle permutations; disagreement raises
    :class:`ConditionMismatch`.
    """
    n, m = instance.n, instance.m
    cap = oracle_cap() if cap is None else cap
    if n**m > cap:
        raise OracleSizeError(f"{n}^{m} = {n**m} allocations exceeds cap {cap}")
    if cross_check is None:
        cross_check = n <= 4
    val = instance.valuation
    best = None
    best_owners = None
    rows = [] if keep_table else None
    count = feasible = 0
    for owners in itertools.product(range(n), repeat=m):
        count += 1
        bundles = [[] for _ in range(n)]
        for j, i in enumerate(owners):
            bundles[i].append(j)
        table = [[val.value(i, bundles[k]) for k in range(n)] for i in range(n)]
        try:
            total = sum(heaviest_paths(envy_graph_from_values(table)).lengths, ZERO)
            ok = True
        except NotEnvyFreeableError:
            total, ok = None, False
        if cross_check and welfare_maximal(table) != ok:
            raise ConditionMismatch(f"conditions disagree on allocation {owners}")
        if rows is not None:
            rows.append((owners, ok, total))
        if ok:
            feasible += 1
            if best is None or total < best:
                best, best_owners = total, owners
    return BruteForceResult(
        best,
        Allocation.from_owners(best_owners, n),
        count,
        feasible,
        tuple(rows) if rows is not None else None,
    )

