"""Exact maximum-weight agent-perfect bipartite matching.

Rows are agents, columns are candidate items (or bundles). Every row is
matched to a distinct column. Among all maximum-weight matchings the
lexicographically smallest assignment vector is returned.

Weights are rationals. They are scaled to integers by the lcm of their
denominators, then each entry gets a small integer penalty encoding the
column index in base ``k`` so that a single Hungarian run optimizes weight
first and the assignment vector's lexicographic order second.
"""

from __future__ import annotations

from fractions import Fraction
from math import lcm
from typing import Sequence

from .core import InputError, ZERO, to_value

INF = float("inf")


def matching_weight(weights: Sequence[Sequence], assignment: Sequence[int]) -> Fraction:
    return sum((to_value(weights[i][c]) for i, c in enumerate(assignment)), ZERO)


def max_weight_matching(weights: Sequence[Sequence]) -> tuple[int, ...]:
    """Return ``assignment`` with ``assignment[i]`` the column matched to row ``i``.

    Args:
        weights: ``n x k`` table of exact values with ``k >= n``.

    Raises:
        InputError: if there are fewer columns than rows or rows are ragged.
    """
    n = len(weights)
    if n == 0:
        return ()
    k = len(weights[0])
    if any(len(row) != k for row in weights):
        raise InputError("weight table rows have different lengths")
    if k < n:
        raise InputError(f"cannot match {n} agents to {k} columns")

    table = [[to_value(w) for w in row] for row in weights]
    scale = lcm(*(w.denominator for row in table for w in row))
    base = max(k, 2)
    # sum of penalties is at most base**n - 1 < spread, so any weight gap dominates
    spread = base**n
    cost = []
    for i, row in enumerate(table):
        place = base ** (n - 1 - i)
        cost.append([-(w.numerator * (scale // w.denominator)) * spread + c * place for c, w in enumerate(row)])
    return tuple(_hungarian_min(cost))


def _hungarian_min(cost: list[list[int]]) -> list[int]:
    """Minimum-cost assignment of every row, rows <= columns.

    Shortest augmenting path form with row/column potentials; O(n^2 k).
    Exact on integer costs.
    """
    n, k = len(cost), len(cost[0])
    u = [0] * (n + 1)
    v = [0] * (k + 1)
    owner = [0] * (k + 1)  # owner[col] = row (1-based), 0 when free
    way = [0] * (k + 1)
    for row in range(1, n + 1):
        owner[0] = row
        col0 = 0
        minv = [INF] * (k + 1)
        used = [False] * (k + 1)
        while True:
            used[col0] = True
            r = owner[col0]
            delta = INF
            col1 = 0
            crow = cost[r - 1]
            ur = u[r]
            for c in range(1, k + 1):
                if used[c]:
                    continue
                cur = crow[c - 1] - ur - v[c]
                if cur < minv[c]:
                    minv[c] = cur
                    way[c] = col0
                if minv[c] < delta:
                    delta = minv[c]
                    col1 = c
            for c in range(k + 1):
                if used[c]:
                    u[owner[c]] += delta
                    v[c] -= delta
                else:
                    minv[c] -= delta
            col0 = col1
            if owner[col0] == 0:
                break
        while col0:
            prev = way[col0]
            owner[col0] = owner[prev]
            col0 = prev
    assignment = [0] * n
    for c in range(1, k + 1):
        if owner[c]:
            assignment[owner[c] - 1] = c - 1
    return assignment
