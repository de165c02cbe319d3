"""Envy graphs, heaviest-path payments and bundle rematching.

Arc ``(i, k)`` of the envy graph carries ``v_i(A_k) - v_i(A_i)``. An
allocation can be made envy-free with payments exactly when the graph has
no positive-weight directed cycle; the heaviest path leaving each agent is
then the least payment that agent can receive.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .core import (
    ZERO,
    Allocation,
    Instance,
    PaymentVector,
    check_allocation,
    render_value,
)
from .matching import max_weight_matching


@dataclass(frozen=True)
class EnvyGraph:
    weights: tuple[tuple[Fraction, ...], ...]

    @property
    def n(self) -> int:
        return len(self.weights)

    def __getitem__(self, arc: tuple[int, int]) -> Fraction:
        i, k = arc
        return self.weights[i][k]

    def cycle_weight(self, cycle: Sequence[int]) -> Fraction:
        return sum((self.weights[a][b] for a, b in zip(cycle, [*cycle[1:], cycle[0]])), ZERO)

    def path_weight(self, path: Sequence[int]) -> Fraction:
        return sum((self.weights[a][b] for a, b in zip(path, path[1:])), ZERO)

    def positive_arcs(self) -> list[tuple[int, int]]:
        return [(i, k) for i in range(self.n) for k in range(self.n) if i != k and self.weights[i][k] > 0]


@dataclass(frozen=True)
class CycleWitness:
    """Directed cycle ``agents[0] -> agents[1] -> ... -> agents[0]``."""

    agents: tuple[int, ...]
    weight: Fraction

    def __str__(self):
        path = " -> ".join(str(a) for a in (*self.agents, self.agents[0]))
        return f"{path} (weight {render_value(self.weight)})"


@dataclass(frozen=True)
class HeaviestPaths:
    """``lengths[i]`` is the heaviest path weight from ``i``; ``successor[i]``
    is the next vertex on one such path (``None`` for the empty path)."""

    lengths: tuple[Fraction, ...]
    successor: tuple[int | None, ...]

    def path_from(self, agent: int) -> list[int]:
        path = [agent]
        while self.successor[path[-1]] is not None and len(path) <= len(self.lengths):
            path.append(self.successor[path[-1]])
        return path

    @property
    def max(self) -> Fraction:
        return max(self.lengths, default=ZERO)


class NotEnvyFreeableError(ValueError):
    def __init__(self, witness: CycleWitness):
        self.witness = witness
        super().__init__(f"allocation is not envy-freeable; positive cycle {witness}")


@dataclass(frozen=True)
class EnvyFreeability:
    envy_freeable: bool
    paths: HeaviestPaths | None = None
    cycle: CycleWitness | None = None

    def __bool__(self):
        return self.envy_freeable


def envy_graph_from_values(table: Sequence[Sequence[Fraction]]) -> EnvyGraph:
    """Envy graph from ``table[i][k] = v_i(A_k)``."""
    n = len(table)
    return EnvyGraph(tuple(tuple(table[i][k] - table[i][i] for k in range(n)) for i in range(n)))


def bundle_value_table(instance: Instance, allocation: Allocation) -> list[list[Fraction]]:
    """``table[i][k] = v_i(A_k)``; n^2 valuation calls."""
    val = instance.valuation
    return [[val.value(i, allocation.bundles[k]) for k in range(instance.n)] for i in range(instance.n)]


def build_envy_graph(instance: Instance, allocation: Allocation) -> EnvyGraph:
    check_allocation(instance, allocation)
    return envy_graph_from_values(bundle_value_table(instance, allocation))


def _relax_round(w, dist, succ) -> int | None:
    """One in-place relaxation sweep; returns the first vertex improved."""
    n = len(w)
    improved = None
    for i in range(n):
        wi = w[i]
        for k in range(n):
            if k == i:
                continue
            cand = wi[k] + dist[k]
            if cand > dist[i]:
                dist[i] = cand
                succ[i] = k
                if improved is None:
                    improved = i
    return improved


def _relax(graph: EnvyGraph):
    """Bellman-Ford for heaviest paths from every start vertex.

    Every label starts at 0 (the empty path). Returns ``(lengths, successor,
    improved)`` where ``improved`` is a vertex whose label still rose in the
    n-th sweep, which certifies a positive cycle, or ``None``.
    """
    n = graph.n
    dist = [ZERO] * n
    succ: list[int | None] = [None] * n
    improved = None
    for _ in range(n):
        improved = _relax_round(graph.weights, dist, succ)
        if improved is None:
            break
    return dist, succ, improved


def heaviest_paths(graph: EnvyGraph) -> HeaviestPaths:
    """Heaviest path weights, including the empty path, from every vertex.

    Raises:
        NotEnvyFreeableError: if the graph has a positive-weight cycle.
    """
    dist, succ, improved = _relax(graph)
    if improved is not None:
        raise NotEnvyFreeableError(_extract_cycle(graph, dist, succ, improved))
    return HeaviestPaths(tuple(dist), tuple(succ))


def _successor_cycle(succ, start: int) -> list[int] | None:
    seen = {}
    x = start
    while x is not None and x not in seen:
        seen[x] = len(seen)
        x = succ[x]
    if x is None:
        return None
    order = sorted(seen, key=seen.get)
    return order[seen[x]:]


def _extract_cycle(graph: EnvyGraph, dist, succ, start: int) -> CycleWitness:
    # cycles of the successor graph are positive; keep sweeping until one shows
    starts = [start, *range(graph.n)]
    for _ in range(graph.n * graph.n + 1):
        for s in starts:
            cycle = _successor_cycle(succ, s)
            if cycle is not None:
                weight = graph.cycle_weight(cycle)
                if weight <= 0:
                    raise AssertionError(f"successor cycle {cycle} has non-positive weight")
                return CycleWitness(tuple(cycle), weight)
        _relax_round(graph.weights, dist, succ)
    raise AssertionError("positive cycle detected but not recovered")


def find_positive_cycle(graph: EnvyGraph) -> CycleWitness | None:
    dist, succ, improved = _relax(graph)
    if improved is None:
        return None
    return _extract_cycle(graph, dist, succ, improved)


def is_envy_freeable(instance: Instance, allocation: Allocation) -> EnvyFreeability:
    """Decide envy-freeability via positive-cycle detection.

    The certificate is the heaviest-path labels when the answer is yes and a
    positive cycle otherwise.
    """
    graph = build_envy_graph(instance, allocation)
    try:
        return EnvyFreeability(True, paths=heaviest_paths(graph))
    except NotEnvyFreeableError as exc:
        return EnvyFreeability(False, cycle=exc.witness)


def minimal_payments(instance: Instance, allocation: Allocation) -> PaymentVector:
    """Pointwise-minimal envy-eliminating payments for a fixed allocation.

    Raises:
        NotEnvyFreeableError: carrying a positive cycle when no payments work.
    """
    paths = heaviest_paths(build_envy_graph(instance, allocation))
    return PaymentVector(paths.lengths)


def welfare_maximizing_permutation(instance: Instance, allocation: Allocation) -> tuple[int, ...]:
    """``perm[i]`` is the index of the bundle agent ``i`` receives under a
    welfare-maximal reassignment of the bundles."""
    check_allocation(instance, allocation)
    return max_weight_matching(bundle_value_table(instance, allocation))


def rematch_bundles(instance: Instance, allocation: Allocation) -> Allocation:
    """Reassign the existing bundles to maximize total value.

    The result is always envy-freeable.
    """
    perm = welfare_maximizing_permutation(instance, allocation)
    return allocation.permuted(perm)
