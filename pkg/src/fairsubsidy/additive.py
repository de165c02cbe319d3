"""Round-by-round matching allocation for additive valuations.

Each round matches every agent to one remaining item by a maximum-weight
matching; the last round is padded with zero-value dummy items so that all
agents are matched. Minimal payments for the result never exceed one per
agent. :func:`certify_one_dollar` re-derives that bound at runtime through
a modified valuation profile built from the round trace.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from fractions import Fraction

from .core import (
    ONE,
    ZERO,
    Allocation,
    Instance,
    InputError,
    PaymentVector,
    check_allocation,
    render_value,
    require_valid,
)
from .envy_graph import (
    EnvyGraph,
    NotEnvyFreeableError,
    envy_graph_from_values,
    find_positive_cycle,
    heaviest_paths,
    minimal_payments,
)
from .matching import max_weight_matching

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class RoundTrace:
    """``matched[t][i]`` is the item agent ``i`` took in round ``t``
    (0-based), or ``None`` for a dummy item."""

    matched: tuple[tuple[int | None, ...], ...]

    @property
    def rounds(self) -> int:
        return len(self.matched)

    def item_round(self) -> dict[int, tuple[int, int]]:
        """Map each real item to ``(round, agent)``."""
        return {j: (t, i) for t, row in enumerate(self.matched) for i, j in enumerate(row) if j is not None}

    def as_lists(self) -> list[list[int | None]]:
        return [list(row) for row in self.matched]


@dataclass(frozen=True)
class AdditiveSolution:
    allocation: Allocation
    payments: PaymentVector
    trace: RoundTrace


class CertificationError(AssertionError):
    """A proven inequality failed at runtime; always an implementation bug."""


def _require_additive(instance: Instance) -> None:
    if not instance.is_additive:
        raise InputError(
            f"solve_additive needs an additive valuation, got {instance.valuation.kind!r}; "
            "use solve_monotone"
        )
    require_valid(instance)


def solve_additive(instance: Instance) -> AdditiveSolution:
    """Allocate by repeated maximum-weight matchings, then pay minimal subsidies."""
    _require_additive(instance)
    n = instance.n
    values = instance.valuation.values
    remaining = list(range(instance.m))
    bundles: list[set[int]] = [set() for _ in range(n)]
    rounds = []
    while remaining:
        columns: list[int | None] = list(remaining)
        columns += [None] * max(0, n - len(columns))
        table = [[values[i][j] if j is not None else ZERO for j in columns] for i in range(n)]
        assignment = max_weight_matching(table)
        row = tuple(columns[c] for c in assignment)
        for i, j in enumerate(row):
            if j is not None:
                bundles[i].add(j)
        taken = {j for j in row if j is not None}
        remaining = [j for j in remaining if j not in taken]
        rounds.append(row)
        logger.debug("round %d: %s", len(rounds), row)
    allocation = Allocation(tuple(bundles))
    payments = minimal_payments(instance, allocation)
    return AdditiveSolution(allocation, payments, RoundTrace(tuple(rounds)))


def _check_trace(instance: Instance, trace: RoundTrace, allocation: Allocation | None = None) -> None:
    n = instance.n
    seen = []
    for t, row in enumerate(trace.matched):
        if len(row) != n:
            raise InputError(f"trace round {t} has {len(row)} entries for {n} agents")
        if None in row and t != trace.rounds - 1:
            raise InputError(f"dummy item in non-final round {t}")
        seen.extend(j for j in row if j is not None)
    if sorted(seen) != list(range(instance.m)):
        raise InputError("trace does not match every item exactly once")
    if allocation is not None:
        for t, row in enumerate(trace.matched):
            for i, j in enumerate(row):
                if j is not None and j not in allocation.bundles[i]:
                    raise InputError(f"trace gives item {j} to agent {i}, allocation does not")


def build_modified_profile(instance: Instance, trace: RoundTrace) -> tuple[tuple[Fraction, ...], ...]:
    """Raised item values used to certify the one-dollar bound.

    For agent ``i`` and an item another agent took in round ``t`` before the
    last, the value becomes ``max(v_i(item), v_i(item i took in round t+1))``.
    Items ``i`` took itself and items of the last round keep their value.
    Dummy items are worth 0.
    """
    _require_additive(instance)
    _check_trace(instance, trace)
    values = instance.valuation.values
    last = trace.rounds - 1
    where = trace.item_round()

    def own(i, t):
        j = trace.matched[t][i]
        return ZERO if j is None else values[i][j]

    profile = []
    for i in range(instance.n):
        row = []
        for j in range(instance.m):
            t, holder = where[j]
            v = values[i][j]
            if holder != i and t < last:
                v = max(v, own(i, t + 1))
            row.append(v)
        profile.append(tuple(row))
    return tuple(profile)


@dataclass(frozen=True)
class OneDollarCertificate:
    envy_freeable_modified: bool
    min_modified_weight: Fraction
    dominates_original: bool
    max_path_original: Fraction
    max_path_modified: Fraction

    @property
    def ok(self) -> bool:
        return (
            self.envy_freeable_modified
            and self.min_modified_weight >= -1
            and self.dominates_original
            and self.max_path_original <= self.max_path_modified <= ONE
        )


def _graph(profile, allocation: Allocation) -> EnvyGraph:
    n = len(profile)
    table = [[sum((profile[i][j] for j in allocation.bundles[k]), ZERO) for k in range(n)] for i in range(n)]
    return envy_graph_from_values(table)


def certify_one_dollar(instance: Instance, allocation: Allocation, trace: RoundTrace) -> OneDollarCertificate:
    """Check the modified-profile argument for one solved instance.

    Verified exactly:
      1. the allocation has no positive cycle under the modified profile;
      2. every modified arc weight is at least -1;
      3. every modified arc weight is at least the original one;
      4. max heaviest path (original) <= max heaviest path (modified) <= 1.

    Raises:
        CertificationError: naming the failed inequality and a witness arc.
    """
    _require_additive(instance)
    check_allocation(instance, allocation)
    _check_trace(instance, trace, allocation)
    profile = build_modified_profile(instance, trace)
    values = instance.valuation.values
    for i in range(instance.n):
        for j in range(instance.m):
            if j in allocation.bundles[i] and profile[i][j] != values[i][j]:
                raise CertificationError(f"own item changed: agent {i}, item {j}")
            if profile[i][j] < values[i][j]:
                raise CertificationError(f"modified value decreased: agent {i}, item {j}")

    original = _graph(values, allocation)
    modified = _graph(profile, allocation)

    cycle = find_positive_cycle(modified)
    if cycle is not None:
        raise CertificationError(f"positive cycle under modified profile: {cycle}")

    n = instance.n
    arcs = [(i, k) for i in range(n) for k in range(n) if i != k]
    low = min((modified[a] for a in arcs), default=ZERO)
    for a in arcs:
        if modified[a] < -1:
            raise CertificationError(f"modified arc {a} has weight {render_value(modified[a])} < -1")
        if modified[a] < original[a]:
            raise CertificationError(
                f"modified arc {a} weight {render_value(modified[a])} below original {render_value(original[a])}"
            )
    try:
        ell = heaviest_paths(original).max
    except NotEnvyFreeableError as exc:
        raise CertificationError(f"output not envy-freeable: {exc.witness}") from exc
    ell_bar = heaviest_paths(modified).max
    if not ell <= ell_bar <= 1:
        raise CertificationError(
            f"heaviest path bound failed: original {render_value(ell)}, modified {render_value(ell_bar)}"
        )
    return OneDollarCertificate(True, low, True, ell, ell_bar)
