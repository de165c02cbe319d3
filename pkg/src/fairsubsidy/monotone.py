"""Envy-cycle elimination followed by welfare-maximal rematching.

Items are handed out one at a time to an agent nobody strictly envies. Any
cycle of strict envy is then removed by passing bundles backwards around
it, so every agent on the cycle takes the bundle it envied. The resulting
allocation is EF1; reassigning its bundles by a maximum-weight matching
makes it envy-freeable with at most ``2(n-1)`` paid to any agent.
"""

from __future__ import annotations

import logging
import random
from dataclasses import dataclass
from fractions import Fraction

from .core import ZERO, Allocation, Instance, PaymentVector, require_valid
from .envy_graph import minimal_payments, welfare_maximizing_permutation

logger = logging.getLogger(__name__)


def auxiliary_arcs(instance: Instance, bundles) -> list[tuple[int, int]]:
    """Arcs ``(i, k)`` where ``i`` strictly envies ``k``."""
    val = instance.valuation
    n = instance.n
    arcs = []
    for i in range(n):
        own = val.value(i, bundles[i])
        for k in range(n):
            if k != i and val.value(i, bundles[k]) > own:
                arcs.append((i, k))
    return arcs


def find_cycle(n: int, arcs) -> list[int] | None:
    """A directed cycle ``[a, b, ..., z]`` (arcs a->b ... z->a), or ``None``.

    Depth-first from the smallest vertex, neighbours in ascending order.
    """
    out = [[] for _ in range(n)]
    for i, k in sorted(arcs):
        out[i].append(k)
    state = [0] * n  # 0 new, 1 on stack, 2 done
    for root in range(n):
        if state[root]:
            continue
        stack = [(root, iter(out[root]))]
        path = [root]
        state[root] = 1
        while stack:
            node, it = stack[-1]
            nxt = next(it, None)
            if nxt is None:
                stack.pop()
                path.pop()
                state[node] = 2
            elif state[nxt] == 1:
                return path[path.index(nxt):]
            elif state[nxt] == 0:
                state[nxt] = 1
                stack.append((nxt, iter(out[nxt])))
                path.append(nxt)
    return None


def sources(n: int, arcs) -> list[int]:
    targets = {k for _, k in arcs}
    return [i for i in range(n) if i not in targets]


@dataclass(frozen=True)
class Step:
    """One event of the envy-cycles run.

    ``kind`` is ``"assign"`` (``item`` to ``agent``) or ``"rotate"``
    (bundles passed around ``cycle``). ``bundles`` is the allocation right
    after the event; ``arcs`` the number of strict-envy arcs at that point.
    ``round_end`` marks the last event of an item's round.
    """

    kind: str
    bundles: tuple[frozenset, ...]
    arcs: int
    item: int | None = None
    agent: int | None = None
    cycle: tuple[int, ...] | None = None
    round_end: bool = False

    def to_dict(self) -> dict:
        d = {"kind": self.kind, "arcs": self.arcs}
        if self.kind == "assign":
            d.update(item=self.item, agent=self.agent)
        else:
            d["cycle"] = list(self.cycle)
        if self.round_end:
            d["round_end"] = True
        return d


@dataclass(frozen=True)
class EnvyCyclesResult:
    allocation: Allocation
    steps: tuple[Step, ...]


def envy_cycles_allocate(instance: Instance, seed: int | None = None) -> EnvyCyclesResult:
    """EF1 allocation by envy-cycle elimination.

    With ``seed=None`` items go in index order to the smallest-index source.
    A seed shuffles the item order and picks sources at random instead.
    """
    require_valid(instance)
    n = instance.n
    rng = random.Random(seed) if seed is not None else None
    order = list(range(instance.m))
    if rng is not None:
        rng.shuffle(order)
    bundles: list[frozenset] = [frozenset() for _ in range(n)]
    steps: list[Step] = []
    for item in order:
        arcs = auxiliary_arcs(instance, bundles)
        free = sources(n, arcs)
        agent = free[0] if rng is None else rng.choice(free)
        bundles[agent] = bundles[agent] | {item}
        arcs = auxiliary_arcs(instance, bundles)
        steps.append(Step("assign", tuple(bundles), len(arcs), item=item, agent=agent))
        while (cycle := find_cycle(n, arcs)) is not None:
            # each agent on the cycle takes its successor's bundle
            taken = [bundles[cycle[(p + 1) % len(cycle)]] for p in range(len(cycle))]
            for agent_on, b in zip(cycle, taken):
                bundles[agent_on] = b
            arcs = auxiliary_arcs(instance, bundles)
            steps.append(Step("rotate", tuple(bundles), len(arcs), cycle=tuple(cycle)))
            logger.debug("rotated %s, %d arcs left", cycle, len(arcs))
        steps[-1] = _end(steps[-1])
    return EnvyCyclesResult(Allocation(tuple(bundles)), tuple(steps))


def _end(step: Step) -> Step:
    return Step(step.kind, step.bundles, step.arcs, step.item, step.agent, step.cycle, True)


@dataclass(frozen=True)
class RedistributionReport:
    """Value shifts when the EF1 bundles are reassigned.

    ``decrease`` sums ``v_i(A_i) - v_i(B_i)`` over agents that lose value,
    ``increase`` sums ``v_i(B_i) - v_i(A_i)`` over the rest.
    """

    losers: tuple[int, ...]
    decrease: Fraction
    increase: Fraction
    max_path: Fraction


@dataclass(frozen=True)
class MonotoneSolution:
    ef1_allocation: Allocation
    permutation: tuple[int, ...]
    allocation: Allocation
    payments: PaymentVector
    steps: tuple[Step, ...]
    report: RedistributionReport


def solve_monotone(instance: Instance, seed: int | None = None) -> MonotoneSolution:
    """EF1 by envy cycles, rematch bundles for welfare, then minimal payments."""
    ef1 = envy_cycles_allocate(instance, seed)
    perm = welfare_maximizing_permutation(instance, ef1.allocation)
    final = ef1.allocation.permuted(perm)
    payments = minimal_payments(instance, final)

    val = instance.valuation
    before = [val.value(i, ef1.allocation.bundles[i]) for i in range(instance.n)]
    after = [val.value(i, final.bundles[i]) for i in range(instance.n)]
    losers = tuple(i for i in range(instance.n) if after[i] < before[i])
    decrease = sum((before[i] - after[i] for i in losers), ZERO)
    increase = sum((after[i] - before[i] for i in range(instance.n) if i not in losers), ZERO)
    report = RedistributionReport(losers, decrease, increase, payments.max)
    return MonotoneSolution(ef1.allocation, perm, final, payments, ef1.steps, report)

