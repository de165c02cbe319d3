"""Instances, valuations, allocations and exact values.

All quantities are :class:`fractions.Fraction`. Agents and items are
identified by 0-based integer ids.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

Value = Fraction

ZERO = Fraction(0)
ONE = Fraction(1)

# 2**20 subset entries per agent
MAX_TABLE_ITEMS = 20


class InputError(ValueError):
    """Raised for malformed or out-of-range input."""


class InvalidInstanceError(InputError):
    def __init__(self, violations: Sequence["Violation"]):
        self.violations = list(violations)
        lines = "; ".join(v.message for v in self.violations[:5])
        more = len(self.violations) - 5
        if more > 0:
            lines += f"; ... ({more} more)"
        super().__init__(f"invalid instance: {lines}")


def to_value(x) -> Fraction:
    """Convert ``x`` to an exact rational.

    Accepts ints, Fractions and strings such as ``"0.4"``, ``"2/5"`` or
    ``"1e-2"``. Binary floats are rejected because their decimal intent is
    ambiguous.
    """
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise InputError(f"not a value: {x!r}")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, float):
        raise InputError(f"binary float {x!r} not accepted; pass a decimal string")
    if isinstance(x, str):
        try:
            return Fraction(x.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise InputError(f"cannot parse value {x!r}") from exc
    raise InputError(f"not a value: {x!r}")


def render_value(x: Fraction) -> str:
    """Lossless text form: an integer, a terminating decimal, or ``p/q``."""
    x = Fraction(x)
    if x.denominator == 1:
        return str(x.numerator)
    d = x.denominator
    twos = fives = 0
    while d % 2 == 0:
        d //= 2
        twos += 1
    while d % 5 == 0:
        d //= 5
        fives += 1
    if d != 1:
        return f"{x.numerator}/{x.denominator}"
    digits = max(twos, fives)
    scaled = abs(x.numerator) * 10**digits // x.denominator
    sign = "-" if x < 0 else ""
    whole, frac = divmod(scaled, 10**digits)
    return f"{sign}{whole}.{frac:0{digits}d}"


def _matrix(rows) -> tuple[tuple[Fraction, ...], ...]:
    return tuple(tuple(to_value(v) for v in row) for row in rows)


# ---------------------------------------------------------------------------
# Valuations


class Valuation:
    """Base class for the supported valuation families.

    Subclasses define :meth:`value` for a single agent and a bundle given as
    any iterable of item ids. ``n_agents`` and ``n_items`` describe the
    declared dimensions.
    """

    kind: str = ""

    @property
    def n_agents(self) -> int:
        raise NotImplementedError

    @property
    def n_items(self) -> int:
        raise NotImplementedError

    def value(self, agent: int, bundle: Iterable[int]) -> Fraction:
        raise NotImplementedError

    def violations(self) -> list["Violation"]:
        return []


class _MatrixValuation(Valuation):
    values: tuple[tuple[Fraction, ...], ...]

    @property
    def n_agents(self) -> int:
        return len(self.values)

    @property
    def n_items(self) -> int:
        return len(self.values[0]) if self.values else 0

    def item_value(self, agent: int, item: int) -> Fraction:
        return self.values[agent][item]

    def violations(self) -> list["Violation"]:
        out = []
        width = self.n_items
        for i, row in enumerate(self.values):
            if len(row) != width:
                out.append(Violation("dimension", f"row {i} has {len(row)} entries, expected {width}", (i,)))
                continue
            for j, v in enumerate(row):
                if v > 1:
                    out.append(Violation("range", f"value exceeds 1 at ({i}, {j}): {render_value(v)}", (i, j)))
                elif v < 0:
                    out.append(Violation("range", f"negative value at ({i}, {j}): {render_value(v)}", (i, j)))
        return out


@dataclass(frozen=True)
class AdditiveValuation(_MatrixValuation):
    """``v_i(S) = sum(values[i][j] for j in S)``."""

    values: tuple[tuple[Fraction, ...], ...]
    kind = "additive"

    def __post_init__(self):
        object.__setattr__(self, "values", _matrix(self.values))

    def value(self, agent, bundle):
        row = self.values[agent]
        return sum((row[j] for j in bundle), ZERO)


@dataclass(frozen=True)
class UnitDemandValuation(_MatrixValuation):
    """Bundle value is the best single item in it."""

    values: tuple[tuple[Fraction, ...], ...]
    kind = "unit_demand"

    def __post_init__(self):
        object.__setattr__(self, "values", _matrix(self.values))

    def value(self, agent, bundle):
        row = self.values[agent]
        return max((row[j] for j in bundle), default=ZERO)


@dataclass(frozen=True)
class BudgetAdditiveValuation(_MatrixValuation):
    """Additive value truncated at a per-agent cap."""

    values: tuple[tuple[Fraction, ...], ...]
    caps: tuple[Fraction, ...]
    kind = "budget_additive"

    def __post_init__(self):
        object.__setattr__(self, "values", _matrix(self.values))
        object.__setattr__(self, "caps", tuple(to_value(c) for c in self.caps))

    def value(self, agent, bundle):
        row = self.values[agent]
        return min(self.caps[agent], sum((row[j] for j in bundle), ZERO))

    def violations(self):
        out = super().violations()
        if len(self.caps) != self.n_agents:
            out.append(Violation("dimension", f"{len(self.caps)} caps for {self.n_agents} agents", ()))
        for i, c in enumerate(self.caps):
            if c < 0:
                out.append(Violation("range", f"negative cap for agent {i}: {render_value(c)}", (i,)))
        return out


@dataclass(frozen=True)
class TableValuation(Valuation):
    """Explicit value for every subset of items, per agent.

    ``tables[i]`` maps a frozenset of item ids to a value. Only practical
    for small item counts (at most :data:`MAX_TABLE_ITEMS`).
    """

    items: int
    tables: tuple[Mapping[frozenset, Fraction], ...]
    kind = "table"

    def __post_init__(self):
        tables = tuple(
            {frozenset(k): to_value(v) for k, v in t.items()} for t in self.tables
        )
        object.__setattr__(self, "tables", tables)

    def __hash__(self):
        return hash((self.items, tuple(tuple(sorted((tuple(sorted(k)), v) for k, v in t.items())) for t in self.tables)))

    @property
    def n_agents(self) -> int:
        return len(self.tables)

    @property
    def n_items(self) -> int:
        return self.items

    def value(self, agent, bundle):
        key = bundle if isinstance(bundle, frozenset) else frozenset(bundle)
        try:
            return self.tables[agent][key]
        except KeyError:
            raise InputError(f"table for agent {agent} has no entry for {sorted(key)}") from None

    def violations(self):
        m = self.items
        if m > MAX_TABLE_ITEMS:
            return [Violation("dimension", f"table valuations support at most {MAX_TABLE_ITEMS} items, got {m}", ())]
        out = []
        subsets = [frozenset(s) for r in range(m + 1) for s in itertools.combinations(range(m), r)]
        for i, table in enumerate(self.tables):
            extra = [k for k in table if not k <= frozenset(range(m))]
            for k in extra:
                out.append(Violation("dimension", f"agent {i}: subset {_fmt(k)} uses unknown items", (i,)))
            missing = [s for s in subsets if s not in table]
            if missing:
                out.append(Violation("dimension", f"agent {i}: {len(missing)} subsets missing, e.g. {_fmt(missing[0])}", (i,)))
                continue
            if table[frozenset()] != 0:
                out.append(Violation("empty", f"agent {i}: value of empty bundle is {render_value(table[frozenset()])}, not 0", (i,)))
            for s in subsets:
                base = table[s]
                for j in range(m):
                    if j in s:
                        continue
                    t = s | {j}
                    gain = table[t] - base
                    if gain < 0:
                        out.append(Violation("monotone", f"agent {i}: monotonicity violated at (S={_fmt(s)}, T={_fmt(t)})", (i, s, t)))
                    elif gain > 1:
                        out.append(Violation("marginal", f"agent {i}: marginal value exceeds 1 at (S={_fmt(s)}, j={j})", (i, s, j)))
        return out


def _fmt(s) -> str:
    return "{" + ",".join(str(j) for j in sorted(s)) + "}"


# ---------------------------------------------------------------------------
# Instances and allocations


@dataclass(frozen=True)
class Violation:
    kind: str
    message: str
    where: tuple = ()


@dataclass(frozen=True)
class Instance:
    n: int
    m: int
    valuation: Valuation
    agent_labels: tuple[str, ...] | None = None
    item_labels: tuple[str, ...] | None = None

    @property
    def agents(self) -> range:
        return range(self.n)

    @property
    def items(self) -> range:
        return range(self.m)

    @property
    def is_additive(self) -> bool:
        return isinstance(self.valuation, AdditiveValuation)

    def value(self, agent: int, bundle: Iterable[int]) -> Fraction:
        return bundle_value(self, agent, bundle)


def additive_instance(rows: Sequence[Sequence]) -> Instance:
    """Shorthand for an additive instance from a matrix of values."""
    val = AdditiveValuation(rows)
    return Instance(val.n_agents, val.n_items, val)


@dataclass(frozen=True)
class Allocation:
    """Ordered partition of the items; ``bundles[i]`` goes to agent ``i``."""

    bundles: tuple[frozenset, ...]

    def __post_init__(self):
        object.__setattr__(self, "bundles", tuple(frozenset(b) for b in self.bundles))

    @property
    def n(self) -> int:
        return len(self.bundles)

    def __getitem__(self, agent: int) -> frozenset:
        return self.bundles[agent]

    def __iter__(self):
        return iter(self.bundles)

    def __len__(self):
        return len(self.bundles)

    @property
    def sizes(self) -> tuple[int, ...]:
        return tuple(len(b) for b in self.bundles)

    @property
    def is_balanced(self) -> bool:
        sizes = self.sizes
        return not sizes or max(sizes) - min(sizes) <= 1

    def owner(self) -> dict[int, int]:
        return {j: i for i, b in enumerate(self.bundles) for j in b}

    def permuted(self, perm: Sequence[int]) -> "Allocation":
        """Agent ``i`` gets the bundle currently held by ``perm[i]``."""
        return Allocation(tuple(self.bundles[perm[i]] for i in range(self.n)))

    def as_lists(self) -> list[list[int]]:
        return [sorted(b) for b in self.bundles]

    @classmethod
    def from_owners(cls, owners: Sequence[int], n: int) -> "Allocation":
        """Build from ``owners[j]`` = agent receiving item ``j``."""
        bundles = [set() for _ in range(n)]
        for j, i in enumerate(owners):
            bundles[i].add(j)
        return cls(tuple(bundles))


def check_allocation(instance: Instance, allocation: Allocation, partial: bool = False) -> None:
    """Raise :class:`InputError` unless ``allocation`` partitions the items.

    With ``partial`` the bundles only need to be disjoint.
    """
    if allocation.n != instance.n:
        raise InputError(f"allocation has {allocation.n} bundles for {instance.n} agents")
    seen: set[int] = set()
    for i, bundle in enumerate(allocation.bundles):
        for j in bundle:
            if not isinstance(j, int) or not 0 <= j < instance.m:
                raise InputError(f"bundle {i} contains unknown item {j!r}")
            if j in seen:
                raise InputError(f"item {j} appears in more than one bundle")
            seen.add(j)
    if not partial and len(seen) != instance.m:
        missing = sorted(set(range(instance.m)) - seen)
        raise InputError(f"items not allocated: {missing}")


@dataclass(frozen=True)
class PaymentVector:
    payments: tuple[Fraction, ...]

    def __post_init__(self):
        object.__setattr__(self, "payments", tuple(to_value(p) for p in self.payments))
        if any(p < 0 for p in self.payments):
            raise InputError("payments must be non-negative")

    def __getitem__(self, agent: int) -> Fraction:
        return self.payments[agent]

    def __iter__(self):
        return iter(self.payments)

    def __len__(self):
        return len(self.payments)

    @property
    def total(self) -> Fraction:
        return sum(self.payments, ZERO)

    @property
    def max(self) -> Fraction:
        return max(self.payments, default=ZERO)


# ---------------------------------------------------------------------------
# Operations


def bundle_value(instance: Instance, agent: int, bundle: Iterable[int]) -> Fraction:
    """Exact value of ``bundle`` to ``agent``."""
    if not 0 <= agent < instance.n:
        raise InputError(f"agent {agent} out of range for n={instance.n}")
    bundle = frozenset(bundle)
    for j in bundle:
        if not isinstance(j, int) or not 0 <= j < instance.m:
            raise InputError(f"item {j!r} out of range for m={instance.m}")
    return instance.valuation.value(agent, bundle)


def validate_instance(instance: Instance) -> list[Violation]:
    """Every violated invariant of ``instance``; empty when valid."""
    val = instance.valuation
    out = []
    if instance.n < 1:
        out.append(Violation("dimension", f"need at least one agent, got n={instance.n}"))
    if instance.m < 0:
        out.append(Violation("dimension", f"negative item count m={instance.m}"))
    if val.n_agents != instance.n:
        out.append(Violation("dimension", f"valuation has {val.n_agents} agents, instance declares n={instance.n}"))
    if val.n_agents and val.n_items != instance.m:
        out.append(Violation("dimension", f"valuation has {val.n_items} items, instance declares m={instance.m}"))
    for labels, count, what in (
        (instance.agent_labels, instance.n, "agent"),
        (instance.item_labels, instance.m, "item"),
    ):
        if labels is not None and len(labels) != count:
            out.append(Violation("dimension", f"{len(labels)} {what} labels for {count} {what}s"))
    out.extend(val.violations())
    return out


def require_valid(instance: Instance) -> None:
    report = validate_instance(instance)
    if report:
        raise InvalidInstanceError(report)
