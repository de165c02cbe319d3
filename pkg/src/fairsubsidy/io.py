"""JSON documents for instances, allocations and results.

Values are always strings (``"0.4"``, ``"2/5"``, ``"3"``); JSON numbers are
accepted on input and parsed from their decimal text, never through a
binary float.
"""

from __future__ import annotations

import json
from fractions import Fraction
from pathlib import Path

from .core import (
    AdditiveValuation,
    Allocation,
    BudgetAdditiveValuation,
    Instance,
    InputError,
    TableValuation,
    UnitDemandValuation,
    render_value,
    to_value,
)

INSTANCE_FORMAT = "fairsubsidy-instance"
RESULT_FORMAT = "fairsubsidy-result"
VERSION = 1


class FileError(OSError):
    pass


def loads(text: str):
    return json.loads(text, parse_float=Fraction)


def dumps(doc) -> str:
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def read_json(path) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise FileError(f"cannot read {path}: {exc.strerror or exc}") from exc
    try:
        return loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: not valid JSON ({exc})") from exc


def write_text(path, text: str) -> None:
    try:
        Path(path).write_text(text)
    except OSError as exc:
        raise FileError(f"cannot write {path}: {exc.strerror or exc}") from exc


def _values(rows):
    return [[render_value(v) for v in row] for row in rows]


def instance_to_dict(instance: Instance) -> dict:
    val = instance.valuation
    if isinstance(val, TableValuation):
        body = {
            "kind": "table",
            "tables": [
                [[sorted(s), render_value(v)] for s, v in sorted(t.items(), key=lambda kv: (len(kv[0]), sorted(kv[0])))]
                for t in val.tables
            ],
        }
    else:
        body = {"kind": val.kind, "values": _values(val.values)}
        if isinstance(val, BudgetAdditiveValuation):
            body["cap"] = [render_value(c) for c in val.caps]
    doc = {"format": INSTANCE_FORMAT, "version": VERSION, "n": instance.n, "m": instance.m, "valuation": body}
    labels = {}
    if instance.agent_labels is not None:
        labels["agents"] = list(instance.agent_labels)
    if instance.item_labels is not None:
        labels["items"] = list(instance.item_labels)
    if labels:
        doc["labels"] = labels
    return doc


def instance_from_dict(doc: dict) -> Instance:
    try:
        if doc.get("version", VERSION) != VERSION:
            raise InputError(f"unsupported instance version {doc.get('version')!r}")
        n, m = int(doc["n"]), int(doc["m"])
        body = doc["valuation"]
        kind = body["kind"]
        if kind == "additive":
            val = AdditiveValuation(body["values"])
        elif kind == "unit_demand":
            val = UnitDemandValuation(body["values"])
        elif kind == "budget_additive":
            val = BudgetAdditiveValuation(body["values"], body["cap"])
        elif kind == "table":
            tables = [{frozenset(int(j) for j in items): v for items, v in entries} for entries in body["tables"]]
            val = TableValuation(m, tables)
        else:
            raise InputError(f"unknown valuation kind {kind!r}")
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, InputError):
            raise
        raise InputError(f"malformed instance document: {exc!r}") from exc
    labels = doc.get("labels") or {}
    agents = tuple(labels["agents"]) if "agents" in labels else None
    items = tuple(labels["items"]) if "items" in labels else None
    return Instance(n, m, val, agents, items)


def read_instance(path) -> Instance:
    return instance_from_dict(read_json(path))


def write_instance(path, instance: Instance) -> None:
    write_text(path, dumps(instance_to_dict(instance)))


def allocation_from_doc(doc) -> Allocation:
    """Accepts ``{"allocation": [[...], ...]}`` (e.g. a result file) or a bare list."""
    raw = doc["allocation"] if isinstance(doc, dict) else doc
    try:
        return Allocation(tuple(frozenset(int(j) for j in b) for b in raw))
    except (TypeError, ValueError) as exc:
        raise InputError(f"malformed allocation: {exc}") from exc


def payments_from_doc(doc) -> list[Fraction]:
    raw = doc["payments"] if isinstance(doc, dict) else doc
    return [to_value(p) for p in raw]


def allocation_to_list(allocation: Allocation) -> list[list[int]]:
    return allocation.as_lists()
