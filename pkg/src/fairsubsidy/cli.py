"""Command-line interface.

Exit codes: 0 success, 1 a proven bound was violated (a bug), 2 invalid
input, 3 allocation not envy-freeable, 4 ``check`` found a failing
property, 64 usage error, 66 file error.
"""

from __future__ import annotations

import argparse
import csv
import io as _io
import logging
import random
import sys
import time
from concurrent.futures import ProcessPoolExecutor

from . import __version__
from .additive import CertificationError, certify_one_dollar, solve_additive
from .core import ZERO, Instance, InputError, InvalidInstanceError, render_value, validate_instance
from .envy_graph import NotEnvyFreeableError, is_envy_freeable, minimal_payments, welfare_maximizing_permutation
from .generate import KINDS, generate_instance
from .io import (
    FileError,
    allocation_from_doc,
    dumps,
    instance_to_dict,
    payments_from_doc,
    read_instance,
    read_json,
    write_text,
    RESULT_FORMAT,
    VERSION,
)
from .monotone import solve_monotone
from .verify import OracleSizeError, brute_force_min_subsidy, check_balanced, check_ef1, check_envy_free

EXIT_OK = 0
EXIT_BOUND = 1
EXIT_INVALID = 2
EXIT_NOT_EF = 3
EXIT_CHECK = 4
EXIT_USAGE = 64
EXIT_FILE = 66

BENCH_KINDS = (*KINDS, "mixed")
MIXED = ("unit_demand", "budget_additive", "table")

logger = logging.getLogger("fairsubsidy")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _vals(xs):
    return [render_value(x) for x in xs]


# ---------------------------------------------------------------------------
# result documents


def additive_result(instance: Instance) -> tuple[dict, bool]:
    sol = solve_additive(instance)
    n = instance.n
    alloc, pay = sol.allocation, sol.payments
    try:
        certify_one_dollar(instance, alloc, sol.trace)
        certified = True
    except CertificationError as exc:
        logger.error("certificate failed: %s", exc)
        certified = False
    certs = {
        "envy_freeable": bool(is_envy_freeable(instance, alloc)),
        "envy_free_with_payments": bool(check_envy_free(instance, alloc, pay.payments)),
        "ef1": bool(check_ef1(instance, alloc)),
        "balanced": check_balanced(alloc, instance.m),
        "max_payment": render_value(pay.max),
        "one_dollar_certified": certified,
    }
    ok = (
        certs["envy_freeable"]
        and certs["envy_free_with_payments"]
        and certs["ef1"]
        and certs["balanced"]
        and certified
        and pay.max <= 1
        and pay.total <= n - 1
    )
    certs["theorem_bound_ok"] = ok
    doc = {
        "format": RESULT_FORMAT,
        "version": VERSION,
        "solver": "additive",
        "allocation": alloc.as_lists(),
        "payments": _vals(pay.payments),
        "total_subsidy": render_value(pay.total),
        "certificates": certs,
        "trace": {"rounds": sol.trace.as_lists()},
        "config": {"n": n, "m": instance.m},
    }
    return doc, ok


def monotone_result(instance: Instance, seed: int | None = None) -> tuple[dict, bool]:
    sol = solve_monotone(instance, seed)
    n = instance.n
    alloc, pay = sol.allocation, sol.payments
    bound = 2 * (n - 1)
    ef1_intermediate = bool(check_ef1(instance, sol.ef1_allocation))
    certs = {
        "envy_freeable": bool(is_envy_freeable(instance, alloc)),
        "envy_free_with_payments": bool(check_envy_free(instance, alloc, pay.payments)),
        "ef1": bool(check_ef1(instance, alloc)),
        "ef1_before_rematch": ef1_intermediate,
        "balanced": check_balanced(alloc, instance.m),
        "max_payment": render_value(pay.max),
    }
    ok = (
        certs["envy_freeable"]
        and certs["envy_free_with_payments"]
        and ef1_intermediate
        and pay.max <= bound
        and pay.total <= bound * (n - 1)
    )
    certs["theorem_bound_ok"] = ok
    doc = {
        "format": RESULT_FORMAT,
        "version": VERSION,
        "solver": "monotone",
        "allocation": alloc.as_lists(),
        "payments": _vals(pay.payments),
        "total_subsidy": render_value(pay.total),
        "certificates": certs,
        "trace": {
            "ef1_allocation": sol.ef1_allocation.as_lists(),
            "permutation": list(sol.permutation),
            "steps": [s.to_dict() for s in sol.steps],
        },
        "config": {"n": n, "m": instance.m, "seed": seed},
    }
    return doc, ok


# ---------------------------------------------------------------------------
# commands


def _load_valid(path) -> Instance:
    instance = read_instance(path)
    report = validate_instance(instance)
    if report:
        raise InvalidInstanceError(report)
    return instance


def _emit(text: str, out) -> None:
    if out:
        write_text(out, text)
    else:
        sys.stdout.write(text)


def cmd_solve(args) -> int:
    instance = _load_valid(args.instance)
    doc, ok = additive_result(instance)
    _emit(dumps(doc), args.out)
    return EXIT_OK if ok else EXIT_BOUND


def cmd_solve_monotone(args) -> int:
    instance = _load_valid(args.instance)
    doc, ok = monotone_result(instance, args.seed)
    _emit(dumps(doc), args.out)
    return EXIT_OK if ok else EXIT_BOUND


def cmd_payments(args) -> int:
    instance = _load_valid(args.instance)
    alloc = allocation_from_doc(read_json(args.allocation))
    try:
        pay = minimal_payments(instance, alloc)
    except NotEnvyFreeableError as exc:
        w = exc.witness
        doc = {"envy_freeable": False, "cycle": list(w.agents), "cycle_weight": render_value(w.weight)}
        sys.stdout.write(dumps(doc))
        print(f"not envy-freeable: positive cycle {w}", file=sys.stderr)
        return EXIT_NOT_EF
    doc = {"envy_freeable": True, "payments": _vals(pay.payments), "total_subsidy": render_value(pay.total)}
    _emit(dumps(doc), args.out)
    return EXIT_OK


def cmd_rematch(args) -> int:
    instance = _load_valid(args.instance)
    alloc = allocation_from_doc(read_json(args.allocation))
    perm = welfare_maximizing_permutation(instance, alloc)
    doc = {"allocation": alloc.permuted(perm).as_lists(), "permutation": list(perm)}
    _emit(dumps(doc), args.out)
    return EXIT_OK


CHECKS = ("ef", "ef1", "balanced", "envy_freeable")


def cmd_check(args) -> int:
    instance = _load_valid(args.instance)
    alloc = allocation_from_doc(read_json(args.allocation))
    payments = payments_from_doc(read_json(args.payments))
    required = [r.strip() for r in args.require.split(",") if r.strip()]
    unknown = [r for r in required if r not in CHECKS]
    if unknown:
        raise UsageError(f"unknown property {unknown[0]!r}; choose from {', '.join(CHECKS)}")
    ef = check_envy_free(instance, alloc, payments)
    ef1 = check_ef1(instance, alloc)
    report = {
        "ef": ef.ok,
        "ef_violation": list(ef.violation) if ef.violation else None,
        "ef1": ef1.ok,
        "ef1_violation": list(ef1.violation) if ef1.violation else None,
        "balanced": check_balanced(alloc, instance.m),
        "envy_freeable": bool(is_envy_freeable(instance, alloc)),
        "total_subsidy": render_value(sum(payments, ZERO)),
        "required": required,
    }
    sys.stdout.write(dumps(report))
    return EXIT_OK if all(report[r] for r in required) else EXIT_CHECK


def cmd_oracle(args) -> int:
    instance = _load_valid(args.instance)
    res = brute_force_min_subsidy(instance, cap=args.cap)
    doc = {
        "optimal_total_subsidy": render_value(res.optimal_total_subsidy),
        "optimal_allocation": res.optimal_allocation.as_lists(),
        "allocations_evaluated": res.evaluated,
        "envy_freeable_allocations": res.envy_freeable_count,
    }
    _emit(dumps(doc), args.out)
    return EXIT_OK


def cmd_gen(args) -> int:
    instance = generate_instance(args.n, args.m, args.kind, args.denom, args.seed)
    _emit(dumps(instance_to_dict(instance)), args.out)
    return EXIT_OK


def _span(text: str) -> tuple[int, int]:
    lo, _, hi = text.partition("-")
    try:
        lo_i = int(lo)
        hi_i = int(hi) if hi else lo_i
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected N or LO-HI, got {text!r}") from None
    if hi_i < lo_i:
        raise argparse.ArgumentTypeError(f"empty range {text!r}")
    return lo_i, hi_i


def bench_instance(seed: int, n_span, m_span, kind: str, denom: int) -> Instance:
    """The instance ``bench`` solves for ``seed``; sizes drawn from the spans."""
    rng = random.Random(f"bench:{seed}")
    n = rng.randint(*n_span)
    m = rng.randint(*m_span)
    if kind == "mixed":
        kind = MIXED[seed % len(MIXED)]
    return generate_instance(n, m, kind, denom, seed)


BENCH_FIELDS = (
    "seed", "n", "m", "kind", "total_subsidy", "max_payment",
    "envy_freeable", "ef1", "balanced", "bound_ok", "runtime",
)


def bench_row(task) -> dict:
    seed, n_span, m_span, kind, denom = task
    instance = bench_instance(seed, n_span, m_span, kind, denom)
    start = time.perf_counter()
    if instance.is_additive:
        doc, ok = additive_result(instance)
        ef1 = doc["certificates"]["ef1"]
    else:
        doc, ok = monotone_result(instance)
        ef1 = doc["certificates"]["ef1_before_rematch"]
    elapsed = time.perf_counter() - start
    c = doc["certificates"]
    return {
        "seed": seed,
        "n": instance.n,
        "m": instance.m,
        "kind": instance.valuation.kind,
        "total_subsidy": doc["total_subsidy"],
        "max_payment": c["max_payment"],
        "envy_freeable": c["envy_freeable"],
        "ef1": ef1,
        "balanced": c["balanced"],
        "bound_ok": ok,
        "runtime": f"{elapsed:.6f}",
    }


def cmd_bench(args) -> int:
    tasks = [(args.seed + i, args.n, args.m, args.kind, args.denom) for i in range(args.count)]
    if args.workers > 1:
        with ProcessPoolExecutor(args.workers) as pool:
            rows = list(pool.map(bench_row, tasks, chunksize=8))
    else:
        rows = [bench_row(t) for t in tasks]
    buf = _io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=BENCH_FIELDS, lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    if args.csv:
        write_text(args.csv, buf.getvalue())
    bad = [r["seed"] for r in rows if not r["bound_ok"]]
    summary = {
        "instances": len(rows),
        "violations": len(bad),
        "violating_seeds": bad,
        "kind": args.kind,
    }
    sys.stdout.write(dumps(summary))
    if bad:
        print(f"theorem bound violated for seed {bad[0]}", file=sys.stderr)
        return EXIT_BOUND
    return EXIT_OK


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="fairsubsidy", description="Envy-free allocations of indivisible goods with bounded subsidies.")
    p.add_argument("--version", action="version", version=__version__)
    p.add_argument("-v", "--verbose", action="store_true", help="debug logging to stderr")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("solve", help="additive solver (at most 1 per agent)")
    s.add_argument("instance")
    s.add_argument("--out")
    s.set_defaults(func=cmd_solve)

    s = sub.add_parser("solve-monotone", help="envy cycles + rematching (at most 2(n-1) per agent)")
    s.add_argument("instance")
    s.add_argument("--out")
    s.add_argument("--seed", type=int, default=None, help="randomize item order and source choice")
    s.set_defaults(func=cmd_solve_monotone)

    s = sub.add_parser("payments", help="minimal payments for a fixed allocation")
    s.add_argument("instance")
    s.add_argument("allocation")
    s.add_argument("--out")
    s.set_defaults(func=cmd_payments)

    s = sub.add_parser("rematch", help="welfare-maximal reassignment of bundles")
    s.add_argument("instance")
    s.add_argument("allocation")
    s.add_argument("--out")
    s.set_defaults(func=cmd_rematch)

    s = sub.add_parser("check", help="verify an allocation with payments")
    s.add_argument("instance")
    s.add_argument("allocation")
    s.add_argument("payments")
    s.add_argument("--require", default="ef", help=f"comma list from {','.join(CHECKS)} (default: ef)")
    s.set_defaults(func=cmd_check)

    s = sub.add_parser("oracle", help="brute-force minimum total subsidy")
    s.add_argument("instance")
    s.add_argument("--cap", type=int, default=None, help="max allocations to enumerate")
    s.add_argument("--out")
    s.set_defaults(func=cmd_oracle)

    s = sub.add_parser("gen", help="generate a random instance")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--m", type=int, required=True)
    s.add_argument("--kind", choices=KINDS, default="additive")
    s.add_argument("--denom", type=int, default=10)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out")
    s.set_defaults(func=cmd_gen)

    s = sub.add_parser("bench", help="solve many random instances, one CSV row each")
    s.add_argument("--count", type=int, default=100)
    s.add_argument("--n", type=_span, default=(2, 8), help="N or LO-HI")
    s.add_argument("--m", type=_span, default=(1, 40), help="N or LO-HI")
    s.add_argument("--kind", choices=BENCH_KINDS, default="additive")
    s.add_argument("--denom", type=int, default=100)
    s.add_argument("--seed", type=int, default=0, help="first seed; seeds are consecutive")
    s.add_argument("--workers", type=int, default=1)
    s.add_argument("--csv")
    s.set_defaults(func=cmd_bench)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except FileError as exc:
        print(exc, file=sys.stderr)
        return EXIT_FILE
    except (InputError, OracleSizeError) as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
