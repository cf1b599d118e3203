"""Command-line front end.

Commands: typecheck, run, refine, ctx, equiv, corpus.  Reports are JSON with
a stable schema (top-level "schema": 1).  Exit codes: 0 success, 1 verdict
mismatch or type error, 2 usage error, 3 internal invariant violation.
Witness relations are JSON files:
    {"name": "R", "pairs": [[{"bool": true}, {"int": 1}], ...]}
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from typing import Optional

from .corpus import default_workers, run_corpus
from .explorer import Bounds, Tally, explore_all, search_outcome
from .parser import ParseError, parse_expr, parse_program, parse_type, pretty, pretty_type
from .refine import (
    CheckBounds,
    Counterexample,
    Inconclusive,
    NoCounterexample,
    Rel,
    check_ctx,
    check_equivalence,
    check_refinement,
)
from .semantics import Heap
from .syntax import (
    BoolLit,
    Expr,
    Fold,
    Inl,
    Inr,
    IntLit,
    Loc,
    Pair,
    ProphId,
    Unit,
    Val,
)
from .typecheck import EMPTY_ENV, TypeCheckError, check, synth

SCHEMA = 1

EXIT_OK = 0
EXIT_MISMATCH = 1
EXIT_USAGE = 2
EXIT_INTERNAL = 3


# ---------------------------------------------------------------------------
# JSON encoding of values, heaps, verdicts
# ---------------------------------------------------------------------------


def value_to_json(v: Val):
    if isinstance(v, Unit):
        return {"unit": None}
    if isinstance(v, BoolLit):
        return {"bool": v.value}
    if isinstance(v, IntLit):
        return {"int": v.value}
    if isinstance(v, Loc):
        return {"loc": v.loc}
    if isinstance(v, ProphId):
        return {"proph": v.pid}
    if isinstance(v, Pair):
        return {"pair": [value_to_json(v.left), value_to_json(v.right)]}
    if isinstance(v, Inl):
        return {"inl": value_to_json(v.arg)}
    if isinstance(v, Inr):
        return {"inr": value_to_json(v.arg)}
    if isinstance(v, Fold):
        return {"fold": value_to_json(v.arg)}
    return {"opaque": pretty(v, debug=True)}


def value_from_json(obj) -> Val:
    if not isinstance(obj, dict) or len(obj) != 1:
        raise ValueError(f"bad value encoding: {obj!r}")
    (kind, payload), = obj.items()
    if kind == "unit":
        return Unit()
    if kind == "bool":
        return BoolLit(bool(payload))
    if kind == "int":
        return IntLit(int(payload))
    if kind == "pair":
        return Pair(value_from_json(payload[0]), value_from_json(payload[1]))
    if kind == "inl":
        return Inl(value_from_json(payload))
    if kind == "inr":
        return Inr(value_from_json(payload))
    if kind == "fold":
        return Fold(value_from_json(payload))
    raise ValueError(f"bad value encoding: {obj!r}")


def heap_to_json(heap: Heap):
    return {str(loc): value_to_json(v) for loc, v in sorted(heap.data.items())}


def trace_to_json(trace):
    return [[i, tag] for (i, tag) in trace]


def verdict_to_json(v):
    if isinstance(v, NoCounterexample):
        return {
            "tag": "no-counterexample",
            "complete": v.complete,
            "incompleteReasons": list(v.incomplete_reasons),
        }
    if isinstance(v, Counterexample):
        out = {
            "tag": "counterexample",
            "kind": v.kind,
            "detail": v.detail,
            "trace": trace_to_json(v.trace),
            "rightComplete": v.right_complete,
        }
        if v.left_value is not None:
            out["leftValue"] = value_to_json(v.left_value)
        if v.left_heap is not None:
            out["leftHeap"] = heap_to_json(v.left_heap)
        return out
    if isinstance(v, Inconclusive):
        return {"tag": "inconclusive", "reason": v.reason, "boundHit": v.bound_hit}
    raise AssertionError(f"verdict_to_json: {v!r}")


def load_rel(path: str) -> Rel:
    with open(path, "r", encoding="utf-8") as fh:
        obj = json.load(fh)
    pairs = frozenset(
        (value_from_json(a), value_from_json(b)) for a, b in obj.get("pairs", [])
    )
    return Rel(obj.get("name", path), pairs)


def _emit(obj, out: Optional[str] = None) -> None:
    text = json.dumps(obj, indent=2)
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _load_program(path: str):
    with open(path, "r", encoding="utf-8") as fh:
        return parse_program(fh.read())


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


def cmd_typecheck(args) -> int:
    expr, declared = _load_program(args.file)
    expect = parse_type(args.expect) if args.expect else declared
    try:
        if expect is not None:
            check(EMPTY_ENV, expr, expect)
            got = expect
        else:
            got = synth(EMPTY_ENV, expr)
    except TypeCheckError as exc:
        print(f"type error ({exc.kind}): {exc.message}", file=sys.stderr)
        return EXIT_MISMATCH
    print(pretty_type(got))
    return EXIT_OK


def _bounds_from(args) -> Bounds:
    return Bounds(
        max_steps=args.fuel,
        max_configs=args.max_configs,
        max_threads=args.max_threads,
    )


def cmd_run(args) -> int:
    expr, _ = _load_program(args.file)
    bounds = _bounds_from(args)
    tally = Tally()
    if args.one:
        outcome, _complete = search_outcome(expr, lambda v, h: True, bounds, tally)
        report = {
            "schema": SCHEMA,
            "outcome": None
            if outcome is None
            else {
                "value": value_to_json(outcome.value),
                "heap": heap_to_json(outcome.heap),
                "trace": trace_to_json(outcome.trace),
            },
            "statesVisited": tally.states,
        }
        _emit(report, args.json)
        return EXIT_OK
    rep = explore_all(expr, bounds, tally)
    report = {
        "schema": SCHEMA,
        "outcomes": [
            {
                "value": value_to_json(o.value),
                "heap": heap_to_json(o.heap),
                "trace": trace_to_json(o.trace),
            }
            for o in rep.outcomes
        ],
        "complete": rep.complete,
        "boundHit": rep.bound_hit,
        "stuck": len(rep.stuck),
        "statesVisited": rep.states_visited,
    }
    _emit(report, args.json)
    return EXIT_OK


def _check_bounds_from(args) -> CheckBounds:
    b = Bounds(max_steps=args.fuel, max_configs=args.max_configs, max_threads=args.max_threads)
    return CheckBounds(left=b, right=b, arg_budget=args.arg_budget, mu_depth=args.mu_depth)


def _verdict_exit(verdicts) -> int:
    return EXIT_OK if all(isinstance(v, NoCounterexample) for v in verdicts) else EXIT_MISMATCH


def cmd_refine(args) -> int:
    left, lty = _load_program(args.left)
    right, rty = _load_program(args.right)
    tsrc = args.type or None
    t = parse_type(tsrc) if tsrc else (lty or rty)
    if t is None:
        print("no type: pass --type or a #type: pragma", file=sys.stderr)
        return EXIT_USAGE
    witnesses = [load_rel(p) for p in args.witness]
    rels = [load_rel(p) for p in args.rel] or None
    if args.typecheck:
        check(EMPTY_ENV, left, t)
        check(EMPTY_ENV, right, t)
    tally = Tally()
    t0 = time.monotonic()
    if args.command == "equiv":
        fwd, rev = check_equivalence(
            left, right, t,
            bounds=_check_bounds_from(args),
            witnesses=witnesses,
            forall_rels=rels,
            concurrent_calls=args.concurrent_calls,
            tally=tally,
        )
        verdicts = [fwd, rev]
        body = {"forward": verdict_to_json(fwd), "reverse": verdict_to_json(rev)}
    else:
        v = check_refinement(
            left, right, t,
            bounds=_check_bounds_from(args),
            witnesses=witnesses,
            forall_rels=rels,
            concurrent_calls=args.concurrent_calls,
            tally=tally,
        )
        verdicts = [v]
        body = {"verdict": verdict_to_json(v)}
    report = {
        "schema": SCHEMA,
        "type": pretty_type(t),
        **body,
        "wallTimeSec": round(time.monotonic() - t0, 3),
        "statesVisited": tally.states,
    }
    _emit(report, args.json)
    return _verdict_exit(verdicts)


def cmd_ctx(args) -> int:
    with open(args.context, "r", encoding="utf-8") as fh:
        ctx = parse_expr(fh.read())
    left, _ = _load_program(args.left)
    right, _ = _load_program(args.right)
    t = parse_type(args.type)
    tally = Tally()
    t0 = time.monotonic()
    v = check_ctx(
        ctx, left, right, t,
        mode=args.mode,
        bounds=_check_bounds_from(args),
        tally=tally,
    )
    report = {
        "schema": SCHEMA,
        "holeType": pretty_type(t),
        "mode": args.mode,
        "verdict": verdict_to_json(v),
        "wallTimeSec": round(time.monotonic() - t0, 3),
        "statesVisited": tally.states,
    }
    _emit(report, args.json)
    return _verdict_exit([v])


def cmd_corpus(args) -> int:
    results = run_corpus(args.filter, args.workers)
    entries = []
    for r in results:
        entries.append(
            {
                "name": r.name,
                "expected": r.expected,
                "verdicts": [verdict_to_json(v) for v in r.verdicts],
                "ok": r.ok,
                "wallTimeSec": round(r.seconds, 3),
                "statesVisited": r.states,
            }
        )
    report = {
        "schema": SCHEMA,
        "entries": entries,
        "summary": {
            "total": len(results),
            "passed": sum(1 for r in results if r.ok),
            "failed": sum(1 for r in results if not r.ok),
        },
    }
    _emit(report, args.json)
    for r in results:
        mark = "ok  " if r.ok else "FAIL"
        print(f"{mark} {r.name} ({r.seconds:.1f}s, {r.states} states)", file=sys.stderr)
    return EXIT_OK if all(r.ok for r in results) else EXIT_MISMATCH


# ---------------------------------------------------------------------------
# Argument parsing
# ---------------------------------------------------------------------------


def _add_bounds_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--fuel", type=int, default=10_000, help="max steps per execution path")
    p.add_argument("--max-configs", type=int, default=2_000_000)
    p.add_argument("--max-threads", type=int, default=16)


def _add_check_flags(p: argparse.ArgumentParser) -> None:
    _add_bounds_flags(p)
    p.add_argument("--arg-budget", type=int, default=3,
                   help="max related argument pairs and call-sequence length per arrow")
    p.add_argument("--mu-depth", type=int, default=8)
    p.add_argument("--witness", action="append", default=[],
                   help="JSON relation file interpreting an existential type (repeatable)")
    p.add_argument("--rel", action="append", default=[],
                   help="JSON relation file used as a universal-type candidate (repeatable)")
    p.add_argument("--concurrent-calls", action="store_true",
                   help="also run pairs of closure calls in parallel threads")
    p.add_argument("--no-typecheck", dest="typecheck", action="store_false",
                   help="skip typechecking the two sides before the search")
    p.add_argument("--json", help="write the JSON report to this file")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="relcheck",
        description="Typechecker, interleaving interpreter, and bounded "
        "contextual-refinement checker for a small concurrent language",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("typecheck", help="typecheck a .rl file")
    p.add_argument("file")
    p.add_argument("--expect", help="expected type (overrides the #type: pragma)")
    p.set_defaults(fn=cmd_typecheck)

    p = sub.add_parser("run", help="execute a program, exploring interleavings")
    p.add_argument("file")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--all", action="store_true", help="collect every outcome (default)")
    g.add_argument("--one", action="store_true", help="stop at the first outcome")
    _add_bounds_flags(p)
    p.add_argument("--json", help="write the JSON report to this file")
    p.set_defaults(fn=cmd_run)

    p = sub.add_parser("refine", help="check left-refines-right at a type")
    p.add_argument("left")
    p.add_argument("right")
    p.add_argument("--type", help="refinement type (falls back to #type: pragmas)")
    _add_check_flags(p)
    p.set_defaults(fn=cmd_refine)

    p = sub.add_parser("equiv", help="check refinement in both directions")
    p.add_argument("left")
    p.add_argument("right")
    p.add_argument("--type")
    _add_check_flags(p)
    p.set_defaults(fn=cmd_refine)

    p = sub.add_parser("ctx", help="test two programs under one concrete context")
    p.add_argument("context", help="file containing a one-hole context")
    p.add_argument("left")
    p.add_argument("right")
    p.add_argument("--type", required=True, help="type of the hole")
    p.add_argument("--mode", choices=["plain", "true-adequate"], default="plain")
    _add_check_flags(p)
    p.set_defaults(fn=cmd_ctx)

    p = sub.add_parser("corpus", help="run the built-in example corpus")
    p.add_argument("--filter", help="only entries whose name contains this substring")
    p.add_argument("--json", help="write the JSON report to this file")
    p.add_argument("--workers", type=int, default=None,
                   help="parallel entries (default: RELOC_WORKERS or 1)")
    p.set_defaults(fn=cmd_corpus)

    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    try:
        return args.fn(args)
    except (ParseError, TypeCheckError) as exc:
        kind = getattr(exc, "kind", "parse error")
        print(f"error ({kind}): {exc}", file=sys.stderr)
        return EXIT_MISMATCH
    except (OSError, ValueError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except AssertionError as exc:
        print(f"internal invariant violation: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
