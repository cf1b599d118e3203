"""Built-in corpus: the example programs and the refinement facts the
workbench is expected to certify or refute, with expected verdicts.

Programs are kept as concrete syntax so they double as parser fixtures; all
of them typecheck at their stated types.  The lazy coin stores its optional
boolean as an integer (0 undetermined, 1 false, 2 true) because compare-and-
set is restricted to word-sized payloads, which rules out a sum-typed cell.
"""

from __future__ import annotations

import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple

from .explorer import Tally
from .parser import parse_expr, parse_type
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
from .syntax import BoolLit, Expr, IntLit, Type, Unit
from .typecheck import EMPTY_ENV, check

# ---------------------------------------------------------------------------
# Shared building blocks
# ---------------------------------------------------------------------------

RAND_FN = "(λ u. let y = ref false in (fork { y <- true }); !y : unit -> bool)"

SPIN_LOCK_DEFS = """
let newlock = (λ u. ref false : unit -> ref bool) in
let acquire = (rec acquire l = if CAS(l, false, true) then () else acquire l : ref bool -> unit) in
let release = (λ l. l <- false : ref bool -> unit) in
"""

INC_FINE = "(rec inc c = let n = !c in if CAS(c, n, 1 + n) then n else inc c : ref int -> int)"
INC_NONATOMIC = "(λ x. let n = !x in x <- n + 1; n : ref int -> int)"


def choice(e1: str, e2: str) -> str:
    """e1 ⊕ e2: run one of the thunked operands, picked by a racy flag."""
    return f"(let rand = {RAND_FN} in if rand () then (λ u. {e1}) () else (λ u. {e2}) ())"


DIVERGE_INT = "((rec f x = f x : unit -> int) ())"
STATEFUL_PREFIX = "(let y = ref false in (fork { y <- true }); !y)"

# ---------------------------------------------------------------------------
# Programs
# ---------------------------------------------------------------------------

BIT_TYPE_SRC = "exists a. a * (a -> a) * (a -> bool)"
COUNTER_TYPE_SRC = "(unit -> int) * (unit -> int)"
COIN_TYPE_SRC = "(unit -> unit) * (unit -> bool)"
LOCK_MODULE_TYPE_SRC = "exists a. (unit -> a) * (a -> unit) * (a -> unit)"

PROGRAM_SOURCES = {
    "bit-bool": (
        "pack (true, (λ b. ¬b : bool -> bool), (λ b. b : bool -> bool))",
        BIT_TYPE_SRC,
    ),
    "bit-nat": (
        "pack (1, (λ n. if n = 0 then 1 else 0 : int -> int), (λ n. n = 1 : int -> bool))",
        BIT_TYPE_SRC,
    ),
    "counter-fine": (
        """
let read = (λ c. !c : ref int -> int) in
let inc = """ + INC_FINE + """ in
let c = ref 0 in
((λ u. read c), (λ u. inc c))
""",
        COUNTER_TYPE_SRC,
    ),
    "counter-coarse": (
        SPIN_LOCK_DEFS
        + """
let read = (λ c. !c : ref int -> int) in
let inc = (λ c l. acquire l; (let n = !c in c <- 1 + n; release l; n)
           : ref int -> ref bool -> int) in
let lk = newlock () in
let c = ref 0 in
((λ u. read c), (λ u. inc c lk))
""",
        COUNTER_TYPE_SRC,
    ),
    "coin-eager": (
        f"""
let rand = {RAND_FN} in
let flip = (λ c. c <- rand () : ref bool -> unit) in
let read = (λ c. !c : ref bool -> bool) in
let c = ref false in
((λ u. flip c), (λ u. read c))
""",
        COIN_TYPE_SRC,
    ),
    "coin-lazy": (
        f"""
let rand = {RAND_FN} in
let flip = (λ c. c <- 0 : ref int -> unit) in
let read = (rec read c =
    let v = !c in
    if v = 0 then
      (let x = rand () in
       let xi = if x then 2 else 1 in
       if CAS(c, 0, xi) then x else read c)
    else v = 2
  : ref int -> bool) in
let c = ref 1 in
((λ u. flip c), (λ u. read c))
""",
        COIN_TYPE_SRC,
    ),
    "coin-instrumented": (
        f"""
let rand = {RAND_FN} in
{SPIN_LOCK_DEFS}
let c = ref 1 in
let p = newproph in
let lk = newlock () in
let flip = (λ u. acquire lk; c <- 0; release lk : unit -> unit) in
let read = (λ u.
    acquire lk;
    let r = (let v = !c in
             if v = 0 then
               (let x = rand () in
                (c <- (if x then 2 else 1)); resolve p x; x)
             else v = 2) in
    release lk; r
  : unit -> bool) in
(flip, read)
""",
        COIN_TYPE_SRC,
    ),
    "spin-lock-module": (
        """
pack ((λ u. ref false : unit -> ref bool),
      (rec acquire l = if CAS(l, false, true) then () else acquire l : ref bool -> unit),
      (λ l. l <- false : ref bool -> unit))
""",
        LOCK_MODULE_TYPE_SRC,
    ),
    "ticket-lock-module": (
        """
let read = (λ c. !c : ref int -> int) in
let inc = """ + INC_FINE + """ in
let wkincr = (λ c. c <- !c + 1 : ref int -> unit) in
let wait = (rec wait n = (λ lo. if n = read lo then () else wait n lo)
            : int -> ref int -> unit) in
pack ((λ u. (ref 0, ref 0) : unit -> ref int * ref int),
      (λ p. let n = inc (π2 p) in wait n (π1 p) : ref int * ref int -> unit),
      (λ p. wkincr (π1 p) : ref int * ref int -> unit))
""",
        LOCK_MODULE_TYPE_SRC,
    ),
    "rand-flag-race": (
        "let y = ref false in (fork { y <- true }); !y",
        "bool",
    ),
    "inc-fine-fn": (INC_FINE, "ref int -> int"),
    "inc-nonatomic-fn": (INC_NONATOMIC, "ref int -> int"),
    "diverge": (DIVERGE_INT, "int"),
}

# The context that distinguishes the non-atomic increment from the CAS loop:
# fork two calls, collect both results, observe whether both returned 0.
DISTINGUISHING_CTX = """
let c = ref 0 in
let f = [] in
let r = ref 0 in
let d = ref false in
fork { r <- f c; d <- true };
let a = f c in
(rec wait u = if !d then (a = 0) && (!r = 0) else wait () : unit -> bool) ()
"""

# Two client threads taking a lock module through one acquire/increment/
# release round each; observes whether both increments landed.
LOCK_CLIENT_CTX = """
unpack [] as m in
let newl = π1 (π1 m) in
let acq = π2 (π1 m) in
let rel = π2 m in
let lk = newl () in
let c = ref 0 in
let d1 = ref false in
let d2 = ref false in
fork { acq lk; (let n = !c in c <- n + 1); rel lk; d1 <- true };
fork { acq lk; (let n = !c in c <- n + 1); rel lk; d2 <- true };
(rec wait u = if !d1 then (if !d2 then !c = 2 else wait ()) else wait () : unit -> bool) ()
"""

BIT_REL = Rel("bit", frozenset({(BoolLit(True), IntLit(1)), (BoolLit(False), IntLit(0))}))
BIT_ID_BOOL = Rel("bit-id-bool", frozenset({(BoolLit(True), BoolLit(True)), (BoolLit(False), BoolLit(False))}))
BIT_ID_INT = Rel("bit-id-int", frozenset({(IntLit(1), IntLit(1)), (IntLit(0), IntLit(0))}))


def program(name: str) -> Tuple[Expr, Type]:
    src, tysrc = PROGRAM_SOURCES[name]
    return parse_expr(src), parse_type(tysrc)


# ---------------------------------------------------------------------------
# Corpus entries
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CorpusEntry:
    name: str
    mode: str  # "refine" | "equiv" | "ctx"
    left: str  # program name or raw source
    right: str
    type_source: str
    expected: str  # "no-counterexample" | "counterexample"
    witnesses: tuple = ()
    context_source: Optional[str] = None  # ctx mode
    obs_mode: str = "true-adequate"  # ctx mode
    bounds: CheckBounds = CheckBounds()
    concurrent_calls: bool = False

    def resolve(self, which: str) -> Expr:
        src = self.left if which == "left" else self.right
        if src in PROGRAM_SOURCES:
            src = PROGRAM_SOURCES[src][0]
        return parse_expr(src)


ENTRIES = [
    CorpusEntry(
        "bit-bool-refines-bit-nat", "refine", "bit-bool", "bit-nat",
        BIT_TYPE_SRC, "no-counterexample", witnesses=(BIT_REL,),
    ),
    CorpusEntry(
        "bit-nat-refines-bit-bool", "refine", "bit-nat", "bit-bool",
        BIT_TYPE_SRC, "no-counterexample", witnesses=(BIT_REL.flipped(),),
    ),
    CorpusEntry(
        "counter-fine-refines-coarse", "refine", "counter-fine", "counter-coarse",
        COUNTER_TYPE_SRC, "no-counterexample",
        bounds=CheckBounds(arg_budget=3), concurrent_calls=True,
    ),
    CorpusEntry(
        "nonatomic-inc-distinguished", "ctx", "inc-nonatomic-fn", "inc-fine-fn",
        "ref int -> int", "counterexample", context_source=DISTINGUISHING_CTX,
    ),
    CorpusEntry(
        "coin-lazy-refines-eager", "refine", "coin-lazy", "coin-eager",
        COIN_TYPE_SRC, "no-counterexample", bounds=CheckBounds(arg_budget=2),
    ),
    CorpusEntry(
        "coin-eager-refines-lazy", "refine", "coin-eager", "coin-lazy",
        COIN_TYPE_SRC, "no-counterexample", bounds=CheckBounds(arg_budget=2),
    ),
    CorpusEntry(
        "coin-lazy-refines-instrumented", "refine", "coin-lazy", "coin-instrumented",
        COIN_TYPE_SRC, "no-counterexample", bounds=CheckBounds(arg_budget=2),
    ),
    CorpusEntry(
        "coin-instrumented-refines-eager", "refine", "coin-instrumented", "coin-eager",
        COIN_TYPE_SRC, "no-counterexample", bounds=CheckBounds(arg_budget=2),
    ),
    CorpusEntry(
        "choice-idempotent", "equiv", choice("1", "1"), "1", "int", "no-counterexample",
    ),
    CorpusEntry(
        "choice-commutative", "equiv", choice("1", "2"), choice("2", "1"),
        "int", "no-counterexample",
    ),
    CorpusEntry(
        "choice-associative", "equiv",
        choice("1", choice("2", "3")), choice(choice("1", "2"), "3"),
        "int", "no-counterexample",
    ),
    CorpusEntry(
        "choice-diverge-unit", "equiv", "1", choice("1", DIVERGE_INT),
        "int", "no-counterexample",
    ),
    CorpusEntry(
        "choice-seq-distributes", "equiv",
        f"({choice('1', '2')}; 3)", choice("(1; 3)", "(2; 3)"),
        "int", "no-counterexample",
    ),
    CorpusEntry(
        "choice-under-prefix", "equiv",
        f"({STATEFUL_PREFIX}; {choice('2', '3')})",
        choice(f"({STATEFUL_PREFIX}; 2)", f"({STATEFUL_PREFIX}; 3)"),
        "int", "no-counterexample",
    ),
    CorpusEntry(
        "rand-vs-boolean-choice", "equiv", "rand-flag-race", choice("true", "false"),
        "bool", "no-counterexample",
    ),
    CorpusEntry(
        "diverge-refines-literal", "refine", "diverge", "0", "int", "no-counterexample",
    ),
    CorpusEntry(
        "ticket-lock-refines-spin-lock-clients", "ctx",
        "ticket-lock-module", "spin-lock-module",
        LOCK_MODULE_TYPE_SRC, "no-counterexample", context_source=LOCK_CLIENT_CTX,
    ),
    CorpusEntry(
        "spin-lock-refines-ticket-lock-clients", "ctx",
        "spin-lock-module", "ticket-lock-module",
        LOCK_MODULE_TYPE_SRC, "no-counterexample", context_source=LOCK_CLIENT_CTX,
    ),
]


# Programs of checkable type for the self-refinement suite; existential
# modules over runtime locations are exercised through the lock clients
# instead (a finite witness cannot enumerate heap locations up front).
SELF_CHECKS = [
    ("bit-bool", (BIT_ID_BOOL,), CheckBounds(arg_budget=2)),
    ("bit-nat", (BIT_ID_INT,), CheckBounds(arg_budget=2)),
    ("counter-fine", (), CheckBounds(arg_budget=2)),
    ("counter-coarse", (), CheckBounds(arg_budget=2)),
    ("coin-eager", (), CheckBounds(arg_budget=2)),
    ("coin-lazy", (), CheckBounds(arg_budget=2)),
    ("coin-instrumented", (), CheckBounds(arg_budget=2)),
    ("rand-flag-race", (), CheckBounds()),
    ("inc-fine-fn", (), CheckBounds(arg_budget=2)),
    ("inc-nonatomic-fn", (), CheckBounds(arg_budget=2)),
    ("diverge", (), CheckBounds()),
]


# ---------------------------------------------------------------------------
# Running the corpus
# ---------------------------------------------------------------------------


@dataclass
class EntryResult:
    name: str
    verdicts: list
    expected: str
    ok: bool
    seconds: float
    states: int


def _verdict_tag(v) -> str:
    return v.tag


def run_entry(entry: CorpusEntry) -> EntryResult:
    t0 = time.monotonic()
    tally = Tally()
    left = entry.resolve("left")
    right = entry.resolve("right")
    t = parse_type(entry.type_source)
    verdicts: list
    if entry.mode == "refine":
        verdicts = [
            check_refinement(
                left, right, t,
                bounds=entry.bounds,
                witnesses=entry.witnesses,
                concurrent_calls=entry.concurrent_calls,
                tally=tally,
            )
        ]
    elif entry.mode == "equiv":
        fwd, rev = check_equivalence(
            left, right, t,
            bounds=entry.bounds,
            witnesses=entry.witnesses,
            concurrent_calls=entry.concurrent_calls,
            tally=tally,
        )
        verdicts = [fwd, rev]
    elif entry.mode == "ctx":
        ctx = parse_expr(entry.context_source)
        verdicts = [
            check_ctx(ctx, left, right, t, mode=entry.obs_mode, bounds=entry.bounds, tally=tally)
        ]
    else:
        raise ValueError(f"unknown corpus mode {entry.mode!r}")
    ok = all(_verdict_tag(v) == entry.expected for v in verdicts)
    return EntryResult(entry.name, verdicts, entry.expected, ok, time.monotonic() - t0, tally.states)


def default_workers() -> int:
    raw = os.environ.get("RELOC_WORKERS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def run_corpus(name_filter: Optional[str] = None, workers: Optional[int] = None) -> list:
    """Run (a filtered subset of) the corpus; deterministic regardless of
    worker count."""
    if workers is None:
        workers = default_workers()
    entries = [e for e in ENTRIES if name_filter is None or name_filter in e.name]
    if workers <= 1:
        return [run_entry(e) for e in entries]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(run_entry, entries))


def typecheck_corpus_programs() -> None:
    """Every named program parses and typechecks at its stated type."""
    for name, (src, tysrc) in PROGRAM_SOURCES.items():
        check(EMPTY_ENV, parse_expr(src), parse_type(tysrc))
