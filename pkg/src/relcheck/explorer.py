"""Bounded exhaustive exploration of thread interleavings.

explore_all enumerates every schedule of a configuration up to bounds,
memoizing on a canonical form of configurations that is invariant under
consistent renaming of locations and prophecy ids.  Revisited canonical
states are pruned, so tight loops (spin waits, busy recursion) close out as
finite state graphs instead of exhausting fuel.  An execution contributes an
outcome whenever the main thread has reduced to a value; forked threads need
not have terminated.

search_outcome is the goal-directed variant used for the angelic side of
refinement checks: it streams outcomes lazily and stops at the first hit.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Iterator, Optional, Tuple, Union

from .syntax import (
    App,
    Ascribe,
    BinOp,
    BoolLit,
    Cas,
    Expr,
    Fold,
    Fork,
    Hole,
    If,
    Inl,
    Inr,
    IntLit,
    Load,
    Loc,
    Match,
    NewProph,
    Pack,
    Pair,
    ProphId,
    Proj,
    Rec,
    Ref,
    ResolveProph,
    Store,
    TApp,
    TLam,
    UnOp,
    Unfold,
    Unit,
    Unpack,
    Val,
    Var,
    is_val,
)
from .semantics import Config, Heap, StepResult, Stuck, init_config, thread_step


@dataclass(frozen=True)
class Bounds:
    """Exploration limits; exceeding one makes the report incomplete."""

    max_steps: int = 10_000
    max_configs: int = 2_000_000
    max_threads: int = 16


DEFAULT_BOUNDS = Bounds()


@dataclass(frozen=True)
class Outcome:
    """A terminating execution: main value, final heap, replayable trace."""

    value: Val
    heap: Heap
    trace: tuple  # ((thread, tag), ...)
    config: Config  # full final configuration (may include live threads)


@dataclass
class ExploreReport:
    outcomes: list
    complete: bool
    stuck: list  # (Config, thread) pairs
    bound_hit: Optional[str]  # "steps" | "configs" | "threads" | None
    states_visited: int = 0


class Tally:
    """Mutable counter for states visited, threaded through nested checks."""

    def __init__(self) -> None:
        self.states = 0


# ---------------------------------------------------------------------------
# Canonicalization
# ---------------------------------------------------------------------------

_NODE_CODES = {
    Var: 0, Unit: 1, BoolLit: 2, IntLit: 3, Loc: 4, ProphId: 5, Pair: 6,
    Proj: 7, Inl: 8, Inr: 9, Match: 10, Rec: 11, App: 12, TLam: 13, TApp: 14,
    Pack: 15, Unpack: 16, Fold: 17, Unfold: 18, If: 19, BinOp: 20, UnOp: 21,
    Ref: 22, Load: 23, Store: 24, Cas: 25, Fork: 26, NewProph: 27,
    ResolveProph: 28, Ascribe: 29, Hole: 30,
}


def _serialize(e: Expr, out: list, locmap: dict, prophmap: dict) -> None:
    """Append a preorder encoding of e to out, renaming locations and
    prophecy ids in order of first occurrence."""
    stack = [e]
    while stack:
        node = stack.pop()
        if isinstance(node, str):
            out.append(node)
            continue
        cls = type(node)
        out.append(_NODE_CODES[cls])
        if cls is Var:
            out.append(node.name)
        elif cls is BoolLit:
            out.append(1 if node.value else 0)
        elif cls is IntLit:
            out.append(node.value)
        elif cls is Loc:
            if node.loc not in locmap:
                locmap[node.loc] = len(locmap)
            out.append(locmap[node.loc])
        elif cls is ProphId:
            if node.pid not in prophmap:
                prophmap[node.pid] = len(prophmap)
            out.append(prophmap[node.pid])
        elif cls is Pair:
            stack.append(node.right)
            stack.append(node.left)
        elif cls is Proj:
            out.append(node.index)
            stack.append(node.arg)
        elif cls in (Inl, Inr, Pack, Fold, Unfold, Ref, Load):
            stack.append(node.arg)
        elif cls is Match:
            out.append(node.left_name)
            out.append(node.right_name)
            stack.append(node.right_body)
            stack.append(node.left_body)
            stack.append(node.scrutinee)
        elif cls is Rec:
            out.append(node.fname)
            out.append(node.xname)
            stack.append(node.body)
        elif cls is App:
            stack.append(node.arg)
            stack.append(node.fn)
        elif cls is TLam:
            stack.append(node.body)
        elif cls is TApp:
            stack.append(node.fn)
        elif cls is Unpack:
            out.append(node.name)
            stack.append(node.body)
            stack.append(node.packed)
        elif cls is If:
            stack.append(node.els)
            stack.append(node.then)
            stack.append(node.cond)
        elif cls is BinOp:
            out.append(node.op)
            stack.append(node.right)
            stack.append(node.left)
        elif cls is UnOp:
            out.append(node.op)
            stack.append(node.arg)
        elif cls is Store:
            stack.append(node.value)
            stack.append(node.target)
        elif cls is Cas:
            stack.append(node.new)
            stack.append(node.expected)
            stack.append(node.target)
        elif cls is Fork:
            stack.append(node.body)
        elif cls is ResolveProph:
            stack.append(node.value)
            stack.append(node.proph)
        elif cls is Ascribe:
            stack.append(node.arg)
        # Unit, NewProph, Hole: no payload


def _canonical_parts(exprs, heap: Heap) -> tuple:
    """Canonical encoding of a group of root expressions plus the heap cells
    reachable from them.  Unreachable (garbage) cells are dropped; they can
    never influence execution or observation."""
    locmap: dict = {}
    prophmap: dict = {}
    out: list = []
    for e in exprs:
        out.append(-1)  # root separator
        _serialize(e, out, locmap, prophmap)
    done = 0
    cells: list = []
    # locmap grows while serializing cells, reaching a fixpoint layer by layer
    while done < len(locmap):
        frontier = [orig for orig, canon in sorted(locmap.items(), key=lambda kv: kv[1])[done:]]
        done = len(locmap)
        for orig in frontier:
            cells.append(-2)
            v = heap.read(orig)
            if v is None:
                cells.append("dangling")
            else:
                _serialize(v, cells, locmap, prophmap)
    return tuple(out), tuple(cells)


def canonicalize(cfg: Config) -> tuple:
    """A key invariant under consistent renaming of locations/prophecy ids.

    Configs equal up to renaming map to equal keys; the next-fresh counters
    are deliberately excluded (fresh allocations rename consistently)."""
    threads_part, heap_part = _canonical_parts(cfg.threads, cfg.heap)
    return threads_part, heap_part


def outcome_key(value: Val, heap: Heap) -> tuple:
    """Deduplication key for outcomes: the value and the heap fragment
    reachable from it, canonically renamed."""
    return _canonical_parts((value,), heap)


# ---------------------------------------------------------------------------
# Exploration
# ---------------------------------------------------------------------------


def _as_config(program: Union[Expr, Config]) -> Config:
    return program if isinstance(program, Config) else init_config(program)


def _trace_of(chain) -> tuple:
    parts = []
    while chain is not None:
        chain, step = chain
        parts.append(step)
    parts.reverse()
    return tuple(parts)


def _explore(
    program: Union[Expr, Config],
    bounds: Bounds,
    tally: Optional[Tally],
) -> Iterator:
    """BFS over schedules.  Yields ("outcome", Outcome) and ("stuck", ...)
    events, then one final ("done", complete, bound_hit, states) event."""
    root = _as_config(program)
    seen = {canonicalize(root)}
    queue = deque([(root, 0, None)])  # (config, depth, trace chain)
    seen_outcomes = set()
    bound_hit: Optional[str] = None
    states = 0

    while queue:
        cfg, depth, chain = queue.popleft()
        states += 1
        if tally is not None:
            tally.states += 1

        if is_val(cfg.threads[0]):
            key = outcome_key(cfg.threads[0], cfg.heap)
            if key not in seen_outcomes:
                seen_outcomes.add(key)
                yield (
                    "outcome",
                    Outcome(cfg.threads[0], cfg.heap, _trace_of(chain), cfg),
                )

        for i in range(len(cfg.threads)):
            r = thread_step(cfg, i)
            if r is None:
                continue
            if isinstance(r, Stuck):
                yield ("stuck", (cfg, i))
                continue
            if len(r.config.threads) > bounds.max_threads:
                bound_hit = bound_hit or "threads"
                continue
            if depth + 1 > bounds.max_steps:
                bound_hit = bound_hit or "steps"
                continue
            key = canonicalize(r.config)
            if key in seen:
                continue
            if len(seen) >= bounds.max_configs:
                bound_hit = bound_hit or "configs"
                continue
            seen.add(key)
            queue.append((r.config, depth + 1, (chain, (i, r.tag))))

    yield ("done", bound_hit is None, bound_hit, states)


def explore_all(
    program: Union[Expr, Config],
    bounds: Bounds = DEFAULT_BOUNDS,
    tally: Optional[Tally] = None,
) -> ExploreReport:
    """Collect every reachable outcome (deduplicated) under bounds.

    complete=True means the bounded search closed the whole canonical state
    space: the outcome list is exhaustive and absence of further outcomes is
    proven."""
    outcomes: list = []
    stuck: list = []
    complete = False
    bound_hit: Optional[str] = None
    states = 0
    for event in _explore(program, bounds, tally):
        if event[0] == "outcome":
            outcomes.append(event[1])
        elif event[0] == "stuck":
            stuck.append(event[1])
        else:
            _, complete, bound_hit, states = event
    return ExploreReport(outcomes, complete, stuck, bound_hit, states)


def search_outcome(
    program: Union[Expr, Config],
    goal: Callable[[Val, Heap], bool],
    bounds: Bounds = DEFAULT_BOUNDS,
    tally: Optional[Tally] = None,
) -> Tuple[Optional[Outcome], bool]:
    """Angelic search: first outcome satisfying goal(value, heap).

    Returns (outcome, completeness).  On a miss, completeness=True means the
    absence is proven (the bounded exploration closed); False means the
    search merely ran out of bounds."""
    for event in _explore(program, bounds, tally):
        if event[0] == "outcome":
            out = event[1]
            if goal(out.value, out.heap):
                return out, True
        elif event[0] == "done":
            return None, event[1]
    raise AssertionError("exploration ended without done event")
