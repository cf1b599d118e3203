"""Small-step operational semantics: pure reduction, head reduction with a
heap, and thread-pool reduction with fork and prophecy instructions.

Configs are immutable values; stepping returns fresh ones.  Per-thread
stepping is deterministic -- the only nondeterminism in the system is which
thread gets to step.  Allocation is deterministic (a monotone counter), which
keeps replay exact and enables canonical hashing in the explorer.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Tuple, Union

from .syntax import (
    App,
    AppArg,
    AppFn,
    BinOp,
    BinOpL,
    BinOpR,
    BoolLit,
    Cas,
    CasExpected,
    CasNew,
    CasTarget,
    Expr,
    Fold,
    FoldF,
    Fork,
    Frame,
    If,
    IfF,
    Inl,
    InlF,
    Inr,
    InrF,
    IntLit,
    Load,
    LoadF,
    Loc,
    Match,
    MatchF,
    NewProph,
    Pack,
    PackF,
    Pair,
    PairL,
    PairR,
    ProphId,
    Proj,
    ProjF,
    Rec,
    Ref,
    RefF,
    ResolveL,
    ResolveProph,
    ResolveR,
    Store,
    StoreL,
    StoreR,
    TApp,
    TAppF,
    TLam,
    UnOp,
    UnOpF,
    Unfold,
    UnfoldF,
    Unit,
    Unpack,
    UnpackF,
    Val,
    Var,
    erase_ascriptions,
    fill,
    is_val,
    subst,
)


# ---------------------------------------------------------------------------
# Heap and configurations
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Heap:
    """Finite map location -> value plus the next-fresh counter.

    Never mutated; updates return a new Heap sharing nothing observable.
    """

    data: dict = field(default_factory=dict)
    next_loc: int = 0

    def alloc(self, v: Val) -> Tuple[int, "Heap"]:
        loc = self.next_loc
        data = dict(self.data)
        data[loc] = v
        return loc, Heap(data, loc + 1)

    def read(self, loc: int) -> Optional[Val]:
        return self.data.get(loc)

    def write(self, loc: int, v: Val) -> "Heap":
        data = dict(self.data)
        data[loc] = v
        return Heap(data, self.next_loc)

    def __contains__(self, loc: int) -> bool:
        return loc in self.data


@dataclass(frozen=True)
class Config:
    """Thread pool (index 0 = main), heap, and prophecy-id counter."""

    threads: tuple
    heap: Heap
    next_proph: int = 0

    def main(self) -> Expr:
        return self.threads[0]


def init_config(e: Expr) -> Config:
    """Initial configuration for a closed program; ascriptions are erased."""
    return Config((erase_ascriptions(e),), Heap(), 0)


# Rule tags, used for trace replay.
PURE = "Pure"
ALLOC = "Alloc"
LOAD = "Load"
STORE = "Store"
CAS_FAIL = "CasFail"
CAS_SUC = "CasSuc"
FORK = "Fork"
NEWPROPH = "NewProph"
RESOLVE = "Resolve"


@dataclass(frozen=True)
class StepResult:
    config: Config
    thread: int
    tag: str


@dataclass(frozen=True)
class Stuck:
    """A thread whose redex matches no rule (e.g. a load from a dangling
    location, or an ill-formed application)."""

    thread: int
    expr: Expr


# ---------------------------------------------------------------------------
# Decomposition into evaluation context + head redex
# ---------------------------------------------------------------------------


def decompose(e: Expr) -> Optional[Tuple[list, Expr]]:
    """Split a non-value expression into (evaluation context, head redex
    candidate).  Returns None when e is a value.

    Applications evaluate the argument before the function position; all
    other constructs evaluate left to right.
    """
    if is_val(e):
        return None
    ctx: list = []
    while True:
        if isinstance(e, App):
            if not is_val(e.arg):
                ctx.append(AppArg(e.fn))
                e = e.arg
            elif not is_val(e.fn):
                ctx.append(AppFn(e.arg))
                e = e.fn
            else:
                return ctx, e
        elif isinstance(e, Pair):
            if not is_val(e.left):
                ctx.append(PairL(e.right))
                e = e.left
            else:
                ctx.append(PairR(e.left))
                e = e.right
        elif isinstance(e, Proj):
            if not is_val(e.arg):
                ctx.append(ProjF(e.index))
                e = e.arg
            else:
                return ctx, e
        elif isinstance(e, Inl):
            ctx.append(InlF())
            e = e.arg
        elif isinstance(e, Inr):
            ctx.append(InrF())
            e = e.arg
        elif isinstance(e, Match):
            if not is_val(e.scrutinee):
                ctx.append(MatchF(e.left_name, e.left_body, e.right_name, e.right_body))
                e = e.scrutinee
            else:
                return ctx, e
        elif isinstance(e, If):
            if not is_val(e.cond):
                ctx.append(IfF(e.then, e.els))
                e = e.cond
            else:
                return ctx, e
        elif isinstance(e, BinOp):
            if not is_val(e.left):
                ctx.append(BinOpL(e.op, e.right))
                e = e.left
            elif not is_val(e.right):
                ctx.append(BinOpR(e.op, e.left))
                e = e.right
            else:
                return ctx, e
        elif isinstance(e, UnOp):
            if not is_val(e.arg):
                ctx.append(UnOpF(e.op))
                e = e.arg
            else:
                return ctx, e
        elif isinstance(e, TApp):
            if not is_val(e.fn):
                ctx.append(TAppF())
                e = e.fn
            else:
                return ctx, e
        elif isinstance(e, Pack):
            ctx.append(PackF())
            e = e.arg
        elif isinstance(e, Unpack):
            if not is_val(e.packed):
                ctx.append(UnpackF(e.name, e.body))
                e = e.packed
            else:
                return ctx, e
        elif isinstance(e, Fold):
            ctx.append(FoldF())
            e = e.arg
        elif isinstance(e, Unfold):
            if not is_val(e.arg):
                ctx.append(UnfoldF())
                e = e.arg
            else:
                return ctx, e
        elif isinstance(e, Ref):
            if not is_val(e.arg):
                ctx.append(RefF())
                e = e.arg
            else:
                return ctx, e
        elif isinstance(e, Load):
            if not is_val(e.arg):
                ctx.append(LoadF())
                e = e.arg
            else:
                return ctx, e
        elif isinstance(e, Store):
            if not is_val(e.target):
                ctx.append(StoreL(e.value))
                e = e.target
            elif not is_val(e.value):
                ctx.append(StoreR(e.target))
                e = e.value
            else:
                return ctx, e
        elif isinstance(e, Cas):
            if not is_val(e.target):
                ctx.append(CasTarget(e.expected, e.new))
                e = e.target
            elif not is_val(e.expected):
                ctx.append(CasExpected(e.target, e.new))
                e = e.expected
            elif not is_val(e.new):
                ctx.append(CasNew(e.target, e.expected))
                e = e.new
            else:
                return ctx, e
        elif isinstance(e, ResolveProph):
            if not is_val(e.proph):
                ctx.append(ResolveL(e.value))
                e = e.proph
            elif not is_val(e.value):
                ctx.append(ResolveR(e.proph))
                e = e.value
            else:
                return ctx, e
        else:
            # Fork, NewProph, Var, Hole, Ascribe (should be erased), ...
            return ctx, e


# ---------------------------------------------------------------------------
# Head reduction
# ---------------------------------------------------------------------------

_WORD_SIZED = (Unit, BoolLit, IntLit, Loc, ProphId)


def values_equal(v1: Val, v2: Val) -> bool:
    """Structural equality of runtime values (used by CAS and =)."""
    return v1 == v2


def _eq_comparable(v: Val) -> bool:
    return isinstance(v, _WORD_SIZED)


def pure_step(e: Expr) -> Optional[Expr]:
    """One step of pure head reduction, or None if e is not a pure redex."""
    if isinstance(e, Proj) and isinstance(e.arg, Pair) and is_val(e.arg):
        return e.arg.left if e.index == 1 else e.arg.right
    if isinstance(e, App) and isinstance(e.fn, Rec) and is_val(e.arg):
        f = e.fn
        body = subst(f.body, f.xname, e.arg)
        return subst(body, f.fname, f)
    if isinstance(e, TApp) and isinstance(e.fn, TLam):
        return e.fn.body
    if isinstance(e, Unpack) and isinstance(e.packed, Pack) and is_val(e.packed.arg):
        return subst(e.body, e.name, e.packed.arg)
    if isinstance(e, Unfold) and isinstance(e.arg, Fold) and is_val(e.arg.arg):
        return e.arg.arg
    if isinstance(e, If) and isinstance(e.cond, BoolLit):
        return e.then if e.cond.value else e.els
    if isinstance(e, Match) and isinstance(e.scrutinee, (Inl, Inr)) and is_val(e.scrutinee):
        if isinstance(e.scrutinee, Inl):
            return subst(e.left_body, e.left_name, e.scrutinee.arg)
        return subst(e.right_body, e.right_name, e.scrutinee.arg)
    if isinstance(e, UnOp) and e.op == "not" and isinstance(e.arg, BoolLit):
        return BoolLit(not e.arg.value)
    if isinstance(e, BinOp) and is_val(e.left) and is_val(e.right):
        a, b = e.left, e.right
        if e.op in ("+", "-", "*") and isinstance(a, IntLit) and isinstance(b, IntLit):
            if e.op == "+":
                return IntLit(a.value + b.value)
            if e.op == "-":
                return IntLit(a.value - b.value)
            return IntLit(a.value * b.value)
        if e.op == "<" and isinstance(a, IntLit) and isinstance(b, IntLit):
            return BoolLit(a.value < b.value)
        if e.op == "&&" and isinstance(a, BoolLit) and isinstance(b, BoolLit):
            return BoolLit(a.value and b.value)
        if e.op == "=" and _eq_comparable(a) and _eq_comparable(b) and type(a) is type(b):
            return BoolLit(values_equal(a, b))
        return None
    return None


def head_step(e: Expr, heap: Heap, next_proph: int):
    """One step of heap-touching head reduction.

    Returns (e', heap', next_proph', tag) or None when e matches no rule.
    """
    if isinstance(e, Ref) and is_val(e.arg):
        loc, heap2 = heap.alloc(e.arg)
        return Loc(loc), heap2, next_proph, ALLOC
    if isinstance(e, Load) and isinstance(e.arg, Loc):
        v = heap.read(e.arg.loc)
        if v is None:
            return None
        return v, heap, next_proph, LOAD
    if isinstance(e, Store) and isinstance(e.target, Loc) and is_val(e.value):
        if e.target.loc not in heap:
            return None
        return Unit(), heap.write(e.target.loc, e.value), next_proph, STORE
    if isinstance(e, Cas) and isinstance(e.target, Loc) and is_val(e.expected) and is_val(e.new):
        current = heap.read(e.target.loc)
        if current is None:
            return None
        if values_equal(current, e.expected):
            return BoolLit(True), heap.write(e.target.loc, e.new), next_proph, CAS_SUC
        return BoolLit(False), heap, next_proph, CAS_FAIL
    if isinstance(e, NewProph):
        return ProphId(next_proph), heap, next_proph + 1, NEWPROPH
    if isinstance(e, ResolveProph) and isinstance(e.proph, ProphId) and is_val(e.value):
        # Prophecy resolution is operationally erased: no heap effect.
        return Unit(), heap, next_proph, RESOLVE
    return None


# ---------------------------------------------------------------------------
# Thread-pool reduction
# ---------------------------------------------------------------------------


def thread_step(cfg: Config, i: int) -> Union[StepResult, Stuck, None]:
    """Step thread i of cfg once.

    Returns None when the thread is a value, a Stuck report when its redex
    matches no rule, and a StepResult otherwise.
    """
    e = cfg.threads[i]
    dec = decompose(e)
    if dec is None:
        return None
    ctx, redex = dec

    if isinstance(redex, Fork):
        threads = list(cfg.threads)
        threads[i] = fill(ctx, Unit())
        threads.append(redex.body)
        return StepResult(Config(tuple(threads), cfg.heap, cfg.next_proph), i, FORK)

    out = pure_step(redex)
    if out is not None:
        threads = list(cfg.threads)
        threads[i] = fill(ctx, out)
        return StepResult(Config(tuple(threads), cfg.heap, cfg.next_proph), i, PURE)

    hs = head_step(redex, cfg.heap, cfg.next_proph)
    if hs is not None:
        e2, heap2, np2, tag = hs
        threads = list(cfg.threads)
        threads[i] = fill(ctx, e2)
        return StepResult(Config(tuple(threads), heap2, np2), i, tag)

    return Stuck(i, redex)


def enabled_threads(cfg: Config) -> list:
    """Indices of threads that can take a step."""
    out = []
    for i in range(len(cfg.threads)):
        r = thread_step(cfg, i)
        if isinstance(r, StepResult):
            out.append(i)
    return out


class ReplayError(Exception):
    pass


def replay(cfg: Config, trace) -> Config:
    """Re-apply a (thread, tag) trace from cfg; raises if any step diverges
    from the recorded rule tag."""
    for k, (i, tag) in enumerate(trace):
        r = thread_step(cfg, i)
        if not isinstance(r, StepResult):
            raise ReplayError(f"step {k}: thread {i} cannot step")
        if r.tag != tag:
            raise ReplayError(f"step {k}: tag {r.tag!r} != recorded {tag!r}")
        cfg = r.config
    return cfg
