"""Bounded contextual-refinement checking.

The check treats the left program as demonic (every schedule is explored)
and the right program as angelic (the checker searches for one matching
execution).  Results are matched against the type-indexed value relation:
ground types compare structurally, type variables consult the supplied
finite relation, and higher-order positions are exercised behaviorally with
finitely many related arguments, chaining call sequences through the
evolving heaps so stateful closures are observed across calls.

A Verdict is only marked complete when every exploration closed its state
space, every higher-order argument domain was exhausted by the supplied
finite relations, and no recursion-depth limit was touched.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence, Tuple

from .explorer import (
    Bounds,
    ExploreReport,
    Outcome,
    Tally,
    canonicalize,
    explore_all,
)
from .parser import pretty, pretty_type
from .semantics import Config, Heap, init_config
from .syntax import (
    App,
    BoolLit,
    Expr,
    Fold,
    Fork,
    Hole,
    Inl,
    Inr,
    IntLit,
    Load,
    Loc,
    Match,
    Pack,
    Pair,
    ProphId,
    Rec,
    Ref,
    Store,
    TApp,
    TArrow,
    TBool,
    TExists,
    TForall,
    TInt,
    TProd,
    TProph,
    TRec,
    TRef,
    TSum,
    TUnit,
    TVar,
    Type,
    Unit,
    Val,
    Var,
    is_val,
    let_,
    plug_hole,
    seq,
    type_subst,
)
from .typecheck import EMPTY_ENV, check, typecheck_context


# ---------------------------------------------------------------------------
# Relations on values
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Rel:
    """A finite relation on closed value pairs, interpreting a type variable."""

    name: str
    pairs: frozenset  # of (Val, Val)

    def __contains__(self, pair: Tuple[Val, Val]) -> bool:
        return pair in self.pairs

    def sorted_pairs(self) -> list:
        return sorted(self.pairs, key=lambda p: (pretty(p[0]), pretty(p[1])))

    def flipped(self) -> "Rel":
        return Rel(self.name + "^-1", frozenset((b, a) for a, b in self.pairs))


RelEnv = tuple  # of Rel, De Bruijn indexed (0 = innermost)


def identity_rel(name: str, values: Sequence[Val]) -> Rel:
    return Rel(name, frozenset((v, v) for v in values))


DEFAULT_FORALL_RELS = (
    Rel("empty", frozenset()),
    identity_rel("id-int", tuple(IntLit(n) for n in range(-2, 3))),
    Rel("bool-as-int", frozenset({(BoolLit(True), IntLit(1)), (BoolLit(False), IntLit(0))})),
)


@dataclass(frozen=True)
class CheckBounds:
    left: Bounds = Bounds()
    right: Bounds = Bounds()
    arg_budget: int = 3
    mu_depth: int = 8


DEFAULT_CHECK_BOUNDS = CheckBounds()


# ---------------------------------------------------------------------------
# Verdicts
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class NoCounterexample:
    """All left outcomes were matched.  complete=True only when the search
    was exhaustive in every dimension (see module docstring)."""

    complete: bool
    incomplete_reasons: tuple = ()
    tag = "no-counterexample"


@dataclass(frozen=True)
class Counterexample:
    """A left execution provably unmatched on the right (or a stuck left
    thread).  The trace replays from left_config."""

    kind: str  # "unmatched" | "stuck-left"
    left_config: Config
    trace: tuple
    left_value: Optional[Val]
    left_heap: Optional[Heap]
    detail: str
    right_complete: bool = True
    tag = "counterexample"


@dataclass(frozen=True)
class Inconclusive:
    reason: str
    bound_hit: Optional[str] = None
    tag = "inconclusive"


Verdict = object  # union of the three dataclasses above


# ---------------------------------------------------------------------------
# Value interpretation, ground fragment
# ---------------------------------------------------------------------------

DEFERRED = object()  # higher-order obligation, decided behaviorally


def type_is_ground(t: Type) -> bool:
    """No arrow or quantified type anywhere (TVar counts as ground: its
    interpretation is a finite relation)."""
    if isinstance(t, (TArrow, TForall, TExists)):
        return False
    if isinstance(t, (TProd, TSum)):
        return type_is_ground(t.left) and type_is_ground(t.right)
    if isinstance(t, TRec):
        return type_is_ground(t.body)
    if isinstance(t, TRef):
        return type_is_ground(t.elem)
    return True


def relate_values(
    t: Type,
    delta: RelEnv,
    v1: Val,
    v2: Val,
    s1: Heap,
    s2: Heap,
    depth: int,
    exhausted: Optional[list] = None,
):
    """Type-indexed relatedness of two result values.

    Ground types decide to True/False; arrow and quantified positions return
    the DEFERRED marker, which check_refinement discharges behaviorally.
    Recursion through mu and ref decrements depth; at depth 0 the pair is
    treated as not related and the exhaustion is recorded in `exhausted`.
    """
    if isinstance(t, TUnit):
        return isinstance(v1, Unit) and isinstance(v2, Unit)
    if isinstance(t, TBool):
        return isinstance(v1, BoolLit) and isinstance(v2, BoolLit) and v1.value == v2.value
    if isinstance(t, TInt):
        return isinstance(v1, IntLit) and isinstance(v2, IntLit) and v1.value == v2.value
    if isinstance(t, TProph):
        return isinstance(v1, ProphId) and isinstance(v2, ProphId)
    if isinstance(t, TVar):
        if t.idx >= len(delta):
            raise ValueError(f"free type variable {t.idx} not covered by the relation environment")
        return (v1, v2) in delta[t.idx]
    if isinstance(t, TProd):
        if not (isinstance(v1, Pair) and isinstance(v2, Pair)):
            return False
        a = relate_values(t.left, delta, v1.left, v2.left, s1, s2, depth, exhausted)
        if a is False:
            return False
        b = relate_values(t.right, delta, v1.right, v2.right, s1, s2, depth, exhausted)
        if b is False:
            return False
        return DEFERRED if (a is DEFERRED or b is DEFERRED) else True
    if isinstance(t, TSum):
        if isinstance(v1, Inl) and isinstance(v2, Inl):
            return relate_values(t.left, delta, v1.arg, v2.arg, s1, s2, depth, exhausted)
        if isinstance(v1, Inr) and isinstance(v2, Inr):
            return relate_values(t.right, delta, v1.arg, v2.arg, s1, s2, depth, exhausted)
        return False
    if isinstance(t, TRec):
        if not (isinstance(v1, Fold) and isinstance(v2, Fold)):
            return False
        if depth <= 0:
            if exhausted is not None:
                exhausted.append("mu-depth")
            return False
        return relate_values(
            type_subst(t.body, t), delta, v1.arg, v2.arg, s1, s2, depth - 1, exhausted
        )
    if isinstance(t, TRef):
        if not (isinstance(v1, Loc) and isinstance(v2, Loc)):
            return False
        w1 = s1.read(v1.loc)
        w2 = s2.read(v2.loc)
        if w1 is None or w2 is None:
            return False
        if depth <= 0:
            if exhausted is not None:
                exhausted.append("ref-depth")
            return False
        return relate_values(t.elem, delta, w1, w2, s1, s2, depth - 1, exhausted)
    if isinstance(t, (TArrow, TForall, TExists)):
        return DEFERRED
    raise AssertionError(f"relate_values: {t!r}")


def gen_related_args(t: Type, delta: RelEnv, budget: int) -> Tuple[list, bool]:
    """Finite list of pairs related at t, plus whether the list provably
    exhausts the relation (ground finite types and type variables do; the
    integer enumeration -2..2 does not)."""
    if isinstance(t, TUnit):
        return [(Unit(), Unit())], True
    if isinstance(t, TBool):
        return [(BoolLit(False), BoolLit(False)), (BoolLit(True), BoolLit(True))], True
    if isinstance(t, TInt):
        return [(IntLit(n), IntLit(n)) for n in range(-2, 3)], False
    if isinstance(t, TVar):
        if t.idx >= len(delta):
            raise ValueError(f"free type variable {t.idx} not covered by the relation environment")
        return delta[t.idx].sorted_pairs(), True
    if isinstance(t, TProd):
        left, lex = gen_related_args(t.left, delta, budget)
        right, rex = gen_related_args(t.right, delta, budget)
        combos = [(Pair(a1, b1), Pair(a2, b2)) for (a1, a2) in left for (b1, b2) in right]
        if len(combos) > budget:
            return combos[:budget], False
        return combos, lex and rex
    if isinstance(t, TSum):
        left, lex = gen_related_args(t.left, delta, budget)
        right, rex = gen_related_args(t.right, delta, budget)
        combos = [(Inl(a1), Inl(a2)) for (a1, a2) in left]
        combos += [(Inr(b1), Inr(b2)) for (b1, b2) in right]
        if len(combos) > budget:
            return combos[:budget], False
        return combos, lex and rex
    # arrows, quantified types, refs, mu: nothing generated; flagged
    return [], False


# ---------------------------------------------------------------------------
# The checker
# ---------------------------------------------------------------------------


class _Cex(Exception):
    def __init__(self, kind, left_config, trace, value, heap, detail, right_complete=True):
        super().__init__(detail)
        self.payload = Counterexample(kind, left_config, trace, value, heap, detail, right_complete)


class _Inconc(Exception):
    def __init__(self, reason: str, bound_hit: Optional[str] = None):
        super().__init__(reason)
        self.payload = Inconclusive(reason, bound_hit)


def _with_main(cfg: Config, e: Expr) -> Config:
    return Config((e,) + cfg.threads[1:], cfg.heap, cfg.next_proph)


def _seq_program(w: Val, args: Sequence[Val]) -> Tuple[Expr, int]:
    """let r1 = w a1 in ... in (r1, ..., rk): observe a chained call sequence."""
    names = [f"r{i}" for i in range(1, len(args) + 1)]
    tup: Expr = Var(names[0])
    for nm in names[1:]:
        tup = Pair(tup, Var(nm))
    body = tup
    for nm, a in reversed(list(zip(names, args))):
        body = let_(nm, App(w, a), body)
    return body, len(args)


def _seq_type(tb: Type, k: int) -> Type:
    t: Type = tb
    for _ in range(k - 1):
        t = TProd(t, tb)
    return t


def _concurrent_program(w: Val, a1: Val, a2: Val) -> Expr:
    """Two forked calls of w; spin until both results land, return the pair."""
    wait = Rec(
        "wait",
        "u",
        Match(
            Load(Var("ra")),
            "_",
            App(Var("wait"), Unit()),
            "x",
            Match(
                Load(Var("rb")),
                "_",
                App(Var("wait"), Unit()),
                "y",
                Pair(Var("x"), Var("y")),
            ),
        ),
    )
    body = seq(
        Fork(Store(Var("ra"), Inr(App(w, a1)))),
        seq(
            Fork(Store(Var("rb"), Inr(App(w, a2)))),
            App(wait, Unit()),
        ),
    )
    return let_("ra", Ref(Inl(Unit())), let_("rb", Ref(Inl(Unit())), body))


class _Checker:
    def __init__(
        self,
        bounds: CheckBounds,
        witnesses: Sequence[Rel],
        forall_rels: Sequence[Rel],
        concurrent_calls: bool,
        tally: Optional[Tally],
    ):
        self.bounds = bounds
        self.witnesses = list(witnesses)
        self.forall_rels = list(forall_rels)
        self.concurrent_calls = concurrent_calls
        self.tally = tally
        self.incomplete: list = []
        self.nested_cex: Optional[Counterexample] = None
        self._right_cache: dict = {}

    def note_incomplete(self, reason: str) -> None:
        if reason not in self.incomplete:
            self.incomplete.append(reason)

    def _explore_right(self, cfg: Config) -> ExploreReport:
        key = canonicalize(cfg)
        cached = self._right_cache.get(key)
        if cached is None:
            cached = explore_all(cfg, self.bounds.right, self.tally)
            self._right_cache[key] = cached
        return cached

    # -- the demonic/angelic game on whole programs

    def check(self, cfg1: Config, cfg2: Config, t: Type, delta: RelEnv, path: tuple, wix: int) -> None:
        left = explore_all(cfg1, self.bounds.left, self.tally)
        if left.stuck:
            scfg, sthread = left.stuck[0]
            raise _Cex(
                "stuck-left",
                cfg1,
                (),
                None,
                None,
                _fmt_path(path, f"thread {sthread} is stuck"),
            )
        if not left.complete:
            self.note_incomplete(f"left exploration hit {left.bound_hit} bound")
        right = self._explore_right(cfg2)
        if not right.complete:
            self.note_incomplete(f"right exploration hit {right.bound_hit} bound")
        for lo in left.outcomes:
            exhausted: list = []
            self.nested_cex = None
            if not self._some_right_matches(lo, right, t, delta, path, wix, exhausted):
                detail = _fmt_path(
                    path,
                    f"left result {pretty(lo.value, debug=True)} has no related right execution",
                )
                if self.nested_cex is not None:
                    detail += f" [e.g. {self.nested_cex.detail}]"
                if right.complete and not exhausted:
                    raise _Cex(
                        "unmatched", cfg1, lo.trace, lo.value, lo.heap, detail, right.complete
                    )
                reason = "; ".join([detail] + exhausted) if exhausted else detail
                raise _Inconc(reason + " (search not exhaustive)", right.bound_hit)

    def _some_right_matches(self, lo: Outcome, right: ExploreReport, t, delta, path, wix, exhausted) -> bool:
        for ro in right.outcomes:
            if self.match_values(t, delta, lo.value, lo.config, ro.value, ro.config, self.bounds.mu_depth, path, wix, exhausted):
                return True
        return False

    # -- value matching, including behavioral higher-order positions

    def match_values(self, t, delta, v1, cfg1: Config, v2, cfg2: Config, depth, path, wix, exhausted) -> bool:
        if type_is_ground(t):
            return relate_values(t, delta, v1, v2, cfg1.heap, cfg2.heap, depth, exhausted) is True
        if isinstance(t, TProd):
            if not (isinstance(v1, Pair) and isinstance(v2, Pair)):
                return False
            return self.match_values(
                t.left, delta, v1.left, cfg1, v2.left, cfg2, depth, path + ("first component",), wix, exhausted
            ) and self.match_values(
                t.right, delta, v1.right, cfg1, v2.right, cfg2, depth, path + ("second component",), wix, exhausted
            )
        if isinstance(t, TSum):
            if isinstance(v1, Inl) and isinstance(v2, Inl):
                return self.match_values(t.left, delta, v1.arg, cfg1, v2.arg, cfg2, depth, path + ("inl",), wix, exhausted)
            if isinstance(v1, Inr) and isinstance(v2, Inr):
                return self.match_values(t.right, delta, v1.arg, cfg1, v2.arg, cfg2, depth, path + ("inr",), wix, exhausted)
            return False
        if isinstance(t, TRec):
            if not (isinstance(v1, Fold) and isinstance(v2, Fold)):
                return False
            if depth <= 0:
                exhausted.append("mu-depth")
                return False
            return self.match_values(
                type_subst(t.body, t), delta, v1.arg, cfg1, v2.arg, cfg2, depth - 1, path + ("unfold",), wix, exhausted
            )
        if isinstance(t, TRef):
            if not (isinstance(v1, Loc) and isinstance(v2, Loc)):
                return False
            w1 = cfg1.heap.read(v1.loc)
            w2 = cfg2.heap.read(v2.loc)
            if w1 is None or w2 is None:
                return False
            if depth <= 0:
                exhausted.append("ref-depth")
                return False
            return self.match_values(t.elem, delta, w1, w2, depth=depth - 1, cfg1=cfg1, cfg2=cfg2, path=path + ("deref",), wix=wix, exhausted=exhausted)
        if isinstance(t, TArrow):
            return self._match_arrow(t, delta, v1, cfg1, v2, cfg2, path, wix, exhausted)
        if isinstance(t, TForall):
            return self._match_forall(t, delta, v1, cfg1, v2, cfg2, path, wix, exhausted)
        if isinstance(t, TExists):
            return self._match_exists(t, delta, v1, cfg1, v2, cfg2, depth, path, wix, exhausted)
        raise AssertionError(f"match_values: {t!r}")

    def _run_subcheck(self, e1, cfg1, e2, cfg2, t, delta, path, wix, exhausted) -> bool:
        """A nested refinement obligation; conclusive failure is False,
        undecidable failure poisons `exhausted`."""
        try:
            self.check(_with_main(cfg1, e1), _with_main(cfg2, e2), t, delta, path, wix)
            return True
        except _Cex as c:
            if self.nested_cex is None:
                self.nested_cex = c.payload
            return False
        except _Inconc as i:
            exhausted.append(i.payload.reason)
            return False

    def _match_arrow(self, t: TArrow, delta, v1, cfg1, v2, cfg2, path, wix, exhausted) -> bool:
        args, arg_exhaustive = gen_related_args(t.arg, delta, self.bounds.arg_budget)
        if not arg_exhaustive:
            self.note_incomplete(
                f"argument domain {pretty_type(t.arg)} not exhausted by finite enumeration"
            )
        if not args:
            return True  # vacuous; incompleteness already recorded
        budget = max(1, self.bounds.arg_budget)
        for length in range(1, budget + 1):
            for combo in itertools.product(args, repeat=length):
                a1s = [a for a, _ in combo]
                a2s = [b for _, b in combo]
                p1, k = _seq_program(v1, a1s)
                p2, _ = _seq_program(v2, a2s)
                label = "args " + ", ".join(pretty(a, debug=True) for a in a1s)
                if not self._run_subcheck(
                    p1, cfg1, p2, cfg2, _seq_type(t.res, k), delta, path + (label,), wix, exhausted
                ):
                    return False
        if self.concurrent_calls:
            for (a1, a2), (b1, b2) in itertools.product(args, repeat=2):
                p1 = _concurrent_program(v1, a1, b1)
                p2 = _concurrent_program(v2, a2, b2)
                label = f"concurrent calls {pretty(a1, debug=True)} / {pretty(b1, debug=True)}"
                if not self._run_subcheck(
                    p1, cfg1, p2, cfg2, TProd(t.res, t.res), delta, path + (label,), wix, exhausted
                ):
                    return False
        return True

    def _match_forall(self, t: TForall, delta, v1, cfg1, v2, cfg2, path, wix, exhausted) -> bool:
        self.note_incomplete("universal types checked against finitely many candidate relations")
        for rel in self.forall_rels:
            if not self._run_subcheck(
                TApp(v1),
                cfg1,
                TApp(v2),
                cfg2,
                t.body,
                (rel,) + tuple(delta),
                path + (f"type instantiation {rel.name}",),
                wix,
                exhausted,
            ):
                return False
        return True

    def _match_exists(self, t: TExists, delta, v1, cfg1, v2, cfg2, depth, path, wix, exhausted) -> bool:
        if not (isinstance(v1, Pack) and isinstance(v2, Pack)):
            return False
        if wix >= len(self.witnesses):
            raise _Inconc(
                "existential type needs a witness relation (supply one with --witness)"
            )
        rel = self.witnesses[wix]
        return self.match_values(
            t.body,
            (rel,) + tuple(delta),
            v1.arg,
            cfg1,
            v2.arg,
            cfg2,
            depth,
            path + (f"witness {rel.name}",),
            wix + 1,
            exhausted,
        )


def _fmt_path(path: tuple, msg: str) -> str:
    if not path:
        return msg
    return " > ".join(path) + ": " + msg


# ---------------------------------------------------------------------------
# Public entry points
# ---------------------------------------------------------------------------


def check_refinement(
    e1: Expr,
    e2: Expr,
    t: Type,
    delta: RelEnv = (),
    bounds: CheckBounds = DEFAULT_CHECK_BOUNDS,
    witnesses: Sequence[Rel] = (),
    forall_rels: Optional[Sequence[Rel]] = None,
    concurrent_calls: bool = False,
    tally: Optional[Tally] = None,
):
    """Does every terminating behavior of e1 have a matching behavior of e2
    at type t?  Both must be closed; free type variables of t are covered by
    delta.  Existential positions consume `witnesses` in traversal order."""
    chk = _Checker(
        bounds,
        witnesses,
        DEFAULT_FORALL_RELS if forall_rels is None else forall_rels,
        concurrent_calls,
        tally,
    )
    try:
        chk.check(init_config(e1), init_config(e2), t, tuple(delta), (), 0)
    except _Cex as c:
        return c.payload
    except _Inconc as i:
        return i.payload
    return NoCounterexample(not chk.incomplete, tuple(chk.incomplete))


def check_ctx(
    ctx: Expr,
    e1: Expr,
    e2: Expr,
    hole_type: Type,
    mode: str = "plain",
    bounds: CheckBounds = DEFAULT_CHECK_BOUNDS,
    tally: Optional[Tally] = None,
    typecheck: bool = True,
):
    """Direct contextual test of e1 against e2 under one concrete context.

    plain mode: a counterexample is a terminating run of ctx[e1] while
    ctx[e2] provably has none.  true-adequate mode: the context must be
    boolean-valued; a counterexample is ctx[e1] reaching true while ctx[e2]
    provably never does."""
    if mode not in ("plain", "true-adequate"):
        raise ValueError(f"unknown mode {mode!r}")
    if typecheck:
        result_t = typecheck_context(EMPTY_ENV, ctx, hole_type)
        check(EMPTY_ENV, e1, hole_type)
        check(EMPTY_ENV, e2, hole_type)
        if mode == "true-adequate" and result_t != TBool():
            raise ValueError("true-adequate mode needs a boolean-valued context")
    left_prog = plug_hole(ctx, e1)
    right_prog = plug_hole(ctx, e2)
    left = explore_all(init_config(left_prog), bounds.left, tally)
    if left.stuck:
        scfg, sthread = left.stuck[0]
        return Counterexample(
            "stuck-left", init_config(left_prog), (), None, None, f"thread {sthread} is stuck"
        )
    right = explore_all(init_config(right_prog), bounds.right, tally)

    def observed(outcome: Outcome) -> bool:
        if mode == "plain":
            return True
        return outcome.value == BoolLit(True)

    for lo in left.outcomes:
        if not observed(lo):
            continue
        if any(observed(ro) for ro in right.outcomes):
            continue
        if right.complete:
            kind = "termination" if mode == "plain" else "true observation"
            return Counterexample(
                "unmatched",
                init_config(left_prog),
                lo.trace,
                lo.value,
                lo.heap,
                f"left reaches {pretty(lo.value, debug=True)}; right has no matching {kind}",
                right.complete,
            )
        return Inconclusive("right search not exhaustive", right.bound_hit)
    reasons = []
    if not left.complete:
        reasons.append(f"left exploration hit {left.bound_hit} bound")
    if not right.complete:
        reasons.append(f"right exploration hit {right.bound_hit} bound")
    return NoCounterexample(not reasons, tuple(reasons))


def check_equivalence(
    e1: Expr,
    e2: Expr,
    t: Type,
    delta: RelEnv = (),
    bounds: CheckBounds = DEFAULT_CHECK_BOUNDS,
    witnesses: Sequence[Rel] = (),
    forall_rels: Optional[Sequence[Rel]] = None,
    concurrent_calls: bool = False,
    tally: Optional[Tally] = None,
):
    """Both refinement directions; witness relations flip for the reverse."""
    fwd = check_refinement(
        e1, e2, t, delta, bounds, witnesses, forall_rels, concurrent_calls, tally
    )
    rev = check_refinement(
        e2,
        e1,
        t,
        tuple(r.flipped() for r in delta),
        bounds,
        tuple(w.flipped() for w in witnesses),
        forall_rels,
        concurrent_calls,
        tally,
    )
    return fwd, rev
