"""Bidirectional typechecker.

The declarative system is annotation free, so introduction forms that cannot
be synthesized (rec, Λ, pack, fold, inl/inr) are handled in checking mode;
`(e : T)` ascriptions switch from synthesis to checking.  Let-bindings are
recognized structurally (application of an anonymous rec) so that the bound
expression's synthesized type propagates to the body.

Context typing treats the hole as an axiom at the assumed hole type.  Holes
under rec/Λ/match/unpack binders are rejected explicitly; holes under
let-binders are supported (the let-bound type is inferred as usual).
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional

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
    TArrow,
    TBool,
    TExists,
    TForall,
    TInt,
    TLam,
    TProd,
    TProph,
    TRec,
    TRef,
    TSum,
    TUnit,
    TVar,
    Type,
    UnOp,
    Unfold,
    Unit,
    Unpack,
    Var,
    count_holes,
    eq_type,
    type_mentions,
    type_shift,
    type_subst,
)
from .parser import pretty_type


class TypeCheckError(Exception):
    """A failed rule premise; kind names the premise that failed."""

    def __init__(self, kind: str, message: str, span=None, expected=None, got=None):
        super().__init__(message)
        self.kind = kind
        self.message = message
        self.span = span
        self.expected = expected
        self.got = got


def _mismatch(expected: Type, got: Type, span=None) -> TypeCheckError:
    return TypeCheckError(
        "Mismatch",
        f"expected {pretty_type(expected)}, got {pretty_type(got)}",
        span=span,
        expected=expected,
        got=got,
    )


@dataclass(frozen=True)
class TypeEnv:
    """Typing environment: depth of bound type variables plus term bindings.

    Every type in gamma has free De Bruijn indices < xi.
    """

    xi: int = 0
    gamma: dict = field(default_factory=dict)
    loc_types: Optional[dict] = None  # heap typing for re-checking runtime terms
    hole_type: Optional[Type] = None  # context mode: assumed type of the hole
    hole_allowed: bool = True

    def bind(self, name: str, t: Type) -> "TypeEnv":
        if name == "_":
            return self
        gamma = dict(self.gamma)
        gamma[name] = t
        return replace(self, gamma=gamma)

    def push_tyvar(self) -> "TypeEnv":
        gamma = {x: type_shift(t, 1) for x, t in self.gamma.items()}
        return replace(self, xi=self.xi + 1, gamma=gamma)

    def no_hole(self) -> "TypeEnv":
        if self.hole_type is None or not self.hole_allowed:
            return self
        return replace(self, hole_allowed=False)


EMPTY_ENV = TypeEnv()


def _try_unshift(t: Type, d: int, cutoff: int = 0) -> Optional[Type]:
    """Remove d enclosing binders; None if an index would escape."""
    if isinstance(t, TVar):
        if t.idx >= cutoff + d:
            return TVar(t.idx - d)
        if t.idx >= cutoff:
            return None
        return t
    if isinstance(t, (TUnit, TBool, TInt, TProph)):
        return t
    if isinstance(t, (TProd, TSum, TArrow)):
        a = _try_unshift(t.left if not isinstance(t, TArrow) else t.arg, d, cutoff)
        b = _try_unshift(t.right if not isinstance(t, TArrow) else t.res, d, cutoff)
        if a is None or b is None:
            return None
        if isinstance(t, TProd):
            return TProd(a, b)
        if isinstance(t, TSum):
            return TSum(a, b)
        return TArrow(a, b)
    if isinstance(t, (TForall, TExists, TRec)):
        b = _try_unshift(t.body, d, cutoff + 1)
        if b is None:
            return None
        return type(t)(b)
    if isinstance(t, TRef):
        e = _try_unshift(t.elem, d, cutoff)
        return None if e is None else TRef(e)
    raise AssertionError(f"_try_unshift: {t!r}")


def _find_witness(body: Type, target: Type, depth: int = 0) -> Optional[Type]:
    """Scan body for the first occurrence of the distinguished variable and
    read the candidate witness off the corresponding position of target."""
    if isinstance(body, TVar):
        if body.idx == depth:
            return _try_unshift(target, depth)
        return None
    if isinstance(body, (TProd, TSum)) and type(body) is type(target):
        return _find_witness(body.left, target.left, depth) or _find_witness(
            body.right, target.right, depth
        )
    if isinstance(body, TArrow) and isinstance(target, TArrow):
        return _find_witness(body.arg, target.arg, depth) or _find_witness(
            body.res, target.res, depth
        )
    if isinstance(body, (TForall, TExists, TRec)) and type(body) is type(target):
        return _find_witness(body.body, target.body, depth + 1)
    if isinstance(body, TRef) and isinstance(target, TRef):
        return _find_witness(body.elem, target.elem, depth)
    return None


def match_instantiation(body: Type, target: Type) -> Optional[Type]:
    """Find w with type_subst(body, w) == target, if one exists."""
    if not type_mentions(body, 0):
        w: Optional[Type] = TUnit()
    else:
        w = _find_witness(body, target, 0)
    if w is None:
        return None
    return w if type_subst(body, w) == target else None


# ---------------------------------------------------------------------------
# Synthesis
# ---------------------------------------------------------------------------


def synth(env: TypeEnv, e: Expr) -> Type:
    if isinstance(e, Var):
        t = env.gamma.get(e.name)
        if t is None:
            raise TypeCheckError("UnboundVar", f"unbound variable {e.name!r}", span=e.span)
        return t
    if isinstance(e, Unit):
        return TUnit()
    if isinstance(e, BoolLit):
        return TBool()
    if isinstance(e, IntLit):
        return TInt()
    if isinstance(e, Hole):
        if env.hole_type is None:
            raise TypeCheckError("RuntimeNode", "hole outside context mode", span=e.span)
        if not env.hole_allowed:
            raise TypeCheckError(
                "HoleUnderBinder",
                "context hole under a rec/Λ/match/unpack binder is unsupported",
                span=e.span,
            )
        return env.hole_type
    if isinstance(e, Loc):
        if env.loc_types is not None and e.loc in env.loc_types:
            return TRef(env.loc_types[e.loc])
        raise TypeCheckError("RuntimeNode", "location literal without heap typing", span=e.span)
    if isinstance(e, ProphId):
        if env.loc_types is not None:
            return TProph()
        raise TypeCheckError("RuntimeNode", "prophecy literal in surface term", span=e.span)
    if isinstance(e, Ascribe):
        check(env, e.arg, e.ty)
        return e.ty
    if isinstance(e, Pair):
        return TProd(synth(env, e.left), synth(env, e.right))
    if isinstance(e, Proj):
        t = synth(env, e.arg)
        if not isinstance(t, TProd):
            raise _mismatch(TProd(TVar(0), TVar(0)), t, e.span)
        return t.left if e.index == 1 else t.right
    if isinstance(e, App):
        if isinstance(e.fn, Rec):
            targ = synth(env, e.arg)
            body_env = env.bind(e.fn.xname, targ)
            if e.fn.fname == "_":
                return synth(body_env, e.fn.body)
            raise TypeCheckError(
                "NeedsAnnotation",
                "cannot synthesize a named recursive function; ascribe it",
                span=e.fn.span,
            )
        tf = synth(env, e.fn)
        if not isinstance(tf, TArrow):
            raise TypeCheckError(
                "NotAFunction", f"applied non-function of type {pretty_type(tf)}", span=e.span
            )
        check(env, e.arg, tf.arg)
        return tf.res
    if isinstance(e, TApp):
        t = synth(env, e.fn)
        if not isinstance(t, TForall):
            raise _mismatch(TForall(TVar(0)), t, e.span)
        if type_mentions(t.body, 0):
            raise TypeCheckError(
                "NeedsAnnotation",
                "type application result depends on the instantiation; ascribe it",
                span=e.span,
            )
        return type_subst(t.body, TUnit())
    if isinstance(e, Unfold):
        t = synth(env, e.arg)
        if not isinstance(t, TRec):
            raise _mismatch(TRec(TVar(0)), t, e.span)
        return type_subst(t.body, t)
    if isinstance(e, Unpack):
        t = synth(env, e.packed)
        if not isinstance(t, TExists):
            raise _mismatch(TExists(TVar(0)), t, e.span)
        inner = env.push_tyvar().no_hole().bind(e.name, t.body)
        tbody = synth(inner, e.body)
        out = _try_unshift(tbody, 1)
        if out is None:
            raise TypeCheckError(
                "EscapingTypeVar",
                f"the abstract type escapes in {pretty_type(tbody)}",
                span=e.span,
            )
        return out
    if isinstance(e, Ref):
        return TRef(synth(env, e.arg))
    if isinstance(e, Load):
        t = synth(env, e.arg)
        if not isinstance(t, TRef):
            raise _mismatch(TRef(TVar(0)), t, e.span)
        return t.elem
    if isinstance(e, Store):
        t = synth(env, e.target)
        if not isinstance(t, TRef):
            raise _mismatch(TRef(TVar(0)), t, e.span)
        check(env, e.value, t.elem)
        return TUnit()
    if isinstance(e, Cas):
        t = synth(env, e.target)
        if not isinstance(t, TRef):
            raise _mismatch(TRef(TVar(0)), t, e.span)
        if not eq_type(t.elem):
            raise TypeCheckError(
                "EqTypeViolation",
                f"CAS payload {pretty_type(t.elem)} is not word-sized",
                span=e.span,
            )
        check(env, e.expected, t.elem)
        check(env, e.new, t.elem)
        return TBool()
    if isinstance(e, Fork):
        check(env, e.body, TUnit())
        return TUnit()
    if isinstance(e, If):
        check(env, e.cond, TBool())
        t1 = synth(env, e.then)
        t2 = synth(env, e.els)
        if t1 != t2:
            raise _mismatch(t1, t2, e.span)
        return t1
    if isinstance(e, Match):
        t = synth(env, e.scrutinee)
        if not isinstance(t, TSum):
            raise _mismatch(TSum(TVar(0), TVar(0)), t, e.span)
        lenv = env.no_hole().bind(e.left_name, t.left)
        renv = env.no_hole().bind(e.right_name, t.right)
        t1 = synth(lenv, e.left_body)
        t2 = synth(renv, e.right_body)
        if t1 != t2:
            raise _mismatch(t1, t2, e.span)
        return t1
    if isinstance(e, BinOp):
        if e.op in ("+", "-", "*"):
            check(env, e.left, TInt())
            check(env, e.right, TInt())
            return TInt()
        if e.op == "<":
            check(env, e.left, TInt())
            check(env, e.right, TInt())
            return TBool()
        if e.op == "&&":
            check(env, e.left, TBool())
            check(env, e.right, TBool())
            return TBool()
        if e.op == "=":
            t = synth(env, e.left)
            if not eq_type(t):
                raise TypeCheckError(
                    "EqTypeViolation",
                    f"= compares only word-sized values, got {pretty_type(t)}",
                    span=e.span,
                )
            check(env, e.right, t)
            return TBool()
        raise AssertionError(f"synth: unknown operator {e.op!r}")
    if isinstance(e, UnOp):
        check(env, e.arg, TBool())
        return TBool()
    if isinstance(e, NewProph):
        return TProph()
    if isinstance(e, ResolveProph):
        check(env, e.proph, TProph())
        t = synth(env, e.value)
        if not eq_type(t):
            raise TypeCheckError(
                "EqTypeViolation",
                f"prophecy resolution value must be word-sized, got {pretty_type(t)}",
                span=e.span,
            )
        return TUnit()
    if isinstance(e, (Rec, TLam, Pack, Fold, Inl, Inr)):
        raise TypeCheckError(
            "NeedsAnnotation",
            f"{type(e).__name__} cannot be synthesized; ascribe it",
            span=e.span,
        )
    raise AssertionError(f"synth: {e!r}")


# ---------------------------------------------------------------------------
# Checking
# ---------------------------------------------------------------------------


def check(env: TypeEnv, e: Expr, t: Type) -> None:
    if isinstance(e, Rec):
        if not isinstance(t, TArrow):
            raise _mismatch(t, TArrow(TVar(0), TVar(0)), e.span)
        inner = env.no_hole().bind(e.fname, t).bind(e.xname, t.arg)
        check(inner, e.body, t.res)
        return
    if isinstance(e, TLam):
        if not isinstance(t, TForall):
            raise _mismatch(t, TForall(TVar(0)), e.span)
        check(env.push_tyvar().no_hole(), e.body, t.body)
        return
    if isinstance(e, Pack):
        if not isinstance(t, TExists):
            raise _mismatch(t, TExists(TVar(0)), e.span)
        got = synth(env, e.arg)
        if match_instantiation(t.body, got) is None:
            raise TypeCheckError(
                "Mismatch",
                f"pack payload {pretty_type(got)} does not fit {pretty_type(t)}",
                span=e.span,
                expected=t,
                got=got,
            )
        return
    if isinstance(e, Fold):
        if not isinstance(t, TRec):
            raise _mismatch(t, TRec(TVar(0)), e.span)
        check(env, e.arg, type_subst(t.body, t))
        return
    if isinstance(e, Inl):
        if not isinstance(t, TSum):
            raise _mismatch(t, TSum(TVar(0), TVar(0)), e.span)
        check(env, e.arg, t.left)
        return
    if isinstance(e, Inr):
        if not isinstance(t, TSum):
            raise _mismatch(t, TSum(TVar(0), TVar(0)), e.span)
        check(env, e.arg, t.right)
        return
    if isinstance(e, Pair):
        if not isinstance(t, TProd):
            raise _mismatch(t, TProd(TVar(0), TVar(0)), e.span)
        check(env, e.left, t.left)
        check(env, e.right, t.right)
        return
    if isinstance(e, If):
        check(env, e.cond, TBool())
        check(env, e.then, t)
        check(env, e.els, t)
        return
    if isinstance(e, Match):
        ts = synth(env, e.scrutinee)
        if not isinstance(ts, TSum):
            raise _mismatch(TSum(TVar(0), TVar(0)), ts, e.span)
        check(env.no_hole().bind(e.left_name, ts.left), e.left_body, t)
        check(env.no_hole().bind(e.right_name, ts.right), e.right_body, t)
        return
    if isinstance(e, App) and isinstance(e.fn, Rec):
        # let-style application: propagate the expected type into the body
        targ = synth(env, e.arg)
        inner = env.bind(e.fn.xname, targ)
        if e.fn.fname != "_":
            inner = inner.bind(e.fn.fname, TArrow(targ, t))
        check(inner, e.fn.body, t)
        return
    if isinstance(e, Unpack):
        tp = synth(env, e.packed)
        if not isinstance(tp, TExists):
            raise _mismatch(TExists(TVar(0)), tp, e.span)
        inner = env.push_tyvar().no_hole().bind(e.name, tp.body)
        check(inner, e.body, type_shift(t, 1))
        return
    if isinstance(e, TApp):
        tf = synth(env, e.fn)
        if not isinstance(tf, TForall):
            raise _mismatch(TForall(TVar(0)), tf, e.span)
        if match_instantiation(tf.body, t) is None:
            raise TypeCheckError(
                "Mismatch",
                f"no instantiation of {pretty_type(tf)} yields {pretty_type(t)}",
                span=e.span,
                expected=t,
                got=tf,
            )
        return
    if isinstance(e, Ascribe):
        check(env, e.arg, e.ty)
        if e.ty != t:
            raise _mismatch(t, e.ty, e.span)
        return
    got = synth(env, e)
    if got != t:
        raise _mismatch(t, got, e.span)


# ---------------------------------------------------------------------------
# Context typing
# ---------------------------------------------------------------------------


def typecheck_context(env: TypeEnv, ctx: Expr, hole_type: Type) -> Type:
    """Type a one-hole context, treating the hole as a term of hole_type.

    The result t' is such that plugging any closed e with |- e : hole_type
    yields a closed program of type t'.
    """
    n = count_holes(ctx)
    if n != 1:
        raise TypeCheckError("HoleCount", f"context must have exactly one hole, found {n}")
    henv = replace(env, hole_type=hole_type, hole_allowed=True)
    return synth(henv, ctx)


def type_of_program(e: Expr, declared: Optional[Type] = None) -> Type:
    """Typecheck a closed program; checks against declared when given."""
    if declared is not None:
        check(EMPTY_ENV, e, declared)
        return declared
    return synth(EMPTY_ENV, e)
