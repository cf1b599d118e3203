"""Abstract syntax: types, expressions, values, substitution, evaluation contexts.

Expression binders are named strings; substitution only ever substitutes
closed values, so it never needs to be capture avoiding.  Type binders are
De Bruijn indices, so type-level substitution shifts.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union


@dataclass(frozen=True)
class Span:
    """Byte span plus the line/column of its start."""

    start: int
    end: int
    line: int
    col: int


# ---------------------------------------------------------------------------
# Types
# ---------------------------------------------------------------------------


class Type:
    pass


@dataclass(frozen=True)
class TVar(Type):
    idx: int  # De Bruijn index


@dataclass(frozen=True)
class TUnit(Type):
    pass


@dataclass(frozen=True)
class TBool(Type):
    pass


@dataclass(frozen=True)
class TInt(Type):
    pass


@dataclass(frozen=True)
class TProd(Type):
    left: Type
    right: Type


@dataclass(frozen=True)
class TSum(Type):
    left: Type
    right: Type


@dataclass(frozen=True)
class TArrow(Type):
    arg: Type
    res: Type


@dataclass(frozen=True)
class TForall(Type):
    body: Type


@dataclass(frozen=True)
class TExists(Type):
    body: Type


@dataclass(frozen=True)
class TRec(Type):
    body: Type


@dataclass(frozen=True)
class TRef(Type):
    elem: Type


@dataclass(frozen=True)
class TProph(Type):
    pass


def type_shift(t: Type, d: int, cutoff: int = 0) -> Type:
    """Shift free De Bruijn indices >= cutoff by d."""
    if isinstance(t, TVar):
        return TVar(t.idx + d) if t.idx >= cutoff else t
    if isinstance(t, (TUnit, TBool, TInt, TProph)):
        return t
    if isinstance(t, TProd):
        return TProd(type_shift(t.left, d, cutoff), type_shift(t.right, d, cutoff))
    if isinstance(t, TSum):
        return TSum(type_shift(t.left, d, cutoff), type_shift(t.right, d, cutoff))
    if isinstance(t, TArrow):
        return TArrow(type_shift(t.arg, d, cutoff), type_shift(t.res, d, cutoff))
    if isinstance(t, TForall):
        return TForall(type_shift(t.body, d, cutoff + 1))
    if isinstance(t, TExists):
        return TExists(type_shift(t.body, d, cutoff + 1))
    if isinstance(t, TRec):
        return TRec(type_shift(t.body, d, cutoff + 1))
    if isinstance(t, TRef):
        return TRef(type_shift(t.elem, d, cutoff))
    raise AssertionError(f"type_shift: {t!r}")


def _type_subst(t: Type, arg: Type, idx: int) -> Type:
    if isinstance(t, TVar):
        if t.idx == idx:
            return type_shift(arg, idx)
        if t.idx > idx:
            return TVar(t.idx - 1)
        return t
    if isinstance(t, (TUnit, TBool, TInt, TProph)):
        return t
    if isinstance(t, TProd):
        return TProd(_type_subst(t.left, arg, idx), _type_subst(t.right, arg, idx))
    if isinstance(t, TSum):
        return TSum(_type_subst(t.left, arg, idx), _type_subst(t.right, arg, idx))
    if isinstance(t, TArrow):
        return TArrow(_type_subst(t.arg, arg, idx), _type_subst(t.res, arg, idx))
    if isinstance(t, TForall):
        return TForall(_type_subst(t.body, arg, idx + 1))
    if isinstance(t, TExists):
        return TExists(_type_subst(t.body, arg, idx + 1))
    if isinstance(t, TRec):
        return TRec(_type_subst(t.body, arg, idx + 1))
    if isinstance(t, TRef):
        return TRef(_type_subst(t.elem, arg, idx))
    raise AssertionError(f"type_subst: {t!r}")


def type_subst(body: Type, arg: Type) -> Type:
    """Substitute De Bruijn index 0 in body by arg, unshifting the rest."""
    return _type_subst(body, arg, 0)


def type_mentions(t: Type, idx: int) -> bool:
    """Does index idx occur free in t?"""
    if isinstance(t, TVar):
        return t.idx == idx
    if isinstance(t, (TUnit, TBool, TInt, TProph)):
        return False
    if isinstance(t, (TProd, TSum)):
        return type_mentions(t.left, idx) or type_mentions(t.right, idx)
    if isinstance(t, TArrow):
        return type_mentions(t.arg, idx) or type_mentions(t.res, idx)
    if isinstance(t, (TForall, TExists, TRec)):
        return type_mentions(t.body, idx + 1)
    if isinstance(t, TRef):
        return type_mentions(t.elem, idx)
    raise AssertionError(f"type_mentions: {t!r}")


def eq_type(t: Type) -> bool:
    """Word-sized types on which compare-and-set (and =) are permitted."""
    return isinstance(t, (TUnit, TBool, TInt, TRef))


# ---------------------------------------------------------------------------
# Expressions
# ---------------------------------------------------------------------------

# Binary operators; "not" is the sole unary operator and lives in UnOp.
BINOPS = ("+", "-", "*", "=", "<", "&&")


class Expr:
    pass


def _span_field() -> Optional[Span]:
    return field(default=None, compare=False, repr=False)  # type: ignore[return-value]


@dataclass(frozen=True)
class Var(Expr):
    name: str
    span: Optional[Span] = _span_field()


@dataclass(frozen=True)
class Unit(Expr):
    span: Optional[Span] = _span_field()


@dataclass(frozen=True)
class BoolLit(Expr):
    value: bool
    span: Optional[Span] = _span_field()


@dataclass(frozen=True)
class IntLit(Expr):
    value: int
    span: Optional[Span] = _span_field()


@dataclass(frozen=True)
class Loc(Expr):
    """Runtime-only: a heap location."""

    loc: int
    span: Optional[Span] = _span_field()


@dataclass(frozen=True)
class ProphId(Expr):
    """Runtime-only: a prophecy identifier."""

    pid: int
    span: Optional[Span] = _span_field()


@dataclass(frozen=True)
class Pair(Expr):
    left: Expr
    right: Expr
    span: Optional[Span] = _span_field()


@dataclass(frozen=True)
class Proj(Expr):
    index: int  # 1 or 2
    arg: Expr
    span: Optional[Span] = _span_field()


@dataclass(frozen=True)
class Inl(Expr):
    arg: Expr
    span: Optional[Span] = _span_field()


@dataclass(frozen=True)
class Inr(Expr):
    arg: Expr
    span: Optional[Span] = _span_field()


@dataclass(frozen=True)
class Match(Expr):
    scrutinee: Expr
    left_name: str
    left_body: Expr
    right_name: str
    right_body: Expr
    span: Optional[Span] = _span_field()


@dataclass(frozen=True)
class Rec(Expr):
    """Recursive function value; fname/xname may be "_" (unused)."""

    fname: str
    xname: str
    body: Expr
    span: Optional[Span] = _span_field()


@dataclass(frozen=True)
class App(Expr):
    fn: Expr
    arg: Expr
    span: Optional[Span] = _span_field()


@dataclass(frozen=True)
class TLam(Expr):
    body: Expr
    span: Optional[Span] = _span_field()


@dataclass(frozen=True)
class TApp(Expr):
    fn: Expr
    span: Optional[Span] = _span_field()


@dataclass(frozen=True)
class Pack(Expr):
    arg: Expr
    span: Optional[Span] = _span_field()


@dataclass(frozen=True)
class Unpack(Expr):
    packed: Expr
    name: str
    body: Expr
    span: Optional[Span] = _span_field()


@dataclass(frozen=True)
class Fold(Expr):
    arg: Expr
    span: Optional[Span] = _span_field()


@dataclass(frozen=True)
class Unfold(Expr):
    arg: Expr
    span: Optional[Span] = _span_field()


@dataclass(frozen=True)
class If(Expr):
    cond: Expr
    then: Expr
    els: Expr
    span: Optional[Span] = _span_field()


@dataclass(frozen=True)
class BinOp(Expr):
    op: str
    left: Expr
    right: Expr
    span: Optional[Span] = _span_field()


@dataclass(frozen=True)
class UnOp(Expr):
    op: str  # only "not"
    arg: Expr
    span: Optional[Span] = _span_field()


@dataclass(frozen=True)
class Ref(Expr):
    arg: Expr
    span: Optional[Span] = _span_field()


@dataclass(frozen=True)
class Load(Expr):
    arg: Expr
    span: Optional[Span] = _span_field()


@dataclass(frozen=True)
class Store(Expr):
    target: Expr
    value: Expr
    span: Optional[Span] = _span_field()


@dataclass(frozen=True)
class Cas(Expr):
    target: Expr
    expected: Expr
    new: Expr
    span: Optional[Span] = _span_field()


@dataclass(frozen=True)
class Fork(Expr):
    body: Expr
    span: Optional[Span] = _span_field()


@dataclass(frozen=True)
class NewProph(Expr):
    span: Optional[Span] = _span_field()


@dataclass(frozen=True)
class ResolveProph(Expr):
    proph: Expr
    value: Expr
    span: Optional[Span] = _span_field()


@dataclass(frozen=True)
class Ascribe(Expr):
    """Surface-only type ascription; erased before evaluation."""

    arg: Expr
    ty: Type
    span: Optional[Span] = _span_field()


@dataclass(frozen=True)
class Hole(Expr):
    """The hole of a program context; at most one per expression."""

    span: Optional[Span] = _span_field()


# A value is an expression satisfying is_val; the alias documents intent.
Val = Expr


def is_val(e: Expr) -> bool:
    if isinstance(e, (Unit, BoolLit, IntLit, Loc, ProphId, Rec, TLam)):
        return True
    if isinstance(e, Pair):
        return is_val(e.left) and is_val(e.right)
    if isinstance(e, (Inl, Inr, Pack, Fold)):
        return is_val(e.arg)
    return False


def let_(name: str, bound: Expr, body: Expr) -> Expr:
    """let name = bound in body, encoded as an anonymous-function application."""
    return App(Rec("_", name, body), bound)


def seq(first: Expr, second: Expr) -> Expr:
    return let_("_", first, second)


def is_let(e: Expr) -> bool:
    return isinstance(e, App) and isinstance(e.fn, Rec) and e.fn.fname == "_"


# ---------------------------------------------------------------------------
# Substitution
# ---------------------------------------------------------------------------


def subst(e: Expr, name: str, v: Val) -> Expr:
    """Replace free occurrences of name in e by the closed value v."""
    if name == "_":
        return e
    if isinstance(e, Var):
        return v if e.name == name else e
    if isinstance(e, (Unit, BoolLit, IntLit, Loc, ProphId, NewProph, Hole)):
        return e
    if isinstance(e, Pair):
        return Pair(subst(e.left, name, v), subst(e.right, name, v))
    if isinstance(e, Proj):
        return Proj(e.index, subst(e.arg, name, v))
    if isinstance(e, Inl):
        return Inl(subst(e.arg, name, v))
    if isinstance(e, Inr):
        return Inr(subst(e.arg, name, v))
    if isinstance(e, Match):
        lb = e.left_body if e.left_name == name else subst(e.left_body, name, v)
        rb = e.right_body if e.right_name == name else subst(e.right_body, name, v)
        return Match(subst(e.scrutinee, name, v), e.left_name, lb, e.right_name, rb)
    if isinstance(e, Rec):
        if name in (e.fname, e.xname):
            return e
        return Rec(e.fname, e.xname, subst(e.body, name, v))
    if isinstance(e, App):
        return App(subst(e.fn, name, v), subst(e.arg, name, v))
    if isinstance(e, TLam):
        return TLam(subst(e.body, name, v))
    if isinstance(e, TApp):
        return TApp(subst(e.fn, name, v))
    if isinstance(e, Pack):
        return Pack(subst(e.arg, name, v))
    if isinstance(e, Unpack):
        body = e.body if e.name == name else subst(e.body, name, v)
        return Unpack(subst(e.packed, name, v), e.name, body)
    if isinstance(e, Fold):
        return Fold(subst(e.arg, name, v))
    if isinstance(e, Unfold):
        return Unfold(subst(e.arg, name, v))
    if isinstance(e, If):
        return If(subst(e.cond, name, v), subst(e.then, name, v), subst(e.els, name, v))
    if isinstance(e, BinOp):
        return BinOp(e.op, subst(e.left, name, v), subst(e.right, name, v))
    if isinstance(e, UnOp):
        return UnOp(e.op, subst(e.arg, name, v))
    if isinstance(e, Ref):
        return Ref(subst(e.arg, name, v))
    if isinstance(e, Load):
        return Load(subst(e.arg, name, v))
    if isinstance(e, Store):
        return Store(subst(e.target, name, v), subst(e.value, name, v))
    if isinstance(e, Cas):
        return Cas(subst(e.target, name, v), subst(e.expected, name, v), subst(e.new, name, v))
    if isinstance(e, Fork):
        return Fork(subst(e.body, name, v))
    if isinstance(e, ResolveProph):
        return ResolveProph(subst(e.proph, name, v), subst(e.value, name, v))
    if isinstance(e, Ascribe):
        return Ascribe(subst(e.arg, name, v), e.ty)
    raise AssertionError(f"subst: {e!r}")


def erase_ascriptions(e: Expr) -> Expr:
    """Strip Ascribe nodes; run-time terms carry no type annotations."""
    if isinstance(e, Ascribe):
        return erase_ascriptions(e.arg)
    if isinstance(e, (Var, Unit, BoolLit, IntLit, Loc, ProphId, NewProph, Hole)):
        return e
    if isinstance(e, Pair):
        return Pair(erase_ascriptions(e.left), erase_ascriptions(e.right))
    if isinstance(e, Proj):
        return Proj(e.index, erase_ascriptions(e.arg))
    if isinstance(e, Inl):
        return Inl(erase_ascriptions(e.arg))
    if isinstance(e, Inr):
        return Inr(erase_ascriptions(e.arg))
    if isinstance(e, Match):
        return Match(
            erase_ascriptions(e.scrutinee),
            e.left_name,
            erase_ascriptions(e.left_body),
            e.right_name,
            erase_ascriptions(e.right_body),
        )
    if isinstance(e, Rec):
        return Rec(e.fname, e.xname, erase_ascriptions(e.body))
    if isinstance(e, App):
        return App(erase_ascriptions(e.fn), erase_ascriptions(e.arg))
    if isinstance(e, TLam):
        return TLam(erase_ascriptions(e.body))
    if isinstance(e, TApp):
        return TApp(erase_ascriptions(e.fn))
    if isinstance(e, Pack):
        return Pack(erase_ascriptions(e.arg))
    if isinstance(e, Unpack):
        return Unpack(erase_ascriptions(e.packed), e.name, erase_ascriptions(e.body))
    if isinstance(e, Fold):
        return Fold(erase_ascriptions(e.arg))
    if isinstance(e, Unfold):
        return Unfold(erase_ascriptions(e.arg))
    if isinstance(e, If):
        return If(erase_ascriptions(e.cond), erase_ascriptions(e.then), erase_ascriptions(e.els))
    if isinstance(e, BinOp):
        return BinOp(e.op, erase_ascriptions(e.left), erase_ascriptions(e.right))
    if isinstance(e, UnOp):
        return UnOp(e.op, erase_ascriptions(e.arg))
    if isinstance(e, Ref):
        return Ref(erase_ascriptions(e.arg))
    if isinstance(e, Load):
        return Load(erase_ascriptions(e.arg))
    if isinstance(e, Store):
        return Store(erase_ascriptions(e.target), erase_ascriptions(e.value))
    if isinstance(e, Cas):
        return Cas(
            erase_ascriptions(e.target),
            erase_ascriptions(e.expected),
            erase_ascriptions(e.new),
        )
    if isinstance(e, Fork):
        return Fork(erase_ascriptions(e.body))
    if isinstance(e, ResolveProph):
        return ResolveProph(erase_ascriptions(e.proph), erase_ascriptions(e.value))
    raise AssertionError(f"erase_ascriptions: {e!r}")


# ---------------------------------------------------------------------------
# Evaluation contexts
# ---------------------------------------------------------------------------
#
# A context is a list of frames, outermost first.  Each frame is a node with
# exactly one missing child; plug() fills it.


class Frame:
    pass


@dataclass(frozen=True)
class AppArg(Frame):
    """fn ([]) -- argument position; fn not yet evaluated."""

    fn: Expr


@dataclass(frozen=True)
class AppFn(Frame):
    """([]) arg -- function position; arg already a value."""

    arg: Val


@dataclass(frozen=True)
class PairL(Frame):
    right: Expr


@dataclass(frozen=True)
class PairR(Frame):
    left: Val


@dataclass(frozen=True)
class ProjF(Frame):
    index: int


@dataclass(frozen=True)
class InlF(Frame):
    pass


@dataclass(frozen=True)
class InrF(Frame):
    pass


@dataclass(frozen=True)
class MatchF(Frame):
    left_name: str
    left_body: Expr
    right_name: str
    right_body: Expr


@dataclass(frozen=True)
class IfF(Frame):
    then: Expr
    els: Expr


@dataclass(frozen=True)
class BinOpL(Frame):
    op: str
    right: Expr


@dataclass(frozen=True)
class BinOpR(Frame):
    op: str
    left: Val


@dataclass(frozen=True)
class UnOpF(Frame):
    op: str


@dataclass(frozen=True)
class TAppF(Frame):
    pass


@dataclass(frozen=True)
class PackF(Frame):
    pass


@dataclass(frozen=True)
class UnpackF(Frame):
    name: str
    body: Expr


@dataclass(frozen=True)
class FoldF(Frame):
    pass


@dataclass(frozen=True)
class UnfoldF(Frame):
    pass


@dataclass(frozen=True)
class RefF(Frame):
    pass


@dataclass(frozen=True)
class LoadF(Frame):
    pass


@dataclass(frozen=True)
class StoreL(Frame):
    """([]) <- value-expr; target position."""

    value: Expr


@dataclass(frozen=True)
class StoreR(Frame):
    """target <- ([]); target already a value."""

    target: Val


@dataclass(frozen=True)
class CasTarget(Frame):
    expected: Expr
    new: Expr


@dataclass(frozen=True)
class CasExpected(Frame):
    target: Val
    new: Expr


@dataclass(frozen=True)
class CasNew(Frame):
    target: Val
    expected: Val


@dataclass(frozen=True)
class ResolveL(Frame):
    value: Expr


@dataclass(frozen=True)
class ResolveR(Frame):
    proph: Val


EvalCtx = list  # list[Frame], outermost frame first


def plug(frame: Frame, e: Expr) -> Expr:
    if isinstance(frame, AppArg):
        return App(frame.fn, e)
    if isinstance(frame, AppFn):
        return App(e, frame.arg)
    if isinstance(frame, PairL):
        return Pair(e, frame.right)
    if isinstance(frame, PairR):
        return Pair(frame.left, e)
    if isinstance(frame, ProjF):
        return Proj(frame.index, e)
    if isinstance(frame, InlF):
        return Inl(e)
    if isinstance(frame, InrF):
        return Inr(e)
    if isinstance(frame, MatchF):
        return Match(e, frame.left_name, frame.left_body, frame.right_name, frame.right_body)
    if isinstance(frame, IfF):
        return If(e, frame.then, frame.els)
    if isinstance(frame, BinOpL):
        return BinOp(frame.op, e, frame.right)
    if isinstance(frame, BinOpR):
        return BinOp(frame.op, frame.left, e)
    if isinstance(frame, UnOpF):
        return UnOp(frame.op, e)
    if isinstance(frame, TAppF):
        return TApp(e)
    if isinstance(frame, PackF):
        return Pack(e)
    if isinstance(frame, UnpackF):
        return Unpack(e, frame.name, frame.body)
    if isinstance(frame, FoldF):
        return Fold(e)
    if isinstance(frame, UnfoldF):
        return Unfold(e)
    if isinstance(frame, RefF):
        return Ref(e)
    if isinstance(frame, LoadF):
        return Load(e)
    if isinstance(frame, StoreL):
        return Store(e, frame.value)
    if isinstance(frame, StoreR):
        return Store(frame.target, e)
    if isinstance(frame, CasTarget):
        return Cas(e, frame.expected, frame.new)
    if isinstance(frame, CasExpected):
        return Cas(frame.target, e, frame.new)
    if isinstance(frame, CasNew):
        return Cas(frame.target, frame.expected, e)
    if isinstance(frame, ResolveL):
        return ResolveProph(e, frame.value)
    if isinstance(frame, ResolveR):
        return ResolveProph(frame.proph, e)
    raise AssertionError(f"plug: {frame!r}")


def fill(ctx: EvalCtx, e: Expr) -> Expr:
    """Plug e into the hole, innermost frame first (frames listed outermost first)."""
    for frame in reversed(ctx):
        e = plug(frame, e)
    return e


# ---------------------------------------------------------------------------
# Program-context holes
# ---------------------------------------------------------------------------


def count_holes(e: Expr) -> int:
    if isinstance(e, Hole):
        return 1
    n = 0
    for child in expr_children(e):
        n += count_holes(child)
    return n


def plug_hole(ctx: Expr, e: Expr) -> Expr:
    """Replace the unique Hole in ctx by e (plain syntactic replacement)."""
    if isinstance(ctx, Hole):
        return e

    def walk(c: Expr) -> Expr:
        if isinstance(c, Hole):
            return e
        return rebuild(c, [walk(ch) for ch in expr_children(c)])

    return walk(ctx)


def expr_children(e: Expr) -> tuple:
    """Sub-expressions in left-to-right order."""
    if isinstance(e, (Var, Unit, BoolLit, IntLit, Loc, ProphId, NewProph, Hole)):
        return ()
    if isinstance(e, Pair):
        return (e.left, e.right)
    if isinstance(e, Proj):
        return (e.arg,)
    if isinstance(e, (Inl, Inr, Pack, Fold, Unfold, Ref, Load)):
        return (e.arg,)
    if isinstance(e, Match):
        return (e.scrutinee, e.left_body, e.right_body)
    if isinstance(e, Rec):
        return (e.body,)
    if isinstance(e, App):
        return (e.fn, e.arg)
    if isinstance(e, TLam):
        return (e.body,)
    if isinstance(e, TApp):
        return (e.fn,)
    if isinstance(e, Unpack):
        return (e.packed, e.body)
    if isinstance(e, If):
        return (e.cond, e.then, e.els)
    if isinstance(e, BinOp):
        return (e.left, e.right)
    if isinstance(e, UnOp):
        return (e.arg,)
    if isinstance(e, Store):
        return (e.target, e.value)
    if isinstance(e, Cas):
        return (e.target, e.expected, e.new)
    if isinstance(e, Fork):
        return (e.body,)
    if isinstance(e, ResolveProph):
        return (e.proph, e.value)
    if isinstance(e, Ascribe):
        return (e.arg,)
    raise AssertionError(f"expr_children: {e!r}")


def rebuild(e: Expr, children: list) -> Expr:
    """Rebuild e with replaced children (same order as expr_children)."""
    if isinstance(e, (Var, Unit, BoolLit, IntLit, Loc, ProphId, NewProph, Hole)):
        return e
    if isinstance(e, Pair):
        return Pair(*children)
    if isinstance(e, Proj):
        return Proj(e.index, children[0])
    if isinstance(e, Inl):
        return Inl(children[0])
    if isinstance(e, Inr):
        return Inr(children[0])
    if isinstance(e, Pack):
        return Pack(children[0])
    if isinstance(e, Fold):
        return Fold(children[0])
    if isinstance(e, Unfold):
        return Unfold(children[0])
    if isinstance(e, Ref):
        return Ref(children[0])
    if isinstance(e, Load):
        return Load(children[0])
    if isinstance(e, Match):
        return Match(children[0], e.left_name, children[1], e.right_name, children[2])
    if isinstance(e, Rec):
        return Rec(e.fname, e.xname, children[0])
    if isinstance(e, App):
        return App(*children)
    if isinstance(e, TLam):
        return TLam(children[0])
    if isinstance(e, TApp):
        return TApp(children[0])
    if isinstance(e, Unpack):
        return Unpack(children[0], e.name, children[1])
    if isinstance(e, If):
        return If(*children)
    if isinstance(e, BinOp):
        return BinOp(e.op, *children)
    if isinstance(e, UnOp):
        return UnOp(e.op, children[0])
    if isinstance(e, Store):
        return Store(*children)
    if isinstance(e, Cas):
        return Cas(*children)
    if isinstance(e, Fork):
        return Fork(children[0])
    if isinstance(e, ResolveProph):
        return ResolveProph(*children)
    if isinstance(e, Ascribe):
        return Ascribe(children[0], e.ty)
    raise AssertionError(f"rebuild: {e!r}")


def free_vars(e: Expr, bound: frozenset = frozenset()) -> set:
    """Free expression variables of e."""
    if isinstance(e, Var):
        return set() if e.name in bound else {e.name}
    if isinstance(e, Rec):
        return free_vars(e.body, bound | {e.fname, e.xname})
    if isinstance(e, Match):
        out = free_vars(e.scrutinee, bound)
        out |= free_vars(e.left_body, bound | {e.left_name})
        out |= free_vars(e.right_body, bound | {e.right_name})
        return out
    if isinstance(e, Unpack):
        return free_vars(e.packed, bound) | free_vars(e.body, bound | {e.name})
    out: set = set()
    for child in expr_children(e):
        out |= free_vars(child, bound)
    return out
