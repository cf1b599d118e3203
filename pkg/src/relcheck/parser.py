"""Concrete syntax: lexer, parser, and pretty-printer.

The surface language is ML-like.  Major forms:

    rec f x = e        λ x. e (sugar for rec _ x = e)     Λ e       e <>
    let x = e in e     e; e        if e then e else e
    match e with inl x -> e | inr x -> e end
    pack e             unpack e as x in e                 fold e    unfold e
    ref e              !e          e <- e                 CAS(e, e, e)
    fork { e }         newproph    resolve e e
    π1 e / π2 e        ¬e          (e : T)                [] (context hole)

Comments are (* ... *) and nest.  Files may start with a `#type: T` pragma.

pretty() inverts parse_expr(): parse_expr(pretty(e)) is structurally equal
to e (spans excluded from comparison).
"""

from __future__ import annotations

from dataclasses import dataclass
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
    Span,
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
    Load,
    Var,
)


class ParseError(Exception):
    def __init__(self, message: str, span: Span, expected: frozenset):
        super().__init__(f"{message} at line {span.line}:{span.col}")
        self.message = message
        self.span = span
        self.expected = expected


class UnboundTypeVar(ParseError):
    def __init__(self, name: str, span: Span):
        super().__init__(f"unbound type variable {name!r}", span, frozenset({"bound type variable"}))
        self.name = name


KEYWORDS = {
    "let", "in", "rec", "if", "then", "else", "match", "with", "end",
    "inl", "inr", "unpack", "as", "pack", "fold", "unfold", "ref", "fork",
    "true", "false", "not", "lam", "tlam", "newproph", "resolve", "CAS",
    "fst", "snd",
    # type-level keywords, reserved uniformly
    "unit", "bool", "int", "proph", "forall", "exists", "mu",
}

_PUNCT = ["(*", "->", "<-", "<>", "&&", "[]", "(", ")", "{", "}", ",", ";",
          ":", ".", "|", "=", "<", "+", "-", "*", "!", "¬", "λ", "Λ"]


@dataclass(frozen=True)
class Token:
    kind: str  # "int", "ident", keyword text, or punctuation text
    text: str
    span: Span


def _is_ident_start(ch: str) -> bool:
    return ch.isalpha() and ch not in "λΛπ¬" or ch == "_"


def _is_ident_char(ch: str) -> bool:
    return (ch.isalnum() and ch not in "λΛπ¬") or ch in "_'"


def tokenize(text: str) -> list:
    toks = []
    i = 0
    line, col = 1, 1
    n = len(text)

    def span(start: int, end: int, sl: int, sc: int) -> Span:
        return Span(start, end, sl, sc)

    def advance(k: int) -> None:
        nonlocal i, line, col
        for _ in range(k):
            if i < n and text[i] == "\n":
                line += 1
                col = 1
            else:
                col += 1
            i += 1

    while i < n:
        ch = text[i]
        if ch in " \t\r\n":
            advance(1)
            continue
        if text.startswith("(*", i):
            sl, sc, start = line, col, i
            depth = 0
            while i < n:
                if text.startswith("(*", i):
                    depth += 1
                    advance(2)
                elif text.startswith("*)", i):
                    depth -= 1
                    advance(2)
                    if depth == 0:
                        break
                else:
                    advance(1)
            if depth != 0:
                raise ParseError("unterminated comment", span(start, i, sl, sc), frozenset({"*)"}))
            continue
        sl, sc, start = line, col, i
        if ch.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            tok = Token("num", text[i:j], span(start, j, sl, sc))
            advance(j - i)
            toks.append(tok)
            continue
        if ch == "π":
            if i + 1 < n and text[i + 1] in "12":
                tok = Token("proj", text[i : i + 2], span(start, i + 2, sl, sc))
                advance(2)
                toks.append(tok)
                continue
            raise ParseError("expected π1 or π2", span(start, i + 1, sl, sc), frozenset({"π1", "π2"}))
        if _is_ident_start(ch):
            j = i
            while j < n and _is_ident_char(text[j]):
                j += 1
            word = text[i:j]
            kind = word if word in KEYWORDS else "ident"
            tok = Token(kind, word, span(start, j, sl, sc))
            advance(j - i)
            toks.append(tok)
            continue
        for p in _PUNCT:
            if text.startswith(p, i):
                tok = Token(p, p, span(start, i + len(p), sl, sc))
                advance(len(p))
                toks.append(tok)
                break
        else:
            raise ParseError(
                f"unexpected character {ch!r}", span(start, i + 1, sl, sc), frozenset({"token"})
            )
    toks.append(Token("eof", "", Span(n, n, line, col)))
    return toks


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

_PREFIX_TOKENS = {"ref", "!", "proj", "fst", "snd", "inl", "inr", "fold", "unfold", "pack"}
_ATOM_STARTERS = {"num", "ident", "true", "false", "(", "[]", "CAS", "fork", "newproph"}


class _Parser:
    def __init__(self, toks: list, tyvars: Optional[list] = None):
        self.toks = toks
        self.pos = 0
        self.tyvars = tyvars if tyvars is not None else []

    # -- token plumbing

    def peek(self, k: int = 0) -> Token:
        return self.toks[min(self.pos + k, len(self.toks) - 1)]

    def next(self) -> Token:
        tok = self.toks[self.pos]
        if tok.kind != "eof":
            self.pos += 1
        return tok

    def at(self, kind: str) -> bool:
        return self.peek().kind == kind

    def eat(self, kind: str) -> Token:
        tok = self.peek()
        if tok.kind != kind:
            raise ParseError(
                f"expected {kind!r}, found {tok.text or 'end of input'!r}",
                tok.span,
                frozenset({kind}),
            )
        return self.next()

    def fail(self, expected: set) -> ParseError:
        tok = self.peek()
        return ParseError(
            f"unexpected {tok.text or 'end of input'!r}", tok.span, frozenset(expected)
        )

    def binder(self) -> str:
        tok = self.peek()
        if tok.kind == "ident":
            return self.next().text
        raise self.fail({"binder"})

    def spanned(self, e: Expr, start: Span) -> Expr:
        end = self.toks[self.pos - 1].span if self.pos > 0 else start
        sp = Span(start.start, end.end, start.line, start.col)
        object.__setattr__(e, "span", sp)
        return e

    # -- expressions

    def expr(self) -> Expr:
        first = self.stmt()
        if self.at(";"):
            start = self.peek().span
            self.next()
            rest = self.expr()
            return self.spanned(App(Rec("_", "_", rest), first), start)
        return first

    def stmt(self) -> Expr:
        tok = self.peek()
        start = tok.span
        if tok.kind == "let":
            self.next()
            name = self.binder()
            self.eat("=")
            bound = self.expr()
            self.eat("in")
            body = self.expr()
            return self.spanned(App(Rec("_", name, body), bound), start)
        if tok.kind == "rec":
            self.next()
            fname = self.binder()
            xname = self.binder()
            self.eat("=")
            body = self.expr()
            return self.spanned(Rec(fname, xname, body), start)
        if tok.kind in ("λ", "lam"):
            self.next()
            params = [self.binder()]
            while self.peek().kind == "ident":
                params.append(self.binder())
            self.eat(".")
            body = self.expr()
            for p in reversed(params):
                body = Rec("_", p, body)
            return self.spanned(body, start)
        if tok.kind in ("Λ", "tlam"):
            self.next()
            return self.spanned(TLam(self.expr()), start)
        if tok.kind == "if":
            self.next()
            cond = self.expr()
            self.eat("then")
            then = self.stmt()
            self.eat("else")
            els = self.stmt()
            return self.spanned(If(cond, then, els), start)
        if tok.kind == "match":
            self.next()
            scrut = self.expr()
            self.eat("with")
            self.eat("inl")
            ln = self.binder()
            self.eat("->")
            lb = self.expr()
            self.eat("|")
            self.eat("inr")
            rn = self.binder()
            self.eat("->")
            rb = self.expr()
            self.eat("end")
            return self.spanned(Match(scrut, ln, lb, rn, rb), start)
        if tok.kind == "unpack":
            self.next()
            packed = self.expr()
            self.eat("as")
            name = self.binder()
            self.eat("in")
            body = self.expr()
            return self.spanned(Unpack(packed, name, body), start)
        return self.assign()

    def assign(self) -> Expr:
        start = self.peek().span
        target = self.cand()
        if self.at("<-"):
            self.next()
            value = self.assign()
            return self.spanned(Store(target, value), start)
        return target

    def cand(self) -> Expr:
        start = self.peek().span
        left = self.cmp()
        if self.at("&&"):
            self.next()
            right = self.cand()
            return self.spanned(BinOp("&&", left, right), start)
        return left

    def cmp(self) -> Expr:
        start = self.peek().span
        left = self.add()
        if self.peek().kind in ("=", "<"):
            op = self.next().kind
            right = self.add()
            return self.spanned(BinOp(op, left, right), start)
        return left

    def add(self) -> Expr:
        start = self.peek().span
        left = self.mul()
        while self.peek().kind in ("+", "-"):
            op = self.next().kind
            right = self.mul()
            left = self.spanned(BinOp(op, left, right), start)
        return left

    def mul(self) -> Expr:
        start = self.peek().span
        left = self.unary()
        while self.at("*"):
            self.next()
            right = self.unary()
            left = self.spanned(BinOp("*", left, right), start)
        return left

    def unary(self) -> Expr:
        tok = self.peek()
        if tok.kind in ("¬", "not"):
            self.next()
            return self.spanned(UnOp("not", self.unary()), tok.span)
        if tok.kind == "-" and self.peek(1).kind == "num":
            self.next()
            lit = self.next()
            return self.spanned(IntLit(-int(lit.text)), tok.span)
        return self.prefix()

    def prefix(self) -> Expr:
        tok = self.peek()
        start = tok.span
        if tok.kind in _PREFIX_TOKENS:
            self.next()
            operand = self.prefix()
            if tok.kind == "ref":
                return self.spanned(Ref(operand), start)
            if tok.kind == "!":
                return self.spanned(Load(operand), start)
            if tok.kind == "proj":
                return self.spanned(Proj(int(tok.text[1]), operand), start)
            if tok.kind == "fst":
                return self.spanned(Proj(1, operand), start)
            if tok.kind == "snd":
                return self.spanned(Proj(2, operand), start)
            if tok.kind == "inl":
                return self.spanned(Inl(operand), start)
            if tok.kind == "inr":
                return self.spanned(Inr(operand), start)
            if tok.kind == "fold":
                return self.spanned(Fold(operand), start)
            if tok.kind == "unfold":
                return self.spanned(Unfold(operand), start)
            if tok.kind == "pack":
                return self.spanned(Pack(operand), start)
        if tok.kind == "resolve":
            self.next()
            proph = self.prefix_nofork()
            value = self.prefix_nofork()
            return self.spanned(ResolveProph(proph, value), start)
        return self.appchain()

    def prefix_nofork(self) -> Expr:
        # operands of resolve: atoms or prefix forms, no application
        tok = self.peek()
        if tok.kind in _PREFIX_TOKENS:
            return self.prefix()
        return self.atom()

    def appchain(self) -> Expr:
        start = self.peek().span
        e = self.atom()
        while True:
            tok = self.peek()
            if tok.kind == "<>":
                self.next()
                e = self.spanned(TApp(e), start)
            elif tok.kind in _ATOM_STARTERS:
                arg = self.atom()
                e = self.spanned(App(e, arg), start)
            else:
                return e

    def atom(self) -> Expr:
        tok = self.peek()
        start = tok.span
        if tok.kind == "num":
            self.next()
            return self.spanned(IntLit(int(tok.text)), start)
        if tok.kind == "true":
            self.next()
            return self.spanned(BoolLit(True), start)
        if tok.kind == "false":
            self.next()
            return self.spanned(BoolLit(False), start)
        if tok.kind == "ident":
            if tok.text == "_":
                raise self.fail({"expression"})
            self.next()
            return self.spanned(Var(tok.text), start)
        if tok.kind == "[]":
            self.next()
            return self.spanned(Hole(), start)
        if tok.kind == "newproph":
            self.next()
            return self.spanned(NewProph(), start)
        if tok.kind == "CAS":
            self.next()
            self.eat("(")
            e1 = self.expr()
            self.eat(",")
            e2 = self.expr()
            self.eat(",")
            e3 = self.expr()
            self.eat(")")
            return self.spanned(Cas(e1, e2, e3), start)
        if tok.kind == "fork":
            self.next()
            self.eat("{")
            body = self.expr()
            self.eat("}")
            return self.spanned(Fork(body), start)
        if tok.kind == "(":
            self.next()
            if self.at(")"):
                self.next()
                return self.spanned(Unit(), start)
            e = self.expr()
            if self.at(":"):
                self.next()
                ty = self.type_()
                self.eat(")")
                return self.spanned(Ascribe(e, ty), start)
            if self.at(","):
                parts = [e]
                while self.at(","):
                    self.next()
                    parts.append(self.expr())
                self.eat(")")
                out = parts[0]
                for p in parts[1:]:
                    out = Pair(out, p)
                return self.spanned(out, start)
            self.eat(")")
            return e
        raise self.fail({"expression"})

    # -- types

    def type_(self) -> Type:
        tok = self.peek()
        if tok.kind in ("forall", "exists", "mu"):
            self.next()
            name = self.eat("ident").text
            self.eat(".")
            self.tyvars.insert(0, name)
            body = self.type_()
            self.tyvars.pop(0)
            if tok.kind == "forall":
                return TForall(body)
            if tok.kind == "exists":
                return TExists(body)
            return TRec(body)
        left = self.sumty()
        if self.at("->"):
            self.next()
            right = self.type_()
            return TArrow(left, right)
        return left

    def sumty(self) -> Type:
        left = self.prodty()
        while self.at("+"):
            self.next()
            left = TSum(left, self.prodty())
        return left

    def prodty(self) -> Type:
        left = self.atomty()
        while self.at("*"):
            self.next()
            left = TProd(left, self.atomty())
        return left

    def atomty(self) -> Type:
        tok = self.peek()
        if tok.kind == "unit":
            self.next()
            return TUnit()
        if tok.kind == "bool":
            self.next()
            return TBool()
        if tok.kind == "int":
            self.next()
            return TInt()
        if tok.kind == "ident":
            self.next()
            if tok.text in self.tyvars:
                return TVar(self.tyvars.index(tok.text))
            raise UnboundTypeVar(tok.text, tok.span)
        if tok.kind == "proph":
            self.next()
            return TProph()
        if tok.kind == "ref":
            self.next()
            return TRef(self.atomty())
        if tok.kind in ("forall", "exists", "mu"):
            return self.type_()
        if tok.kind == "(":
            self.next()
            ty = self.type_()
            self.eat(")")
            return ty
        raise self.fail({"type"})


def parse_expr(text: str) -> Expr:
    """Parse a single expression; raises ParseError on malformed input."""
    parser = _Parser(tokenize(text))
    e = parser.expr()
    parser.eat("eof")
    return e


def parse_type(text: str) -> Type:
    """Parse a closed type; named type variables become De Bruijn indices."""
    parser = _Parser(tokenize(text))
    ty = parser.type_()
    parser.eat("eof")
    return ty


def parse_program(text: str):
    """Parse a .rl file: optional leading `#type: T` pragma, then one expression.

    Returns (expr, declared_type_or_None).
    """
    declared = None
    if text.lstrip().startswith("#type:"):
        stripped = text.lstrip()
        offset = len(text) - len(stripped)
        nl = stripped.find("\n")
        if nl < 0:
            nl = len(stripped)
        declared = parse_type(stripped[len("#type:") : nl])
        text = " " * (offset + nl) + stripped[nl:]
    return parse_expr(text), declared


# ---------------------------------------------------------------------------
# Pretty-printer
# ---------------------------------------------------------------------------

# Precedence levels, loosest to tightest; a node printed into a slot that
# requires a tighter level gets parenthesized.
_SEQ, _STMT, _ASSIGN, _CAND, _CMP, _ADD, _MUL, _UNARY, _PREFIX, _APP, _ATOM = range(11)


def _level(e: Expr) -> int:
    if isinstance(e, (Var, Unit, BoolLit, IntLit, Hole, NewProph, Cas, Fork, Ascribe, Loc, ProphId)):
        if isinstance(e, IntLit) and e.value < 0:
            return _UNARY
        return _ATOM
    if isinstance(e, Pair):
        return _ATOM  # always printed with parentheses
    if isinstance(e, App):
        if isinstance(e.fn, Rec) and e.fn.fname == "_":
            return _SEQ if e.fn.xname == "_" else _STMT
        return _APP
    if isinstance(e, TApp):
        return _APP
    if isinstance(e, (Ref, Load, Proj, Inl, Inr, Fold, Unfold, Pack, ResolveProph)):
        return _PREFIX
    if isinstance(e, UnOp):
        return _UNARY
    if isinstance(e, BinOp):
        if e.op == "*":
            return _MUL
        if e.op in ("+", "-"):
            return _ADD
        if e.op in ("=", "<"):
            return _CMP
        return _CAND
    if isinstance(e, Store):
        return _ASSIGN
    if isinstance(e, (Rec, TLam, If, Match, Unpack)):
        return _STMT
    raise AssertionError(f"level: {e!r}")


def pretty(e: Expr, debug: bool = False) -> str:
    """Render e; parse_expr(pretty(e)) is structurally equal to e.

    Runtime-only nodes (Loc, ProphId) are rejected unless debug is set.
    """
    return _pp(e, _SEQ, debug)


def _pp(e: Expr, req: int, debug: bool) -> str:
    text = _pp_node(e, debug)
    if _level(e) < req:
        return f"({text})"
    return text


def _pp_node(e: Expr, debug: bool) -> str:
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Unit):
        return "()"
    if isinstance(e, BoolLit):
        return "true" if e.value else "false"
    if isinstance(e, IntLit):
        return str(e.value)
    if isinstance(e, Loc):
        if not debug:
            raise ValueError("pretty: runtime location outside debug mode")
        return f"<loc {e.loc}>"
    if isinstance(e, ProphId):
        if not debug:
            raise ValueError("pretty: runtime prophecy id outside debug mode")
        return f"<proph {e.pid}>"
    if isinstance(e, Hole):
        return "[]"
    if isinstance(e, NewProph):
        return "newproph"
    if isinstance(e, Pair):
        parts = []
        cur: Expr = e
        while isinstance(cur, Pair):
            parts.append(cur.right)
            cur = cur.left
        parts.append(cur)
        parts.reverse()
        return "(" + ", ".join(_pp(p, _SEQ, debug) for p in parts) + ")"
    if isinstance(e, App):
        if isinstance(e.fn, Rec) and e.fn.fname == "_":
            bound = _pp(e.arg, _SEQ, debug)
            body = _pp(e.fn.body, _SEQ, debug)
            if e.fn.xname == "_":
                return f"{_pp(e.arg, _ASSIGN, debug)}; {body}"
            return f"let {e.fn.xname} = {bound} in {body}"
        return f"{_pp(e.fn, _APP, debug)} {_pp(e.arg, _ATOM, debug)}"
    if isinstance(e, TApp):
        return f"{_pp(e.fn, _APP, debug)} <>"
    if isinstance(e, Rec):
        if e.fname == "_":
            return f"λ {e.xname}. {_pp(e.body, _SEQ, debug)}"
        return f"rec {e.fname} {e.xname} = {_pp(e.body, _SEQ, debug)}"
    if isinstance(e, TLam):
        return f"Λ {_pp(e.body, _SEQ, debug)}"
    if isinstance(e, If):
        return (
            f"if {_pp(e.cond, _SEQ, debug)} then {_pp(e.then, _ASSIGN, debug)}"
            f" else {_pp(e.els, _ASSIGN, debug)}"
        )
    if isinstance(e, Match):
        return (
            f"match {_pp(e.scrutinee, _SEQ, debug)} with"
            f" inl {e.left_name} -> {_pp(e.left_body, _SEQ, debug)}"
            f" | inr {e.right_name} -> {_pp(e.right_body, _SEQ, debug)} end"
        )
    if isinstance(e, Unpack):
        return (
            f"unpack {_pp(e.packed, _SEQ, debug)} as {e.name}"
            f" in {_pp(e.body, _SEQ, debug)}"
        )
    if isinstance(e, Proj):
        return f"π{e.index} {_pp(e.arg, _ATOM, debug)}"
    if isinstance(e, Inl):
        return f"inl {_pp(e.arg, _ATOM, debug)}"
    if isinstance(e, Inr):
        return f"inr {_pp(e.arg, _ATOM, debug)}"
    if isinstance(e, Pack):
        return f"pack {_pp(e.arg, _ATOM, debug)}"
    if isinstance(e, Fold):
        return f"fold {_pp(e.arg, _ATOM, debug)}"
    if isinstance(e, Unfold):
        return f"unfold {_pp(e.arg, _ATOM, debug)}"
    if isinstance(e, Ref):
        return f"ref {_pp(e.arg, _ATOM, debug)}"
    if isinstance(e, Load):
        return f"!{_pp(e.arg, _ATOM, debug)}"
    if isinstance(e, Store):
        return f"{_pp(e.target, _CAND, debug)} <- {_pp(e.value, _ASSIGN, debug)}"
    if isinstance(e, Cas):
        return (
            f"CAS({_pp(e.target, _SEQ, debug)}, {_pp(e.expected, _SEQ, debug)},"
            f" {_pp(e.new, _SEQ, debug)})"
        )
    if isinstance(e, Fork):
        return f"fork {{ {_pp(e.body, _SEQ, debug)} }}"
    if isinstance(e, ResolveProph):
        return f"resolve {_pp(e.proph, _ATOM, debug)} {_pp(e.value, _ATOM, debug)}"
    if isinstance(e, BinOp):
        if e.op == "&&":
            return f"{_pp(e.left, _CMP, debug)} && {_pp(e.right, _CAND, debug)}"
        if e.op in ("=", "<"):
            return f"{_pp(e.left, _ADD, debug)} {e.op} {_pp(e.right, _ADD, debug)}"
        if e.op in ("+", "-"):
            return f"{_pp(e.left, _ADD, debug)} {e.op} {_pp(e.right, _MUL, debug)}"
        return f"{_pp(e.left, _MUL, debug)} * {_pp(e.right, _UNARY, debug)}"
    if isinstance(e, UnOp):
        return f"¬{_pp(e.arg, _UNARY, debug)}"
    if isinstance(e, Ascribe):
        return f"({_pp(e.arg, _SEQ, debug)} : {pretty_type(e.ty)})"
    raise AssertionError(f"pretty: {e!r}")


_TY_ARROW, _TY_SUM, _TY_PROD, _TY_ATOM = range(4)


def pretty_type(t: Type) -> str:
    return _ppty(t, _TY_ARROW, [])


def _fresh_tyvar(env: list) -> str:
    base = "abcdefghijklmnopqrstuvwxyz"
    k = len(env)
    name = base[k % 26] + ("" if k < 26 else str(k // 26))
    return name


def _ppty(t: Type, req: int, env: list) -> str:
    text, lvl = _ppty_node(t, env)
    if lvl < req:
        return f"({text})"
    return text


def _ppty_node(t: Type, env: list):
    if isinstance(t, TVar):
        name = env[t.idx] if t.idx < len(env) else f"?{t.idx}"
        return name, _TY_ATOM
    if isinstance(t, TUnit):
        return "unit", _TY_ATOM
    if isinstance(t, TBool):
        return "bool", _TY_ATOM
    if isinstance(t, TInt):
        return "int", _TY_ATOM
    if isinstance(t, TProph):
        return "proph", _TY_ATOM
    if isinstance(t, TRef):
        return f"ref {_ppty(t.elem, _TY_ATOM, env)}", _TY_PROD
    if isinstance(t, TProd):
        return f"{_ppty(t.left, _TY_PROD, env)} * {_ppty(t.right, _TY_ATOM, env)}", _TY_PROD
    if isinstance(t, TSum):
        return f"{_ppty(t.left, _TY_SUM, env)} + {_ppty(t.right, _TY_PROD, env)}", _TY_SUM
    if isinstance(t, TArrow):
        return f"{_ppty(t.arg, _TY_SUM, env)} -> {_ppty(t.res, _TY_ARROW, env)}", _TY_ARROW
    if isinstance(t, (TForall, TExists, TRec)):
        name = _fresh_tyvar(env)
        body = _ppty(t.body, _TY_ARROW, [name] + env)
        kw = "forall" if isinstance(t, TForall) else "exists" if isinstance(t, TExists) else "mu"
        return f"{kw} {name}. {body}", _TY_ARROW
    raise AssertionError(f"pretty_type: {t!r}")
