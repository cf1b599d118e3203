"""Shared test helpers: independent oracles and random program generators.

The oracles here deliberately avoid the code paths they are used to check:
the naive enumerator explores schedules without memoization or canonical
hashing, and the named-variable type substituter implements capture-avoiding
substitution over a named representation instead of De Bruijn shifting.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from relcheck.explorer import outcome_key
from relcheck.semantics import Config, StepResult, thread_step
from relcheck.syntax import (
    App,
    BinOp,
    Cas,
    BoolLit,
    Expr,
    Fork,
    If,
    IntLit,
    Load,
    Rec,
    Ref,
    Store,
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
    UnOp,
    Unit,
    Var,
    is_val,
    let_,
    seq,
)

# ---------------------------------------------------------------------------
# Naive schedule enumerator (no memoization, no canonicalization)
# ---------------------------------------------------------------------------


def naive_outcome_keys(cfg: Config, max_steps: int):
    """All outcome keys reachable within max_steps, by brute-force DFS over
    raw configurations.  Returns (keys, truncated)."""
    keys = set()
    truncated = [False]

    def walk(c: Config, left: int) -> None:
        if is_val(c.threads[0]):
            keys.add(outcome_key(c.threads[0], c.heap))
        moves = []
        for i in range(len(c.threads)):
            r = thread_step(c, i)
            if isinstance(r, StepResult):
                moves.append(r)
        if not moves:
            return
        if left == 0:
            truncated[0] = True
            return
        for r in moves:
            walk(r.config, left - 1)

    walk(cfg, max_steps)
    return keys, truncated[0]


# ---------------------------------------------------------------------------
# Random first-order concurrent programs
# ---------------------------------------------------------------------------
#
# Only scalars flow: literals, arithmetic, comparisons, one or two integer or
# boolean cells, stores/loads/CAS on them, and forked stores.  Everything
# stays synthesizable, so reachable main-thread expressions re-check.


@dataclass
class GenEnv:
    int_vars: list
    bool_vars: list
    int_refs: list
    bool_refs: list


def gen_int(rng: random.Random, env: GenEnv, depth: int) -> Expr:
    opts = ["lit"]
    if env.int_vars:
        opts.append("var")
    if env.int_refs:
        opts.append("load")
    if depth > 0:
        opts += ["binop", "if"]
    k = rng.choice(opts)
    if k == "lit":
        return IntLit(rng.randint(-2, 3))
    if k == "var":
        return Var(rng.choice(env.int_vars))
    if k == "load":
        return Load(Var(rng.choice(env.int_refs)))
    if k == "binop":
        return BinOp(rng.choice("+-*"), gen_int(rng, env, depth - 1), gen_int(rng, env, depth - 1))
    return If(gen_bool(rng, env, depth - 1), gen_int(rng, env, depth - 1), gen_int(rng, env, depth - 1))


def gen_bool(rng: random.Random, env: GenEnv, depth: int) -> Expr:
    opts = ["lit"]
    if env.bool_vars:
        opts.append("var")
    if env.bool_refs:
        opts.append("load")
    if env.int_refs:
        opts.append("cas")
    if depth > 0:
        opts += ["cmp", "not"]
    k = rng.choice(opts)
    if k == "lit":
        return BoolLit(rng.random() < 0.5)
    if k == "var":
        return Var(rng.choice(env.bool_vars))
    if k == "load":
        return Load(Var(rng.choice(env.bool_refs)))
    if k == "cas":
        return Cas_(rng, env)
    if k == "cmp":
        op = rng.choice(["=", "<"])
        return BinOp(op, gen_int(rng, env, depth - 1), gen_int(rng, env, depth - 1))
    return UnOp("not", gen_bool(rng, env, depth - 1))


def Cas_(rng: random.Random, env: GenEnv) -> Expr:
    r = rng.choice(env.int_refs)
    return Cas(Var(r), IntLit(rng.randint(-1, 2)), IntLit(rng.randint(-1, 2)))


def gen_stmt(rng: random.Random, env: GenEnv, depth: int) -> Expr:
    opts = []
    if env.int_refs:
        opts += ["store_int", "fork_store"]
    if env.bool_refs:
        opts.append("store_bool")
    if not opts:
        return Unit()
    k = rng.choice(opts)
    if k == "store_int":
        return Store(Var(rng.choice(env.int_refs)), gen_int(rng, env, depth))
    if k == "store_bool":
        return Store(Var(rng.choice(env.bool_refs)), gen_bool(rng, env, depth))
    return Fork(Store(Var(rng.choice(env.int_refs)), gen_int(rng, env, 0)))


def gen_program(rng: random.Random, n_stmts: int, depth: int, want: str = "int") -> Expr:
    """A closed, well-typed, terminating first-order program."""
    env = GenEnv([], [], [], [])
    refs = []
    if rng.random() < 0.9:
        refs.append(("ri", Ref(IntLit(rng.randint(0, 2))), "int"))
    if rng.random() < 0.5:
        refs.append(("rb", Ref(BoolLit(rng.random() < 0.5)), "bool"))
    for name, _, kind in refs:
        (env.int_refs if kind == "int" else env.bool_refs).append(name)
    stmts = [gen_stmt(rng, env, depth) for _ in range(n_stmts)]
    body = gen_int(rng, env, depth) if want == "int" else gen_bool(rng, env, depth)
    for st in reversed(stmts):
        body = seq(st, body)
    for name, init, _ in reversed(refs):
        body = let_(name, init, body)
    return body


# ---------------------------------------------------------------------------
# Random types and the named-variable substitution oracle
# ---------------------------------------------------------------------------


def gen_type(rng: random.Random, depth: int, free: int) -> Type:
    opts = ["unit", "bool", "int"]
    if free > 0:
        opts.append("var")
    if depth > 0:
        opts += ["prod", "sum", "arrow", "ref", "forall", "exists", "mu"]
    k = rng.choice(opts)
    if k == "unit":
        return TUnit()
    if k == "bool":
        return TBool()
    if k == "int":
        return TInt()
    if k == "var":
        return TVar(rng.randrange(free))
    if k == "prod":
        return TProd(gen_type(rng, depth - 1, free), gen_type(rng, depth - 1, free))
    if k == "sum":
        return TSum(gen_type(rng, depth - 1, free), gen_type(rng, depth - 1, free))
    if k == "arrow":
        return TArrow(gen_type(rng, depth - 1, free), gen_type(rng, depth - 1, free))
    if k == "ref":
        return TRef(gen_type(rng, depth - 1, free))
    ctor = {"forall": TForall, "exists": TExists, "mu": TRec}[k]
    return ctor(gen_type(rng, depth - 1, free + 1))


@dataclass(frozen=True)
class NVar:
    name: str


@dataclass(frozen=True)
class NBind:
    kind: str  # "forall" | "exists" | "mu"
    name: str
    body: object


@dataclass(frozen=True)
class NCon:
    kind: str  # "unit" | "bool" | "int" | "proph"


@dataclass(frozen=True)
class NBin:
    kind: str  # "prod" | "sum" | "arrow"
    left: object
    right: object


@dataclass(frozen=True)
class NRef:
    elem: object


_BINDER_KINDS = {TForall: "forall", TExists: "exists", TRec: "mu"}


def to_named(t: Type, env: list):
    if isinstance(t, TVar):
        return NVar(env[t.idx])
    if isinstance(t, TUnit):
        return NCon("unit")
    if isinstance(t, TBool):
        return NCon("bool")
    if isinstance(t, TInt):
        return NCon("int")
    if isinstance(t, TProph):
        return NCon("proph")
    if isinstance(t, TProd):
        return NBin("prod", to_named(t.left, env), to_named(t.right, env))
    if isinstance(t, TSum):
        return NBin("sum", to_named(t.left, env), to_named(t.right, env))
    if isinstance(t, TArrow):
        return NBin("arrow", to_named(t.arg, env), to_named(t.res, env))
    if isinstance(t, TRef):
        return NRef(to_named(t.elem, env))
    kind = _BINDER_KINDS[type(t)]
    fresh = f"b{len(env)}_{id(t) % 9973}"
    return NBind(kind, fresh, to_named(t.body, [fresh] + env))


def named_free(t) -> set:
    if isinstance(t, NVar):
        return {t.name}
    if isinstance(t, NCon):
        return set()
    if isinstance(t, NBin):
        return named_free(t.left) | named_free(t.right)
    if isinstance(t, NRef):
        return named_free(t.elem)
    return named_free(t.body) - {t.name}


_fresh_counter = [0]


def _freshen() -> str:
    _fresh_counter[0] += 1
    return f"fr{_fresh_counter[0]}"


def named_rename(t, old: str, new: str):
    if isinstance(t, NVar):
        return NVar(new) if t.name == old else t
    if isinstance(t, NCon):
        return t
    if isinstance(t, NBin):
        return NBin(t.kind, named_rename(t.left, old, new), named_rename(t.right, old, new))
    if isinstance(t, NRef):
        return NRef(named_rename(t.elem, old, new))
    if t.name == old:
        return t
    return NBind(t.kind, t.name, named_rename(t.body, old, new))


def named_subst(t, name: str, repl):
    if isinstance(t, NVar):
        return repl if t.name == name else t
    if isinstance(t, NCon):
        return t
    if isinstance(t, NBin):
        return NBin(t.kind, named_subst(t.left, name, repl), named_subst(t.right, name, repl))
    if isinstance(t, NRef):
        return NRef(named_subst(t.elem, name, repl))
    if t.name == name:
        return t
    if t.name in named_free(repl):
        fresh = _freshen()
        return NBind(t.kind, fresh, named_subst(named_rename(t.body, t.name, fresh), name, repl))
    return NBind(t.kind, t.name, named_subst(t.body, name, repl))


_BINDER_CTORS = {"forall": TForall, "exists": TExists, "mu": TRec}
_CON_CTORS = {"unit": TUnit, "bool": TBool, "int": TInt, "proph": TProph}
_BIN_CTORS = {"prod": TProd, "sum": TSum, "arrow": TArrow}


def from_named(t, env: list) -> Type:
    if isinstance(t, NVar):
        return TVar(env.index(t.name))
    if isinstance(t, NCon):
        return _CON_CTORS[t.kind]()
    if isinstance(t, NBin):
        return _BIN_CTORS[t.kind](from_named(t.left, env), from_named(t.right, env))
    if isinstance(t, NRef):
        return TRef(from_named(t.elem, env))
    return _BINDER_CTORS[t.kind](from_named(t.body, [t.name] + env))


def named_type_subst_oracle(body: Type, arg: Type, free: int) -> Type:
    """Substitute index 0 of body by arg via the named route."""
    outer = [f"F{i}" for i in range(free)]
    named_body = to_named(body, ["SUB"] + outer)
    named_arg = to_named(arg, outer)
    named_out = named_subst(named_body, "SUB", named_arg)
    return from_named(named_out, outer)
