import random

import pytest

from relcheck.corpus import PROGRAM_SOURCES
from relcheck.explorer import Bounds, explore_all
from relcheck.parser import parse_expr, parse_type
from relcheck.semantics import init_config
from relcheck.syntax import BoolLit, IntLit, TInt, TRef, TUnit, Unit
from relcheck.typecheck import (
    EMPTY_ENV,
    TypeCheckError,
    TypeEnv,
    check,
    synth,
    typecheck_context,
)

from helpers import gen_program


def ok_synth(src, expected):
    assert synth(EMPTY_ENV, parse_expr(src)) == parse_type(expected)


def ok_check(src, ty):
    check(EMPTY_ENV, parse_expr(src), parse_type(ty))


def bad(src, kind, ty=None):
    with pytest.raises(TypeCheckError) as exc:
        if ty is None:
            synth(EMPTY_ENV, parse_expr(src))
        else:
            check(EMPTY_ENV, parse_expr(src), parse_type(ty))
    assert exc.value.kind == kind, f"{src}: {exc.value.kind} != {kind}"


# ---------------------------------------------------------------------------
# One positive and one negative test per typing rule
# ---------------------------------------------------------------------------


def test_rule_var():
    env = TypeEnv(gamma={"x": TInt()})
    assert synth(env, parse_expr("x")) == TInt()
    bad("y", "UnboundVar")


def test_rule_literals():
    ok_synth("()", "unit")
    ok_synth("true", "bool")
    ok_synth("41", "int")
    bad("1", "Mismatch", ty="bool")


def test_rule_proj():
    ok_synth("π1 (1, true)", "int")
    ok_synth("π2 (1, true)", "bool")
    bad("π1 1", "Mismatch")


def test_rule_pair():
    ok_synth("(1, (true, ()))", "int * (bool * unit)")
    bad("(1, true)", "Mismatch", ty="int * int")


def test_rule_rec():
    ok_check("rec f x = if x < 1 then 0 else f (x - 1)", "int -> int")
    bad("λ x. x", "Mismatch", ty="int -> bool")
    bad("λ x. x", "NeedsAnnotation")  # introduction form in synthesis position


def test_rule_app():
    ok_synth("(λ x. x + 1 : int -> int) 2", "int")
    bad("1 2", "NotAFunction")


def test_rule_tlam():
    ok_check("Λ (λ x. x)", "forall a. a -> a")
    bad("Λ (λ x. 1)", "Mismatch", ty="forall a. a -> a")


def test_rule_tapp():
    # the instantiation is inferred by matching in checking mode
    ok_check("((Λ λ x. x : forall a. a -> a)) <>", "int -> int")
    # ... and synthesis is possible when the body ignores the variable
    ok_synth("((Λ 5 : forall a. int)) <>", "int")
    bad("((Λ λ x. x : forall a. a -> a)) <>", "NeedsAnnotation")
    bad("1 <>", "Mismatch")


def test_rule_pack():
    ok_check("pack (1, (λ n. 0 - n : int -> int))", "exists a. a * (a -> a)")
    bad("pack (1, (λ b. ¬b : bool -> bool))", "Mismatch", ty="exists a. a * (a -> a)")


def test_rule_unpack():
    ok_synth(
        "unpack (pack (1, (λ n. n + 1 : int -> int)) : exists a. a * (a -> a)) as p in 0",
        "int",
    )
    bad(
        "unpack (pack (1, (λ n. n + 1 : int -> int)) : exists a. a * (a -> a)) as p in π1 p",
        "EscapingTypeVar",
    )


def test_rule_fold_unfold():
    listty = "mu a. unit + (int * a)"
    ok_check("fold (inl ())", listty)
    ok_check("fold (inr (1, fold (inl ())))", listty)
    ok_synth(f"unfold (fold (inl ()) : {listty})", "unit + (int * (mu a. unit + (int * a)))")
    bad("fold 1", "Mismatch", ty=listty)
    bad("unfold 1", "Mismatch")


def test_rule_alloc():
    ok_synth("ref 0", "ref int")
    bad("ref x", "UnboundVar")


def test_rule_load():
    ok_synth("!(ref 0)", "int")
    bad("!1", "Mismatch")


def test_rule_store():
    ok_synth("ref 0 <- 1", "unit")
    bad("ref 0 <- true", "Mismatch")
    bad("1 <- 2", "Mismatch")


def test_rule_cas():
    ok_synth("CAS(ref 0, 0, 1)", "bool")
    ok_synth("let r = ref (ref 0) in CAS(r, !r, ref 1)", "bool")
    bad("CAS(ref (1, 2), (1, 2), (3, 4))", "EqTypeViolation")
    bad("CAS(ref 0, true, 1)", "Mismatch")


def test_rule_fork():
    ok_synth("fork { ref 0 <- 1 }", "unit")
    bad("fork { 1 }", "Mismatch")  # forked body must have type unit


def test_rule_if():
    ok_synth("if true then 1 else 2", "int")
    bad("if 1 then 1 else 2", "Mismatch")
    bad("if true then 1 else false", "Mismatch")


def test_rule_sum_match():
    ok_check("inl 1", "int + bool")
    ok_check("inr true", "int + bool")
    bad("inl true", "Mismatch", ty="int + bool")
    ok_synth("match (inl 1 : int + bool) with inl x -> x | inr b -> 0 end", "int")
    bad("match (inl 1 : int + bool) with inl x -> x | inr b -> b end", "Mismatch")
    bad("match 1 with inl x -> x | inr b -> b end", "Mismatch")


def test_rule_binop():
    ok_synth("1 + 2 * 3", "int")
    ok_synth("1 < 2", "bool")
    ok_synth("¬(true && false)", "bool")
    ok_synth("ref 0 = ref 0", "bool")  # references are comparable
    bad("1 + true", "Mismatch")
    bad("(1, 2) = (1, 2)", "EqTypeViolation")


def test_rule_proph():
    ok_synth("newproph", "proph")
    ok_synth("let p = newproph in resolve p true", "unit")
    bad("resolve 1 true", "Mismatch")
    bad("let p = newproph in resolve p (1, 2)", "EqTypeViolation")


def test_ascribe():
    ok_synth("(1 : int)", "int")
    bad("(1 : bool)", "Mismatch")


def test_let_propagates():
    ok_synth("let x = 1 in x + 1", "int")
    ok_check("let f = (λ x. x + 1 : int -> int) in f 3", "int")


# ---------------------------------------------------------------------------
# Corpus programs typecheck at their stated types
# ---------------------------------------------------------------------------


@pytest.mark.parametrize("name", sorted(PROGRAM_SOURCES))
def test_corpus_program_types(name):
    src, tysrc = PROGRAM_SOURCES[name]
    check(EMPTY_ENV, parse_expr(src), parse_type(tysrc))


def test_weakening_on_corpus():
    extra = TypeEnv(gamma={"unused_binding": TRef(TInt())})
    for name, (src, tysrc) in PROGRAM_SOURCES.items():
        check(extra, parse_expr(src), parse_type(tysrc))


# ---------------------------------------------------------------------------
# Context typing
# ---------------------------------------------------------------------------


def test_context_typing_distinguisher():
    ctx = parse_expr("let c = ref 0 in let f = [] in (fork { let u = f c in () }); f c")
    assert typecheck_context(EMPTY_ENV, ctx, parse_type("ref int -> int")) == TInt()


def test_context_typing_empty_and_mismatch():
    from relcheck.syntax import TBool

    assert typecheck_context(EMPTY_ENV, parse_expr("[]"), parse_type("bool")) == TBool()
    with pytest.raises(TypeCheckError) as exc:
        typecheck_context(EMPTY_ENV, parse_expr("if [] then 1 else true"), parse_type("bool"))
    assert exc.value.kind == "Mismatch"


def test_context_hole_under_binder_rejected():
    with pytest.raises(TypeCheckError) as exc:
        typecheck_context(
            EMPTY_ENV, parse_expr("let g = (λ x. [] : int -> int) in g 1"), parse_type("int")
        )
    assert exc.value.kind == "HoleUnderBinder"


def test_context_hole_count():
    with pytest.raises(TypeCheckError):
        typecheck_context(EMPTY_ENV, parse_expr("([] , [])"), parse_type("int"))
    with pytest.raises(TypeCheckError):
        typecheck_context(EMPTY_ENV, parse_expr("1"), parse_type("int"))


# ---------------------------------------------------------------------------
# Preservation under execution (sanity oracle for the whole pipeline)
# ---------------------------------------------------------------------------


def _value_type(v):
    if isinstance(v, IntLit):
        return TInt()
    if isinstance(v, BoolLit):
        from relcheck.syntax import TBool

        return TBool()
    if isinstance(v, Unit):
        return TUnit()
    raise AssertionError(f"unexpected stored value {v!r}")


def test_preservation_on_random_programs():
    rng = random.Random(99)
    checked = 0
    for _ in range(200):
        want = rng.choice(["int", "bool"])
        prog = gen_program(rng, n_stmts=rng.randint(0, 3), depth=2, want=want)
        ty = synth(EMPTY_ENV, prog)
        rep = explore_all(init_config(prog), Bounds(max_steps=200))
        assert rep.complete and not rep.stuck
        seen_configs = _reachable_configs(init_config(prog), limit=400)
        for cfg in seen_configs:
            loc_types = {l: _value_type(v) for l, v in cfg.heap.data.items()}
            env = TypeEnv(loc_types=loc_types)
            check(env, cfg.threads[0], ty)
            checked += 1
    assert checked > 200


def _reachable_configs(cfg, limit):
    from relcheck.explorer import canonicalize
    from relcheck.semantics import StepResult, thread_step

    seen = {canonicalize(cfg)}
    queue = [cfg]
    out = [cfg]
    while queue and len(out) < limit:
        c = queue.pop()
        for i in range(len(c.threads)):
            r = thread_step(c, i)
            if isinstance(r, StepResult):
                key = canonicalize(r.config)
                if key not in seen:
                    seen.add(key)
                    queue.append(r.config)
                    out.append(r.config)
    return out
