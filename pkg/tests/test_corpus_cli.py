import json
import os

import pytest

from relcheck.cli import main, value_from_json, value_to_json
from relcheck.corpus import (
    CorpusEntry,
    ENTRIES,
    run_corpus,
    run_entry,
    typecheck_corpus_programs,
)
from relcheck.parser import parse_expr
from relcheck.semantics import init_config, replay
from relcheck.syntax import BoolLit, Fold, Inl, IntLit, Pair, Unit


def test_corpus_programs_typecheck():
    typecheck_corpus_programs()


def test_corpus_entry_names_unique():
    names = [e.name for e in ENTRIES]
    assert len(names) == len(set(names))


def test_run_corpus_filter():
    results = run_corpus("coin")
    assert len(results) == 4
    assert all(r.ok for r in results)


def test_corrupted_expectation_detected():
    entry = ENTRIES[0]
    wrong = CorpusEntry(
        entry.name, entry.mode, entry.left, entry.right, entry.type_source,
        "counterexample", witnesses=entry.witnesses,
    )
    assert not run_entry(wrong).ok


def test_workers_do_not_change_results():
    a = run_corpus("choice", workers=1)
    b = run_corpus("choice", workers=8)
    assert [(r.name, r.ok, [v.tag for v in r.verdicts]) for r in a] == [
        (r.name, r.ok, [v.tag for v in r.verdicts]) for r in b
    ]


# ---------------------------------------------------------------------------
# Value JSON codec
# ---------------------------------------------------------------------------


def test_value_json_roundtrip():
    for v in [Unit(), BoolLit(True), IntLit(-4), Pair(IntLit(1), BoolLit(False)),
              Inl(Unit()), Fold(Inl(Unit()))]:
        assert value_from_json(value_to_json(v)) == v


def test_closure_values_encode_opaquely():
    out = value_to_json(parse_expr("λ x. x"))
    assert "opaque" in out


# ---------------------------------------------------------------------------
# CLI commands
# ---------------------------------------------------------------------------


def _write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text, encoding="utf-8")
    return str(p)


def test_cli_typecheck_ok_and_expect(tmp_path, capsys):
    f = _write(tmp_path, "bit.rl",
               "#type: exists a. a * (a -> a) * (a -> bool)\n"
               "pack (true, (λ b. ¬b : bool -> bool), (λ b. b : bool -> bool))")
    assert main(["typecheck", f]) == 0
    assert main(["typecheck", f, "--expect", "exists a. a * (a -> a) * (a -> bool)"]) == 0
    capsys.readouterr()


def test_cli_typecheck_failures(tmp_path, capsys):
    bad = _write(tmp_path, "bad.rl", "CAS(ref (1, 2), (1, 2), (3, 4))")
    assert main(["typecheck", bad]) == 1
    assert "EqTypeViolation" in capsys.readouterr().err
    unbound = _write(tmp_path, "unbound.rl", "x + 1")
    assert main(["typecheck", unbound]) == 1
    assert "UnboundVar" in capsys.readouterr().err


def test_cli_run_all_and_one(tmp_path, capsys):
    f = _write(tmp_path, "rand.rl", "let y = ref false in (fork { y <- true }); !y")
    assert main(["run", f, "--all"]) == 0
    rep = json.loads(capsys.readouterr().out)
    assert rep["schema"] == 1 and rep["complete"] and rep["boundHit"] is None
    assert sorted(o["value"]["bool"] for o in rep["outcomes"]) == [False, True]
    # traces in the report replay
    e = parse_expr("let y = ref false in (fork { y <- true }); !y")
    for o in rep["outcomes"]:
        replay(init_config(e), tuple((i, tag) for i, tag in o["trace"]))

    assert main(["run", f, "--one"]) == 0
    rep = json.loads(capsys.readouterr().out)
    assert rep["outcome"] is not None


def test_cli_run_pure(tmp_path, capsys):
    f = _write(tmp_path, "pure.rl", "π1 (1, 2)")
    assert main(["run", f, "--one"]) == 0
    rep = json.loads(capsys.readouterr().out)
    assert rep["outcome"]["value"] == {"int": 1}


def test_cli_run_fuel_bound(tmp_path, capsys):
    f = _write(tmp_path, "grow.rl", "(rec f x = f (x + 1)) 0")
    assert main(["run", f, "--all", "--fuel", "50"]) == 0
    rep = json.loads(capsys.readouterr().out)
    assert rep["outcomes"] == [] and rep["boundHit"] == "steps" and not rep["complete"]


def test_cli_run_tight_loop_proves_divergence(tmp_path, capsys):
    # state-space closure detects the cycle: no outcomes, search complete
    f = _write(tmp_path, "div.rl", "(rec f x = f x) ()")
    assert main(["run", f, "--all", "--fuel", "50"]) == 0
    rep = json.loads(capsys.readouterr().out)
    assert rep["outcomes"] == [] and rep["complete"]


def test_cli_refine_with_witness(tmp_path, capsys):
    bit_bool = _write(tmp_path, "bit_bool.rl",
                      "pack (true, (λ b. ¬b : bool -> bool), (λ b. b : bool -> bool))")
    bit_nat = _write(tmp_path, "bit_nat.rl",
                     "pack (1, (λ n. if n = 0 then 1 else 0 : int -> int), (λ n. n = 1 : int -> bool))")
    rbit = _write(tmp_path, "rbit.json", json.dumps(
        {"name": "R", "pairs": [[{"bool": True}, {"int": 1}], [{"bool": False}, {"int": 0}]]}
    ))
    code = main(["refine", bit_bool, bit_nat,
                 "--type", "exists a. a * (a -> a) * (a -> bool)", "--witness", rbit])
    rep = json.loads(capsys.readouterr().out)
    assert code == 0
    assert rep["verdict"]["tag"] == "no-counterexample" and rep["verdict"]["complete"]


def test_cli_equiv(tmp_path, capsys):
    a = _write(tmp_path, "a.rl", "#type: int\n1 + 1")
    b = _write(tmp_path, "b.rl", "#type: int\n2")
    code = main(["equiv", a, b])
    rep = json.loads(capsys.readouterr().out)
    assert code == 0
    assert rep["forward"]["tag"] == "no-counterexample"
    assert rep["reverse"]["tag"] == "no-counterexample"


def test_cli_ctx_counterexample(tmp_path, capsys):
    from relcheck.corpus import DISTINGUISHING_CTX, INC_FINE, INC_NONATOMIC

    ctx = _write(tmp_path, "ctx.rl", DISTINGUISHING_CTX)
    left = _write(tmp_path, "left.rl", INC_NONATOMIC)
    right = _write(tmp_path, "right.rl", INC_FINE)
    code = main(["ctx", ctx, left, right, "--type", "ref int -> int",
                 "--mode", "true-adequate"])
    rep = json.loads(capsys.readouterr().out)
    assert code == 1
    assert rep["verdict"]["tag"] == "counterexample"
    assert rep["verdict"]["trace"]
    assert rep["verdict"]["rightComplete"]


def test_cli_corpus_filter_json(tmp_path, capsys):
    out = str(tmp_path / "report.json")
    code = main(["corpus", "--filter", "bit", "--json", out])
    capsys.readouterr()
    assert code == 0
    rep = json.loads(open(out).read())
    assert rep["schema"] == 1
    assert rep["summary"]["total"] == 2 and rep["summary"]["failed"] == 0
    for entry in rep["entries"]:
        assert set(entry) >= {"name", "expected", "verdicts", "ok", "wallTimeSec", "statesVisited"}


def test_cli_usage_error():
    assert main(["refine"]) == 2


def test_cli_missing_file():
    assert main(["typecheck", "/nonexistent/x.rl"]) == 2


def test_reloc_workers_env(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("RELOC_WORKERS", "8")
    code = main(["corpus", "--filter", "diverge-refines"])
    capsys.readouterr()
    assert code == 0


# ---------------------------------------------------------------------------
# Safety smoke test: typechecked corpus programs never get stuck
# ---------------------------------------------------------------------------


def test_typechecked_programs_never_stuck():
    from relcheck.corpus import DISTINGUISHING_CTX, LOCK_CLIENT_CTX, PROGRAM_SOURCES
    from relcheck.explorer import Bounds, explore_all
    from relcheck.syntax import plug_hole

    programs = [parse_expr(src) for src, _ in PROGRAM_SOURCES.values()]
    ctx = parse_expr(LOCK_CLIENT_CTX)
    programs += [
        plug_hole(ctx, parse_expr(PROGRAM_SOURCES[name][0]))
        for name in ("ticket-lock-module", "spin-lock-module")
    ]
    dctx = parse_expr(DISTINGUISHING_CTX)
    programs += [
        plug_hole(dctx, parse_expr(PROGRAM_SOURCES[name][0]))
        for name in ("inc-fine-fn", "inc-nonatomic-fn")
    ]
    for p in programs:
        rep = explore_all(p, Bounds(max_steps=2_000, max_configs=50_000))
        assert not rep.stuck
