"""relcheck: a workbench for a typed concurrent language.

It bundles a bidirectional typechecker, a small-step thread-pool interpreter
with exhaustive interleaving exploration, and a bounded contextual-refinement
checker that matches demonic left executions against angelically searched
right executions, guided by a type-indexed value relation.
"""

from .explorer import Bounds, ExploreReport, Outcome, Tally, canonicalize, explore_all, search_outcome
from .parser import ParseError, parse_expr, parse_program, parse_type, pretty, pretty_type
from .refine import (
    CheckBounds,
    Counterexample,
    Inconclusive,
    NoCounterexample,
    Rel,
    check_ctx,
    check_equivalence,
    check_refinement,
    gen_related_args,
    relate_values,
)
from .semantics import (
    Config,
    Heap,
    StepResult,
    Stuck,
    enabled_threads,
    head_step,
    init_config,
    pure_step,
    replay,
    thread_step,
)
from .syntax import eq_type, fill, is_val, subst, type_subst
from .typecheck import EMPTY_ENV, TypeCheckError, TypeEnv, check, synth, typecheck_context

__all__ = [
    "Bounds", "ExploreReport", "Outcome", "Tally", "canonicalize", "explore_all",
    "search_outcome", "ParseError", "parse_expr", "parse_program", "parse_type",
    "pretty", "pretty_type", "CheckBounds", "Counterexample", "Inconclusive",
    "NoCounterexample", "Rel", "check_ctx", "check_equivalence", "check_refinement",
    "gen_related_args", "relate_values", "Config", "Heap", "StepResult", "Stuck",
    "enabled_threads", "head_step", "init_config", "pure_step", "replay",
    "thread_step", "eq_type", "fill", "is_val", "subst", "type_subst",
    "EMPTY_ENV", "TypeCheckError", "TypeEnv", "check", "synth", "typecheck_context",
]

__version__ = "0.1.0"
