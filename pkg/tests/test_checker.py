import random

import pytest

from generators import differential_instance, gen_configuration
from reconfcheck.checker import Mark, check
from reconfcheck.formulas import (
    After,
    Always,
    Before,
    Event,
    Eventually,
    Termination,
    parse_ftpl,
    term_check,
)
from reconfcheck.model import PortRef, config_equal
from reconfcheck.operations import Add, NamedOp, Run, SetParam, apply_op
from reconfcheck.oracle import oracle_check
from reconfcheck.paths import Alt, Op, Plus, Seq, compile_path
from reconfcheck.properties import (
    BindingPresent,
    ComponentPresent,
    CpFalse,
    CpOr,
    CpTrue,
    parse_cp,
)
from reconfcheck.verdict import NON_IDEMPOTENT_CYCLE, Status

CACHE = BindingPresent(PortRef("CacheHandler", "cache"), PortRef("RequestHandler", "getCache"))


def run_table(*names):
    return {name: NamedOp(name, (Run(),)) for name in names}


# ---------------------------------------------------------------------------
# event discrimination

def test_term_check(httpd_config, httpd_ops):
    removed = apply_op(httpd_config, httpd_ops["RemoveCacheHandler"])
    restored = apply_op(removed, httpd_ops["AddCacheHandler"])
    normal = Event("AddCacheHandler", Termination.NORMAL)
    exceptional = Event("AddCacheHandler", Termination.EXCEPTIONAL)
    terminates = Event("AddCacheHandler", Termination.TERMINATES)
    assert term_check(normal, restored, removed)
    assert not term_check(exceptional, restored, removed)
    # robust identity firing: adding the cache handler when it is present
    again = apply_op(restored, httpd_ops["AddCacheHandler"])
    assert term_check(exceptional, again, restored)
    assert not term_check(normal, again, restored)
    assert term_check(terminates, restored, removed)
    assert term_check(terminates, again, restored)


# ---------------------------------------------------------------------------
# worked verdicts

def test_example2_holds(httpd_config, httpd_ops, example3_automaton, example2_formula):
    verdict = check(example2_formula, example3_automaton, httpd_config, httpd_ops)
    assert verdict.status == Status.TRUE
    assert verdict.counterexample is None


def test_always_cache_connected_fails(httpd_config, httpd_ops, example3_automaton):
    verdict = check(Always(CACHE), example3_automaton, httpd_config, httpd_ops)
    assert verdict.status == Status.FALSE
    assert [op for op, _ in verdict.counterexample] == ["run", "RemoveCacheHandler"]


def test_counterexample_replay(httpd_config, httpd_ops, example3_automaton):
    verdict = check(Always(CACHE), example3_automaton, httpd_config, httpd_ops)
    config = httpd_config
    state = example3_automaton.initial
    for op, next_state in verdict.counterexample:
        matches = [t for t in example3_automaton.outgoing(state) if t.label == op]
        assert matches and matches[0].dst == next_state
        config = apply_op(config, httpd_ops[op])
        state = next_state
    from reconfcheck.properties import eval_cp
    assert not eval_cp(CACHE, config)


def test_after_remove_fails(httpd_config, httpd_ops, example3_automaton):
    formula = After(Event("RemoveCacheHandler", Termination.NORMAL), Always(CACHE))
    assert check(formula, example3_automaton, httpd_config, httpd_ops).status == Status.FALSE


def test_always_request_receiver_survives_cycles(httpd_config, httpd_ops, example3_automaton):
    formula = Always(ComponentPresent("RequestReceiver"))
    assert check(formula, example3_automaton, httpd_config, httpd_ops).status == Status.TRUE


def test_always_true(httpd_config, httpd_ops, example3_automaton):
    assert check(Always(CpTrue()), example3_automaton, httpd_config,
                 httpd_ops).status == Status.TRUE


def test_eventually_file_server(httpd_config, httpd_ops, example3_automaton):
    formula = Eventually(ComponentPresent("FileServer2"))
    assert check(formula, example3_automaton, httpd_config, httpd_ops).status == Status.TRUE


def test_eventually_false_on_run_loop(httpd_config):
    table = run_table("run")
    auto = compile_path(Plus(Op("run")))
    formula = Eventually(ComponentPresent("Nowhere"))
    verdict = check(formula, auto, httpd_config, table)
    assert verdict.status == Status.FALSE


def test_eventually_true_at_initial(httpd_config):
    table = run_table("run")
    auto = compile_path(Plus(Op("run")))
    formula = Eventually(ComponentPresent("CacheHandler"))
    assert check(formula, auto, httpd_config, table).status == Status.TRUE


def test_eventually_prefix_mode_collapses(httpd_config, httpd_ops, example3_automaton):
    formula = Eventually(ComponentPresent("FileServer2"))
    verdict = check(formula, example3_automaton, httpd_config, httpd_ops,
                    eventually="prefix")
    assert verdict.status == Status.FALSE  # not present initially
    formula2 = Eventually(ComponentPresent("CacheHandler"))
    assert check(formula2, example3_automaton, httpd_config, httpd_ops,
                 eventually="prefix").status == Status.TRUE


def test_vacuous_event_is_true(httpd_config, httpd_ops):
    auto = compile_path(Seq(Op("run"), Op("run")))
    formula = After(Event("RemoveCacheHandler", Termination.NORMAL), Always(CpFalse()))
    assert check(formula, auto, httpd_config, httpd_ops).status == Status.TRUE
    before = Before(Event("RemoveCacheHandler", Termination.NORMAL), Always(CpFalse()))
    assert check(before, auto, httpd_config, httpd_ops).status == Status.TRUE


def test_before_add_cache_handler_fails(httpd_config, httpd_ops, example3_automaton):
    formula = Before(Event("AddCacheHandler", Termination.NORMAL), Always(CACHE))
    verdict = check(formula, example3_automaton, httpd_config, httpd_ops)
    assert verdict.status == Status.FALSE


def test_before_remove_cache_handler_holds(httpd_config, httpd_ops):
    auto = compile_path(Seq(Op("run"), Op("RemoveCacheHandler")))
    formula = Before(Event("RemoveCacheHandler", Termination.NORMAL), Always(CACHE))
    assert check(formula, auto, httpd_config, httpd_ops).status == Status.TRUE


def test_after_repeated_events_checks_every_occurrence(httpd_config, httpd_ops):
    # RemoveCacheHandler fires normally twice; a file server exists for a
    # while after the first occurrence but never after the second, so the
    # formula is false although the first occurrence alone looks fine
    labels = ["RemoveCacheHandler", "AddFileServer", "DeleteFileServer",
              "AddCacheHandler", "RemoveCacheHandler"]
    expr = Op(labels[0])
    for label in labels[1:]:
        expr = Seq(expr, Op(label))
    auto = compile_path(expr)
    formula = After(Event("RemoveCacheHandler", Termination.NORMAL),
                    Eventually(ComponentPresent("FileServer2")))
    verdict = check(formula, auto, httpd_config, httpd_ops)
    oracle = oracle_check(formula, auto, httpd_config, httpd_ops, 2 * auto.n_states)
    assert verdict.status == oracle.status == Status.FALSE


# ---------------------------------------------------------------------------
# the flat-fragment gate

def test_or_formula_rejected(httpd_config, httpd_ops):
    auto = compile_path(Alt(Op("run"), Op("RemoveCacheHandler")))
    formula = Always(CpOr(CpTrue(), CpFalse()))
    verdict = check(formula, auto, httpd_config, httpd_ops)
    assert verdict.status == Status.REJECTED
    assert "'or'" in verdict.reason
    with pytest.raises(ValueError):
        verdict.value


def test_rejection_reaches_nested_properties(httpd_config, httpd_ops):
    auto = compile_path(Op("run"))
    inner = parse_cp("not component(X)")
    formula = After(Event("run", Termination.TERMINATES), Always(inner))
    assert check(formula, auto, httpd_config, httpd_ops).status == Status.REJECTED


def test_flat_formula_not_rejected(httpd_config, httpd_ops, httpd_defs):
    auto = compile_path(Op("run"))
    formula = parse_ftpl("always DeviationBounded", httpd_defs, httpd_ops)
    assert check(formula, auto, httpd_config, httpd_ops).status == Status.TRUE


# ---------------------------------------------------------------------------
# cycle guard and strict mode

def _bump_loop(httpd_config):
    table = {"run": NamedOp("run", (Run(),)),
             "Bump": NamedOp("Bump", (SetParam("CacheHandler", "memorySize", Add(50)),))}
    auto = compile_path(Plus(Op("Bump")))
    return table, auto


def test_non_idempotent_cycle_warning(httpd_config):
    table, auto = _bump_loop(httpd_config)
    verdict = check(Always(CpTrue()), auto, httpd_config, table)
    assert verdict.status == Status.TRUE
    assert any(w.code == NON_IDEMPOTENT_CYCLE for w in verdict.warnings)
    assert any(w.code == "NON_IDEMPOTENT_OP_ON_CYCLE" for w in verdict.warnings)


def test_strict_mode_rejects_unsound_cycles(httpd_config):
    table, auto = _bump_loop(httpd_config)
    verdict = check(Always(CpTrue()), auto, httpd_config, table, strict=True)
    assert verdict.status == Status.REJECTED
    assert "unsound" in verdict.reason


def test_idempotent_loop_stays_clean(httpd_config, httpd_ops):
    auto = compile_path(Plus(Op("run")))
    verdict = check(Always(CpTrue()), auto, httpd_config, httpd_ops)
    assert verdict.warnings == ()


# ---------------------------------------------------------------------------
# marking discipline

def test_visit_bounds_on_random_instances():
    rng = random.Random(321)
    for _ in range(150):
        config, table, expr, formula = differential_instance(rng)
        auto = compile_path(expr)
        verdict = check(formula, auto, config, table)
        if verdict.status == Status.REJECTED:
            continue
        for inst in verdict.stats["instances"]:
            bound = 1 if inst["kind"] in ("after", "always") else 2
            for state, count in inst["bodies"].items():
                assert count <= bound, (inst["kind"], state, count)


def test_after_chain_invariant(httpd_config, httpd_ops, example3_automaton):
    # every state strictly before the current one on the active chain is
    # marked again while the after-walk runs
    failures = []

    def after_entry(inst, state, chain):
        for earlier in chain[:-1]:
            if inst.marks.get(earlier) is not Mark.AGAIN:
                failures.append((earlier, state))

    formula = After(Event("AddCacheHandler", Termination.NORMAL), Always(CpTrue()))
    check(formula, example3_automaton, httpd_config, httpd_ops,
          hooks={"after_entry": after_entry})
    assert not failures


def test_linearity_bound_under_shared_marks():
    rng = random.Random(654)
    measured = 0
    while measured < 60:
        config, table, expr, _ = differential_instance(rng)
        auto = compile_path(expr)
        label = sorted({t.label for t in auto.transitions})[0]
        formula = After(Event(label, Termination.TERMINATES), Always(CpTrue()))
        verdict = check(formula, auto, config, table, marks="shared")
        total = verdict.stats["total_body_executions"]
        assert total <= 2 * auto.n_states + len(auto.transitions)
        measured += 1


# ---------------------------------------------------------------------------
# fresh vs shared mark tables

def test_shared_marks_can_miss_what_fresh_marks_catch():
    # searched deterministically: shared tables reuse checked marks across
    # launches with different configurations and can miss a violation;
    # fresh tables match the oracle and the witness guard flags the run
    rng = random.Random(555)
    for _ in range(2000):
        config, table, expr, formula = differential_instance(rng)
        auto = compile_path(expr)
        fresh = check(formula, auto, config, table, marks="fresh")
        shared = check(formula, auto, config, table, marks="shared")
        if fresh.status != shared.status:
            oracle = oracle_check(formula, auto, config, table, 2 * auto.n_states)
            assert fresh.status == oracle.status
            assert shared.warnings, "the guard must flag the unsound shared run"
            return
    raise AssertionError("expected a divergence within the search budget")


# ---------------------------------------------------------------------------
# differential agreement (the acceptance suite runs the full corpus)

def test_checker_matches_oracle_on_clean_instances():
    rng = random.Random(987)
    agreed = 0
    while agreed < 120:
        config, table, expr, formula = differential_instance(rng)
        auto = compile_path(expr)
        verdict = check(formula, auto, config, table)
        if verdict.status == Status.REJECTED or verdict.warnings:
            continue
        oracle = oracle_check(formula, auto, config, table, 2 * auto.n_states)
        assert verdict.status == oracle.status, (expr, formula)
        agreed += 1


def test_counterexample_present_iff_false():
    rng = random.Random(111)
    for _ in range(80):
        config, table, expr, formula = differential_instance(rng)
        auto = compile_path(expr)
        verdict = check(formula, auto, config, table)
        if verdict.status == Status.FALSE:
            assert verdict.counterexample is not None
        else:
            assert verdict.counterexample is None
