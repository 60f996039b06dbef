import random

import pytest

from generators import differential_instance, gen_configuration, gen_op_table, gen_path_expr
from reconfcheck.errors import ResourceCapExceeded
from reconfcheck.formulas import After, Always, Before, Event, Eventually, Termination
from reconfcheck.model import PortRef, config_equal
from reconfcheck.operations import IDEMPOTENT, NamedOp, Run, classify_idempotence, apply_op
from reconfcheck.oracle import (
    PathEnd,
    enumerate_prefixes,
    eval_on_path,
    event_holds_at,
    oracle_check,
)
from reconfcheck.paths import Alt, Op, Seq, compile_path
from reconfcheck.properties import BindingPresent, ComponentPresent, CpFalse, CpTrue
from reconfcheck.verdict import Status

CACHE = BindingPresent(PortRef("CacheHandler", "cache"), PortRef("RequestHandler", "getCache"))


def run_table(*names):
    return {name: NamedOp(name, (Run(),)) for name in names}


def test_enumerate_finite_sequence(httpd_config):
    table = run_table("a", "b", "run")
    auto = compile_path(Seq(Op("a"), Op("b")))
    paths = enumerate_prefixes(auto, httpd_config, table, 5)
    assert sorted(p.ops for p in paths) == [(), ("a",), ("a", "b")]
    assert all(config_equal(c, httpd_config) for p in paths for c in p.configs)


def test_enumerate_alternative(httpd_config):
    table = run_table("a", "b", "run")
    auto = compile_path(Alt(Op("a"), Op("b")))
    paths = enumerate_prefixes(auto, httpd_config, table, 1)
    assert sorted(p.ops for p in paths) == [(), ("a",), ("b",)]


def test_enumerate_depth_zero_is_singleton(httpd_config):
    table = run_table("a", "run")
    auto = compile_path(Op("a"))
    paths = enumerate_prefixes(auto, httpd_config, table, 0)
    assert len(paths) == 1
    assert paths[0].ops == ()
    assert config_equal(paths[0].configs[0], httpd_config)


def test_enumerate_example3_depth4(httpd_config, httpd_ops, example3_automaton):
    paths = enumerate_prefixes(example3_automaton, httpd_config, httpd_ops, 4)
    sequences = {p.ops for p in paths}
    assert ("run", "RemoveCacheHandler", "AddCacheHandler", "MemorySizeUp") in sequences


def test_enumerate_flags(httpd_config):
    table = run_table("a", "run")
    auto = compile_path(Op("a"))
    paths = enumerate_prefixes(auto, httpd_config, table, 5)
    by_ops = {p.ops: p for p in paths}
    assert by_ops[("a",)].end == PathEnd.DEAD_END
    assert by_ops[()].end == PathEnd.EXTENDABLE

    from reconfcheck.paths import Plus
    loop = compile_path(Plus(Op("a")))
    paths = enumerate_prefixes(loop, httpd_config, table, 5)
    assert any(p.end == PathEnd.CYCLE_STABILIZED for p in paths)


def test_enumerate_resource_cap(httpd_config):
    table = run_table("a", "b", "run")
    auto = compile_path(Alt(Seq(Op("a"), Op("a")), Op("b")))
    with pytest.raises(ResourceCapExceeded):
        enumerate_prefixes(auto, httpd_config, table, 4, cap=2)


def _fig2_path(httpd_config, httpd_ops, example3_automaton):
    labels = ["run", "RemoveCacheHandler", "AddCacheHandler", "MemorySizeUp", "run",
              "AddFileServer", "DurationValidityUp"]
    paths = enumerate_prefixes(example3_automaton, httpd_config, httpd_ops, len(labels))
    for p in paths:
        if list(p.ops) == labels:
            return p
    raise AssertionError("expected path not enumerated")


def test_eval_always_on_fig2_path(httpd_config, httpd_ops, example3_automaton):
    path = _fig2_path(httpd_config, httpd_ops, example3_automaton)
    assert not eval_on_path(Always(CACHE), path)


def test_eval_after_on_fig2_path(httpd_config, httpd_ops, example3_automaton):
    path = _fig2_path(httpd_config, httpd_ops, example3_automaton)
    event = Event("AddCacheHandler", Termination.NORMAL)
    assert eval_on_path(After(event, Always(CACHE)), path)


def test_eval_on_singleton_path(httpd_config):
    table = run_table("a", "run")
    auto = compile_path(Op("a"))
    path = enumerate_prefixes(auto, httpd_config, table, 0)[0]
    assert eval_on_path(Always(CACHE), path) == bool(
        eval_on_path(Eventually(CACHE), path))


def test_event_discrimination(httpd_config, httpd_ops):
    # AddCacheHandler fires once against a cache-less model (normal) and
    # once against a cache-present model (exceptional)
    labels = ["RemoveCacheHandler", "AddCacheHandler", "AddCacheHandler"]
    expr = Seq(Seq(Op("RemoveCacheHandler"), Op("AddCacheHandler")), Op("AddCacheHandler"))
    auto = compile_path(expr)
    paths = enumerate_prefixes(auto, httpd_config, httpd_ops, 3)
    path = max(paths, key=lambda p: len(p.ops))
    assert list(path.ops) == labels
    normal = Event("AddCacheHandler", Termination.NORMAL)
    exceptional = Event("AddCacheHandler", Termination.EXCEPTIONAL)
    terminates = Event("AddCacheHandler", Termination.TERMINATES)
    assert [i for i in range(4) if event_holds_at(path, i, normal)] == [2]
    assert [i for i in range(4) if event_holds_at(path, i, exceptional)] == [3]
    assert [i for i in range(4) if event_holds_at(path, i, terminates)] == [2, 3]


def test_oracle_check_worked_examples(httpd_config, httpd_ops, example3_automaton,
                                      example2_formula):
    ok = oracle_check(example2_formula, example3_automaton, httpd_config, httpd_ops, 12)
    assert ok.status == Status.TRUE
    bad = oracle_check(Always(CACHE), example3_automaton, httpd_config, httpd_ops, 12)
    assert bad.status == Status.FALSE
    assert bad.counterexample is not None


def test_oracle_eventually_run_loop(httpd_config):
    from reconfcheck.paths import Plus
    table = run_table("run")
    auto = compile_path(Plus(Op("run")))
    gone = Eventually(ComponentPresent("Nowhere"))
    verdict = oracle_check(gone, auto, httpd_config, table, 8)
    assert verdict.status == Status.FALSE
    here = Eventually(ComponentPresent("CacheHandler"))
    assert oracle_check(here, auto, httpd_config, table, 8).status == Status.TRUE


def test_prefix_monotonicity_of_always_after_before():
    rng = random.Random(909)
    checked = 0
    while checked < 120:
        config, table, expr, formula = differential_instance(rng)
        if isinstance(formula, Eventually) or (
                isinstance(formula, After) and _mentions_eventually(formula)):
            continue
        auto = compile_path(expr)
        try:
            paths = enumerate_prefixes(auto, config, table, 6, cap=3000)
        except ResourceCapExceeded:
            continue
        longest = max(paths, key=lambda p: len(p.ops))
        if eval_on_path(formula, longest):
            for cut in range(len(longest.ops) + 1):
                prefix = type(longest)(longest.configs[:cut + 1], longest.ops[:cut],
                                       longest.states[:cut + 1], PathEnd.EXTENDABLE)
                assert eval_on_path(formula, prefix)
        checked += 1


def _mentions_eventually(formula):
    from reconfcheck.formulas import mentions_eventually
    return mentions_eventually(formula)


def test_cycle_stabilization():
    rng = random.Random(910)
    checked = 0
    while checked < 60:
        config = gen_configuration(rng)
        table = gen_op_table(rng, config)
        expr = gen_path_expr(rng, sorted(table), max_operators=8)
        auto = compile_path(expr)
        if not auto.back_edges:
            continue
        # walk to a cycle, compose its word, and require idempotence of the
        # composition once the syntactic classifier vouches for it
        state, cfg = auto.initial, config
        seen = {}
        word = []
        for _ in range(2 * auto.n_states):
            seen[state] = len(word)
            outs = auto.outgoing(state)
            if not outs:
                break
            t = outs[0]
            word.append(t.label)
            cfg = apply_op(cfg, table[t.label])
            state = t.dst
            if state in seen:
                cycle = word[seen[state]:]
                steps = tuple(s for label in cycle for s in table[label].steps)
                composite = NamedOp("cycle", steps)
                if classify_idempotence(composite) == IDEMPOTENT:
                    once = apply_op(cfg, composite)
                    twice = apply_op(once, composite)
                    assert config_equal(once, twice)
                    checked += 1
                break
        else:
            continue


def test_product_strategy_agrees_with_enumeration():
    rng = random.Random(911)
    compared = 0
    while compared < 150:
        config, table, expr, formula = differential_instance(rng)
        auto = compile_path(expr)
        try:
            by_enum = oracle_check(formula, auto, config, table, 2 * auto.n_states,
                                   strategy="enumerate", cap=4000)
        except ResourceCapExceeded:
            continue
        if by_enum.approximate:
            continue
        by_product = oracle_check(formula, auto, config, table, 2 * auto.n_states,
                                  strategy="product")
        assert by_product.status == by_enum.status, (expr, formula)
        compared += 1
