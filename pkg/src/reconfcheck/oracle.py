"""Brute-force reference semantics.

This module is the ground truth the marking checker is measured against. It
enumerates bounded evolution paths of an automaton and evaluates the
temporal definitions literally, index by index, with none of the marking
machinery. For inputs whose prefix set is too large to enumerate, an exact
product-space evaluation over (state, configuration) pairs computes the
same conjunction without materializing every path; the two strategies are
cross-checked against each other in the test suite.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .errors import ResourceCapExceeded
from .formulas import After, Always, Before, Event, Eventually, FtplFormula, term_check
from .model import Configuration, config_equal
from .operations import NamedOp, apply_op
from .paths import Automaton
from .properties import eval_cp
from .verdict import Status, Verdict

DEFAULT_PATH_CAP = 10 ** 6
ENUMERATION_LIMIT = 20_000  # auto strategy switches to product search above this


class PathEnd(str, Enum):
    DEAD_END = "dead-end"
    DEPTH = "truncated"
    CYCLE_STABILIZED = "cycle-stabilized"
    EXTENDABLE = "extendable"


@dataclass(frozen=True)
class EvolutionPath:
    """A finite evolution: configs c0..cn with the operations between them."""

    configs: tuple[Configuration, ...]
    ops: tuple[str, ...]
    states: tuple[int, ...]
    end: PathEnd

    def __post_init__(self):
        assert len(self.configs) == len(self.ops) + 1 == len(self.states)

    @property
    def maximal(self) -> bool:
        return self.end in (PathEnd.DEAD_END, PathEnd.CYCLE_STABILIZED)


def enumerate_prefixes(automaton: Automaton, initial: Configuration,
                       op_table: dict[str, NamedOp], max_len: int, *,
                       cap: int = DEFAULT_PATH_CAP,
                       stop_on_stabilize: bool = False) -> list[EvolutionPath]:
    """All automaton paths from the initial state of length at most max_len.

    Includes the empty path. Each path carries a flag describing how it
    ends: at a dead-end state, truncated at the depth bound, stabilized (its
    last state/configuration pair already occurred earlier, so iterating the
    cycle adds nothing new), or merely extendable.
    """
    out: list[EvolutionPath] = []

    def emit(path):
        out.append(path)
        if len(out) > cap:
            raise ResourceCapExceeded(
                f"more than {cap} path prefixes at depth {max_len}")

    def extend(states, configs, ops, keys):
        state = states[-1]
        transitions = automaton.outgoing(state)
        key = (state, keys[-1])
        stabilized = key in list(zip(states[:-1], keys[:-1]))
        if not transitions:
            end = PathEnd.DEAD_END
        elif stabilized:
            end = PathEnd.CYCLE_STABILIZED
        elif len(ops) >= max_len:
            end = PathEnd.DEPTH
        else:
            end = PathEnd.EXTENDABLE
        emit(EvolutionPath(tuple(configs), tuple(ops), tuple(states), end))
        if end in (PathEnd.DEAD_END, PathEnd.DEPTH):
            return
        if stabilized and stop_on_stabilize:
            return
        if len(ops) >= max_len:
            return
        for t in transitions:
            nxt = apply_op(configs[-1], op_table[t.label])
            extend(states + [t.dst], configs + [nxt], ops + [t.label],
                   keys + [nxt.canonical()])

    extend([automaton.initial], [initial], [], [initial.canonical()])
    return out


def event_holds_at(path: EvolutionPath, i: int, event: Event) -> bool:
    """Does the event hold at index i of the path (literal definition)?"""
    if i <= 0 or i >= len(path.configs):
        return False
    if path.ops[i - 1] != event.op:
        return False
    return term_check(event, path.configs[i], path.configs[i - 1])


def eval_on_path(formula: FtplFormula, path: EvolutionPath) -> bool:
    """Literal index-wise evaluation of the temporal definitions."""
    if isinstance(formula, Always):
        return all(eval_cp(formula.prop, c) for c in path.configs)
    if isinstance(formula, Eventually):
        return any(eval_cp(formula.prop, c) for c in path.configs)
    if isinstance(formula, After):
        for i in range(len(path.configs)):
            if event_holds_at(path, i, formula.event):
                suffix = EvolutionPath(path.configs[i:], path.ops[i:], path.states[i:],
                                       path.end)
                if not eval_on_path(formula.body, suffix):
                    return False
        return True
    if isinstance(formula, Before):
        for i in range(1, len(path.configs)):
            if event_holds_at(path, i, formula.event):
                segment = EvolutionPath(path.configs[:i], path.ops[:i - 1],
                                        path.states[:i], PathEnd.EXTENDABLE)
                if not eval_on_path(formula.trace, segment):
                    return False
        return True
    raise TypeError(f"unknown temporal node {formula!r}")


def _mentions_eventually(formula: FtplFormula) -> bool:
    from .formulas import mentions_eventually
    return mentions_eventually(formula)


def oracle_check(formula: FtplFormula, automaton: Automaton, initial: Configuration,
                 op_table: dict[str, NamedOp], max_len: int, *,
                 eventually_mode: str = "maximal", cap: int = DEFAULT_PATH_CAP,
                 strategy: str = "auto") -> Verdict:
    """Ground-truth verdict: conjunction of the literal evaluation over the
    denoted path set.

    In maximal mode the conjunction for eventually-properties ranges over
    maximal (dead-end or cycle-stabilized) paths only; in prefix mode every
    prefix counts, which collapses a bare eventually to its value at the
    initial configuration.
    """
    if strategy not in ("auto", "enumerate", "product"):
        raise ValueError(f"unknown oracle strategy {strategy!r}")
    if strategy in ("auto", "enumerate"):
        limit = min(cap, ENUMERATION_LIMIT) if strategy == "auto" else cap
        try:
            return _check_by_enumeration(formula, automaton, initial, op_table, max_len,
                                         eventually_mode, limit)
        except ResourceCapExceeded:
            if strategy == "enumerate":
                raise
    return _check_by_product(formula, automaton, initial, op_table, max_len,
                             eventually_mode, cap)


def _check_by_enumeration(formula, automaton, initial, op_table, max_len,
                          eventually_mode, cap) -> Verdict:
    needs_maximal = eventually_mode == "maximal" and _mentions_eventually(formula)
    paths = enumerate_prefixes(automaton, initial, op_table, max_len, cap=cap,
                               stop_on_stabilize=needs_maximal)
    approximate = False
    for path in paths:
        if needs_maximal:
            if not path.maximal:
                if path.end == PathEnd.DEPTH:
                    approximate = True
                continue
        if not eval_on_path(formula, path):
            trace = tuple(zip(path.ops, path.states[1:]))
            return Verdict(Status.FALSE, counterexample=trace, bound=max_len,
                           approximate=False, stats={"paths": len(paths)})
    if not needs_maximal and any(p.end == PathEnd.DEPTH for p in paths):
        approximate = True
    return Verdict(Status.TRUE, bound=max_len, approximate=approximate,
                   stats={"paths": len(paths)})


# ---------------------------------------------------------------------------
# product-space evaluation
#
# Nodes are (automaton state, configuration) pairs; edges apply one
# operation. On systems whose cycles leave configurations alone after one
# round this unfolding is finite and the verdict is exact; the node cap
# guards everything else and flags the verdict approximate.

class _Product:
    def __init__(self, automaton, op_table, cap):
        self.automaton = automaton
        self.op_table = op_table
        self.cap = cap
        self.configs: dict = {}      # canonical key -> Configuration
        self.succ: dict = {}         # (state, key) -> tuple of (label, state, key)
        self.parent: dict = {}       # (state, key) -> ((state, key), label) or None
        self.hit_cap = False

    def key_of(self, config):
        key = config.canonical()
        self.configs.setdefault(key, config)
        return key

    def successors(self, node):
        if node in self.succ:
            return self.succ[node]
        state, key = node
        config = self.configs[key]
        edges = []
        for t in self.automaton.outgoing(state):
            nxt = apply_op(config, self.op_table[t.label])
            edges.append((t.label, t.dst, self.key_of(nxt)))
        self.succ[node] = tuple(edges)
        return self.succ[node]

    def explore_from(self, node):
        """All product nodes reachable from ``node`` (inclusive), BFS order."""
        seen = [node]
        seen_set = {node}
        if node not in self.parent:
            self.parent[node] = None
        i = 0
        while i < len(seen):
            current = seen[i]
            i += 1
            for label, state, key in self.successors(current):
                child = (state, key)
                if child not in seen_set:
                    seen_set.add(child)
                    seen.append(child)
                    self.parent.setdefault(child, (current, label))
                    if len(self.parent) > self.cap:
                        self.hit_cap = True
                        raise ResourceCapExceeded(
                            f"product search exceeded {self.cap} nodes")
        return seen

    def trace_to(self, node):
        steps = []
        while self.parent.get(node):
            (prev, label) = self.parent[node]
            steps.append((label, node[0]))
            node = prev
        return tuple(reversed(steps))


def _check_by_product(formula, automaton, initial, op_table, max_len,
                      eventually_mode, cap) -> Verdict:
    product = _Product(automaton, op_table, cap)
    start = (automaton.initial, product.key_of(initial))
    product.parent[start] = None
    violation = _product_eval(formula, product, start, eventually_mode, {})
    if violation is None:
        return Verdict(Status.TRUE, bound=max_len, approximate=False,
                       stats={"product_nodes": len(product.parent)})
    return Verdict(Status.FALSE, counterexample=violation, bound=max_len,
                   stats={"product_nodes": len(product.parent)})


def _product_eval(formula, product: _Product, node, eventually_mode, memo):
    """Returns None when the formula holds from ``node``, else a trace."""
    memo_key = (id(formula), node)
    if memo_key in memo:
        return memo[memo_key]
    memo[memo_key] = None  # cycles assume success; real violations recurse finitely
    result = _product_eval_inner(formula, product, node, eventually_mode, memo)
    memo[memo_key] = result
    return result


def _product_eval_inner(formula, product, node, eventually_mode, memo):
    if isinstance(formula, Always):
        for reached in product.explore_from(node):
            config = product.configs[reached[1]]
            if not eval_cp(formula.prop, config):
                return product.trace_to(reached)
        return None

    if isinstance(formula, Eventually):
        if eventually_mode == "prefix":
            config = product.configs[node[1]]
            if eval_cp(formula.prop, config):
                return None
            return product.trace_to(node)
        return _product_eventually_maximal(formula, product, node)

    if isinstance(formula, After):
        for reached in product.explore_from(node):
            config = product.configs[reached[1]]
            for label, state, key in product.successors(reached):
                if label != formula.event.op:
                    continue
                target = (state, key)
                if not term_check(formula.event, product.configs[key], config):
                    continue
                inner = _product_eval(formula.body, product, target, eventually_mode, memo)
                if inner is not None:
                    # parent pointers are rooted at the global start, so the
                    # inner trace is already a full counterexample path
                    return inner
        return None

    if isinstance(formula, Before):
        return _product_before(formula, product, node, eventually_mode)

    raise TypeError(f"unknown temporal node {formula!r}")


def _product_eventually_maximal(formula, product, start):
    """False iff some maximal run from start never satisfies the property.

    Runs are explored over (state, configuration, seen-yet) triples; a
    dead-end or a completed cycle with the flag still false is a violating
    maximal run.
    """
    start_config = product.configs[start[1]]
    init_found = eval_cp(formula.prop, start_config)
    visited = set()
    on_stack = set()

    def dfs(node, found):
        key = (node, found)
        if key in on_stack and not found:
            return product.trace_to(node)  # cycle closed without the property
        if key in visited:
            return None
        if len(visited) > product.cap:
            raise ResourceCapExceeded(f"product search exceeded {product.cap} nodes")
        visited.add(key)
        on_stack.add(key)
        try:
            succ = product.successors(node)
            if not succ:
                return None if found else product.trace_to(node)
            for label, state, skey in succ:
                child = (state, skey)
                child_found = found or eval_cp(formula.prop, product.configs[skey])
                violation = dfs(child, child_found)
                if violation is not None:
                    return violation
            return None
        finally:
            on_stack.discard(key)

    return dfs(start, init_found)


def _product_before(formula, product, start, eventually_mode):
    is_always = isinstance(formula.trace, Always)
    prop = formula.trace.prop
    start_config = product.configs[start[1]]
    acc0 = eval_cp(prop, start_config)
    seen = {(start, acc0)}
    queue = [(start, acc0)]
    i = 0
    while i < len(queue):
        (node, acc) = queue[i]
        i += 1
        config = product.configs[node[1]]
        for label, state, key in product.successors(node):
            child = (state, key)
            child_config = product.configs[key]
            if label == formula.event.op and term_check(formula.event, child_config, config):
                if not acc:
                    return product.trace_to(child)
            child_cp = eval_cp(prop, child_config)
            acc2 = (acc and child_cp) if is_always else (acc or child_cp)
            if (child, acc2) not in seen:
                seen.add((child, acc2))
                queue.append((child, acc2))
                if len(seen) > product.cap:
                    raise ResourceCapExceeded(
                        f"product search exceeded {product.cap} nodes")
    return None
