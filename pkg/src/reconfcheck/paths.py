"""Reconfiguration plans: operation regexes and their automata.

A plan is a regular expression over operation names. Its meaning is
prefix-closed (every prefix of a matched sequence is a possible evolution),
so the compiled automaton treats every state as accepting: a word is
recognized exactly when it labels a path from the initial state.

Compilation is the classic pipeline (Thompson construction, subset
construction, Moore minimization) adapted to prefix semantics, followed by a
breadth-first relabeling so state numbers, traces and DOT output are stable
across runs.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from collections import deque

from .errors import ParseError


@dataclass(frozen=True)
class Op:
    name: str


@dataclass(frozen=True)
class Seq:
    left: "PathExpr"
    right: "PathExpr"


@dataclass(frozen=True)
class Alt:
    left: "PathExpr"
    right: "PathExpr"


@dataclass(frozen=True)
class Opt:
    body: "PathExpr"


@dataclass(frozen=True)
class Star:
    body: "PathExpr"


@dataclass(frozen=True)
class Plus:
    body: "PathExpr"


PathExpr = Op | Seq | Alt | Opt | Star | Plus


@dataclass(frozen=True)
class Transition:
    src: int
    label: str
    dst: int


@dataclass(frozen=True)
class Automaton:
    """Deterministic, prefix-closed automaton with ordering metadata.

    All states accept; ``order`` is the strict partial order on states and
    ``back_edges`` the transitions that re-enter already-explored states
    (the sources of cycles). States are numbered breadth-first from the
    initial state 0 with children in label order.
    """

    n_states: int
    transitions: tuple[Transition, ...]
    initial: int = 0
    order: frozenset[tuple[int, int]] = frozenset()
    back_edges: frozenset[Transition] = frozenset()
    _out: dict[int, tuple[Transition, ...]] = field(default_factory=dict, compare=False,
                                                    repr=False)

    def outgoing(self, state: int) -> tuple[Transition, ...]:
        """Transitions leaving ``state``, sorted by label."""
        if not self._out:
            table: dict[int, list[Transition]] = {}
            for t in self.transitions:
                table.setdefault(t.src, []).append(t)
            for src, ts in table.items():
                self._out[src] = tuple(sorted(ts, key=lambda t: (t.label, t.dst)))
        return self._out.get(state, ())

    def precedes(self, a: int, b: int) -> bool:
        return (a, b) in self.order

    @property
    def labels(self) -> frozenset[str]:
        return frozenset(t.label for t in self.transitions)


# ---------------------------------------------------------------------------
# parsing
#
# identifiers separated by whitespace concatenate; '|' alternates; postfix
# ? * + bind tightest; parentheses group; '#' starts a line comment.

_PATH_TOKEN_RE = re.compile(r"\s+|#[^\n]*|[A-Za-z_][A-Za-z0-9_]*|[()|?*+]")


def _tokenize_path(text, source):
    tokens = []
    line, col = 1, 1
    pos = 0
    while pos < len(text):
        m = _PATH_TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line=line, column=col,
                             source=source)
        value = m.group()
        if not value.isspace() and not value.startswith("#"):
            tokens.append((value, line, col))
        newlines = value.count("\n")
        if newlines:
            line += newlines
            col = len(value) - value.rfind("\n")
        else:
            col += len(value)
        pos = m.end()
    return tokens


def parse_path(text: str, op_table: dict, *, source: str | None = None) -> PathExpr:
    """Parse a plan expression; every operation name must be in the table."""
    tokens = _tokenize_path(text, source)
    if not tokens:
        raise ParseError("empty path expression", source=source)
    pos = 0

    def peek():
        return tokens[pos][0] if pos < len(tokens) else None

    def take():
        nonlocal pos
        if pos >= len(tokens):
            raise ParseError("unexpected end of path expression", source=source)
        tok = tokens[pos]
        pos += 1
        return tok

    def alternation():
        expr = concatenation()
        while peek() == "|":
            take()
            expr = Alt(expr, concatenation())
        return expr

    def concatenation():
        expr = postfix()
        while peek() is not None and (peek() == "(" or peek() not in "|)?*+"):
            expr = Seq(expr, postfix())
        return expr

    def postfix():
        expr = atom()
        while peek() in ("?", "*", "+"):
            mark = take()[0]
            expr = {"?": Opt, "*": Star, "+": Plus}[mark](expr)
        return expr

    def atom():
        tok = take()
        value, line, col = tok
        if value == "(":
            expr = alternation()
            closing = take() if peek() == ")" else None
            if closing is None:
                raise ParseError("missing ')'", line=line, column=col, source=source)
            return expr
        if value in ")|?*+":
            raise ParseError(f"unexpected {value!r}", line=line, column=col, source=source)
        if value not in op_table:
            raise ParseError(f"unknown operation {value!r}", line=line, column=col,
                             source=source)
        return Op(value)

    expr = alternation()
    if pos < len(tokens):
        tok = tokens[pos]
        raise ParseError(f"unexpected {tok[0]!r}", line=tok[1], column=tok[2], source=source)
    return expr


# ---------------------------------------------------------------------------
# compilation

class _Nfa:
    def __init__(self):
        self.eps: list[set[int]] = []
        self.steps: list[dict[str, set[int]]] = []

    def new_state(self) -> int:
        self.eps.append(set())
        self.steps.append({})
        return len(self.eps) - 1

    def add_eps(self, a, b):
        self.eps[a].add(b)

    def add_step(self, a, label, b):
        self.steps[a].setdefault(label, set()).add(b)

    def closure(self, states) -> frozenset[int]:
        seen = set(states)
        todo = list(states)
        while todo:
            s = todo.pop()
            for t in self.eps[s]:
                if t not in seen:
                    seen.add(t)
                    todo.append(t)
        return frozenset(seen)


def _build_nfa(expr: PathExpr, nfa: _Nfa) -> tuple[int, int]:
    # Thompson fragments: returns (entry, exit)
    if isinstance(expr, Op):
        a, b = nfa.new_state(), nfa.new_state()
        nfa.add_step(a, expr.name, b)
        return a, b
    if isinstance(expr, Seq):
        a1, b1 = _build_nfa(expr.left, nfa)
        a2, b2 = _build_nfa(expr.right, nfa)
        nfa.add_eps(b1, a2)
        return a1, b2
    if isinstance(expr, Alt):
        a, b = nfa.new_state(), nfa.new_state()
        a1, b1 = _build_nfa(expr.left, nfa)
        a2, b2 = _build_nfa(expr.right, nfa)
        nfa.add_eps(a, a1)
        nfa.add_eps(a, a2)
        nfa.add_eps(b1, b)
        nfa.add_eps(b2, b)
        return a, b
    if isinstance(expr, (Opt, Star, Plus)):
        a, b = nfa.new_state(), nfa.new_state()
        a1, b1 = _build_nfa(expr.body, nfa)
        nfa.add_eps(a, a1)
        nfa.add_eps(b1, b)
        if isinstance(expr, (Opt, Star)):
            nfa.add_eps(a, b)
        if isinstance(expr, (Star, Plus)):
            nfa.add_eps(b1, a1)
        return a, b
    raise TypeError(f"unknown path node {expr!r}")


def compile_path(expr: PathExpr) -> Automaton:
    """Compile a plan into a deterministic prefix-closed automaton.

    Minimization runs on the classic word automaton (acceptance splits the
    initial partition), and prefix closure then makes every surviving state
    accepting. Merging only language-equal states keeps the initial state
    distinct from loop re-entries, so diagrams and traces stay readable.
    """
    nfa = _Nfa()
    entry, exit_state = _build_nfa(expr, nfa)

    # subset construction; every Thompson state reaches the exit, so every
    # subset is useful under prefix semantics and no trimming is needed
    initial = nfa.closure({entry})
    subsets = {initial: 0}
    accepting = {0: exit_state in initial}
    trans: dict[tuple[int, str], int] = {}
    todo = deque([initial])
    while todo:
        subset = todo.popleft()
        src = subsets[subset]
        by_label: dict[str, set[int]] = {}
        for s in subset:
            for label, targets in nfa.steps[s].items():
                by_label.setdefault(label, set()).update(targets)
        for label in sorted(by_label):
            target = nfa.closure(by_label[label])
            if target not in subsets:
                subsets[target] = len(subsets)
                accepting[subsets[target]] = exit_state in target
                todo.append(target)
            trans[(src, label)] = subsets[target]

    n = len(subsets)
    out: dict[int, dict[str, int]] = {i: {} for i in range(n)}
    for (src, label), dst in trans.items():
        out[src][label] = dst

    # Moore minimization on the partial DFA, seeded by word acceptance
    part = [1 if accepting[i] else 0 for i in range(n)]
    while True:
        signatures = {}
        new_part = [0] * n
        for s in range(n):
            sig = (part[s], tuple(sorted((label, part[d]) for label, d in out[s].items())))
            if sig not in signatures:
                signatures[sig] = len(signatures)
            new_part[s] = signatures[sig]
        if new_part == part:
            break
        part = new_part

    merged_out: dict[int, dict[str, int]] = {}
    for s in range(n):
        merged_out.setdefault(part[s], {}).update(
            {label: part[d] for label, d in out[s].items()})

    # breadth-first relabel from the initial state, children in label order
    bfs_id = {part[0]: 0}
    order_queue = deque([part[0]])
    while order_queue:
        s = order_queue.popleft()
        for label in sorted(merged_out.get(s, {})):
            d = merged_out[s][label]
            if d not in bfs_id:
                bfs_id[d] = len(bfs_id)
                order_queue.append(d)

    transitions = tuple(sorted(
        (Transition(bfs_id[s], label, bfs_id[d])
         for s, edges in merged_out.items() for label, d in edges.items()),
        key=lambda t: (t.src, t.label, t.dst)))
    automaton = Automaton(n_states=len(bfs_id), transitions=transitions)
    order, back = order_states(automaton)
    return Automaton(n_states=len(bfs_id), transitions=transitions, order=order,
                     back_edges=back)


def order_states(automaton: Automaton) -> tuple[frozenset[tuple[int, int]], frozenset[Transition]]:
    """Compute the strict state order and the back-edge set.

    A depth-first exploration from the initial state (children in label
    order) classifies a transition as a back edge when it returns to a state
    on the current chain. The order is the transitive closure of the
    remaining transitions; removing the back edges always leaves it acyclic,
    so the order is a strict partial order with the initial state below
    every other state.
    """
    back: set[Transition] = set()
    color: dict[int, str] = {}
    stack = [(automaton.initial, iter(automaton.outgoing(automaton.initial)))]
    color[automaton.initial] = "active"
    while stack:
        state, edges = stack[-1]
        advanced = False
        for t in edges:
            if color.get(t.dst) == "active":
                back.add(t)
            elif t.dst not in color:
                color[t.dst] = "active"
                stack.append((t.dst, iter(automaton.outgoing(t.dst))))
                advanced = True
                break
        if not advanced:
            color[state] = "done"
            stack.pop()

    forward: dict[int, set[int]] = {s: set() for s in range(automaton.n_states)}
    for t in automaton.transitions:
        if t not in back:
            forward[t.src].add(t.dst)

    order: set[tuple[int, int]] = set()
    for src in range(automaton.n_states):
        seen: set[int] = set()
        todo = list(forward[src])
        while todo:
            s = todo.pop()
            if s in seen:
                continue
            seen.add(s)
            todo.extend(forward[s])
        order.update((src, d) for d in seen)
    return frozenset(order), frozenset(back)


def emit_dot(automaton: Automaton) -> str:
    """Deterministic GraphViz rendering; back edges are dashed."""
    lines = ["digraph plan {", "  rankdir=LR;", '  node [shape=circle];',
             '  __start [shape=point];', f"  __start -> q{automaton.initial};"]
    for s in range(automaton.n_states):
        lines.append(f'  q{s} [label="q{s}"];')
    for t in automaton.transitions:
        style = ', style=dashed' if t in automaton.back_edges else ""
        lines.append(f'  q{t.src} -> q{t.dst} [label="{t.label}"{style}];')
    lines.append("}")
    return "\n".join(lines) + "\n"
