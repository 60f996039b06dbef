"""Marking-based verification of temporal formulas over a plan automaton.

Each temporal operator is checked by a recursive walk over the automaton
that marks states as it goes, so cycles are cut off after bounded work:

* the after-walk marks states ``again`` and runs its body at most once per
  state, launching the inner checker wherever its event fires;
* the always-walk marks states ``checked``, evaluating the property on the
  configuration of every arrival but recursing only on the first;
* the before- and eventually-walks key their marks by (state, accumulator)
  and so run at most twice per state.

Marking trades path enumeration for linear work, which is sound only when
every state is reached with one configuration (idempotent cycles, no
diverging alternatives). The walks therefore record the first configuration
seen per state and compare every later arrival against it; a mismatch
raises a warning (an error under strict mode) instead of silently trusting
the assumption.
"""

from __future__ import annotations

import itertools
from collections import Counter
from dataclasses import dataclass, field
from enum import Enum

from .formulas import (
    After,
    Always,
    Before,
    Event,
    Eventually,
    FtplFormula,
    embedded_properties,
    term_check,
)
from .model import Configuration, config_equal
from .operations import (
    IDEMPOTENT,
    NON_IDEMPOTENT,
    NamedOp,
    apply_op,
    classify_idempotence,
)
from .paths import Automaton, Transition
from .properties import (
    CpAnd,
    CpFormula,
    CpNot,
    CpOr,
    Exists,
    Forall,
    eval_cp,
    is_cp_flat,
)
from .verdict import (
    JOIN_DIVERGENCE,
    NON_IDEMPOTENT_CYCLE,
    NON_IDEMPOTENT_OP_ON_CYCLE,
    UNKNOWN_IDEMPOTENCE_ON_CYCLE,
    Status,
    Verdict,
    Warning,
)


class Mark(Enum):
    UNCHECKED = "unchecked"
    AGAIN = "again"
    CHECKED = "checked"


@dataclass
class MarkTable:
    """Marks and first-visit configurations owned by one checker launch."""

    owner: int
    kind: str
    marks: dict = field(default_factory=dict)
    witness: dict[int, Configuration] = field(default_factory=dict)
    bodies: Counter = field(default_factory=Counter)
    on_stack: set = field(default_factory=set)
    chain: list = field(default_factory=list)

    def mark(self, key) -> Mark:
        return self.marks.get(key, Mark.UNCHECKED)


class _Run:
    def __init__(self, automaton, op_table, *, marks_mode, eventually_mode, hooks):
        self.automaton = automaton
        self.op_table = op_table
        self.marks_mode = marks_mode
        self.eventually_mode = eventually_mode
        self.hooks = hooks or {}
        self.warnings: list[Warning] = []
        self._warned: set = set()
        self.instances: list[MarkTable] = []
        self._shared: dict = {}
        self._ids = itertools.count()
        self.trace: list[tuple[str, int]] = []
        self.counterexample: tuple[tuple[str, int], ...] | None = None

    def instance(self, kind: str, node) -> MarkTable:
        if self.marks_mode == "shared":
            key = (kind, id(node))
            if key not in self._shared:
                self._shared[key] = self._new_instance(kind)
            return self._shared[key]
        return self._new_instance(kind)

    def _new_instance(self, kind):
        inst = MarkTable(owner=next(self._ids), kind=kind)
        self.instances.append(inst)
        return inst

    def warn(self, code, message, dedupe_key):
        if (code, dedupe_key) in self._warned:
            return
        self._warned.add((code, dedupe_key))
        self.warnings.append(Warning(code, message))

    def observe_arrival(self, inst: MarkTable, t: Transition, config: Configuration):
        """The witness guard: every arrival must match the first one."""
        witness = inst.witness.get(t.dst)
        if witness is None or config_equal(witness, config):
            return
        if t in self.automaton.back_edges:
            self.warn(NON_IDEMPOTENT_CYCLE,
                      f"cycle through q{t.dst} (via {t.label}) re-enters with a "
                      f"different configuration; the cycle is not idempotent", t)
        else:
            self.warn(JOIN_DIVERGENCE,
                      f"state q{t.dst} (via {t.label}) is reached with diverging "
                      f"configurations; marking may be unsound here", t)

    def capture(self):
        if self.counterexample is None:
            self.counterexample = tuple(self.trace)

    # -- checking walks ----------------------------------------------------

    def launch(self, formula: FtplFormula, q: int, c: Configuration) -> bool:
        if isinstance(formula, Always):
            inst = self.instance("always", formula)
            inst.witness.setdefault(q, c)
            return self._check_always(inst, formula.prop, q, c)
        if isinstance(formula, Eventually):
            if self.eventually_mode == "prefix":
                # every prefix counts, so the property must hold right here
                if eval_cp(formula.prop, c):
                    return True
                self.capture()
                return False
            inst = self.instance("eventually", formula)
            inst.witness.setdefault(q, c)
            return self._check_eventually(inst, formula.prop, q, c, False)
        if isinstance(formula, After):
            inst = self.instance("after", formula)
            inst.witness.setdefault(q, c)
            return self._check_after(inst, formula.event, formula.body, q, c)
        if isinstance(formula, Before):
            inst = self.instance("before", formula)
            inst.witness.setdefault(q, c)
            acc = eval_cp(formula.trace.prop, c)
            return self._check_before(inst, formula.event, formula.trace, q, c, acc)
        raise TypeError(f"unknown temporal node {formula!r}")

    def _check_after(self, inst, event: Event, body, q, c) -> bool:
        if inst.mark(q) is Mark.AGAIN:
            return True
        inst.marks[q] = Mark.AGAIN
        inst.witness.setdefault(q, c)
        inst.bodies[q] += 1
        inst.chain.append(q)
        hook = self.hooks.get("after_entry")
        if hook:
            hook(inst, q, tuple(inst.chain))
        try:
            for t in self.automaton.outgoing(q):
                c0 = apply_op(c, self.op_table[t.label])
                self.observe_arrival(inst, t, c0)
                self.trace.append((t.label, t.dst))
                try:
                    if t.label == event.op and term_check(event, c0, c):
                        # the event fired: check the body over this suffix,
                        # then keep scanning for later occurrences of the
                        # event beyond it
                        if not self.launch(body, t.dst, c0):
                            return False
                    if not self._check_after(inst, event, body, t.dst, c0):
                        return False
                finally:
                    self.trace.pop()
            return True
        finally:
            inst.chain.pop()

    def _check_always(self, inst, prop: CpFormula, q, c) -> bool:
        if not eval_cp(prop, c):
            self.capture()
            return False
        if inst.mark(q) is Mark.CHECKED:
            return True
        inst.marks[q] = Mark.CHECKED
        inst.witness.setdefault(q, c)
        inst.bodies[q] += 1
        for t in self.automaton.outgoing(q):
            c0 = apply_op(c, self.op_table[t.label])
            self.observe_arrival(inst, t, c0)
            self.trace.append((t.label, t.dst))
            try:
                if not self._check_always(inst, prop, t.dst, c0):
                    return False
            finally:
                self.trace.pop()
        return True

    def _check_before(self, inst, event: Event, trace, q, c, acc: bool) -> bool:
        key = (q, acc)
        if inst.mark(key) is Mark.CHECKED:
            return True
        inst.marks[key] = Mark.CHECKED
        inst.witness.setdefault(q, c)
        inst.bodies[q] += 1
        is_always = isinstance(trace, Always)
        for t in self.automaton.outgoing(q):
            c0 = apply_op(c, self.op_table[t.label])
            self.observe_arrival(inst, t, c0)
            self.trace.append((t.label, t.dst))
            try:
                if t.label == event.op and term_check(event, c0, c):
                    # the prefix before this event must satisfy the trace
                    # property, and that is exactly the accumulator
                    if not acc:
                        self.capture()
                        return False
                here = eval_cp(trace.prop, c0)
                acc0 = (acc and here) if is_always else (acc or here)
                if not self._check_before(inst, event, trace, t.dst, c0, acc0):
                    return False
            finally:
                self.trace.pop()
        return True

    def _check_eventually(self, inst, prop: CpFormula, q, c, found: bool) -> bool:
        found = found or eval_cp(prop, c)
        key = (q, found)
        if key in inst.on_stack and not found:
            # completed a cycle without ever satisfying the property: that
            # run never will
            self.capture()
            return False
        if inst.mark(key) is Mark.CHECKED:
            return True
        inst.marks[key] = Mark.CHECKED
        inst.witness.setdefault(q, c)
        inst.bodies[q] += 1
        inst.on_stack.add(key)
        try:
            transitions = self.automaton.outgoing(q)
            if not transitions:
                if found:
                    return True
                self.capture()
                return False
            for t in transitions:
                c0 = apply_op(c, self.op_table[t.label])
                self.observe_arrival(inst, t, c0)
                self.trace.append((t.label, t.dst))
                try:
                    if not self._check_eventually(inst, prop, t.dst, c0, found):
                        return False
                finally:
                    self.trace.pop()
            return True
        finally:
            inst.on_stack.discard(key)


def _flat_violation(prop: CpFormula) -> str | None:
    if is_cp_flat(prop):
        return None
    for node, label in ((CpOr, "'or'"), (CpNot, "'not'"), (Exists, "'exists'")):
        if _contains(prop, node):
            return label
    return "a non-flat connective"


def _contains(prop, node_type) -> bool:
    if isinstance(prop, node_type):
        return True
    if isinstance(prop, (CpAnd, CpOr)):
        return _contains(prop.left, node_type) or _contains(prop.right, node_type)
    if isinstance(prop, CpNot):
        return _contains(prop.body, node_type)
    if isinstance(prop, (Forall, Exists)):
        return _contains(prop.body, node_type)
    return False


def _cyclic_labels(automaton: Automaton) -> list[str]:
    reach: dict[int, set[int]] = {}
    for s in range(automaton.n_states):
        seen: set[int] = set()
        todo = [t.dst for t in automaton.outgoing(s)]
        while todo:
            x = todo.pop()
            if x in seen:
                continue
            seen.add(x)
            todo.extend(t.dst for t in automaton.outgoing(x))
        reach[s] = seen
    labels = {t.label for t in automaton.transitions if t.src in reach[t.dst] or t.src == t.dst}
    return sorted(labels)


def check(formula: FtplFormula, automaton: Automaton, initial: Configuration,
          op_table: dict[str, NamedOp], *, marks: str = "fresh",
          eventually: str = "maximal", strict: bool = False,
          hooks: dict | None = None) -> Verdict:
    """Check a temporal formula over every evolution the automaton denotes.

    Properties outside the flat fragment are rejected outright (the marking
    method gives wrong answers on them), never answered with a boolean.
    """
    if marks not in ("fresh", "shared"):
        raise ValueError(f"unknown marks mode {marks!r}")
    if eventually not in ("maximal", "prefix"):
        raise ValueError(f"unknown eventually mode {eventually!r}")

    for prop in embedded_properties(formula):
        offender = _flat_violation(prop)
        if offender:
            return Verdict(
                Status.REJECTED,
                reason=f"property uses {offender}, outside the flat fragment "
                       "(atoms, 'and' and 'forall' only) that the marking "
                       "checker answers soundly; use the oracle for full "
                       "first-order properties")

    run = _Run(automaton, op_table, marks_mode=marks, eventually_mode=eventually,
               hooks=hooks)
    for label in _cyclic_labels(automaton):
        verdict = classify_idempotence(op_table[label])
        if verdict == NON_IDEMPOTENT:
            run.warn(NON_IDEMPOTENT_OP_ON_CYCLE,
                     f"operation {label} on a cycle is not idempotent", label)
        elif verdict != IDEMPOTENT:
            run.warn(UNKNOWN_IDEMPOTENCE_ON_CYCLE,
                     f"operation {label} on a cycle has unknown idempotence", label)

    holds = run.launch(formula, automaton.initial, initial)

    stats = {
        "states": automaton.n_states,
        "transitions": len(automaton.transitions),
        "instances": [
            {"kind": inst.kind, "bodies": dict(inst.bodies)} for inst in run.instances
        ],
        "total_body_executions": sum(sum(i.bodies.values()) for i in run.instances),
    }
    warnings = tuple(run.warnings)
    if strict:
        errors = [w for w in warnings if w.code in (NON_IDEMPOTENT_CYCLE, JOIN_DIVERGENCE)]
        if errors:
            return Verdict(Status.REJECTED, warnings=warnings, stats=stats,
                           reason="unsound run: " + "; ".join(str(w) for w in errors))
    if holds:
        return Verdict(Status.TRUE, warnings=warnings, stats=stats)
    return Verdict(Status.FALSE, counterexample=run.counterexample or (),
                   warnings=warnings, stats=stats)
