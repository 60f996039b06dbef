"""Reconfiguration operations.

The five primitives (add/remove component, add/remove binding, set
parameter) plus ``run``. Every operation is total and robust: when it cannot
be performed on a configuration it behaves like the identity function, so
applying an operation never fails and never produces an invalid model.
Named operations compose primitives left to right.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace

from .errors import ParseError
from .model import (
    Binding,
    Component,
    Configuration,
    Delegation,
    Parameter,
    PortRef,
    Value,
    _component_from_json,
    _portref,
    config_equal,
    validate_config,
    with_component,
    without_component,
)

RUN_NAME = "run"


@dataclass(frozen=True)
class Const:
    """Assign a constant value (idempotent)."""

    value: Value


@dataclass(frozen=True)
class Add:
    """Increment an integer parameter (not idempotent)."""

    delta: int


ValueExpr = Const | Add


@dataclass(frozen=True)
class AddComponent:
    component: Component
    parent: str | None = None
    new_bindings: frozenset[Binding] = frozenset()
    new_delegations: frozenset[Delegation] = frozenset()


@dataclass(frozen=True)
class RemoveComponent:
    name: str


@dataclass(frozen=True)
class AddBinding:
    from_port: PortRef
    to_port: PortRef


@dataclass(frozen=True)
class RemoveBinding:
    from_port: PortRef
    to_port: PortRef


@dataclass(frozen=True)
class SetParam:
    component: str
    param: str
    expr: ValueExpr


@dataclass(frozen=True)
class Run:
    """The software executes; identity on the configuration."""


PrimitiveOp = AddComponent | RemoveComponent | AddBinding | RemoveBinding | SetParam | Run


@dataclass(frozen=True)
class NamedOp:
    name: str
    steps: tuple[PrimitiveOp, ...]

    def __post_init__(self):
        if not self.steps:
            raise ValueError("named operation needs at least one step")


RUN_OP = NamedOp(RUN_NAME, (Run(),))


def apply_primitive(config: Configuration, op: PrimitiveOp) -> Configuration:
    """Apply one primitive; identity when the operation cannot be performed."""
    result, _ = apply_primitive_explain(config, op)
    return result


def apply_primitive_explain(config: Configuration, op: PrimitiveOp):
    """Like apply_primitive but also reports whether anything changed."""
    if isinstance(op, Run):
        return config, False
    if isinstance(op, AddComponent):
        return _apply_add_component(config, op)
    if isinstance(op, RemoveComponent):
        if op.name not in config.components:
            return config, False
        return without_component(config, op.name), True
    if isinstance(op, AddBinding):
        return _apply_add_binding(config, Binding(op.from_port, op.to_port))
    if isinstance(op, RemoveBinding):
        binding = Binding(op.from_port, op.to_port)
        if binding not in config.bindings:
            return config, False
        return replace(config, bindings=config.bindings - {binding}), True
    if isinstance(op, SetParam):
        return _apply_set_param(config, op)
    raise TypeError(f"unknown primitive {op!r}")


def _apply_add_component(config, op: AddComponent):
    spec = op.component
    if spec.name in config.components:
        return config, False
    candidate = with_component(config, spec)
    if op.parent is not None:
        parent = candidate.component(op.parent)
        if parent is None:
            return config, False
        candidate = with_component(
            candidate, replace(parent, subcomponents=parent.subcomponents | {spec.name}))
    if validate_config(candidate):
        # the spec itself does not fit this configuration (missing
        # subcomponents, parent cannot become composite, ...)
        return config, False
    for binding in sorted(op.new_bindings, key=str):
        candidate, _ = _apply_add_binding(candidate, binding)
    for deleg in sorted(op.new_delegations, key=str):
        candidate = _apply_add_delegation(candidate, deleg)
    return candidate, True


def _apply_add_binding(config, binding: Binding):
    if binding in config.bindings:
        return config, False
    src = config.component(binding.from_port.component)
    dst = config.component(binding.to_port.component)
    if src is None or binding.from_port.port not in src.outputs:
        return config, False
    if dst is None or binding.to_port.port not in dst.inputs:
        return config, False
    if src.outputs[binding.from_port.port] != dst.inputs[binding.to_port.port]:
        return config, False
    return replace(config, bindings=config.bindings | {binding}), True


def _apply_add_delegation(config, deleg: Delegation):
    candidate = replace(config, delegations=config.delegations | {deleg})
    if validate_config(candidate):
        return config
    return candidate


def _apply_set_param(config, op: SetParam):
    comp = config.component(op.component)
    if comp is None:
        return config, False
    decl = comp.parameters.get(op.param)
    if decl is None:
        return config, False
    if isinstance(op.expr, Const):
        if op.expr.value.type != decl.type:
            return config, False
        new_value = op.expr.value
    else:
        if decl.type != "int":
            return config, False
        new_value = Value("int", decl.value.raw + op.expr.delta)
    params = dict(comp.parameters)
    params[op.param] = Parameter(decl.type, new_value)
    changed = new_value != decl.value
    return with_component(config, replace(comp, parameters=params)), changed


def apply_op(config: Configuration, op: NamedOp, *, step_log: list | None = None) -> Configuration:
    """Left fold of the primitives; total, result always validates.

    ``step_log`` (when given) receives one (step index, had effect) entry per
    primitive, the diagnostic channel behind --strict's no-effect reports.
    """
    current = config
    for i, step in enumerate(op.steps):
        current, changed = apply_primitive_explain(current, step)
        if step_log is not None:
            step_log.append((i, changed))
    return current


# ---------------------------------------------------------------------------
# idempotence classification

IDEMPOTENT = "idempotent"
NON_IDEMPOTENT = "non-idempotent"
UNKNOWN = "unknown"


def _step_targets(step: PrimitiveOp) -> frozenset:
    """Elements a step's effect or applicability depends on.

    Wider than the touched element alone: AddBinding applies only when its
    endpoint components exist, SetParam only when its component does, and an
    AddComponent spec applies only when its parent and declared
    subcomponents exist. Two steps sharing any target may not commute, so
    the conservative composite rule below refuses to call them idempotent.
    """
    if isinstance(step, Run):
        return frozenset()
    if isinstance(step, AddComponent):
        targets = {("component", step.component.name)}
        if step.parent is not None:
            targets.add(("component", step.parent))
        targets.update(("component", s) for s in step.component.subcomponents)
        targets.update(("binding", b.from_port, b.to_port) for b in step.new_bindings)
        targets.update(("delegation", d.outer, d.inner) for d in step.new_delegations)
        return frozenset(targets)
    if isinstance(step, RemoveComponent):
        return frozenset({("component", step.name)})
    if isinstance(step, AddBinding):
        return frozenset({("binding", step.from_port, step.to_port),
                          ("component", step.from_port.component),
                          ("component", step.to_port.component)})
    if isinstance(step, RemoveBinding):
        return frozenset({("binding", step.from_port, step.to_port)})
    if isinstance(step, SetParam):
        return frozenset({("param", step.component, step.param),
                          ("component", step.component)})
    raise TypeError(f"unknown primitive {step!r}")


def classify_idempotence(op: NamedOp) -> str:
    """Syntactic verdict: idempotent, non-idempotent, or unknown.

    Every primitive except an integer-increment SetParam is idempotent on
    its own. A composite is idempotent when all steps are and no two steps
    target the same element; any increment step makes it non-idempotent;
    everything else is unknown.
    """
    if any(isinstance(s, SetParam) and isinstance(s.expr, Add) for s in op.steps):
        return NON_IDEMPOTENT
    seen = set()
    for step in op.steps:
        targets = _step_targets(step)
        if targets & seen:
            return UNKNOWN
        seen |= targets
    return IDEMPOTENT


# ---------------------------------------------------------------------------
# operations file

def parse_ops(text: str, *, source: str | None = None) -> dict[str, NamedOp]:
    """Parse the JSON operations format into a name-keyed table.

    ``run`` is always registered; redefining it or repeating a name is an
    error.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc.msg}", line=exc.lineno, column=exc.colno,
                         source=source) from exc
    if not isinstance(doc, dict) or not isinstance(doc.get("operations", []), list):
        raise ParseError('operations file must be {"operations": [...]}', source=source)
    table = {RUN_NAME: RUN_OP}
    for i, odoc in enumerate(doc.get("operations", [])):
        where = f"operations[{i}]"
        if not isinstance(odoc, dict):
            raise ParseError(f"{where} must be an object", source=source)
        name = odoc.get("name")
        if not isinstance(name, str) or not name:
            raise ParseError(f"{where}.name must be a non-empty string", source=source)
        if name in table:
            raise ParseError(f"duplicate operation name {name!r}", source=source)
        steps_doc = odoc.get("steps")
        if not isinstance(steps_doc, list) or not steps_doc:
            raise ParseError(f"{where}.steps must be a non-empty array", source=source)
        steps = tuple(_step_from_json(s, f"{where}.steps[{j}]", source)
                      for j, s in enumerate(steps_doc))
        table[name] = NamedOp(name, steps)
    return table


def _step_from_json(doc, where, source) -> PrimitiveOp:
    if not isinstance(doc, dict):
        raise ParseError(f"{where} must be an object", source=source)
    kind = doc.get("kind")
    if kind == "run":
        return Run()
    if kind == "add-component":
        comp_doc = doc.get("component")
        if comp_doc is None:
            raise ParseError(f"{where} missing component", source=source)
        comp = _component_from_json(comp_doc, f"{where}.component", source)
        parent = doc.get("parent")
        if parent is not None and not isinstance(parent, str):
            raise ParseError(f"{where}.parent must be a string", source=source)
        bindings = frozenset(
            Binding(_portref(b, "from", f"{where}.bindings[{i}]", source),
                    _portref(b, "to", f"{where}.bindings[{i}]", source))
            for i, b in enumerate(doc.get("bindings", [])))
        delegations = frozenset(
            Delegation(_portref(d, "outer", f"{where}.delegations[{i}]", source),
                       _portref(d, "inner", f"{where}.delegations[{i}]", source))
            for i, d in enumerate(doc.get("delegations", [])))
        return AddComponent(comp, parent, bindings, delegations)
    if kind == "remove-component":
        name = doc.get("name")
        if not isinstance(name, str) or not name:
            raise ParseError(f"{where}.name must be a non-empty string", source=source)
        return RemoveComponent(name)
    if kind in ("add-binding", "remove-binding"):
        frm = _portref(doc, "from", where, source)
        to = _portref(doc, "to", where, source)
        return AddBinding(frm, to) if kind == "add-binding" else RemoveBinding(frm, to)
    if kind == "set-param":
        comp = doc.get("component")
        param = doc.get("param")
        if not isinstance(comp, str) or not isinstance(param, str):
            raise ParseError(f"{where} needs component and param strings", source=source)
        expr_doc = doc.get("expr")
        if not isinstance(expr_doc, dict) or len(expr_doc) != 1:
            raise ParseError(f'{where}.expr must be {{"const": v}} or {{"add": n}}',
                             source=source)
        if "const" in expr_doc:
            try:
                expr = Const(Value.from_json(expr_doc["const"]))
            except ValueError as exc:
                raise ParseError(f"{where}.expr: {exc}", source=source) from exc
        elif "add" in expr_doc:
            delta = expr_doc["add"]
            if not isinstance(delta, int) or isinstance(delta, bool):
                raise ParseError(f"{where}.expr.add must be an integer", source=source)
            expr = Add(delta)
        else:
            raise ParseError(f'{where}.expr must be {{"const": v}} or {{"add": n}}',
                             source=source)
        return SetParam(comp, param, expr)
    raise ParseError(f"{where}.kind {kind!r} is not a known operation kind", source=source)
