"""Component models (configurations) and their JSON form.

A configuration is a snapshot of an architecture: named components carrying
typed parameters and typed input/output ports, a set of bindings between an
output port and an input port of the same type, and delegation links between
a composite's ports and ports of its direct subcomponents.

Configurations are immutable values; every reconfiguration produces a new
one. Equality is set-semantics equality of the whole structure, insensitive
to any serialization order.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace

VALUE_TYPES = ("int", "bool", "string")


@dataclass(frozen=True)
class Value:
    """A typed scalar parameter value (int, bool or string)."""

    type: str
    raw: object

    def __post_init__(self):
        if self.type not in VALUE_TYPES:
            raise ValueError(f"unknown value type {self.type!r}")
        expected = {"int": int, "bool": bool, "string": str}[self.type]
        if self.type == "int" and isinstance(self.raw, bool):
            raise ValueError("bool is not an int value")
        if not isinstance(self.raw, expected):
            raise ValueError(f"value {self.raw!r} does not match type {self.type!r}")

    def compare(self, rel: str, other: "Value"):
        """Evaluate self REL other, or None when the comparison is undefined.

        Equality relations are defined for same-typed values only; ordering
        relations only for integers.
        """
        if self.type != other.type:
            return None
        if rel == "=":
            return self.raw == other.raw
        if rel == "!=":
            return self.raw != other.raw
        if self.type != "int":
            return None
        return {"<": self.raw < other.raw, "<=": self.raw <= other.raw,
                ">": self.raw > other.raw, ">=": self.raw >= other.raw}[rel]

    @staticmethod
    def from_json(raw) -> "Value":
        if isinstance(raw, bool):
            return Value("bool", raw)
        if isinstance(raw, int):
            return Value("int", raw)
        if isinstance(raw, str):
            return Value("string", raw)
        raise ValueError(f"unsupported parameter value {raw!r}")


@dataclass(frozen=True)
class PortRef:
    """A (component name, port name) pair naming one endpoint."""

    component: str
    port: str

    def __str__(self):
        return f"{self.component}.{self.port}"


@dataclass(frozen=True)
class Binding:
    """A connection from an output port to an input port of the same type."""

    from_port: PortRef
    to_port: PortRef

    def __str__(self):
        return f"{self.from_port} -> {self.to_port}"


@dataclass(frozen=True)
class Delegation:
    """A link from a composite's port to a same-direction port of a child."""

    outer: PortRef
    inner: PortRef

    def __str__(self):
        return f"{self.outer} => {self.inner}"


@dataclass(frozen=True)
class Parameter:
    type: str
    value: Value


@dataclass(frozen=True)
class Component:
    """One component: parameters, typed ports and (optionally) children.

    ``parameters``, ``inputs`` and ``outputs`` map names to declarations and
    must use pairwise-disjoint name sets. A component with subcomponents is
    composite and must not carry parameters of its own.
    """

    name: str
    cls: str
    parameters: dict[str, Parameter] = field(default_factory=dict)
    inputs: dict[str, str] = field(default_factory=dict)
    outputs: dict[str, str] = field(default_factory=dict)
    subcomponents: frozenset[str] = frozenset()

    def port_type(self, port: str):
        return self.outputs.get(port) or self.inputs.get(port)


@dataclass(frozen=True)
class Configuration:
    """An architecture snapshot: components keyed by name, bindings, delegations."""

    components: dict[str, Component] = field(default_factory=dict)
    bindings: frozenset[Binding] = frozenset()
    delegations: frozenset[Delegation] = frozenset()

    def component(self, name: str):
        return self.components.get(name)

    def canonical(self):
        """A hashable, order-normalized rendering; equal iff config_equal."""
        comps = tuple(
            (c.name, c.cls,
             tuple(sorted((p, d.type, d.value.type, d.value.raw) for p, d in c.parameters.items())),
             tuple(sorted(c.inputs.items())),
             tuple(sorted(c.outputs.items())),
             tuple(sorted(c.subcomponents)))
            for _, c in sorted(self.components.items()))
        binds = tuple(sorted((b.from_port.component, b.from_port.port,
                              b.to_port.component, b.to_port.port) for b in self.bindings))
        delegs = tuple(sorted((d.outer.component, d.outer.port,
                               d.inner.component, d.inner.port) for d in self.delegations))
        return (comps, binds, delegs)


def config_equal(a: Configuration, b: Configuration) -> bool:
    """Set-semantics equality of two configurations."""
    return a.canonical() == b.canonical()


# ---------------------------------------------------------------------------
# validation

def validate_config(config: Configuration) -> list[str]:
    """Check every structural invariant; return a list of violations (empty = ok)."""
    violations = []
    comps = config.components
    for name, comp in comps.items():
        if name != comp.name:
            violations.append(f"component keyed {name!r} is named {comp.name!r}")
        names = [*comp.parameters, *comp.inputs, *comp.outputs]
        if len(names) != len(set(names)):
            dupes = sorted({n for n in names if names.count(n) > 1})
            violations.append(
                f"component {name}: parameter/port name sets not disjoint: {', '.join(dupes)}")
        for pname, decl in comp.parameters.items():
            if decl.type != decl.value.type:
                violations.append(
                    f"component {name}: parameter {pname} declares {decl.type} "
                    f"but holds a {decl.value.type} value")
        if comp.subcomponents and comp.parameters:
            violations.append(f"composite component {name} has parameters")
        for sub in sorted(comp.subcomponents):
            if sub not in comps:
                violations.append(f"component {name} lists unknown subcomponent {sub}")

    cycle = _subcomponent_cycle(comps)
    if cycle:
        violations.append("subcomponent cycle: " + " -> ".join(cycle))

    for binding in sorted(config.bindings, key=str):
        frm, to = binding.from_port, binding.to_port
        src, dst = comps.get(frm.component), comps.get(to.component)
        if src is None or frm.port not in src.outputs:
            violations.append(f"binding {binding}: {frm} is not an existing output port")
            continue
        if dst is None or to.port not in dst.inputs:
            violations.append(f"binding {binding}: {to} is not an existing input port")
            continue
        if src.outputs[frm.port] != dst.inputs[to.port]:
            violations.append(
                f"binding type mismatch: {frm} is {src.outputs[frm.port]}, "
                f"{to} is {dst.inputs[to.port]}")

    for deleg in sorted(config.delegations, key=str):
        violations.extend(_check_delegation(comps, deleg))

    return violations


def _subcomponent_cycle(comps):
    # DFS for a cycle in the subcomponent DAG; returns the cycle path if any.
    state = {}
    stack = []

    def visit(name):
        state[name] = "active"
        stack.append(name)
        comp = comps.get(name)
        if comp:
            for sub in sorted(comp.subcomponents):
                if sub not in comps:
                    continue
                if state.get(sub) == "active":
                    return stack[stack.index(sub):] + [sub]
                if sub not in state:
                    found = visit(sub)
                    if found:
                        return found
        stack.pop()
        state[name] = "done"
        return None

    for name in sorted(comps):
        if name not in state:
            found = visit(name)
            if found:
                return found
    return None


def _check_delegation(comps, deleg: Delegation):
    outer_comp = comps.get(deleg.outer.component)
    inner_comp = comps.get(deleg.inner.component)
    if outer_comp is None or outer_comp.port_type(deleg.outer.port) is None:
        return [f"delegation {deleg}: {deleg.outer} is not an existing port"]
    if inner_comp is None or inner_comp.port_type(deleg.inner.port) is None:
        return [f"delegation {deleg}: {deleg.inner} is not an existing port"]
    if deleg.inner.component not in outer_comp.subcomponents:
        return [f"delegation {deleg}: {deleg.inner.component} is not a subcomponent "
                f"of {deleg.outer.component}"]
    out_is_input = deleg.outer.port in outer_comp.inputs
    in_is_input = deleg.inner.port in inner_comp.inputs
    if out_is_input != in_is_input:
        return [f"delegation {deleg}: ports have different directions"]
    if outer_comp.port_type(deleg.outer.port) != inner_comp.port_type(deleg.inner.port):
        return [f"delegation {deleg}: ports have different types"]
    return []


# ---------------------------------------------------------------------------
# JSON format

from .errors import ParseError  # noqa: E402  (kept after dataclasses for readability)


def parse_config(text: str, *, source: str | None = None) -> Configuration:
    """Parse the JSON model format.

    Rejects structurally malformed input (wrong keys, wrong JSON types,
    duplicate component names). Semantic violations are left to
    validate_config.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc.msg}", line=exc.lineno, column=exc.colno,
                         source=source) from exc
    return config_from_json(doc, source=source)


def config_from_json(doc, *, source=None) -> Configuration:
    _expect(isinstance(doc, dict), "model must be a JSON object", source)
    _reject_unknown(doc, {"components", "bindings", "delegations"}, "model", source)
    _expect("components" in doc, 'model missing "components" key', source)
    components = {}
    for i, cdoc in enumerate(_expect_list(doc["components"], "components", source)):
        comp = _component_from_json(cdoc, f"components[{i}]", source)
        _expect(comp.name not in components,
                f"duplicate component name {comp.name!r}", source)
        components[comp.name] = comp
    bindings = frozenset(
        Binding(_portref(b, "from", f"bindings[{i}]", source),
                _portref(b, "to", f"bindings[{i}]", source))
        for i, b in enumerate(_expect_list(doc.get("bindings", []), "bindings", source)))
    delegations = frozenset(
        Delegation(_portref(d, "outer", f"delegations[{i}]", source),
                   _portref(d, "inner", f"delegations[{i}]", source))
        for i, d in enumerate(_expect_list(doc.get("delegations", []), "delegations", source)))
    return Configuration(components=components, bindings=bindings, delegations=delegations)


def _component_from_json(doc, where, source) -> Component:
    _expect(isinstance(doc, dict), f"{where} must be an object", source)
    _reject_unknown(doc, {"name", "class", "parameters", "inputs", "outputs", "subcomponents"},
                    where, source)
    name = _expect_str(doc.get("name"), f"{where}.name", source)
    cls = _expect_str(doc.get("class"), f"{where}.class", source)
    parameters = {}
    for i, pdoc in enumerate(_expect_list(doc.get("parameters", []), f"{where}.parameters", source)):
        _expect(isinstance(pdoc, dict), f"{where}.parameters[{i}] must be an object", source)
        _reject_unknown(pdoc, {"name", "type", "value"}, f"{where}.parameters[{i}]", source)
        pname = _expect_str(pdoc.get("name"), f"{where}.parameters[{i}].name", source)
        ptype = _expect_str(pdoc.get("type"), f"{where}.parameters[{i}].type", source)
        _expect(ptype in VALUE_TYPES,
                f"{where}.parameters[{i}].type must be one of {', '.join(VALUE_TYPES)}", source)
        _expect("value" in pdoc, f"{where}.parameters[{i}] missing value", source)
        try:
            value = Value.from_json(pdoc["value"])
        except ValueError as exc:
            raise ParseError(f"{where}.parameters[{i}]: {exc}", source=source) from exc
        _expect(pname not in parameters, f"{where}: duplicate parameter {pname!r}", source)
        parameters[pname] = Parameter(ptype, value)
    inputs = _ports_from_json(doc.get("inputs", []), f"{where}.inputs", source)
    outputs = _ports_from_json(doc.get("outputs", []), f"{where}.outputs", source)
    subs = _expect_list(doc.get("subcomponents", []), f"{where}.subcomponents", source)
    for s in subs:
        _expect(isinstance(s, str), f"{where}.subcomponents entries must be strings", source)
    return Component(name=name, cls=cls, parameters=parameters, inputs=inputs,
                     outputs=outputs, subcomponents=frozenset(subs))


def _ports_from_json(docs, where, source):
    ports = {}
    for i, pdoc in enumerate(_expect_list(docs, where, source)):
        _expect(isinstance(pdoc, dict), f"{where}[{i}] must be an object", source)
        _reject_unknown(pdoc, {"name", "type"}, f"{where}[{i}]", source)
        pname = _expect_str(pdoc.get("name"), f"{where}[{i}].name", source)
        ptype = _expect_str(pdoc.get("type"), f"{where}[{i}].type", source)
        _expect(pname not in ports, f"{where}: duplicate port {pname!r}", source)
        ports[pname] = ptype
    return ports


def _portref(doc, key, where, source) -> PortRef:
    _expect(isinstance(doc, dict), f"{where} must be an object", source)
    ref = doc.get(key)
    _expect(isinstance(ref, dict), f"{where}.{key} must be an object", source)
    _reject_unknown(ref, {"component", "port"}, f"{where}.{key}", source)
    return PortRef(_expect_str(ref.get("component"), f"{where}.{key}.component", source),
                   _expect_str(ref.get("port"), f"{where}.{key}.port", source))


def _expect(cond, message, source):
    if not cond:
        raise ParseError(message, source=source)


def _reject_unknown(doc, allowed, where, source):
    unknown = sorted(set(doc) - allowed)
    if unknown:
        raise ParseError(f"{where} has unknown keys: {', '.join(unknown)}", source=source)


def _expect_str(value, where, source) -> str:
    _expect(isinstance(value, str) and value, f"{where} must be a non-empty string", source)
    return value


def _expect_list(value, where, source) -> list:
    _expect(isinstance(value, list), f"{where} must be an array", source)
    return value


def serialize_config(config: Configuration) -> str:
    """Render the canonical JSON form (sorted, round-trips via parse_config)."""
    return json.dumps(config_to_json(config), indent=2) + "\n"


def config_to_json(config: Configuration):
    return {
        "components": [
            {
                "name": c.name,
                "class": c.cls,
                "parameters": [
                    {"name": p, "type": d.type, "value": d.value.raw}
                    for p, d in sorted(c.parameters.items())
                ],
                "inputs": [{"name": p, "type": t} for p, t in sorted(c.inputs.items())],
                "outputs": [{"name": p, "type": t} for p, t in sorted(c.outputs.items())],
                "subcomponents": sorted(c.subcomponents),
            }
            for _, c in sorted(config.components.items())
        ],
        "bindings": [
            {"from": {"component": b.from_port.component, "port": b.from_port.port},
             "to": {"component": b.to_port.component, "port": b.to_port.port}}
            for b in sorted(config.bindings, key=str)
        ],
        "delegations": [
            {"outer": {"component": d.outer.component, "port": d.outer.port},
             "inner": {"component": d.inner.component, "port": d.inner.port}}
            for d in sorted(config.delegations, key=str)
        ],
    }


def with_component(config: Configuration, comp: Component) -> Configuration:
    comps = dict(config.components)
    comps[comp.name] = comp
    return replace(config, components=comps)


def without_component(config: Configuration, name: str) -> Configuration:
    comps = {}
    for cname, comp in config.components.items():
        if cname == name:
            continue
        if name in comp.subcomponents:
            comp = replace(comp, subcomponents=comp.subcomponents - {name})
        comps[cname] = comp
    bindings = frozenset(b for b in config.bindings
                         if name not in (b.from_port.component, b.to_port.component))
    delegations = frozenset(d for d in config.delegations
                            if name not in (d.outer.component, d.inner.component))
    return Configuration(components=comps, bindings=bindings, delegations=delegations)
