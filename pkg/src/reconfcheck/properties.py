"""Configuration properties: first-order formulas over a configuration.

The full grammar (and/or/not, forall/exists over components) parses and
evaluates here. The marking checker only accepts the flat fragment
(conjunction and universal quantification, see is_cp_flat); the brute-force
oracle accepts everything.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .errors import ParseError
from .model import Configuration, PortRef, Value


@dataclass(frozen=True)
class CpTrue:
    pass


@dataclass(frozen=True)
class CpFalse:
    pass


@dataclass(frozen=True)
class ComponentPresent:
    component: str


@dataclass(frozen=True)
class BindingPresent:
    """The two ports are bound, in either orientation.

    Stored bindings are directed (output to input); the property does not
    fix which side the caller writes first, so both orientations match.
    """

    from_port: PortRef
    to_port: PortRef


@dataclass(frozen=True)
class ParamCmp:
    """Compare one parameter against a literal; false when inapplicable."""

    target: str
    param: str
    rel: str
    value: Value
    target_is_var: bool = False


@dataclass(frozen=True)
class CpAnd:
    left: "CpFormula"
    right: "CpFormula"


@dataclass(frozen=True)
class CpOr:
    left: "CpFormula"
    right: "CpFormula"


@dataclass(frozen=True)
class CpNot:
    body: "CpFormula"


@dataclass(frozen=True)
class AllComponents:
    pass


@dataclass(frozen=True)
class ComponentsOfClass:
    cls: str


Domain = AllComponents | ComponentsOfClass


@dataclass(frozen=True)
class Forall:
    var: str
    domain: Domain
    body: "CpFormula"


@dataclass(frozen=True)
class Exists:
    var: str
    domain: Domain
    body: "CpFormula"


CpFormula = (CpTrue | CpFalse | ComponentPresent | BindingPresent | ParamCmp
             | CpAnd | CpOr | CpNot | Forall | Exists)

RELATIONS = ("=", "!=", "<", "<=", ">", ">=")
ORDER_RELATIONS = ("<", "<=", ">", ">=")


def is_cp_flat(formula: CpFormula) -> bool:
    """True iff the formula uses only atoms, conjunction and forall."""
    if isinstance(formula, (CpTrue, CpFalse, ComponentPresent, BindingPresent, ParamCmp)):
        return True
    if isinstance(formula, CpAnd):
        return is_cp_flat(formula.left) and is_cp_flat(formula.right)
    if isinstance(formula, Forall):
        return is_cp_flat(formula.body)
    return False


def eval_cp(formula: CpFormula, config: Configuration, env: dict[str, str] | None = None) -> bool:
    """Total evaluation over the finite configuration.

    Quantifiers range over component names; a parameter comparison on a
    missing component/parameter or across types is false rather than an
    error, so evaluation stays total while the architecture evolves.
    """
    env = env or {}
    if isinstance(formula, CpTrue):
        return True
    if isinstance(formula, CpFalse):
        return False
    if isinstance(formula, ComponentPresent):
        return formula.component in config.components
    if isinstance(formula, BindingPresent):
        for b in config.bindings:
            if (b.from_port, b.to_port) in (
                    (formula.from_port, formula.to_port),
                    (formula.to_port, formula.from_port)):
                return True
        return False
    if isinstance(formula, ParamCmp):
        name = env[formula.target] if formula.target_is_var else formula.target
        comp = config.component(name)
        if comp is None:
            return False
        decl = comp.parameters.get(formula.param)
        if decl is None:
            return False
        verdict = decl.value.compare(formula.rel, formula.value)
        return bool(verdict)
    if isinstance(formula, CpAnd):
        return eval_cp(formula.left, config, env) and eval_cp(formula.right, config, env)
    if isinstance(formula, CpOr):
        return eval_cp(formula.left, config, env) or eval_cp(formula.right, config, env)
    if isinstance(formula, CpNot):
        return not eval_cp(formula.body, config, env)
    if isinstance(formula, (Forall, Exists)):
        names = _domain_names(formula.domain, config)
        results = (eval_cp(formula.body, config, {**env, formula.var: n}) for n in names)
        return all(results) if isinstance(formula, Forall) else any(results)
    raise TypeError(f"unknown formula node {formula!r}")


def _domain_names(domain: Domain, config: Configuration):
    if isinstance(domain, AllComponents):
        return sorted(config.components)
    return sorted(n for n, c in config.components.items() if c.cls == domain.cls)


# ---------------------------------------------------------------------------
# parser
#
#   cp   := term ("and" term)* | term ("or" term)*
#   term := "component" "(" NAME ")"
#         | "binding" "(" NAME "." NAME "," NAME "." NAME ")"
#         | "param" "(" ref "." NAME ")" REL literal
#         | "forall" VAR "in" domain ":" "(" cp ")"
#         | "exists" VAR "in" domain ":" "(" cp ")"
#         | "not" term | "true" | "false" | "(" cp ")" | DEFINED-NAME
#   domain := "components" | "class" "(" NAME ")"
#
# Mixing "and" with "or" without parentheses is rejected.

_TOKEN_RE = re.compile(r"""
    (?P<ws>\s+)
  | (?P<comment>\#[^\n]*)
  | (?P<name>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<int>-?[0-9]+)
  | (?P<string>"(?:[^"\\]|\\.)*")
  | (?P<rel><=|>=|!=|=|<|>)
  | (?P<punct>[().,:])
""", re.VERBOSE)

_KEYWORDS = {"and", "or", "not", "true", "false", "component", "binding", "param",
             "forall", "exists", "in", "components", "class"}


def _tokenize(text: str, source):
    tokens = []
    line, col = 1, 1
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line=line, column=col,
                             source=source)
        kind = m.lastgroup
        value = m.group()
        if kind not in ("ws", "comment"):
            tokens.append((kind, value, line, col))
        newlines = value.count("\n")
        if newlines:
            line += newlines
            col = len(value) - value.rfind("\n")
        else:
            col += len(value)
        pos = m.end()
    return tokens


class _CpParser:
    def __init__(self, tokens, definitions, source):
        self.tokens = tokens
        self.pos = 0
        self.definitions = definitions or {}
        self.source = source
        self.scope: list[str] = []

    def peek(self):
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def next(self):
        tok = self.peek()
        if tok is None:
            raise ParseError("unexpected end of property", source=self.source)
        self.pos += 1
        return tok

    def expect(self, value):
        tok = self.next()
        if tok[1] != value:
            raise ParseError(f"expected {value!r}, found {tok[1]!r}", line=tok[2],
                             column=tok[3], source=self.source)
        return tok

    def fail(self, message, tok=None):
        tok = tok or self.peek()
        if tok:
            raise ParseError(message, line=tok[2], column=tok[3], source=self.source)
        raise ParseError(message, source=self.source)

    def parse(self) -> CpFormula:
        formula = self.cp()
        if self.peek() is not None:
            self.fail(f"unexpected {self.peek()[1]!r} after property")
        return formula

    def cp(self) -> CpFormula:
        formula = self.term()
        connector = None
        while self.peek() and self.peek()[1] in ("and", "or"):
            tok = self.next()
            if connector is None:
                connector = tok[1]
            elif tok[1] != connector:
                self.fail("mixing 'and' with 'or' needs parentheses", tok)
            rhs = self.term()
            formula = CpAnd(formula, rhs) if connector == "and" else CpOr(formula, rhs)
        return formula

    def term(self) -> CpFormula:
        tok = self.next()
        value = tok[1]
        if value == "(":
            inner = self.cp()
            self.expect(")")
            return inner
        if value == "true":
            return CpTrue()
        if value == "false":
            return CpFalse()
        if value == "not":
            return CpNot(self.term())
        if value == "component":
            self.expect("(")
            name = self.ident()
            self.expect(")")
            return ComponentPresent(name)
        if value == "binding":
            self.expect("(")
            a = self.portref()
            self.expect(",")
            b = self.portref()
            self.expect(")")
            return BindingPresent(a, b)
        if value == "param":
            return self.param_atom()
        if value in ("forall", "exists"):
            return self.quantified(value)
        if tok[0] == "name" and value not in _KEYWORDS:
            if value not in self.definitions:
                self.fail(f"unknown property name {value!r}", tok)
            return self.definitions[value]
        self.fail(f"unexpected {value!r}", tok)

    def ident(self) -> str:
        tok = self.next()
        if tok[0] != "name":
            self.fail("expected a name", tok)
        return tok[1]

    def portref(self) -> PortRef:
        comp = self.ident()
        self.expect(".")
        port = self.ident()
        return PortRef(comp, port)

    def param_atom(self) -> ParamCmp:
        self.expect("(")
        target_tok = self.next()
        if target_tok[0] != "name":
            self.fail("expected a component name or variable", target_tok)
        target = target_tok[1]
        self.expect(".")
        param = self.ident()
        self.expect(")")
        rel_tok = self.next()
        if rel_tok[0] != "rel":
            self.fail("expected a comparison operator", rel_tok)
        rel = rel_tok[1]
        lit = self.literal()
        if rel in ORDER_RELATIONS and lit.type != "int":
            self.fail(f"ordering comparison {rel!r} needs an integer literal", rel_tok)
        return ParamCmp(target, param, rel, lit, target_is_var=target in self.scope)

    def literal(self) -> Value:
        tok = self.next()
        if tok[0] == "int":
            return Value("int", int(tok[1]))
        if tok[0] == "string":
            return Value("string", tok[1][1:-1].replace('\\"', '"').replace("\\\\", "\\"))
        if tok[1] in ("true", "false"):
            return Value("bool", tok[1] == "true")
        self.fail("expected a literal", tok)

    def quantified(self, keyword) -> CpFormula:
        var_tok = self.next()
        if var_tok[0] != "name" or var_tok[1] in _KEYWORDS:
            self.fail("expected a variable name", var_tok)
        var = var_tok[1]
        if var in self.scope:
            self.fail(f"variable {var!r} shadows an enclosing binding", var_tok)
        self.expect("in")
        dom_tok = self.next()
        if dom_tok[1] == "components":
            domain: Domain = AllComponents()
        elif dom_tok[1] == "class":
            self.expect("(")
            domain = ComponentsOfClass(self.ident())
            self.expect(")")
        else:
            self.fail("expected 'components' or 'class(NAME)'", dom_tok)
        self.expect(":")
        self.expect("(")
        self.scope.append(var)
        body = self.cp()
        self.scope.pop()
        self.expect(")")
        node = Forall if keyword == "forall" else Exists
        return node(var, domain, body)


def parse_cp(text: str, definitions: dict[str, CpFormula] | None = None,
             *, source: str | None = None) -> CpFormula:
    """Parse one property expression; defined names expand by substitution."""
    tokens = _tokenize(text, source)
    if not tokens:
        raise ParseError("empty property", source=source)
    return _CpParser(tokens, definitions, source).parse()


def parse_definitions(text: str, *, source: str | None = None) -> dict[str, CpFormula]:
    """Parse a 'Name := cp' definitions file (one per line, # comments)."""
    definitions: dict[str, CpFormula] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if ":=" not in line:
            raise ParseError("definition lines look like 'Name := property'",
                             line=lineno, source=source)
        name, body = line.split(":=", 1)
        name = name.strip()
        if not re.fullmatch(r"[A-Za-z_][A-Za-z0-9_]*", name) or name in _KEYWORDS:
            raise ParseError(f"bad property name {name!r}", line=lineno, source=source)
        if name in definitions:
            raise ParseError(f"duplicate property name {name!r}", line=lineno, source=source)
        definitions[name] = parse_cp(body, definitions, source=source)
    return definitions
