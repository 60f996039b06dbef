"""Design-time verification of component architecture reconfiguration plans.

Parse an architecture model, a table of reconfiguration operations, a plan
(a regular expression over operation names) and a temporal property;
compile the plan to a prefix-closed automaton and check the property either
with the linear marking checker or the exhaustive oracle.
"""

from .checker import Mark, MarkTable, check
from .errors import InputError, ParseError, ResourceCapExceeded
from .formulas import (
    After,
    Always,
    Before,
    Event,
    Eventually,
    Termination,
    parse_ftpl,
    term_check,
)
from .model import (
    Binding,
    Component,
    Configuration,
    Delegation,
    Parameter,
    PortRef,
    Value,
    config_equal,
    parse_config,
    serialize_config,
    validate_config,
)
from .operations import (
    Add,
    AddBinding,
    AddComponent,
    Const,
    NamedOp,
    RemoveBinding,
    RemoveComponent,
    Run,
    SetParam,
    apply_op,
    apply_primitive,
    classify_idempotence,
    parse_ops,
)
from .oracle import (
    EvolutionPath,
    enumerate_prefixes,
    eval_on_path,
    event_holds_at,
    oracle_check,
)
from .paths import Automaton, compile_path, emit_dot, order_states, parse_path
from .properties import eval_cp, is_cp_flat, parse_cp, parse_definitions
from .verdict import Status, Verdict, Warning

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
