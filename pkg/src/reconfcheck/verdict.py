"""Check results shared by the marking checker and the brute-force oracle."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum


class Status(str, Enum):
    TRUE = "true"
    FALSE = "false"
    REJECTED = "rejected"


# warning codes
NON_IDEMPOTENT_CYCLE = "NON_IDEMPOTENT_CYCLE"
JOIN_DIVERGENCE = "JOIN_DIVERGENCE"
NON_IDEMPOTENT_OP_ON_CYCLE = "NON_IDEMPOTENT_OP_ON_CYCLE"
UNKNOWN_IDEMPOTENCE_ON_CYCLE = "UNKNOWN_IDEMPOTENCE_ON_CYCLE"

# codes that make the run unsound rather than merely suspicious
ERROR_GRADE = (NON_IDEMPOTENT_CYCLE, JOIN_DIVERGENCE)


@dataclass(frozen=True)
class Warning:
    code: str
    message: str

    def __str__(self):
        return f"{self.code}: {self.message}"


@dataclass
class Verdict:
    """Outcome of one check.

    ``counterexample`` is present exactly for false verdicts: the operation
    labels and automaton states from the initial state to the violation, so
    replaying the operations from the initial configuration reproduces the
    violating configuration.
    """

    status: Status
    counterexample: tuple[tuple[str, int], ...] | None = None
    warnings: tuple[Warning, ...] = ()
    reason: str | None = None
    approximate: bool = False
    bound: int | None = None
    stats: dict = field(default_factory=dict)

    @property
    def value(self) -> bool:
        if self.status == Status.REJECTED:
            raise ValueError("rejected runs carry no boolean verdict")
        return self.status == Status.TRUE

    def error_grade_warnings(self):
        return tuple(w for w in self.warnings if w.code in ERROR_GRADE)
