"""Deterministic, step-budgeted reference machines.

Two machines carry the theory: a monotone bit machine driven by a fixed
2-bit opcode table, and a stack machine over the seven expression tokens.
Everything else here is a small library of named machines used as
inversion / optimization targets, all charging integer step costs.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Callable, Sequence

from .errors import DomainError

EXPR_TOKENS = ("R1", "R2", "R3", "Add", "Sub", "Mul", "Div")
OPERATOR_TOKENS = ("Add", "Sub", "Mul", "Div")


# ---------------------------------------------------------------------------
# monotone bit machine
# ---------------------------------------------------------------------------

class Status(str, Enum):
    HALTED = "halted"
    OUT_OF_INPUT = "out-of-input"
    BUDGET_EXHAUSTED = "budget-exhausted"
    INVALID = "invalid"


@dataclass(frozen=True)
class MonotoneRun:
    consumed: int
    output: str
    status: Status
    steps: int


class MonotoneState:
    """Machine state between opcodes; lets callers feed input incrementally.

    Opcodes: ``00`` emit 0, ``01`` emit 1, ``10`` repeat the last emitted bit
    (invalid when nothing was emitted yet), ``11`` halt. One opcode is one step.
    """

    __slots__ = ("output", "consumed", "steps", "status")

    def __init__(self, output: str = "", consumed: int = 0, steps: int = 0, status: Status | None = None):
        self.output = output
        self.consumed = consumed
        self.steps = steps
        self.status = status

    def copy(self) -> "MonotoneState":
        return MonotoneState(self.output, self.consumed, self.steps, self.status)

    def execute(self, opcode: str) -> None:
        self.consumed += 2
        self.steps += 1
        if opcode == "00":
            self.output += "0"
        elif opcode == "01":
            self.output += "1"
        elif opcode == "10":
            if not self.output:
                self.status = Status.INVALID
            else:
                self.output += self.output[-1]
        elif opcode == "11":
            self.status = Status.HALTED
        else:
            raise DomainError(f"not an opcode: {opcode!r}")


def _check_bits(bits: str) -> None:
    if any(b not in "01" for b in bits):
        raise DomainError(f"bit programs contain only 0 and 1, got {bits!r}")


def run_monotone(program: str, max_steps: int) -> MonotoneRun:
    if max_steps < 1:
        raise DomainError("max_steps must be at least 1")
    _check_bits(program)
    state = MonotoneState()
    while state.status is None:
        if state.steps >= max_steps:
            state.status = Status.BUDGET_EXHAUSTED
            break
        remaining = len(program) - state.consumed
        if remaining < 2:
            # a dangling half opcode is read before the input runs dry
            state.consumed += remaining
            state.status = Status.OUT_OF_INPUT
            break
        state.execute(program[state.consumed:state.consumed + 2])
    return MonotoneRun(state.consumed, state.output, state.status, state.steps)


# ---------------------------------------------------------------------------
# expression machine
# ---------------------------------------------------------------------------

class ExprFailure(Exception):
    """A candidate expression program failed; ``kind`` says how."""

    KINDS = ("unknown-token", "underflow", "non-numeric", "division-by-zero", "stack-size")

    def __init__(self, kind: str, detail: str = "", steps: int = 0):
        assert kind in self.KINDS, kind
        self.kind = kind
        self.steps = steps
        super().__init__(f"{kind}: {detail}" if detail else kind)


def _is_number(v) -> bool:
    return isinstance(v, (int, Fraction)) and not isinstance(v, bool)


def _normalize(v):
    if isinstance(v, Fraction) and v.denominator == 1:
        return int(v)
    return v


def run_expr(program: Sequence[str], r1, r2, r3):
    """Evaluate a postfix program over the three input registers.

    ``R1``..``R3`` push a register; operators pop the right operand first,
    then the left. Division is exact, so non-integral quotients come back as
    fractions. Failures raise :class:`ExprFailure`.
    """
    registers = {"R1": r1, "R2": r2, "R3": r3}
    stack: list = []
    for i, tok in enumerate(program):
        steps = i + 1
        if tok in registers:
            stack.append(registers[tok])
            continue
        if tok not in OPERATOR_TOKENS:
            raise ExprFailure("unknown-token", repr(tok), steps)
        if len(stack) < 2:
            raise ExprFailure("underflow", f"{tok} at position {i}", steps)
        right = stack.pop()
        left = stack.pop()
        if not (_is_number(left) and _is_number(right)):
            raise ExprFailure("non-numeric", f"{tok} applied to {left!r}, {right!r}", steps)
        if tok == "Add":
            stack.append(left + right)
        elif tok == "Sub":
            stack.append(left - right)
        elif tok == "Mul":
            stack.append(left * right)
        else:
            if right == 0:
                raise ExprFailure("division-by-zero", "", steps)
            stack.append(_normalize(Fraction(left) / Fraction(right)))
    if len(stack) != 1:
        raise ExprFailure("stack-size", f"{len(stack)} values left", len(program))
    if not _is_number(stack[0]):
        raise ExprFailure("non-numeric", f"result {stack[0]!r}", len(program))
    return stack[0]


# ---------------------------------------------------------------------------
# named machines and candidate evaluation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Execution:
    output: object  # None when the candidate failed or was capped
    cost: int
    capped: bool = False


@dataclass(frozen=True)
class Machine:
    """A pure map from candidate string to ``(output, steps)``.

    ``func`` returns ``None`` as output for a failed candidate. It must be
    total and deterministic; capping is applied on its reported cost.
    """

    name: str
    func: Callable[[str], tuple[object, int]]
    params: tuple = ()

    def run(self, candidate: str, step_cap: int) -> Execution:
        output, steps = self.func(candidate)
        if steps > step_cap:
            return Execution(None, step_cap, True)
        return Execution(output, steps)


class Verdict(str, Enum):
    SOLVED = "solved"
    FAILED = "failed"
    CAPPED = "capped"


@dataclass(frozen=True)
class Evaluation:
    verdict: Verdict
    cost: int
    output: object = None


def evaluate_candidate(machine: Machine, candidate: str, step_cap: int, target=None) -> Evaluation:
    """Run one candidate under a step cap.

    With a ``target`` the candidate solves iff the output equals it. Without
    one (optimization) it "solves" as soon as it produces a value.
    """
    if step_cap < 1:
        raise DomainError("step_cap must be at least 1")
    run = machine.run(candidate, step_cap)
    if run.capped:
        return Evaluation(Verdict.CAPPED, run.cost)
    if run.output is None:
        return Evaluation(Verdict.FAILED, run.cost)
    if target is None or run.output == target:
        return Evaluation(Verdict.SOLVED, run.cost, run.output)
    return Evaluation(Verdict.FAILED, run.cost, run.output)


def _parse_numeral(candidate: str) -> tuple[int | None, int]:
    """Scan a decimal numeral one character per step."""
    digits = candidate[1:] if candidate.startswith("-") else candidate
    if not digits:
        return None, max(1, len(candidate))
    for i, ch in enumerate(candidate):
        if not (ch.isdigit() or (ch == "-" and i == 0)):
            return None, i + 1
    return int(candidate), len(candidate)


def square_machine() -> Machine:
    def func(candidate: str):
        n, steps = _parse_numeral(candidate)
        if n is None:
            return None, steps
        return str(n * n), steps + 1

    return Machine("square", func)


def identity_machine() -> Machine:
    return Machine("concat-target", lambda c: (c, len(c) + 1))


def peak_machine(center: int = 17) -> Machine:
    """Value ``1 / (1 + |x - center|)`` of a decimal numeral ``x``."""

    def func(candidate: str):
        n, steps = _parse_numeral(candidate)
        if n is None:
            return None, steps
        return Fraction(1, 1 + abs(n - center)), steps + 1

    return Machine("peak", func, (("center", center),))


def expr_check_machine(examples: Sequence[Sequence]) -> Machine:
    """Run an expression program on bound ``(r1, r2, r3)`` triples.

    Output is the comma-joined list of results; a program pays one step per
    token executed per triple, plus one step to emit.
    """
    triples = tuple(tuple(e[:3]) for e in examples)
    if not triples:
        raise DomainError("expr-check needs at least one bound triple")

    def func(candidate: str):
        tokens = candidate.split()
        steps = 0
        results = []
        for r1, r2, r3 in triples:
            try:
                results.append(run_expr(tokens, r1, r2, r3))
            except ExprFailure as exc:
                return None, steps + exc.steps
            steps += len(tokens)
        return ",".join(str(v) for v in results), steps + 1

    return Machine("expr-check", func, (("examples", triples),))


def monotone_machine(max_steps: int = 64) -> Machine:
    """Output of :func:`run_monotone` on a bit-string candidate."""

    def func(candidate: str):
        if any(b not in "01" for b in candidate):
            return None, 1
        run = run_monotone(candidate, max_steps)
        if run.status is Status.INVALID:
            return None, max(1, run.steps)
        return run.output, max(1, run.steps)

    return Machine("monotone", func, (("max_steps", max_steps),))


def table_machine(entries: dict[str, Sequence]) -> Machine:
    """Look-up machine: ``entries[payload] = (output, cost)``.

    Unknown payloads fail after one step. Used for synthetic streams.
    """
    frozen = {k: (v[0], int(v[1])) for k, v in entries.items()}

    def func(candidate: str):
        return frozen.get(candidate, (None, 1))

    return Machine("table", func)


MACHINES: dict[str, Callable[..., Machine]] = {
    "square": square_machine,
    "concat-target": identity_machine,
    "expr-check": expr_check_machine,
    "peak": peak_machine,
    "monotone": monotone_machine,
    "table": table_machine,
}


def get_machine(name: str, **params) -> Machine:
    try:
        factory = MACHINES[name]
    except KeyError:
        raise DomainError(f"unknown machine {name!r}; known: {sorted(MACHINES)}") from None
    try:
        return factory(**params)
    except TypeError as exc:
        raise DomainError(f"bad parameters for machine {name!r}: {exc}") from None
