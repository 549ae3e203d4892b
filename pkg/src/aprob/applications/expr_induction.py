"""Inducing expression programs from worked arithmetic examples.

An example ``35, 41, + : 76`` asks for a program over the seven expression
tokens mapping the left-hand fields to the result. The operator field is
data; it only serves as the conditioning token of the program model.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from ..errors import DomainError
from ..machines import EXPR_TOKENS, Verdict, evaluate_candidate, expr_check_machine
from ..prob_model import Alphabet, ConditionalModel
from ..search import stream_from_model

_TRIPLE = re.compile(r"^\s*(-?\d+)\s*,\s*(-?\d+)\s*,\s*(\S+)\s*:\s*(-?\d+)\s*$")


@dataclass(frozen=True)
class ExampleTriple:
    a: int
    b: int
    op: str
    result: int


def parse_triple(text: str) -> ExampleTriple:
    """Parse ``"35, 41, + : 76"``."""
    m = _TRIPLE.match(text)
    if not m:
        raise DomainError(f"not an example of the form 'a, b, op : result': {text!r}")
    return ExampleTriple(int(m[1]), int(m[2]), m[3], int(m[4]))


def expr_model(schema: str = "position+token", smoothing=1) -> ConditionalModel:
    return ConditionalModel(Alphabet(EXPR_TOKENS), schema, smoothing)


@dataclass(frozen=True)
class InducedProgram:
    tokens: tuple[str, ...]
    prior: Fraction
    posterior: Fraction


def induce_expr(examples: Sequence[ExampleTriple], model: ConditionalModel | None = None,
                max_len: int = 3, budget: int | None = None) -> list[InducedProgram]:
    """Programs reproducing every example, most probable first.

    Candidates come best-first from ``model`` (conditioned on the shared
    operator token, if all examples share one); ``budget`` caps how many are
    tried. Posteriors are priors renormalized over the programs found.
    """
    if not examples:
        raise DomainError("need at least one example")
    model = model or expr_model()
    ops = {e.op for e in examples}
    condition = ops.pop() if len(ops) == 1 else None
    machine = expr_check_machine([(e.a, e.b, e.op) for e in examples])
    target = ",".join(str(e.result) for e in examples)
    found = []
    for cand in stream_from_model(model, max_len, condition=condition):
        if budget is not None and cand.index >= budget:
            break
        # one pass per token per example, plus the final comparison
        cap = len(cand.tokens) * len(examples) + 1
        if evaluate_candidate(machine, cand.payload, cap, target).verdict is Verdict.SOLVED:
            found.append(cand)
    total = sum((c.p for c in found), Fraction(0))
    ranked = sorted(found, key=lambda c: (-c.p, c.index))
    return [InducedProgram(c.tokens, c.p, c.p / total) for c in ranked]


def induce_by_operator(examples: Sequence[ExampleTriple], model: ConditionalModel | None = None,
                       max_len: int = 3, budget: int | None = None) -> dict[str, list[InducedProgram]]:
    """Run :func:`induce_expr` separately on the rows of each operator."""
    groups: dict[str, list[ExampleTriple]] = {}
    for e in examples:
        groups.setdefault(e.op, []).append(e)
    return {op: induce_expr(rows, model, max_len, budget) for op, rows in groups.items()}
