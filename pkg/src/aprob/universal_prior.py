"""Truncated estimates of the universal prior on the monotone bit machine.

``pm_estimate`` is a certified lower bound: it sums ``2**-len(s)`` over the
minimal programs of length at most ``L`` whose output starts with ``x``.
Programs are found by walking the opcode tree and pruning every branch whose
output already disagrees with ``x``.
"""
from __future__ import annotations

import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

from .errors import DomainError, InsufficientDepthError
from .machines import MonotoneState

OPCODES = ("00", "01", "10", "11")


@dataclass(frozen=True)
class PriorEstimate:
    target: str
    max_program_length: int
    step_budget: int
    mass: Fraction
    programs: tuple[str, ...]


def _check_target(x: str) -> None:
    if any(b not in "01" for b in x):
        raise DomainError(f"target must be a binary string, got {x!r}")


def _subtree(x: str, max_len: int, step_budget: int, start: str) -> list[str]:
    """Minimal programs for ``x`` among those beginning with opcode ``start``."""
    found: list[str] = []
    stack = [(start, _after(start))]
    while stack:
        program, state = stack.pop()
        if state is None or state.status is not None:
            continue
        out = state.output
        if len(out) >= len(x):
            if out.startswith(x):
                found.append(program)
            continue
        if not x.startswith(out):
            continue
        # every opcode emits at most one bit
        if (max_len - len(program)) // 2 < len(x) - len(out) or state.steps >= step_budget:
            continue
        for op in OPCODES:
            nxt = state.copy()
            nxt.execute(op)
            stack.append((program + op, nxt))
    return found


def _after(opcode: str) -> MonotoneState:
    state = MonotoneState()
    state.execute(opcode)
    return state


def _default_budget(max_len: int) -> int:
    return max(1, max_len // 2)


def minimal_programs(x: str, max_len: int, step_budget: int | None = None, workers: int = 1) -> tuple[str, ...]:
    """Prefix-free set of consumed prefixes whose output begins with ``x``.

    Sorted by length, then value. ``workers > 1`` splits the search by the
    first opcode across processes; the result is identical.
    """
    if max_len < 1:
        raise DomainError("max_len must be at least 1")
    _check_target(x)
    budget = _default_budget(max_len) if step_budget is None else step_budget
    if budget < 1:
        raise DomainError("step_budget must be at least 1")
    if not x:
        return ("",)
    if max_len < 2:
        return ()
    args = [(x, max_len, budget, op) for op in OPCODES]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_subtree, *zip(*args)))
    else:
        parts = [_subtree(*a) for a in args]
    return tuple(sorted((p for part in parts for p in part), key=lambda s: (len(s), s)))


def pm_estimate(x: str, max_len: int, step_budget: int | None = None, workers: int = 1) -> PriorEstimate:
    budget = _default_budget(max_len) if step_budget is None else step_budget
    programs = minimal_programs(x, max_len, budget, workers)
    mass = sum((Fraction(1, 2 ** len(p)) for p in programs), Fraction(0))
    return PriorEstimate(x, max_len, budget, mass, programs)


def predict_next(x: str, max_len: int, step_budget: int | None = None, workers: int = 1) -> Fraction:
    """Probability that ``x`` continues with a 1."""
    m1 = pm_estimate(x + "1", max_len, step_budget, workers).mass
    m0 = pm_estimate(x + "0", max_len, step_budget, workers).mass
    if m0 + m1 == 0:
        raise InsufficientDepthError(x, max_len)
    return m1 / (m0 + m1)


# ---------------------------------------------------------------------------
# convergence experiments
# ---------------------------------------------------------------------------

def _period2(prefix: str) -> Fraction:
    return Fraction(len(prefix) % 2)


SOURCES: dict[str, Callable[[str], Fraction]] = {
    "constant-ones": lambda prefix: Fraction(1),
    "constant-zeros": lambda prefix: Fraction(0),
    "fair-coin": lambda prefix: Fraction(1, 2),
    "biased-coin": lambda prefix: Fraction(3, 4),
    "period-2": _period2,
}


@dataclass(frozen=True)
class ConvergenceTrial:
    source: str
    n: int
    depth: int
    bits: str
    predicted: tuple[Fraction, ...]  # estimated P(next bit = 1) before each bit
    true: tuple[Fraction, ...]
    squared_errors: tuple[Fraction, ...]
    cumulative: tuple[Fraction, ...]

    @property
    def correct_bit_probability(self) -> tuple[Fraction, ...]:
        """Probability the estimate gave to the bit that actually came next."""
        return tuple(p if b == "1" else 1 - p for p, b in zip(self.predicted, self.bits))


def convergence_trial(source: str, n: int, max_len: int, step_budget: int | None = None,
                      seed: int = 0, workers: int = 1) -> ConvergenceTrial:
    try:
        conditional = SOURCES[source]
    except KeyError:
        raise DomainError(f"unknown source {source!r}; known: {sorted(SOURCES)}") from None
    if n < 1:
        raise DomainError("n must be at least 1")
    rng = random.Random(seed)
    bits = ""
    predicted, true, errors, cumulative = [], [], [], []
    total = Fraction(0)
    for _ in range(n):
        p_true = conditional(bits)
        p_est = predict_next(bits, max_len, step_budget, workers)
        err = (p_est - p_true) ** 2
        total += err
        predicted.append(p_est)
        true.append(p_true)
        errors.append(err)
        cumulative.append(total)
        bits += "1" if rng.random() < p_true else "0"
    return ConvergenceTrial(source, n, max_len, bits, tuple(predicted), tuple(true),
                            tuple(errors), tuple(cumulative))
