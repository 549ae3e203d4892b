"""Folding solved problems back into the probability model.

Compression here is greedy phrase definition: each round tries adjacent
symbol pairs, most frequent first, and keeps the one that shortens the total
description length most. One tried pair costs one step of the budget.
"""
from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import Sequence

from .prob_model import ProbabilityModel, define_composite
from .search import (Inversion, Optimization, SearchReport, levin_search, optimize,
                     stream_from_model)


@dataclass(frozen=True)
class CompressionLedger:
    L0: float
    L_PS: float
    L_after: float
    accepted: bool
    composites: tuple[str, ...] = ()
    steps: int = 0


def _pair_candidates(model: ProbabilityModel) -> list[tuple[str, str]]:
    counts: Counter = Counter()
    first_seen: dict = {}
    for record in model.corpus:
        for pair in zip(record, record[1:]):
            counts[pair] += 1
            first_seen.setdefault(pair, len(first_seen))
    return sorted(counts, key=lambda pair: (-counts[pair], first_seen[pair]))


def _as_records(corpus) -> list[tuple[str, ...]]:
    if corpus and isinstance(corpus[0], str):
        return [tuple(corpus)]
    return [tuple(r) for r in corpus]


def compress_corpus(model: ProbabilityModel, corpus=None,
                    step_budget: int | None = None) -> tuple[ProbabilityModel, CompressionLedger]:
    """Greedily define composites while any pair lowers the description length.

    ``corpus`` (raw base-symbol records, or one flat token sequence) replaces
    the model's bound corpus when given.
    """
    if corpus is not None:
        model = model.with_corpus(model.table.encode(r) for r in _as_records(corpus))
    start = model.description_length
    budget = math.inf if step_budget is None else step_budget
    spent = 0
    defined = []
    while spent < budget:
        best = None
        for pair in _pair_candidates(model):
            if spent >= budget:
                break
            spent += 1
            trial, delta = define_composite(model, pair)
            if delta < 0 and (best is None or delta < best[1]):
                best = (trial, delta)
        if best is None:
            break
        model = best[0]
        defined.append(model.table.symbols[-1])
    end = model.description_length
    return model, CompressionLedger(start, 0.0, end, end < start, tuple(defined), spent)


def incorporate_solution(model: ProbabilityModel, pair: Sequence[str], step_budget: int | None = None,
                         condition: str | None = None) -> tuple[ProbabilityModel, CompressionLedger]:
    """Add a problem/solution token sequence to the knowledge corpus.

    ``L_PS`` prices the pair under the model as it was before the update;
    unseen tokens join the base alphabet first and are priced at their
    smoothed zero-count probability. New composites are kept only when the
    result beats ``L0 + L_PS``; the counts update is kept regardless.
    """
    pair = tuple(pair)
    L0 = model.description_length
    if not pair:
        return model, CompressionLedger(L0, 0.0, L0, False)
    extended = model.extend_base(pair)
    L_PS = extended.symbol_model.code_length(extended.table.encode(pair))
    observed = extended.observe(pair, condition)
    compressed, inner = compress_corpus(observed, step_budget=step_budget)
    if compressed.description_length < L0 + L_PS:
        return compressed, CompressionLedger(L0, L_PS, compressed.description_length, True,
                                             inner.composites, inner.steps)
    return observed, CompressionLedger(L0, L_PS, observed.description_length, False, (), inner.steps)


@dataclass(frozen=True)
class SessionProblem:
    id: str
    problem: Inversion | Optimization
    condition: str | None = None


@dataclass(frozen=True)
class SessionEntry:
    id: str
    report: SearchReport | None
    ledger: CompressionLedger | None
    error: str | None = None

    def record(self) -> dict:
        """Flat key/value view for trace files."""
        r, led = self.report, self.ledger
        return {
            "problem": self.id,
            "outcome": r.outcome if r else "error",
            "t_j": r.t_j if r else None,
            "p_j": r.p_j if r else None,
            "total_steps": r.total_steps if r else None,
            "L0": led.L0 if led else None,
            "L_PS": led.L_PS if led else None,
            "L_after": led.L_after if led else None,
            "accepted": led.accepted if led else None,
            "error": self.error,
        }


@dataclass(frozen=True)
class SessionTrace:
    entries: tuple[SessionEntry, ...]
    model: ProbabilityModel


def session(problems: Sequence[SessionProblem], model: ProbabilityModel, *, max_len: int = 3,
            T0: int = 1, max_total: int | None = 10 ** 7, compression_factor: float = 1.0,
            joiner: str = " ") -> SessionTrace:
    """Solve problems in order, compressing each solution into the model.

    The model is frozen during a search. After a solve costing ``T`` steps,
    compression gets ``compression_factor * T`` steps.
    """
    entries = []
    for item in problems:
        stream = stream_from_model(model, max_len, joiner=joiner)
        try:
            if isinstance(item.problem, Inversion):
                report = levin_search(item.problem, stream, T0, max_total)
            else:
                report = optimize(item.problem, stream, T0).report
        except Exception as exc:  # recorded, the session goes on
            entries.append(SessionEntry(item.id, None, None, f"{type(exc).__name__}: {exc}"))
            continue
        ledger = None
        if report.solution is not None:
            tokens = model.table.expand_sequence(report.solution.tokens)
            budget = max(1, math.ceil(compression_factor * report.total_steps))
            model, ledger = incorporate_solution(model, tokens, budget, item.condition)
        entries.append(SessionEntry(item.id, report, ledger))
    return SessionTrace(tuple(entries), model)
