"""Bet ordering, candidate streams and the doubling search.

The doubling search runs phases with budget ``T = T0, 2*T0, 4*T0, ...``. In
each phase every candidate with ``floor(p * T) >= 1`` is run from scratch
under that many steps, in emission order. A stream of total mass at most one
therefore costs at most ``T`` per phase, so a solution of probability ``p``
found in ``t`` steps is reached after at most ``4 * max(T0, t / p)`` steps.
"""
from __future__ import annotations

import heapq
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Iterator, Sequence

from .errors import DomainError, StreamContractError
from .machines import Machine, Verdict, evaluate_candidate, table_machine
from .prob_model import ConditionalModel, ProbabilityModel, to_fraction


# ---------------------------------------------------------------------------
# betting order
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Bet:
    p: Fraction
    d: Fraction

    def __post_init__(self):
        object.__setattr__(self, "p", to_fraction(self.p))
        object.__setattr__(self, "d", to_fraction(self.d))
        if not 0 < self.p <= 1:
            raise DomainError(f"win probability must lie in (0, 1], got {self.p}")
        if self.d <= 0:
            raise DomainError(f"cost must be positive, got {self.d}")


def order_bets(bets: Sequence[Bet]) -> list[int]:
    """Indices of ``bets`` by decreasing ``p / d``; ties keep input order."""
    return sorted(range(len(bets)), key=lambda i: -(bets[i].p / bets[i].d))


def expected_spend(bets: Sequence[Bet], order: Sequence[int]):
    """Expected money paid before the first win when betting in ``order``."""
    if sorted(order) != list(range(len(bets))):
        raise DomainError("order must be a permutation of the bet indices")
    total = 0
    still_losing = 1
    for i in order:
        total += bets[i].d * still_losing
        still_losing *= 1 - bets[i].p
    return total


# ---------------------------------------------------------------------------
# candidate streams
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Candidate:
    payload: str
    p: Fraction
    index: int
    tokens: tuple[str, ...] = ()


class CandidateStream:
    """Replayable view of a lazy ``(payload, p[, tokens])`` source.

    Emissions are cached, so each search phase can walk the stream again from
    the start. The ordering and mass contracts are checked as items arrive.
    """

    def __init__(self, source: Iterable, mass: Fraction | None = None, name: str = "stream"):
        self._source: Iterator = iter(source)
        self._cache: list[Candidate] = []
        self._done = False
        self._emitted_mass = Fraction(0)
        self.mass = None if mass is None else Fraction(mass)
        self.name = name
        if self.mass is not None and not 0 <= self.mass <= 1:
            raise StreamContractError(f"declared mass must lie in [0, 1], got {self.mass}")

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[str, object]], mass=None, name: str = "pairs") -> "CandidateStream":
        return cls(((payload, to_fraction(p)) for payload, p in pairs), mass, name)

    def get(self, index: int) -> Candidate | None:
        while len(self._cache) <= index and not self._done:
            try:
                item = next(self._source)
            except StopIteration:
                self._done = True
                break
            self._admit(item)
        return self._cache[index] if index < len(self._cache) else None

    def _admit(self, item) -> None:
        payload, p, *rest = item
        p = Fraction(p)
        if not 0 < p <= 1:
            raise StreamContractError(f"{self.name}: probability {p} of {payload!r} outside (0, 1]")
        if self._cache and p > self._cache[-1].p:
            raise StreamContractError(
                f"{self.name}: probability rose from {self._cache[-1].p} to {p} at emission {len(self._cache)}"
            )
        self._emitted_mass += p
        if self.mass is not None and self._emitted_mass > self.mass:
            raise StreamContractError(f"{self.name}: emitted mass {self._emitted_mass} exceeds declared {self.mass}")
        tokens = tuple(rest[0]) if rest else ()
        self._cache.append(Candidate(payload, p, len(self._cache), tokens))

    def __iter__(self) -> Iterator[Candidate]:
        i = 0
        while (c := self.get(i)) is not None:
            yield c
            i += 1

    def take(self, n: int) -> list[Candidate]:
        out = []
        for c in self:
            if len(out) >= n:
                break
            out.append(c)
        return out


def _position_prob(model, condition):
    if isinstance(model, ConditionalModel):
        return lambda sym, pos: model.probability(sym, pos, condition)
    if isinstance(model, ProbabilityModel):
        model = model.symbol_model
    return lambda sym, pos: model.probability(sym)


def _best_first(alphabet: Sequence[str], prob, max_len: int) -> Iterator[tuple[Fraction, tuple[str, ...]]]:
    """All sequences up to ``max_len`` by decreasing product probability.

    Ties go to shorter sequences, then to lower alphabet ranks. Only the best
    child and the next sibling of each popped node enter the heap.
    """
    rank = {s: i for i, s in enumerate(alphabet)}
    orders: dict[int, list[tuple[Fraction, str]]] = {}

    def order(pos: int):
        if pos not in orders:
            orders[pos] = sorted(((prob(s, pos), s) for s in alphabet), key=lambda t: (-t[0], rank[t[1]]))
        return orders[pos]

    # entry: (-p, length, ranks, parent p, parent seq, sibling index)
    heap = []

    def push(parent_p, parent_seq, k):
        opts = order(len(parent_seq))
        if k >= len(opts):
            return
        p_sym, sym = opts[k]
        seq = parent_seq + (sym,)
        p = parent_p * p_sym
        heapq.heappush(heap, (-p, len(seq), tuple(rank[s] for s in seq), parent_p, parent_seq, k))

    push(Fraction(1), (), 0)
    while heap:
        neg_p, _, ranks, parent_p, parent_seq, k = heapq.heappop(heap)
        seq = parent_seq + (alphabet[ranks[-1]],)
        yield -neg_p, seq
        push(parent_p, parent_seq, k + 1)
        if len(seq) < max_len:
            push(-neg_p, seq, 0)


def stream_from_model(model, max_len: int, alphabet: Sequence[str] | None = None,
                      joiner: str = " ", condition: str | None = None) -> CandidateStream:
    """Candidate stream of symbol sequences ranked by model probability.

    Composite symbols of a :class:`ProbabilityModel` are expanded in the
    payload; ``tokens`` keeps the unexpanded sequence. Each length level of
    an unnormalized model carries mass one, so no total mass is declared.
    """
    if max_len < 1:
        raise DomainError("max_len must be at least 1")
    if alphabet is None:
        alphabet = model.alphabet.symbols
    alphabet = tuple(alphabet)
    expand = model.table.expand_sequence if isinstance(model, ProbabilityModel) else tuple
    prob = _position_prob(model, condition)

    def source():
        for p, seq in _best_first(alphabet, prob, max_len):
            yield joiner.join(expand(seq)), p, seq

    return CandidateStream(source(), None, "model")


# ---------------------------------------------------------------------------
# problems and search
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Inversion:
    machine: Machine
    target: object


@dataclass(frozen=True)
class Optimization:
    machine: Machine
    tau: int

    def __post_init__(self):
        if self.tau < 1:
            raise DomainError("tau must be at least 1")


@dataclass(frozen=True)
class Phase:
    budget: int
    tested: int
    steps: int


@dataclass(frozen=True)
class SearchReport:
    outcome: str  # solved | exhausted | budget-exhausted | empty
    solution: Candidate | None
    t_j: int | None
    phases: tuple[Phase, ...]
    total_steps: int
    value: object = None

    @property
    def p_j(self) -> Fraction | None:
        return self.solution.p if self.solution else None

    @property
    def t_over_p(self) -> Fraction | None:
        if self.solution is None:
            return None
        return Fraction(self.t_j) / self.solution.p

    @property
    def bound_ratio(self) -> float | None:
        """``total_steps / (t_j / p_j)``; the headline claim is that this stays below 2."""
        top = self.t_over_p
        return None if top is None else float(self.total_steps / top)

    @property
    def final_budget(self) -> int | None:
        return self.phases[-1].budget if self.phases else None


@dataclass
class _PhaseRunner:
    machine: Machine
    stream: CandidateStream
    target: object
    limit: int | None
    total: int = 0
    phases: list = field(default_factory=list)

    def remaining(self):
        return None if self.limit is None else self.limit - self.total


def _phases(runner: _PhaseRunner, T0: int, skip: set | None = None):
    """Drive the doubling schedule, yielding ``(candidate, evaluation)`` pairs.

    Stops by returning ``"exhausted"`` (every candidate ran to completion) or
    ``"budget-exhausted"``. Candidates listed in ``skip`` are not re-run.
    """
    if T0 < 1:
        raise DomainError("T0 must be at least 1")
    T = T0
    while True:
        tested = steps = 0
        complete = True
        i = 0
        try:
            while (cand := runner.stream.get(i)) is not None:
                i += 1
                if skip is not None and cand.index in skip:
                    continue
                cap = math.floor(cand.p * T)
                if cap < 1:
                    complete = False
                    break
                left = runner.remaining()
                if left is not None:
                    if left <= 0:
                        return "budget-exhausted"
                    cap = min(cap, left)
                ev = evaluate_candidate(runner.machine, cand.payload, cap, runner.target)
                runner.total += ev.cost
                steps += ev.cost
                tested += 1
                if ev.verdict is Verdict.CAPPED:
                    complete = False
                yield cand, ev
        finally:
            runner.phases.append(Phase(T, tested, steps))
        if complete:
            return "exhausted"
        T *= 2


def levin_search(problem: Inversion, stream: CandidateStream, T0: int = 1,
                 max_total: int | None = None) -> SearchReport:
    """Doubling search for a candidate whose machine output equals the target.

    An unsolvable infinite stream only stops at ``max_total``.
    """
    if max_total is not None and max_total < 1:
        raise DomainError("max_total must be at least 1")
    runner = _PhaseRunner(problem.machine, stream, problem.target, max_total)
    schedule = _phases(runner, T0)
    outcome = None
    try:
        while True:
            cand, ev = next(schedule)
            if ev.verdict is Verdict.SOLVED:
                schedule.close()
                return SearchReport("solved", cand, ev.cost, tuple(runner.phases), runner.total, ev.output)
    except StopIteration as stop:
        outcome = stop.value
    return SearchReport(outcome, None, None, tuple(runner.phases), runner.total)


@dataclass(frozen=True)
class OptimizationResult:
    payload: str | None
    value: object
    report: SearchReport

    @property
    def empty(self) -> bool:
        return self.payload is None


def optimize(problem: Optimization, stream: CandidateStream, T0: int = 1) -> OptimizationResult:
    """Best machine value found within ``problem.tau`` total steps.

    Runs the same doubling schedule; a candidate that ran to completion is
    not run again in later phases. Ties go to the earlier emission.
    """
    runner = _PhaseRunner(problem.machine, stream, None, problem.tau)
    finished: set[int] = set()
    best: tuple | None = None  # (candidate, value, cost)
    schedule = _phases(runner, T0, finished)
    try:
        while True:
            cand, ev = next(schedule)
            if ev.verdict is Verdict.CAPPED:
                continue
            finished.add(cand.index)
            if ev.verdict is not Verdict.SOLVED:
                continue
            if best is None or ev.output > best[1] or (ev.output == best[1] and cand.index < best[0].index):
                best = (cand, ev.output, ev.cost)
    except StopIteration as stop:
        outcome = stop.value
    phases = tuple(runner.phases)
    if best is None:
        return OptimizationResult(None, None, SearchReport("empty", None, None, phases, runner.total))
    cand, value, cost = best
    return OptimizationResult(cand.payload, value, SearchReport(outcome, cand, cost, phases, runner.total, value))


def planted_instance(seed: int, max_candidates: int = 64, max_cost: int = 100) -> tuple[Inversion, CandidateStream]:
    """Random inversion problem over a finite stream of total mass one.

    Candidate ``c<i>`` takes a random number of steps to test; exactly one,
    chosen at random, outputs ``"yes"``.
    """
    rng = random.Random(seed)
    n = rng.randint(1, max_candidates)
    weights = sorted((rng.randint(1, 1000) for _ in range(n)), reverse=True)
    total = sum(weights)
    planted = rng.randrange(n)
    entries = {f"c{i}": ("yes" if i == planted else "no", rng.randint(1, max_cost)) for i in range(n)}
    stream = CandidateStream.from_pairs(((f"c{i}", Fraction(w, total)) for i, w in enumerate(weights)),
                                        Fraction(1), "planted")
    return Inversion(table_machine(entries), "yes"), stream
