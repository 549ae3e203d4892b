"""Best-first stream of solution trials generated by a recursive planner.

At every problem the planner may split it into sub-problems that must all be
solved (M1, probability P1), swap it for one of several equivalent problems
(M2, P2, shared evenly among the alternatives), or hand it to one of two
terminal solvers (M3, M4). A trial's probability is the product of the
choices along its derivation.
"""
from __future__ import annotations

import heapq
import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Mapping, Sequence

from ..errors import DomainError
from ..prob_model import to_fraction
from ..search import CandidateStream


def _default_split(problem: str) -> list[str]:
    return [f"{problem}.1", f"{problem}.2"]


def _default_transform(problem: str) -> list[str]:
    return [f"{problem}'"]


@dataclass(frozen=True)
class PlannerSpec:
    P: tuple[Fraction, Fraction, Fraction, Fraction]
    max_depth: int = 3
    split: Callable[[str], Sequence[str]] = _default_split
    transform: Callable[[str], Sequence[str]] = _default_transform
    labels: tuple[str, str] = ("M3", "M4")

    def __post_init__(self):
        P = tuple(to_fraction(p) for p in self.P)
        if len(P) != 4 or any(p < 0 for p in P):
            raise DomainError("need four non-negative probabilities P1..P4")
        if sum(P) > 1:
            raise DomainError(f"P1..P4 sum to {sum(P)} > 1")
        if self.max_depth < 1:
            raise DomainError("max_depth must be at least 1")
        object.__setattr__(self, "P", P)

    @classmethod
    def from_dict(cls, doc: Mapping) -> "PlannerSpec":
        """Build from a plain document; ``split``/``transform`` map problem names to lists."""
        split_map = doc.get("split", {})
        transform_map = doc.get("transform", {})

        def split(problem):
            return split_map.get(problem, _default_split(problem))

        def transform(problem):
            return transform_map.get(problem, _default_transform(problem))

        return cls(tuple(to_fraction(p) for p in doc["P"]), int(doc.get("max_depth", 3)), split, transform,
                   tuple(doc.get("labels", ("M3", "M4"))))


def _expand(spec: PlannerSpec, problem: str, depth: int):
    """Choices at one node: ``(probability factor, replacement pieces)``."""
    P1, P2, P3, P4 = spec.P
    if depth < spec.max_depth:
        if P1 > 0:
            parts = list(spec.split(problem))
            if parts:
                pieces: list = ["M1["]
                for i, sub in enumerate(parts):
                    if i:
                        pieces.append(",")
                    pieces.append((sub, depth + 1))
                pieces.append("]")
                yield P1, pieces
        if P2 > 0:
            alternatives = list(spec.transform(problem))
            for alt in alternatives:
                yield P2 / len(alternatives), ["M2(", (alt, depth + 1), ")"]
    if P3 > 0:
        yield P3, [f"{spec.labels[0]}({problem})"]
    if P4 > 0:
        yield P4, [f"{spec.labels[1]}({problem})"]


def _derivations(spec: PlannerSpec, root: str):
    counter = itertools.count()
    heap = [(Fraction(-1), next(counter), ((root, 1),))]
    while heap:
        neg_p, _, pieces = heapq.heappop(heap)
        slot = next((i for i, x in enumerate(pieces) if isinstance(x, tuple)), None)
        if slot is None:
            yield "".join(pieces), -neg_p
            continue
        problem, depth = pieces[slot]
        for factor, replacement in _expand(spec, problem, depth):
            new = pieces[:slot] + tuple(replacement) + pieces[slot + 1:]
            heapq.heappush(heap, (neg_p * factor, next(counter), new))


def planner_stream(spec: PlannerSpec, root: str = "problem") -> CandidateStream:
    """Complete solution trials for ``root`` by decreasing probability."""
    return CandidateStream(_derivations(spec, root), Fraction(1), "planner")
