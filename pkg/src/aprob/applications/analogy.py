"""Comparing candidate set members by the total mass of their descriptions."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from ..errors import DomainError
from ..prob_model import kraft_sum


@dataclass(frozen=True)
class AnalogyScore:
    mass_a: Fraction  # scaled by 2**shift
    mass_b: Fraction
    shift: int
    ratio: Fraction

    @property
    def exact_a(self) -> Fraction:
        return self.mass_a / 2 ** self.shift

    @property
    def exact_b(self) -> Fraction:
        return self.mass_b / 2 ** self.shift


def analogy_score(lengths_a: Sequence[int], lengths_b: Sequence[int]) -> AnalogyScore:
    """Masses ``sum 2**-l`` of two description-length lists, and their ratio.

    Both masses are reported as multiples of ``2**-shift`` where ``shift`` is
    the shortest length in either list.
    """
    if not lengths_a or not lengths_b:
        raise DomainError("both length lists must be non-empty")
    shift = min(min(lengths_a), min(lengths_b))
    mass_a = kraft_sum(l - shift for l in lengths_a)
    mass_b = kraft_sum(l - shift for l in lengths_b)
    return AnalogyScore(mass_a, mass_b, shift, mass_a / mass_b)
