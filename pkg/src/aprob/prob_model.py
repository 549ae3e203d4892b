"""Symbol alphabets, smoothed probabilities, code lengths and composite symbols.

Probabilities are kept as :class:`fractions.Fraction` so that sums over an
alphabet are exactly one; code lengths in bits are floats.
"""
from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field, replace
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Mapping, Sequence

from .errors import DomainError

Symbol = str

CONTEXT_SCHEMAS = ("position", "token", "position+token")


def to_fraction(x) -> Fraction:
    """Exact rational for ints, fractions, ``"n/d"`` strings; floats by their decimal repr."""
    if isinstance(x, float):
        return Fraction(repr(x))
    return Fraction(x)


# ---------------------------------------------------------------------------
# code-length arithmetic
# ---------------------------------------------------------------------------

def code_length(p) -> float:
    """Ideal code length ``-log2(p)`` in bits for a probability in (0, 1]."""
    p = Fraction(p)
    if p <= 0 or p > 1:
        raise DomainError(f"probability must lie in (0, 1], got {p}")
    # log of numerator and denominator separately keeps tiny rationals finite
    return math.log2(p.denominator) - math.log2(p.numerator)


def kraft_sum(lengths: Iterable[int]) -> Fraction:
    """Exact ``sum(2**-l)`` over a list of non-negative integer lengths."""
    total = Fraction(0)
    for length in lengths:
        if length < 0 or int(length) != length:
            raise DomainError(f"code lengths must be non-negative integers, got {length}")
        total += Fraction(1, 2 ** int(length))
    return total


def single_length_equivalent(lengths: Iterable[int]) -> float:
    """Length of one code carrying the combined mass of several alternatives.

    Several codes for the same data of lengths ``l_i`` are worth
    ``-log2(sum 2**-l_i)`` bits together.
    """
    lengths = list(lengths)
    if not lengths:
        raise DomainError("need at least one code length")
    shift = min(lengths)
    return shift - math.log2(kraft_sum(l - shift for l in lengths))


def elias_gamma_length(n: int) -> int:
    """Bits in the Elias gamma code of a positive integer."""
    if n < 1:
        raise DomainError(f"Elias gamma codes positive integers only, got {n}")
    return 2 * (n.bit_length() - 1) + 1


def signed_gamma_length(z: int) -> int:
    """Elias gamma length for any integer, via the zigzag map 0,-1,1,-2,2,..."""
    zigzag = 2 * z if z >= 0 else -2 * z - 1
    return elias_gamma_length(zigzag + 1)


# ---------------------------------------------------------------------------
# alphabets and count models
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Alphabet:
    symbols: tuple[Symbol, ...]

    def __post_init__(self):
        symbols = tuple(self.symbols)
        object.__setattr__(self, "symbols", symbols)
        if not symbols:
            raise DomainError("alphabet must not be empty")
        if len(set(symbols)) != len(symbols):
            dupes = sorted(s for s, c in Counter(symbols).items() if c > 1)
            raise DomainError(f"duplicate symbols in alphabet: {dupes}")
        for s in symbols:
            if not isinstance(s, str) or not s or any(ch.isspace() for ch in s):
                raise DomainError(f"symbols must be non-empty tokens without whitespace, got {s!r}")

    @cached_property
    def _rank(self) -> dict[Symbol, int]:
        return {s: i for i, s in enumerate(self.symbols)}

    def index(self, symbol: Symbol) -> int:
        try:
            return self._rank[symbol]
        except KeyError:
            raise DomainError(f"unknown symbol {symbol!r}") from None

    def __contains__(self, symbol) -> bool:
        return symbol in self._rank

    def __len__(self) -> int:
        return len(self.symbols)

    def __iter__(self):
        return iter(self.symbols)

    def extend(self, new_symbols: Iterable[Symbol]) -> "Alphabet":
        extra = [s for s in dict.fromkeys(new_symbols) if s not in self]
        return Alphabet(self.symbols + tuple(extra)) if extra else self


@dataclass(frozen=True)
class SymbolModel:
    """Add-alpha smoothed unigram model over a fixed alphabet."""

    alphabet: Alphabet
    counts: tuple[int, ...] = ()
    smoothing: Fraction = Fraction(1)

    def __post_init__(self):
        counts = tuple(self.counts) or (0,) * len(self.alphabet)
        if len(counts) != len(self.alphabet):
            raise DomainError("counts must align with the alphabet")
        if any(c < 0 for c in counts):
            raise DomainError("counts must be non-negative")
        smoothing = to_fraction(self.smoothing)
        if smoothing <= 0:
            raise DomainError("smoothing must be positive")
        object.__setattr__(self, "counts", tuple(int(c) for c in counts))
        object.__setattr__(self, "smoothing", smoothing)

    @classmethod
    def uniform(cls, symbols, smoothing=1) -> "SymbolModel":
        alphabet = symbols if isinstance(symbols, Alphabet) else Alphabet(tuple(symbols))
        return cls(alphabet, (), to_fraction(smoothing))

    @classmethod
    def from_counts(cls, alphabet: Alphabet, counts: Mapping[Symbol, int], smoothing=1) -> "SymbolModel":
        for s in counts:
            alphabet.index(s)
        return cls(alphabet, tuple(counts.get(s, 0) for s in alphabet), to_fraction(smoothing))

    @property
    def total(self) -> int:
        return sum(self.counts)

    def count(self, symbol: Symbol) -> int:
        return self.counts[self.alphabet.index(symbol)]

    def probability(self, symbol: Symbol) -> Fraction:
        c = self.counts[self.alphabet.index(symbol)]
        return (c + self.smoothing) / (self.total + self.smoothing * len(self.alphabet))

    def sequence_probability(self, seq: Sequence[Symbol]) -> Fraction:
        p = Fraction(1)
        for s in seq:
            p *= self.probability(s)
        return p

    def observe(self, seq: Sequence[Symbol]) -> "SymbolModel":
        if not seq:
            return self
        counts = list(self.counts)
        for s in seq:
            counts[self.alphabet.index(s)] += 1
        return replace(self, counts=tuple(counts))

    def code_length(self, seq: Sequence[Symbol]) -> float:
        """Bits to code ``seq`` token by token with these counts frozen."""
        tally = Counter(seq)
        return math.fsum(n * code_length(self.probability(s)) for s, n in tally.items())

    def with_alphabet(self, alphabet: Alphabet) -> "SymbolModel":
        """Same counts over a superset alphabet; new symbols start at zero."""
        if alphabet.symbols[: len(self.alphabet)] != self.alphabet.symbols:
            raise DomainError("new alphabet must extend the old one")
        counts = self.counts + (0,) * (len(alphabet) - len(self.alphabet))
        return SymbolModel(alphabet, counts, self.smoothing)

    def count_map(self) -> dict[Symbol, int]:
        return dict(zip(self.alphabet.symbols, self.counts))


@dataclass(frozen=True)
class ConditionalModel:
    """One :class:`SymbolModel` per observed context, plus a pooled fallback.

    A context is built from the position of a token in its sequence and/or a
    conditioning token supplied alongside the sequence (``schema``). Contexts
    never observed fall back to ``fallback``, which pools every observation.
    """

    alphabet: Alphabet
    schema: str = "position"
    smoothing: Fraction = Fraction(1)
    contexts: Mapping[str, SymbolModel] = field(default_factory=dict)
    fallback: SymbolModel | None = None

    def __post_init__(self):
        if self.schema not in CONTEXT_SCHEMAS:
            raise DomainError(f"unknown context schema {self.schema!r}; expected one of {CONTEXT_SCHEMAS}")
        object.__setattr__(self, "smoothing", to_fraction(self.smoothing))
        if self.fallback is None:
            object.__setattr__(self, "fallback", SymbolModel(self.alphabet, (), self.smoothing))
        object.__setattr__(self, "contexts", dict(sorted(self.contexts.items())))

    def context_key(self, position: int, condition: Symbol | None = None) -> str:
        if self.schema == "position":
            return str(position)
        if self.schema == "token":
            return f"|{condition}"
        return f"{position}|{condition}"

    def model_for(self, position: int, condition: Symbol | None = None) -> SymbolModel:
        return self.contexts.get(self.context_key(position, condition), self.fallback)

    def probability(self, symbol: Symbol, position: int = 0, condition: Symbol | None = None) -> Fraction:
        return self.model_for(position, condition).probability(symbol)

    def sequence_probability(self, seq: Sequence[Symbol], condition: Symbol | None = None) -> Fraction:
        p = Fraction(1)
        for i, s in enumerate(seq):
            p *= self.probability(s, i, condition)
        return p

    def observe(self, seq: Sequence[Symbol], condition: Symbol | None = None) -> "ConditionalModel":
        if not seq:
            return self
        contexts = dict(self.contexts)
        for i, s in enumerate(seq):
            key = self.context_key(i, condition)
            base = contexts.get(key) or SymbolModel(self.alphabet, (), self.smoothing)
            contexts[key] = base.observe((s,))
        return replace(self, contexts=contexts, fallback=self.fallback.observe(seq))

    def with_alphabet(self, alphabet: Alphabet) -> "ConditionalModel":
        return replace(
            self,
            alphabet=alphabet,
            contexts={k: m.with_alphabet(alphabet) for k, m in self.contexts.items()},
            fallback=self.fallback.with_alphabet(alphabet),
        )


def symbol_probability(model: SymbolModel | ConditionalModel, symbol: Symbol, **context) -> Fraction:
    return model.probability(symbol, **context)


def sequence_probability(model, seq: Sequence[Symbol], condition: Symbol | None = None) -> Fraction:
    """Product of per-token probabilities with the model's counts frozen."""
    if isinstance(model, ConditionalModel):
        return model.sequence_probability(seq, condition)
    if isinstance(model, ProbabilityModel):
        model = model.symbol_model
    return model.sequence_probability(seq)


def observe(model, seq: Sequence[Symbol], condition: Symbol | None = None):
    if isinstance(model, ConditionalModel):
        return model.observe(seq, condition)
    if isinstance(model, ProbabilityModel):
        return model.observe(seq, condition)
    return model.observe(seq)


# ---------------------------------------------------------------------------
# composite symbols
# ---------------------------------------------------------------------------

def substitute(seq: Sequence[Symbol], phrase: Sequence[Symbol], symbol: Symbol) -> tuple[Symbol, ...]:
    """Replace non-overlapping occurrences of ``phrase``, scanning left to right."""
    phrase = tuple(phrase)
    n = len(phrase)
    out: list[Symbol] = []
    i = 0
    while i < len(seq):
        if tuple(seq[i:i + n]) == phrase:
            out.append(symbol)
            i += n
        else:
            out.append(seq[i])
            i += 1
    return tuple(out)


def composite_name(phrase: Sequence[Symbol]) -> Symbol:
    return "<" + "+".join(phrase) + ">"


@dataclass(frozen=True)
class CompositeTable:
    definitions: tuple[tuple[Symbol, tuple[Symbol, ...]], ...] = ()

    def __post_init__(self):
        object.__setattr__(
            self, "definitions", tuple((name, tuple(body)) for name, body in self.definitions)
        )

    @property
    def symbols(self) -> tuple[Symbol, ...]:
        return tuple(name for name, _ in self.definitions)

    def __len__(self) -> int:
        return len(self.definitions)

    def __contains__(self, symbol) -> bool:
        return any(name == symbol for name, _ in self.definitions)

    def body(self, symbol: Symbol) -> tuple[Symbol, ...]:
        for name, body in self.definitions:
            if name == symbol:
                return body
        raise DomainError(f"{symbol!r} is not a composite symbol")

    def define(self, name: Symbol, body: Sequence[Symbol], base: Alphabet) -> "CompositeTable":
        body = tuple(body)
        if len(body) < 2:
            raise DomainError("a composite needs a body of at least two symbols")
        known = set(base.symbols) | set(self.symbols)
        if name in known:
            raise DomainError(f"symbol {name!r} already defined")
        missing = [s for s in body if s not in known]
        if missing:
            raise DomainError(f"composite body uses undefined symbols {missing}")
        return CompositeTable(self.definitions + ((name, body),))

    @cached_property
    def _expansions(self) -> dict[Symbol, tuple[Symbol, ...]]:
        out: dict[Symbol, tuple[Symbol, ...]] = {}
        for name, body in self.definitions:
            # earlier definitions are already expanded, so this terminates
            out[name] = tuple(t for s in body for t in out.get(s, (s,)))
        return out

    def expand(self, symbol: Symbol) -> tuple[Symbol, ...]:
        return self._expansions.get(symbol, (symbol,))

    def expand_sequence(self, seq: Sequence[Symbol]) -> tuple[Symbol, ...]:
        return tuple(t for s in seq for t in self.expand(s))

    def encode(self, seq: Sequence[Symbol]) -> tuple[Symbol, ...]:
        """Apply every definition in order, as the corpus was re-encoded."""
        out = tuple(seq)
        for name, body in self.definitions:
            out = substitute(out, body, name)
        return out

    def definition_cost(self, base_size: int) -> float:
        """Bits to transmit the table.

        Each body is an Elias-gamma coded ``length - 1`` (bodies have at least
        two symbols) followed by its symbols coded uniformly over the symbols
        available when it was defined.
        """
        return math.fsum(
            elias_gamma_length(len(body) - 1) + len(body) * math.log2(base_size + i)
            for i, (_, body) in enumerate(self.definitions)
        )


# ---------------------------------------------------------------------------
# the knowledge-bearing model
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ProbabilityModel:
    """Composite table plus the corpus its statistics are counted from.

    ``corpus`` holds records already re-encoded with ``table``; symbol counts
    are always the token counts of that corpus. ``contexts`` keeps positional
    (or conditioned) statistics of the records in their raw, unencoded form.
    """

    base: Alphabet
    smoothing: Fraction = Fraction(1)
    table: CompositeTable = field(default_factory=CompositeTable)
    corpus: tuple[tuple[Symbol, ...], ...] = ()
    contexts: ConditionalModel | None = None

    def __post_init__(self):
        if not isinstance(self.base, Alphabet):
            object.__setattr__(self, "base", Alphabet(tuple(self.base)))
        object.__setattr__(self, "smoothing", to_fraction(self.smoothing))
        object.__setattr__(self, "corpus", tuple(tuple(r) for r in self.corpus))
        if self.contexts is None:
            object.__setattr__(self, "contexts", ConditionalModel(self.base, "position", self.smoothing))
        for record in self.corpus:
            for s in record:
                self.alphabet.index(s)

    @classmethod
    def empty(cls, symbols, smoothing=1, schema: str = "position") -> "ProbabilityModel":
        base = symbols if isinstance(symbols, Alphabet) else Alphabet(tuple(symbols))
        return cls(base, to_fraction(smoothing), CompositeTable(), (), ConditionalModel(base, schema, smoothing))

    @cached_property
    def alphabet(self) -> Alphabet:
        return Alphabet(self.base.symbols + self.table.symbols)

    @cached_property
    def symbol_model(self) -> SymbolModel:
        tally = Counter(s for record in self.corpus for s in record)
        return SymbolModel.from_counts(self.alphabet, tally, self.smoothing)

    def probability(self, symbol: Symbol) -> Fraction:
        return self.symbol_model.probability(symbol)

    def tokens(self) -> tuple[Symbol, ...]:
        return tuple(s for record in self.corpus for s in record)

    @property
    def model_cost(self) -> float:
        return self.table.definition_cost(len(self.base))

    @property
    def corpus_cost(self) -> float:
        return self.symbol_model.code_length(self.tokens())

    @property
    def description_length(self) -> float:
        return self.model_cost + self.corpus_cost

    def expanded_corpus(self) -> tuple[tuple[Symbol, ...], ...]:
        return tuple(self.table.expand_sequence(r) for r in self.corpus)

    def extend_base(self, symbols: Iterable[Symbol]) -> "ProbabilityModel":
        fresh = [s for s in dict.fromkeys(symbols) if s not in self.alphabet]
        if not fresh:
            return self
        base = self.base.extend(fresh)
        return replace(self, base=base, contexts=self.contexts.with_alphabet(base))

    def observe(self, record: Sequence[Symbol], condition: Symbol | None = None) -> "ProbabilityModel":
        """Append a raw (base-symbol) record, encoded with the current table."""
        record = tuple(record)
        if not record:
            return self
        for s in record:
            self.base.index(s)
        return replace(
            self,
            corpus=self.corpus + (self.table.encode(record),),
            contexts=self.contexts.observe(record, condition),
        )

    def with_corpus(self, records: Iterable[Sequence[Symbol]]) -> "ProbabilityModel":
        return replace(self, corpus=tuple(tuple(r) for r in records))


def total_description_length(model: ProbabilityModel, corpus: Sequence[Symbol] | None = None) -> float:
    """Model cost plus corpus cost, in bits.

    With no ``corpus`` the model's own bound corpus is priced. An explicit
    corpus is coded under the model's counts, frozen.
    """
    if corpus is None:
        return model.description_length
    return model.model_cost + model.symbol_model.code_length(tuple(corpus))


def define_composite(model: ProbabilityModel, phrase: Sequence[Symbol]) -> tuple[ProbabilityModel, float]:
    """Define ``phrase`` as a new symbol and re-encode the bound corpus.

    Returns the new model and the change in total description length.
    """
    phrase = tuple(phrase)
    if len(phrase) < 2:
        raise DomainError("phrase must contain at least two symbols")
    for s in phrase:
        model.alphabet.index(s)
    name = composite_name(phrase)
    while name in model.alphabet:
        name += "'"
    table = model.table.define(name, phrase, model.base)
    corpus = tuple(substitute(r, phrase, name) for r in model.corpus)
    after = replace(model, table=table, corpus=corpus)
    return after, after.description_length - model.description_length
