"""Versioned JSON documents for :class:`ProbabilityModel`.

Rationals are written as ``"n/d"`` strings (or ``"n"``), never as decimals.
"""
from __future__ import annotations

import json
from fractions import Fraction
from pathlib import Path

from .errors import AprobError, ModelFileError
from .prob_model import Alphabet, CompositeTable, ConditionalModel, ProbabilityModel, SymbolModel

FORMAT = "aprob-model"
VERSION = 1


def _sparse(model: SymbolModel) -> dict[str, int]:
    return {s: c for s, c in model.count_map().items() if c}


def model_to_dict(model: ProbabilityModel) -> dict:
    ctx = model.contexts
    return {
        "format": FORMAT,
        "version": VERSION,
        "alphabet": list(model.base.symbols),
        "smoothing": str(model.smoothing),
        "counts": _sparse(model.symbol_model),
        "contexts": {
            "schema": ctx.schema,
            "smoothing": str(ctx.smoothing),
            "fallback": _sparse(ctx.fallback),
            "table": {key: _sparse(m) for key, m in ctx.contexts.items()},
        },
        "composites": [{"symbol": name, "body": list(body)} for name, body in model.table.definitions],
        "corpus": [list(r) for r in model.corpus],
    }


def dumps(model: ProbabilityModel) -> str:
    return json.dumps(model_to_dict(model), indent=2, ensure_ascii=False) + "\n"


def save_model(model: ProbabilityModel, path) -> None:
    Path(path).write_text(dumps(model), encoding="utf-8")


def _field(doc: dict, name: str, kind, where: str = ""):
    if name not in doc:
        raise ModelFileError(f"missing field {where}{name!r}")
    value = doc[name]
    if not isinstance(value, kind):
        raise ModelFileError(f"field {where}{name!r} has type {type(value).__name__}")
    return value


def _rational(text, where: str) -> Fraction:
    try:
        value = Fraction(str(text))
    except (ValueError, ZeroDivisionError):
        raise ModelFileError(f"field {where} is not a rational: {text!r}") from None
    if "." in str(text):
        raise ModelFileError(f"field {where} must be written as n/d, got {text!r}")
    return value


def _counts(alphabet: Alphabet, doc, where: str, smoothing) -> SymbolModel:
    if not isinstance(doc, dict) or not all(isinstance(v, int) and v >= 0 for v in doc.values()):
        raise ModelFileError(f"field {where} must map symbols to non-negative integers")
    try:
        return SymbolModel.from_counts(alphabet, doc, smoothing)
    except AprobError as exc:
        raise ModelFileError(f"field {where}: {exc}") from None


def model_from_dict(doc) -> ProbabilityModel:
    if not isinstance(doc, dict):
        raise ModelFileError("model document must be a JSON object")
    if doc.get("format") != FORMAT:
        raise ModelFileError(f"field 'format' must be {FORMAT!r}, got {doc.get('format')!r}")
    version = doc.get("version")
    if version != VERSION:
        raise ModelFileError(f"unsupported model version {version!r} (this reader knows {VERSION})")
    try:
        base = Alphabet(tuple(_field(doc, "alphabet", list)))
        smoothing = _rational(_field(doc, "smoothing", str), "'smoothing'")
        table = CompositeTable()
        for i, entry in enumerate(_field(doc, "composites", list)):
            where = f"composites[{i}]."
            if not isinstance(entry, dict):
                raise ModelFileError(f"field composites[{i}] must be an object")
            table = table.define(_field(entry, "symbol", str, where), _field(entry, "body", list, where), base)
        ctx_doc = _field(doc, "contexts", dict)
        ctx_smoothing = _rational(_field(ctx_doc, "smoothing", str, "contexts."), "'contexts.smoothing'")
        fallback = _counts(base, _field(ctx_doc, "fallback", dict, "contexts."), "'contexts.fallback'", ctx_smoothing)
        contexts = {
            key: _counts(base, counts, f"'contexts.table.{key}'", ctx_smoothing)
            for key, counts in _field(ctx_doc, "table", dict, "contexts.").items()
        }
        conditional = ConditionalModel(base, _field(ctx_doc, "schema", str, "contexts."), ctx_smoothing,
                                       contexts, fallback)
        corpus = _field(doc, "corpus", list)
        if not all(isinstance(r, list) for r in corpus):
            raise ModelFileError("field 'corpus' must be a list of token lists")
        model = ProbabilityModel(base, smoothing, table, tuple(tuple(r) for r in corpus), conditional)
    except ModelFileError:
        raise
    except AprobError as exc:
        raise ModelFileError(str(exc)) from None
    stored = _counts(model.alphabet, _field(doc, "counts", dict), "'counts'", smoothing)
    if stored != model.symbol_model:
        raise ModelFileError("field 'counts' disagrees with the token counts of 'corpus'")
    return model


def loads(text: str) -> ProbabilityModel:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelFileError(f"malformed JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    return model_from_dict(doc)


def load_model(path) -> ProbabilityModel:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ModelFileError(f"cannot read model file {path}: {exc.strerror}") from None
    return loads(text)
