"""Command-line driver.

Every subcommand prints a human-readable report; ``--out FILE`` also writes
one ``key=value`` record per result row. Exit status is 0 on success, 1 on
domain or contract errors and 2 on usage errors.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import shlex
import sys
from fractions import Fraction
from pathlib import Path

from . import modelfile
from .applications import PlannerSpec, analogy_score, induce_by_operator, mdl_cluster, parse_triple, planner_stream
from .applications.expr_induction import expr_model
from .errors import AprobError
from .machines import EXPR_TOKENS, get_machine
from .prob_model import ProbabilityModel, to_fraction
from .search import (CandidateStream, Inversion, Optimization, levin_search, optimize, planted_instance,
                     stream_from_model)
from .universal_prior import pm_estimate, predict_next
from .update import SessionProblem, compress_corpus, incorporate_solution, session

MODEL_ENV = "APROB_MODEL"


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# machine-readable records
# ---------------------------------------------------------------------------

def fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if value is None:
        return "none"
    if isinstance(value, Fraction):
        return str(value)
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, (list, tuple)):
        return shlex.quote(",".join(str(v) for v in value))
    return shlex.quote(str(value))


def record(kind: str, **fields) -> str:
    return " ".join([f"record={kind}"] + [f"{k}={fmt(v)}" for k, v in fields.items()])


def parse_record(line: str) -> dict[str, str]:
    return dict(part.split("=", 1) for part in shlex.split(line))


class Reporter:
    def __init__(self, out_path):
        self.out_path = out_path
        self.records: list[str] = []

    def say(self, text: str = "") -> None:
        print(text)

    def emit(self, kind: str, **fields) -> None:
        self.records.append(record(kind, **fields))

    def close(self) -> None:
        if self.out_path:
            Path(self.out_path).write_text("".join(r + "\n" for r in self.records), encoding="utf-8")


# ---------------------------------------------------------------------------
# input documents
# ---------------------------------------------------------------------------

def _read_json(path):
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise AprobError(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise AprobError(f"{path}: malformed JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None


def _read_lines(path) -> list[str]:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise AprobError(f"cannot read {path}: {exc.strerror}") from None
    return [line for line in text.splitlines() if line.strip()]


def _model_path(args):
    return getattr(args, "model", None) or os.environ.get(MODEL_ENV)


def _require(doc: dict, key: str, where: str):
    if key not in doc:
        raise AprobError(f"{where}: missing field {key!r}")
    return doc[key]


def build_problem(doc: dict, where: str = "problem"):
    machine = get_machine(_require(doc, "machine", where), **doc.get("machine_args", {}))
    if "target" in doc:
        return Inversion(machine, doc["target"])
    if "tau" in doc:
        return Optimization(machine, int(doc["tau"]))
    raise AprobError(f"{where}: need either 'target' (inversion) or 'tau' (optimization)")


def build_stream(spec: dict, seed: int, model: ProbabilityModel | None = None) -> tuple[CandidateStream, object]:
    """Returns the stream and, for ``synthetic`` streams, the planted problem."""
    kind = spec.get("kind", "model")
    if kind == "model":
        if model is None:
            model = ProbabilityModel.empty(_require(spec, "alphabet", "stream"), spec.get("smoothing", 1))
        return stream_from_model(model, int(spec.get("max_len", 3)), joiner=spec.get("joiner", " ")), None
    if kind == "pairs":
        pairs = [(str(a), to_fraction(p)) for a, p in _require(spec, "candidates", "stream")]
        mass = spec.get("mass")
        return CandidateStream.from_pairs(pairs, None if mass is None else to_fraction(mass)), None
    if kind == "synthetic":
        problem, stream = planted_instance(seed, int(spec.get("max_candidates", 64)), int(spec.get("max_cost", 100)))
        return stream, problem
    raise AprobError(f"unknown stream kind {kind!r}; expected model, pairs or synthetic")


def _load_model_arg(args) -> ProbabilityModel | None:
    path = _model_path(args)
    return modelfile.load_model(path) if path else None


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_pm(args, rep: Reporter) -> None:
    est = pm_estimate(args.x, args.depth, args.steps, args.workers)
    rep.say(f"P_M({args.x}) >= {est.mass} = {float(est.mass):.6g}  (depth {est.max_program_length}, "
            f"step budget {est.step_budget})")
    rep.say(f"programs ({len(est.programs)}): " + " ".join(p or "<empty>" for p in est.programs))
    rep.emit("pm", x=args.x, depth=est.max_program_length, steps=est.step_budget, mass=est.mass,
             mass_float=float(est.mass), programs=est.programs)


def cmd_predict(args, rep: Reporter) -> None:
    p = predict_next(args.x, args.depth, args.steps, args.workers)
    rep.say(f"P(next = 1 | {args.x or '<empty>'}) = {p} ({float(p):.6f})")
    rep.emit("predict", x=args.x, depth=args.depth, p1=p, p1_float=float(p))


def _problem_and_stream(args):
    doc = _read_json(args.problem)
    seed = int(doc.get("seed", args.seed))
    stream, planted = build_stream(doc.get("stream", {}), seed, _load_model_arg(args))
    problem = planted if planted is not None and "machine" not in doc else build_problem(doc)
    return doc, problem, stream


def _report_phases(report, rep: Reporter) -> None:
    rep.say(f"{'T':>10} {'tested':>8} {'steps':>10}")
    for ph in report.phases:
        rep.say(f"{ph.budget:>10} {ph.tested:>8} {ph.steps:>10}")
        rep.emit("phase", T=ph.budget, tested=ph.tested, steps=ph.steps)


def cmd_search_invert(args, rep: Reporter) -> None:
    doc, problem, stream = _problem_and_stream(args)
    if not isinstance(problem, Inversion):
        raise AprobError("search-invert needs an inversion problem (field 'target')")
    report = levin_search(problem, stream, int(doc.get("T0", args.T0)), doc.get("max_total", args.max_total))
    _report_phases(report, rep)
    rep.say(f"outcome: {report.outcome}   total steps: {report.total_steps}")
    if report.solution:
        rep.say(f"solution: {report.solution.payload!r}  p_j = {report.p_j}  t_j = {report.t_j}  "
                f"t_j/p_j = {float(report.t_over_p):.6g}  total/(t_j/p_j) = {report.bound_ratio:.4f}")
    rep.emit("search", outcome=report.outcome, solution=report.solution.payload if report.solution else None,
             p_j=report.p_j, t_j=report.t_j, total_steps=report.total_steps, bound_ratio=report.bound_ratio)


def cmd_optimize(args, rep: Reporter) -> None:
    doc, problem, stream = _problem_and_stream(args)
    if not isinstance(problem, Optimization):
        raise AprobError("optimize needs an optimization problem (field 'tau')")
    result = optimize(problem, stream, int(doc.get("T0", args.T0)))
    _report_phases(result.report, rep)
    if result.empty:
        rep.say(f"outcome: empty (no candidate finished within tau = {problem.tau})")
    else:
        rep.say(f"best: {result.payload!r}  value = {result.value}  ({result.report.outcome}, "
                f"{result.report.total_steps} steps)")
    rep.emit("optimize", outcome=result.report.outcome, best=result.payload, value=result.value,
             total_steps=result.report.total_steps)


def _save_if_asked(model, path, rep: Reporter) -> None:
    if path:
        modelfile.save_model(model, path)
        rep.say(f"model written to {path}")


def cmd_compress(args, rep: Reporter) -> None:
    records = [line.split() for line in _read_lines(args.corpus)]
    if not records:
        raise AprobError("corpus is empty")
    model = _load_model_arg(args)
    if model is None:
        alphabet = args.alphabet.split(",") if args.alphabet else list(dict.fromkeys(t for r in records for t in r))
        model = ProbabilityModel.empty(alphabet, to_fraction(args.smoothing))
    model, ledger = compress_corpus(model, records, args.budget)
    saving = 0.0 if ledger.L0 == 0 else 100 * (1 - ledger.L_after / ledger.L0)
    rep.say(f"L0 = {ledger.L0:.4f} bits -> L = {ledger.L_after:.4f} bits ({saving:.1f}% shorter), "
            f"{ledger.steps} pair trials")
    for name in ledger.composites:
        rep.say(f"  {name} := {' '.join(model.table.body(name))}")
        rep.emit("composite", symbol=name, body=model.table.body(name))
    rep.emit("compress", L0=ledger.L0, L_after=ledger.L_after, accepted=ledger.accepted, steps=ledger.steps)
    _save_if_asked(model, args.model_out, rep)


def cmd_incorporate(args, rep: Reporter) -> None:
    path = _model_path(args)
    if path:
        model = modelfile.load_model(path)
    elif args.alphabet:
        model = ProbabilityModel.empty(args.alphabet.split(","), to_fraction(args.smoothing))
    else:
        raise UsageError(f"incorporate needs --model, ${MODEL_ENV} or --alphabet")
    model, ledger = incorporate_solution(model, args.pair.split(), args.budget, args.condition)
    rep.say(f"L0 = {ledger.L0:.4f}  L_PS = {ledger.L_PS:.4f}  L_after = {ledger.L_after:.4f}  "
            f"accepted = {ledger.accepted}")
    for name in ledger.composites:
        rep.say(f"  {name} := {' '.join(model.table.body(name))}")
    rep.emit("incorporate", L0=ledger.L0, L_PS=ledger.L_PS, L_after=ledger.L_after, accepted=ledger.accepted,
             composites=ledger.composites)
    _save_if_asked(model, args.model_out or path, rep)


def session_from_doc(doc: dict, model: ProbabilityModel | None = None):
    if model is None:
        model = ProbabilityModel.empty(doc.get("alphabet", list(EXPR_TOKENS)), to_fraction(doc.get("smoothing", 1)))
        for rec in doc.get("seed_corpus", []):
            model = model.observe(rec)
    problems = [
        SessionProblem(str(p.get("id", i)), build_problem(p, f"problems[{i}]"), p.get("condition"))
        for i, p in enumerate(_require(doc, "problems", "session"))
    ]
    options = dict(max_len=int(doc.get("max_len", 3)), T0=int(doc.get("T0", 1)),
                   max_total=doc.get("max_total", 10 ** 7),
                   compression_factor=float(doc.get("compression_factor", 1.0)), joiner=doc.get("joiner", " "))
    return problems, model, options


def cmd_session(args, rep: Reporter) -> None:
    problems, model, options = session_from_doc(_read_json(args.problems), _load_model_arg(args))
    trace = session(problems, model, **options)
    rep.say(f"{'problem':<10} {'outcome':<16} {'t_j':>5} {'p_j':>12} {'steps':>9} {'L0':>9} {'L_PS':>8} "
            f"{'L_after':>9} accepted")
    for entry in trace.entries:
        r = entry.record()
        cells = [r["problem"], r["outcome"], r["t_j"], r["p_j"], r["total_steps"], r["L0"], r["L_PS"],
                 r["L_after"], r["accepted"]]
        shown = [f"{c:.3f}" if isinstance(c, float) else str(c) for c in cells]
        rep.say(f"{shown[0]:<10} {shown[1]:<16} {shown[2]:>5} {shown[3]:>12} {shown[4]:>9} {shown[5]:>9} "
                f"{shown[6]:>8} {shown[7]:>9} {shown[8]}")
        if entry.error:
            rep.say(f"  error: {entry.error}")
        rep.emit("session", **r)
    _save_if_asked(trace.model, args.model_out, rep)


def cmd_induce(args, rep: Reporter) -> None:
    examples = [parse_triple(line) for line in _read_lines(args.triples)]
    if not examples:
        raise AprobError("no examples given")
    results = induce_by_operator(examples, expr_model(), args.max_len, args.budget)
    for op, programs in results.items():
        rep.say(f"operator {op}: {len(programs)} consistent program(s)")
        for rank, prog in enumerate(programs, 1):
            rep.say(f"  {rank:>3}. {' '.join(prog.tokens):<16} prior {prog.prior}  posterior {prog.posterior}")
            rep.emit("induce", op=op, rank=rank, program=" ".join(prog.tokens), prior=prog.prior,
                     posterior=prog.posterior)


def _int_list(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"expected comma-separated integers, got {text!r}") from None


def cmd_analogy(args, rep: Reporter) -> None:
    score = analogy_score(_int_list(args.a), _int_list(args.b))
    s = score.shift
    rep.say(f"mass A = {score.mass_a} x 2^-{s} ({float(score.mass_a):.8g} x 2^-{s})")
    rep.say(f"mass B = {score.mass_b} x 2^-{s} ({float(score.mass_b):.8g} x 2^-{s})")
    rep.say(f"ratio  = {score.ratio} ({float(score.ratio):.6f})")
    rep.emit("analogy", shift=s, mass_a=score.mass_a, mass_b=score.mass_b, ratio=score.ratio,
             ratio_float=float(score.ratio))


def cmd_cluster(args, rep: Reporter) -> None:
    try:
        points = [[float(v) for v in line.split()] for line in _read_lines(args.points)]
    except ValueError as exc:
        raise AprobError(f"{args.points}: {exc}") from None
    if not points:
        raise AprobError("no points given")
    coding = mdl_cluster(points, args.max, args.delta, args.seed)
    rep.say(f"{coding.k} center(s), total {coding.total_bits:g} bits "
            f"(centers {coding.center_bits}, names {coding.naming_bits:g}, offsets {coding.residual_bits})")
    for j, c in enumerate(coding.center_points()):
        members = [i for i, a in enumerate(coding.assignments) if a == j]
        rep.say(f"  center {j}: {' '.join(f'{v:g}' for v in c)}  points {members}")
    rep.emit("cluster", centers=coding.k, total_bits=coding.total_bits, center_bits=coding.center_bits,
             naming_bits=coding.naming_bits, residual_bits=coding.residual_bits, assignments=coding.assignments)


def cmd_plan(args, rep: Reporter) -> None:
    spec = PlannerSpec.from_dict(_read_json(args.spec))
    for cand in planner_stream(spec, args.root).take(args.count):
        rep.say(f"{cand.index:>4}  {str(cand.p):>14}  {cand.payload}")
        rep.emit("plan", index=cand.index, p=cand.p, payload=cand.payload)


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

def _positive(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return value


def _positive_float(text: str) -> float:
    value = float(text)
    if not value > 0 or math.isinf(value):
        raise argparse.ArgumentTypeError("must be a positive number")
    return value


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help="also write key=value records to this file")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--workers", type=_positive, default=1, help="parallel workers; output is unchanged")

    parser = argparse.ArgumentParser(prog="aprob", description="Algorithmic-probability problem solving toolkit.")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", required=True)

    def add(name, func, help_text):
        p = sub.add_parser(name, parents=[common], help=help_text)
        p.set_defaults(func=func)
        return p

    for name, func, text in (("pm", cmd_pm, "estimate P_M(x) by enumeration"),
                             ("predict", cmd_predict, "probability that x continues with 1")):
        p = add(name, func, text)
        p.add_argument("--x", default="", help="binary prefix")
        p.add_argument("--depth", type=_positive, required=True, help="max program length in bits")
        p.add_argument("--steps", type=_positive, default=None, help="step budget per run")

    for name, func, text in (("search-invert", cmd_search_invert, "doubling search on an inversion problem"),
                             ("optimize", cmd_optimize, "time-limited optimization")):
        p = add(name, func, text)
        p.add_argument("--problem", required=True, help="problem JSON file")
        p.add_argument("--model", help=f"model file for model streams (default ${MODEL_ENV})")
        p.add_argument("--T0", type=_positive, default=1)
        p.add_argument("--max-total", type=_positive, default=10 ** 7)

    p = add("compress", cmd_compress, "define composite symbols over a corpus")
    p.add_argument("--corpus", required=True, help="one record per line, whitespace-separated tokens")
    p.add_argument("--model", help="start from this model's table and alphabet")
    p.add_argument("--alphabet", help="comma-separated base symbols (default: tokens in order of appearance)")
    p.add_argument("--smoothing", default="1")
    p.add_argument("--budget", type=_positive, default=None, help="max pair trials")
    p.add_argument("--model-out")

    p = add("incorporate", cmd_incorporate, "fold a solved pair into a model")
    p.add_argument("--model", help=f"model file, updated in place unless --model-out (default ${MODEL_ENV})")
    p.add_argument("--alphabet", help="start from an empty model over these comma-separated symbols")
    p.add_argument("--smoothing", default="1")
    p.add_argument("--pair", required=True, help="whitespace-separated tokens")
    p.add_argument("--condition")
    p.add_argument("--budget", type=_positive, default=None)
    p.add_argument("--model-out")

    p = add("session", cmd_session, "solve a list of problems, compressing after each")
    p.add_argument("--problems", required=True, help="session JSON file")
    p.add_argument("--model", help=f"starting model (default ${MODEL_ENV} or the file's alphabet)")
    p.add_argument("--model-out")

    p = add("induce", cmd_induce, "induce expression programs from 'a, b, op : result' lines")
    p.add_argument("--triples", required=True)
    p.add_argument("--max-len", type=_positive, default=3)
    p.add_argument("--budget", type=_positive, default=None)

    p = add("analogy", cmd_analogy, "compare two sets of description lengths")
    p.add_argument("--a", required=True, help="comma-separated lengths")
    p.add_argument("--b", required=True, help="comma-separated lengths")

    p = add("cluster", cmd_cluster, "MDL clustering of a points file")
    p.add_argument("--points", required=True, help="one point per line, space-separated coordinates")
    p.add_argument("--delta", type=_positive_float, required=True)
    p.add_argument("--max", type=_positive, default=3)

    p = add("plan", cmd_plan, "dump a planner stream")
    p.add_argument("--spec", required=True, help="planner JSON: P, max_depth, split, transform")
    p.add_argument("--root", default="problem")
    p.add_argument("--count", type=_positive, default=20)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    rep = Reporter(args.out)
    try:
        args.func(args, rep)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"aprob: error: {exc}", file=sys.stderr)
        return 2
    except AprobError as exc:
        print(f"aprob: error: {exc}", file=sys.stderr)
        return 1
    rep.close()
    return 0


if __name__ == "__main__":
    sys.exit(main())
