"""Shared fixture data for the test modules."""
from aprob.applications import parse_triple
from aprob.machines import EXPR_TOKENS, get_machine
from aprob.prob_model import ProbabilityModel
from aprob.search import Inversion
from aprob.update import SessionProblem

# the three worked rows: two additions and one multiplication
ALGEBRA_TRIPLES = [parse_triple(t) for t in ("35, 41, + : 76", "8, 9, × : 72", "-8, 1, + : -7")]

CLUSTER_POINTS = [[0.0], [0.1], [0.2], [10.0], [10.1], [10.2]]


def expr_problem(pid, rows):
    triples = [parse_triple(r) for r in rows]
    machine = get_machine("expr-check", examples=[(t.a, t.b, t.op) for t in triples])
    target = ",".join(str(t.result) for t in triples)
    return SessionProblem(pid, Inversion(machine, target), triples[0].op)


def session_seed_model() -> ProbabilityModel:
    """Knowledge that has already met R1 R2 in front of three operators."""
    model = ProbabilityModel.empty(EXPR_TOKENS)
    for rec in (("R1", "R2", "Mul"), ("R1", "R2", "Sub"), ("R1", "R2", "Div")):
        model = model.observe(rec)
    return model


def session_problems():
    return [
        expr_problem("add", ["35, 41, + : 76", "-8, 1, + : -7"]),
        expr_problem("add-again", ["2, 40, + : 42", "10, -3, + : 7"]),
    ]
