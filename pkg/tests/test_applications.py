import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from aprob.applications import (PlannerSpec, analogy_score, coding_bits, induce_by_operator, induce_expr,
                                mdl_cluster, parse_triple, planner_stream)
from aprob.applications.clustering import quantize
from aprob.applications.expr_induction import expr_model
from aprob.errors import DomainError
from aprob.machines import ExprFailure, run_expr
from aprob.prob_model import signed_gamma_length
from fixtures import ALGEBRA_TRIPLES, CLUSTER_POINTS

# --- expression induction -----------------------------------------------------


def test_parse_triple():
    t = parse_triple(" -8, 1, + : -7 ")
    assert (t.a, t.b, t.op, t.result) == (-8, 1, "+", -7)
    with pytest.raises(DomainError):
        parse_triple("1, 2 : 3")


def test_algebra_rows_rank_expected_programs_first():
    ranked = induce_by_operator(ALGEBRA_TRIPLES, expr_model())
    assert ranked["+"][0].tokens == ("R1", "R2", "Add")
    assert ranked["×"][0].tokens == ("R1", "R2", "Mul")
    assert ranked["+"][0].prior == ranked["×"][0].prior == Fraction(1, 343)
    for programs in ranked.values():
        assert sum(p.posterior for p in programs) == 1


def test_single_example_keeps_alternatives():
    found = induce_expr([parse_triple("2, 3, + : 6")])
    tokens = [p.tokens for p in found]
    assert ("R1", "R2", "Mul") in tokens
    assert len(tokens) > 1
    priors = [p.prior for p in found]
    assert priors == sorted(priors, reverse=True)


def test_observed_solutions_lift_first_position():
    model = expr_model("position")
    for op in ("Add", "Mul", "Add"):
        model = model.observe(["R1", "R2", op])
    assert model.probability("R1", 0) > Fraction(1, 7)


def test_conditioned_model_prefers_matching_operator():
    model = expr_model()
    model = model.observe(["R1", "R2", "Add"], "+").observe(["R1", "R2", "Mul"], "×")
    plus = induce_expr([parse_triple("2, 2, + : 4")], model)
    times = induce_expr([parse_triple("2, 2, × : 4")], model)
    # 2+2 = 2·2, so both rows admit both programs; the condition decides the order
    assert plus[0].tokens == ("R1", "R2", "Add")
    assert times[0].tokens == ("R1", "R2", "Mul")


def test_induce_budget_and_empty():
    assert induce_expr([parse_triple("2, 3, + : 999")]) == []
    assert induce_expr(ALGEBRA_TRIPLES[:1], budget=3) == []
    with pytest.raises(DomainError):
        induce_expr([])


@settings(max_examples=25, deadline=None)
@given(st.lists(st.tuples(st.integers(-9, 9), st.integers(-9, 9)), min_size=1, max_size=3),
       st.sampled_from(["Add", "Sub", "Mul"]))
def test_induced_programs_are_consistent(pairs, op):
    fn = {"Add": lambda a, b: a + b, "Sub": lambda a, b: a - b, "Mul": lambda a, b: a * b}[op]
    examples = [parse_triple(f"{a}, {b}, {op} : {fn(a, b)}") for a, b in pairs]
    found = induce_expr(examples, max_len=3)
    assert ("R1", "R2", op) in [p.tokens for p in found]
    for prog in found:
        for e in examples:
            try:
                assert run_expr(prog.tokens, e.a, e.b, e.op) == e.result
            except ExprFailure:
                pytest.fail(f"inconsistent program {prog.tokens}")


# --- planner ------------------------------------------------------------------

def test_planner_terminal_only():
    cands = list(planner_stream(PlannerSpec((0, 0, 0.7, 0.3), max_depth=1), "g"))
    assert [(c.payload, c.p) for c in cands] == [("M3(g)", Fraction(7, 10)), ("M4(g)", Fraction(3, 10))]


def test_planner_two_levels():
    spec = PlannerSpec((0.4, 0, 0.5, 0.1), max_depth=2)
    cands = list(planner_stream(spec, "g"))
    assert (cands[0].payload, cands[0].p) == ("M3(g)", Fraction(1, 2))
    split = {c.payload: c.p for c in cands}
    # both halves solved by M3 at the second level
    assert split["M1[M3(g.1),M3(g.2)]"] == Fraction(2, 5) * Fraction(1, 2) * Fraction(1, 2)
    assert sum(c.p for c in cands) <= 1


def test_planner_rejects_bad_specs():
    with pytest.raises(DomainError):
        PlannerSpec((0.5, 0.5, 0.5, 0))
    with pytest.raises(DomainError):
        PlannerSpec((0.5, 0, 0.5, 0), max_depth=0)
    with pytest.raises(DomainError):
        PlannerSpec((-0.1, 0, 0.5, 0))


def test_planner_from_dict_alternatives():
    spec = PlannerSpec.from_dict({"P": ["0", "1/2", "1/2", "0"], "max_depth": 2, "transform": {"g": ["h", "k"]}})
    payloads = {c.payload: c.p for c in planner_stream(spec, "g")}
    assert payloads["M2(M3(h))"] == payloads["M2(M3(k))"] == Fraction(1, 2) * Fraction(1, 2) * Fraction(1, 2)


def test_planner_long_stream_non_increasing():
    spec = PlannerSpec((0.4, 0.1, 0.4, 0.1), max_depth=6)
    ps = [c.p for c in planner_stream(spec, "g").take(200)]
    assert len(ps) == 200
    assert all(a >= b for a, b in zip(ps, ps[1:]))
    assert sum(ps) <= 1


# --- analogy ------------------------------------------------------------------

def test_analogy_worked_example():
    s = analogy_score([100, 103, 103, 105], [105, 107, 108])
    assert s.mass_a == Fraction(41, 32) and float(s.mass_a) == 1.28125
    assert s.mass_b == Fraction(11, 256) and float(s.mass_b) == 0.04296875
    assert s.exact_a == Fraction(41, 32) / 2 ** 100
    assert float(s.ratio) == pytest.approx(29.818, abs=1e-3)


def test_analogy_trivial_cases():
    assert analogy_score([4, 7], [4, 7]).ratio == 1
    assert analogy_score([1], [2]).ratio == 2
    with pytest.raises(DomainError):
        analogy_score([], [1])


@given(st.lists(st.integers(0, 60), min_size=1, max_size=6), st.lists(st.integers(0, 60), min_size=1, max_size=6),
       st.integers(0, 500))
def test_analogy_shift_invariance(a, b, c):
    assert analogy_score(a, b).ratio == analogy_score([x + c for x in a], [x + c for x in b]).ratio


# --- clustering ---------------------------------------------------------------

def formula_bits(points, coding):
    """Re-evaluate the two-part length from scratch, one coordinate at a time."""
    bits = sum(signed_gamma_length(z) for c in coding.centers for z in c)
    bits += len(points) * math.log2(coding.k)
    for point, label in zip(points, coding.assignments):
        for x, c in zip(point, coding.centers[label]):
            bits += signed_gamma_length(math.floor(x / coding.delta + 0.5) - c)
    return bits


def test_two_clusters_beat_one():
    best = mdl_cluster(CLUSTER_POINTS, 3, 0.1)
    one = mdl_cluster(CLUSTER_POINTS, 1, 0.1)
    assert best.k == 2
    assert best.total_bits < one.total_bits
    assert best.total_bits == formula_bits(CLUSTER_POINTS, best)
    assert one.total_bits == formula_bits(CLUSTER_POINTS, one)


def test_single_point_and_equal_points():
    single = mdl_cluster([[3.0, 4.0]], 3, 0.5)
    assert single.k == 1 and single.assignments == (0,)
    assert single.residual_bits == 2  # two zero offsets, one bit each
    same = mdl_cluster([[1.0]] * 5, 4, 0.1)
    assert same.k == 1


def test_cluster_domain_errors():
    with pytest.raises(DomainError):
        mdl_cluster(CLUSTER_POINTS, 2, 0)
    with pytest.raises(DomainError):
        mdl_cluster([], 2, 0.1)


def test_quantize_rounds_half_up():
    assert quantize([0.05, 0.149, -0.05], 0.1).tolist() == [1, 1, 0]


@settings(max_examples=30, deadline=None)
@given(st.lists(st.tuples(st.floats(-20, 20), st.floats(-20, 20)), min_size=1, max_size=12),
       st.integers(1, 4), st.sampled_from([0.25, 0.5, 1.0]))
def test_cluster_self_consistency(points, max_k, delta):
    coding = mdl_cluster(points, max_k, delta, seed=3)
    assert len(coding.assignments) == len(points)
    assert set(coding.assignments) == set(range(coding.k))
    assert coding.total_bits == pytest.approx(formula_bits(points, coding))
    assert sum(coding_bits(points, coding.centers, coding.assignments, delta)) == pytest.approx(coding.total_bits)
    assert coding.total_bits <= mdl_cluster(points, 1, delta, seed=3).total_bits


def test_cluster_is_seeded():
    pts = np.random.default_rng(0).normal(size=(20, 2)).tolist()
    assert mdl_cluster(pts, 3, 0.2, seed=7) == mdl_cluster(pts, 3, 0.2, seed=7)
