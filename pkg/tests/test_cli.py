import json
import subprocess
import sys
from fractions import Fraction

import pytest

from aprob import modelfile
from aprob.applications import analogy_score
from aprob.cli import main, parse_record
from aprob.errors import ModelFileError
from aprob.prob_model import ProbabilityModel, define_composite
from aprob.universal_prior import pm_estimate, predict_next
from aprob.update import compress_corpus


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def records(path):
    return [parse_record(line) for line in path.read_text().splitlines()]


def three_composite_model():
    model = ProbabilityModel.empty("abc").with_corpus(["abcabcab", "cab"])
    for phrase in (("a", "b"), ("<a+b>", "c"), ("c", "<a+b>")):
        model, _ = define_composite(model, phrase)
    return model


# --- golden outputs -----------------------------------------------------------

def test_predict_golden(capsys, tmp_path):
    out_file = tmp_path / "p.txt"
    code, out, _ = run(capsys, "predict", "--x", "1", "--depth", "6", "--out", str(out_file))
    assert code == 0
    assert "2/3 (0.666667)" in out
    (rec,) = records(out_file)
    assert Fraction(rec["p1"]) == predict_next("1", 6)
    assert abs(float(rec["p1_float"]) - 2 / 3) < 1e-9


def test_pm_golden(capsys, tmp_path):
    out_file = tmp_path / "pm.txt"
    code, out, _ = run(capsys, "pm", "--x", "11", "--depth", "4", "--out", str(out_file))
    assert code == 0
    assert "0.125" in out and "0101 0110" in out
    (rec,) = records(out_file)
    assert rec["programs"].split(",") == list(pm_estimate("11", 4).programs)
    assert Fraction(rec["mass"]) == Fraction(1, 8)


def test_analogy_golden(capsys, tmp_path):
    out_file = tmp_path / "a.txt"
    code, out, _ = run(capsys, "analogy", "--a", "100,103,103,105", "--b", "105,107,108", "--out", str(out_file))
    assert code == 0
    assert "1.28125" in out and "0.04296875" in out and "29.818182" in out
    (rec,) = records(out_file)
    assert Fraction(rec["ratio"]) == analogy_score([100, 103, 103, 105], [105, 107, 108]).ratio


def test_workers_do_not_change_bytes(tmp_path, capsys):
    outs = []
    for workers in ("1", "3"):
        f = tmp_path / f"w{workers}.txt"
        run(capsys, "pm", "--x", "0110", "--depth", "14", "--workers", workers, "--out", str(f))
        outs.append(f.read_bytes())
    assert outs[0] == outs[1]


# --- exit codes ---------------------------------------------------------------

def test_usage_errors_exit_2(capsys):
    assert run(capsys, "frobnicate")[0] == 2
    assert run(capsys, "predict", "--x", "1")[0] == 2
    assert run(capsys, "predict", "--x", "1", "--depth", "0")[0] == 2
    assert run(capsys, "analogy", "--a", "1,x", "--b", "2")[0] == 2
    assert run(capsys, "incorporate", "--pair", "a")[0] == 2


def test_domain_errors_exit_1(capsys, tmp_path):
    code, _, err = run(capsys, "predict", "--x", "111111", "--depth", "4")
    assert code == 1 and "depth" in err
    assert run(capsys, "pm", "--x", "12", "--depth", "4")[0] == 1
    assert run(capsys, "cluster", "--points", str(tmp_path / "missing.txt"), "--delta", "0.1")[0] == 1


def test_entry_point_subprocess():
    proc = subprocess.run([sys.executable, "-m", "aprob", "predict", "--x", "1", "--depth", "6"],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and "2/3" in proc.stdout
    proc = subprocess.run([sys.executable, "-m", "aprob"], capture_output=True, text=True)
    assert proc.returncode == 2 and "usage" in proc.stderr


# --- model files --------------------------------------------------------------

def test_model_round_trip(tmp_path):
    model = three_composite_model().observe(("a", "b", "c"))
    path = tmp_path / "m.json"
    modelfile.save_model(model, path)
    loaded = modelfile.load_model(path)
    assert loaded == model
    assert loaded.description_length == model.description_length
    corpus = list("abcabcabcab")
    assert loaded.table.encode(corpus) == model.table.encode(corpus)


def test_model_file_refusals(tmp_path):
    text = modelfile.dumps(three_composite_model())
    with pytest.raises(ModelFileError, match="line"):
        modelfile.loads(text[: len(text) // 2])
    doc = json.loads(text)
    with pytest.raises(ModelFileError, match="version"):
        modelfile.model_from_dict({**doc, "version": 99})
    with pytest.raises(ModelFileError, match="smoothing"):
        modelfile.model_from_dict({**doc, "smoothing": "0.5"})
    with pytest.raises(ModelFileError, match="alphabet"):
        modelfile.model_from_dict({k: v for k, v in doc.items() if k != "alphabet"})
    with pytest.raises(ModelFileError, match="counts"):
        modelfile.model_from_dict({**doc, "counts": {"a": 999}})


def test_truncated_model_file_nonzero_exit(capsys, tmp_path):
    path = tmp_path / "m.json"
    modelfile.save_model(three_composite_model(), path)
    path.write_text(path.read_text()[:50])
    code, _, err = run(capsys, "incorporate", "--model", str(path), "--pair", "a b")
    assert code == 1 and "malformed" in err


def test_env_model_path(capsys, tmp_path, monkeypatch):
    path = tmp_path / "m.json"
    modelfile.save_model(ProbabilityModel.empty("ab"), path)
    monkeypatch.setenv("APROB_MODEL", str(path))
    code, out, _ = run(capsys, "incorporate", "--pair", "a b a b")
    assert code == 0
    assert modelfile.load_model(path).expanded_corpus() == (("a", "b", "a", "b"),)


# --- compression and sessions -------------------------------------------------

def test_compress_command(capsys, tmp_path):
    corpus = tmp_path / "c.txt"
    corpus.write_text(" ".join("ab" * 100) + "\n")
    out_file, model_file = tmp_path / "r.txt", tmp_path / "m.json"
    code, out, _ = run(capsys, "compress", "--corpus", str(corpus), "--model-out", str(model_file),
                       "--out", str(out_file))
    assert code == 0 and "<a+b> := a b" in out
    rec = [r for r in records(out_file) if r["record"] == "compress"][0]
    _, ledger = compress_corpus(ProbabilityModel.empty("ab"), "ab" * 100)
    assert abs(float(rec["L_after"]) - ledger.L_after) < 1e-9
    assert modelfile.load_model(model_file).expanded_corpus() == (tuple("ab" * 100),)


def test_session_command(capsys, tmp_path):
    doc = {
        "seed_corpus": [["R1", "R2", "Mul"], ["R1", "R2", "Sub"], ["R1", "R2", "Div"]],
        "problems": [
            {"id": "one", "machine": "expr-check", "machine_args": {"examples": [[35, 41, "+"], [-8, 1, "+"]]},
             "target": "76,-7", "condition": "+"},
            {"id": "two", "machine": "expr-check", "machine_args": {"examples": [[2, 40, "+"], [10, -3, "+"]]},
             "target": "42,7", "condition": "+"},
        ],
    }
    problems = tmp_path / "s.json"
    problems.write_text(json.dumps(doc))
    out_file = tmp_path / "trace.txt"
    code, out, _ = run(capsys, "session", "--problems", str(problems), "--out", str(out_file))
    assert code == 0
    first, second = records(out_file)
    assert first["outcome"] == second["outcome"] == "solved"
    assert int(second["total_steps"]) <= int(first["total_steps"])
    again = tmp_path / "trace2.txt"
    run(capsys, "session", "--problems", str(problems), "--out", str(again))
    assert again.read_bytes() == out_file.read_bytes()


def test_search_and_optimize_commands(capsys, tmp_path):
    inv = tmp_path / "inv.json"
    inv.write_text(json.dumps({"machine": "square", "target": "121",
                               "stream": {"kind": "pairs", "candidates": [["10", "1/2"], ["11", "1/4"]], "mass": 1}}))
    out_file = tmp_path / "inv.txt"
    assert run(capsys, "search-invert", "--problem", str(inv), "--out", str(out_file))[0] == 0
    final = records(out_file)[-1]
    assert final["outcome"] == "solved" and final["solution"] == "11"

    opt = tmp_path / "opt.json"
    opt.write_text(json.dumps({"machine": "peak", "tau": 5000,
                               "stream": {"kind": "pairs", "candidates": [[str(i), "1/30"] for i in range(30)]}}))
    out_file = tmp_path / "opt.txt"
    assert run(capsys, "optimize", "--problem", str(opt), "--out", str(out_file))[0] == 0
    assert records(out_file)[-1]["best"] == "17"

    synth = tmp_path / "syn.json"
    synth.write_text(json.dumps({"stream": {"kind": "synthetic"}, "seed": 4}))
    assert run(capsys, "search-invert", "--problem", str(synth))[0] == 0

    # an inversion file handed to optimize is a domain error
    assert run(capsys, "optimize", "--problem", str(inv))[0] == 1


def test_induce_cluster_plan_commands(capsys, tmp_path):
    triples = tmp_path / "t.txt"
    triples.write_text("35, 41, + : 76\n8, 9, × : 72\n-8, 1, + : -7\n")
    code, out, _ = run(capsys, "induce", "--triples", str(triples))
    assert code == 0 and "R1 R2 Add" in out and "R1 R2 Mul" in out

    points = tmp_path / "p.txt"
    points.write_text("0.0\n0.1\n0.2\n10.0\n10.1\n10.2\n")
    code, out, _ = run(capsys, "cluster", "--points", str(points), "--delta", "0.1", "--max", "3")
    assert code == 0 and out.startswith("2 center(s)")

    spec = tmp_path / "plan.json"
    spec.write_text(json.dumps({"P": [0.4, 0, 0.5, 0.1], "max_depth": 2}))
    out_file = tmp_path / "plan.txt"
    assert run(capsys, "plan", "--spec", str(spec), "--root", "g", "--count", "3", "--out", str(out_file))[0] == 0
    first = records(out_file)[0]
    assert first["payload"] == "M3(g)" and Fraction(first["p"]) == Fraction(1, 2)
