"""
Tests for the command line surface.
"""
import json
import os
import tempfile

import pytest
import yaml

from core import cli
from core.differential import ChainComplex

TREFOIL = "PD[X[1,4,2,5],X[3,6,4,1],X[5,2,6,3]]"


@pytest.fixture(autouse=True)
def clean_env(monkeypatch):
    for name in ("FOAMKH_LOG_LEVEL", "FOAMKH_THREADS", "FOAMKH_LEVEL", "FOAMKH_FORMAT", "FOAMKH_CORPUS"):
        monkeypatch.delenv(name, raising=False)


def _run(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_compute_empty_and_unknot(capsys):
    code, out, _ = _run(capsys, "compute", "PD[]")
    assert code == cli.EXIT_OK
    assert out.splitlines()[0] == "1"
    code, out, _ = _run(capsys, "compute", "PD[];O[cw]")
    assert out.splitlines()[0] == "q + q^-1"


def test_compute_json_is_deterministic(capsys):
    _, first, _ = _run(capsys, "compute", TREFOIL, "--format", "json")
    _, second, _ = _run(capsys, "compute", TREFOIL, "--format", "json", "--threads", "3")
    assert first == second
    payload = json.loads(first)
    assert payload["crossings"] == 3
    assert payload["poincare"] == "q^3 + q + t^2q^5 + t^3q^9 + t^3q^7[Z/2]"
    assert payload["euler"] == "-q^9 + q^5 + q^3 + q"


def test_compute_csv(capsys):
    code, out, _ = _run(capsys, "compute", "PD[];O[cw]", "--format", "csv")
    assert code == cli.EXIT_OK
    assert out.splitlines() == ["h,q,free_rank,torsion", "0,-1,1,", "0,1,1,"]


def test_compute_reads_file(capsys):
    with tempfile.TemporaryDirectory() as tmpdir:
        path = os.path.join(tmpdir, "trefoil.pd")
        with open(path, "w", encoding="utf-8") as f:
            f.write(TREFOIL + "\n")
        code, out, _ = _run(capsys, "compute", path)
    assert code == cli.EXIT_OK
    assert out.startswith("q^3 + q")


def test_bad_input_exits_one(capsys):
    code, out, err = _run(capsys, "compute", "PD[X[1,2,3,4]]")
    assert code == cli.EXIT_INPUT
    assert out == ""
    assert "occurs 1 time" in err
    code, _, _ = _run(capsys, "compute", TREFOIL, "--outer-face", "40")
    assert code == cli.EXIT_INPUT


def test_format_from_environment(capsys, monkeypatch):
    monkeypatch.setenv("FOAMKH_FORMAT", "json")
    _, out, _ = _run(capsys, "compute", "PD[]")
    assert json.loads(out)["poincare"] == "1"
    _, out, _ = _run(capsys, "compute", "PD[]", "--format", "text")
    assert out.strip().splitlines()[0] == "1"


def test_verify_single_diagram(capsys):
    code, out, _ = _run(capsys, "verify", TREFOIL, "--level", "fast")
    assert code == cli.EXIT_OK
    assert "PASS" in out
    assert "1/1 diagrams passed" in out


def test_verify_small_corpus_json(capsys):
    corpus = {"diagrams": [
        {"name": "unknot", "pd": "PD[];O[cw]", "expected": "q + q^-1"},
        {"name": "hopf", "braid": [1, 1], "strands": 2, "link": True},
    ]}
    with tempfile.TemporaryDirectory() as tmpdir:
        path = os.path.join(tmpdir, "corpus.yaml")
        with open(path, "w", encoding="utf-8") as f:
            yaml.safe_dump(corpus, f)
        code, out, _ = _run(capsys, "verify", "--corpus", path, "--format", "json")
    assert code == cli.EXIT_OK
    payload = json.loads(out)
    assert payload["passed"] is True
    assert [d["name"] for d in payload["diagrams"]] == ["unknot", "hopf"]
    assert "metrics" not in payload


def test_wrong_expectation_fails(capsys):
    corpus = {"diagrams": [{"name": "unknot", "pd": "PD[];O[cw]", "expected": "q^3"}]}
    with tempfile.TemporaryDirectory() as tmpdir:
        path = os.path.join(tmpdir, "corpus.yaml")
        with open(path, "w", encoding="utf-8") as f:
            yaml.safe_dump(corpus, f)
        code, out, _ = _run(capsys, "verify", "--corpus", path)
    assert code == cli.EXIT_VERIFY
    assert "expected q^3" in out


def test_wrong_determinant_and_thinness_fail(capsys):
    corpus = {"diagrams": [
        {"name": "3_1", "rational": [3], "determinant": 5},
        {"name": "8_19", "braid": [1, 1, 1, 2, 1, 1, 1, 2], "strands": 3, "determinant": 3, "thin": True},
        {"name": "4_1", "rational": [2, 2], "determinant": 5, "thin": True},
    ]}
    with tempfile.TemporaryDirectory() as tmpdir:
        path = os.path.join(tmpdir, "corpus.yaml")
        with open(path, "w", encoding="utf-8") as f:
            yaml.safe_dump(corpus, f)
        code, out, _ = _run(capsys, "verify", "--corpus", path, "--level", "fast", "--format", "json")
    assert code == cli.EXIT_VERIFY
    diagrams = {d["name"]: d for d in json.loads(out)["diagrams"]}
    assert diagrams["3_1"]["matches_determinant"] is False
    assert diagrams["8_19"]["matches_determinant"] is True
    assert diagrams["8_19"]["thin"] is False
    assert diagrams["4_1"]["passed"] is True


def test_injected_sign_fault_exits_two(capsys, monkeypatch):
    """Flipping one edge sign must be caught by face commutation."""
    original = cli._complex

    def corrupted(d, cfg, policy=None):
        c = original(d, cfg, policy)
        if policy is not None:
            return c
        signs = dict(c.signs)
        edge = sorted(signs)[0]
        signs[edge] = -signs[edge]
        return ChainComplex(c.cube, signs, c.sign_source)

    monkeypatch.setattr(cli, "_complex", corrupted)
    code, out, _ = _run(capsys, "verify", TREFOIL, "--level", "fast")
    assert code == cli.EXIT_VERIFY
    assert "C2 face commutation: FAILED" in out


def test_compare(capsys):
    code, out, _ = _run(capsys, "compare", TREFOIL)
    assert code == cli.EXIT_OK
    assert "phi found: True" in out
    assert "homology equal: True" in out


def test_movie(capsys):
    with tempfile.TemporaryDirectory() as tmpdir:
        script = os.path.join(tmpdir, "sphere.movie")
        with open(script, "w", encoding="utf-8") as f:
            f.write("PD[]\nbirth\ndeath comp=1\n")
        code, out, _ = _run(capsys, "movie", script)
        assert code == cli.EXIT_OK
        assert "= 0" in out

        empty = os.path.join(tmpdir, "empty.movie")
        with open(empty, "w", encoding="utf-8") as f:
            f.write("")
        code, out, _ = _run(capsys, "movie", empty, "--start", "PD[];O[cw]", "--format", "json")
        assert code == cli.EXIT_OK
        payload = json.loads(out)
        assert payload["steps"] == []
        assert payload["composite"]["zero"] is False


def test_movie_missing_file(capsys):
    code, _, err = _run(capsys, "movie", "/nonexistent/script.movie")
    assert code == cli.EXIT_INPUT
    assert "error:" in err


def test_burnside_dump(capsys):
    code, out, _ = _run(capsys, "burnside-dump", "PD[X[1,3,2,4],X[2,3,1,4]]")
    assert code == cli.EXIT_OK
    payload = json.loads(out)
    assert payload["passed"] is True
    assert payload["faces"][0]["ladybug"] is True

    code, out, _ = _run(capsys, "burnside-dump", TREFOIL, "--vertex", "010")
    assert code == cli.EXIT_OK
    assert json.loads(out)["vertex"] == [0, 1, 0]

    code, _, _ = _run(capsys, "burnside-dump", TREFOIL, "--vertex", "01")
    assert code == cli.EXIT_INPUT
