"""
Tests for validation functions.
"""
import os
import tempfile

import yaml

from core.validation import (
    validate_corpus_config,
    validate_corpus_yaml,
    validate_env_file,
    validate_movie_script,
    validate_pd_text
)


def test_validate_pd_text_valid():
    """Test validation of a well-formed PD code."""
    is_valid, errors = validate_pd_text("PD[X[1,4,2,5],X[3,6,4,1],X[5,2,6,3]]")
    assert is_valid
    assert errors == []


def test_validate_pd_text_reports_every_problem():
    """Test that multiplicity errors are listed per label."""
    is_valid, errors = validate_pd_text("PD[X[1,2,3,4]]")
    assert not is_valid
    assert len(errors) >= 1
    assert any("occurs 1 time" in error for error in errors)


def test_validate_pd_text_bad_outer_face():
    """Test validation with an outer face that does not exist."""
    is_valid, errors = validate_pd_text('{"crossings": [[1,4,2,5],[3,6,4,1],[5,2,6,3]], "outer_face": 17}')
    assert not is_valid
    assert errors


def test_validate_movie_script():
    """Test validation of movie scripts."""
    is_valid, errors = validate_movie_script("PD[];O[cw]\nbirth\nsaddle arcs=1,2\n")
    assert is_valid
    assert errors == []

    is_valid, errors = validate_movie_script("PD[]\nfold arcs=1,2\n")
    assert not is_valid
    assert "line 2" in errors[0]


def test_validate_movie_script_without_start():
    is_valid, errors = validate_movie_script("birth\n")
    assert not is_valid
    assert "starting diagram" in errors[0]


def test_validate_corpus_config_empty():
    """Test validation of empty configuration."""
    is_valid, errors = validate_corpus_config({})
    assert not is_valid
    assert len(errors) > 0
    assert "at least one" in errors[0].lower()


def test_validate_corpus_config_valid():
    """Test validation of valid configuration."""
    config = {
        "diagrams": [
            {"name": "unknot", "pd": "PD[];O[cw]", "expected": "q + q^-1"},
            {"name": "trefoil", "braid": [1, 1, 1], "strands": 2},
        ]
    }
    is_valid, errors = validate_corpus_config(config)
    assert is_valid
    assert len(errors) == 0


def test_validate_corpus_config_duplicate_names():
    config = {"diagrams": [{"name": "a", "pd": "PD[]"}, {"name": "a", "pd": "PD[]"}]}
    is_valid, errors = validate_corpus_config(config)
    assert not is_valid
    assert any("twice" in error for error in errors)


def test_validate_corpus_config_pd_and_braid():
    """Test validation with both sources given."""
    config = {"diagrams": [{"name": "x", "pd": "PD[]", "braid": [1], "strands": 2}]}
    is_valid, errors = validate_corpus_config(config)
    assert not is_valid
    assert any("exactly one" in error for error in errors)


def test_validate_corpus_config_bad_braid():
    config = {"diagrams": [{"name": "x", "braid": [1, 3], "strands": 3}]}
    is_valid, errors = validate_corpus_config(config)
    assert not is_valid
    assert errors[0].startswith("Diagram 'x'")


def test_validate_corpus_config_bad_rational():
    config = {"diagrams": [{"name": "x", "rational": [2, 0, 2]}]}
    is_valid, errors = validate_corpus_config(config)
    assert not is_valid
    assert errors[0].startswith("Diagram 'x'")


def test_validate_corpus_config_bad_pd():
    config = {"diagrams": [{"name": "broken", "pd": "PD[X[1,2,3,4]]"}]}
    is_valid, errors = validate_corpus_config(config)
    assert not is_valid
    assert all(error.startswith("Diagram 'broken'") for error in errors)


def test_validate_corpus_yaml():
    """Test validation of corpus YAML files."""
    with tempfile.TemporaryDirectory() as tmpdir:
        path = os.path.join(tmpdir, "corpus.yaml")
        with open(path, "w", encoding="utf-8") as f:
            yaml.safe_dump({"diagrams": [{"name": "unknot", "pd": "PD[];O[cw]"}]}, f)
        is_valid, errors = validate_corpus_yaml(path)
        assert is_valid
        assert errors == []

        with open(path, "w", encoding="utf-8") as f:
            f.write("diagrams: [unclosed\n")
        is_valid, errors = validate_corpus_yaml(path)
        assert not is_valid
        assert "YAML" in errors[0]

        is_valid, errors = validate_corpus_yaml(os.path.join(tmpdir, "missing.yaml"))
        assert not is_valid


def test_bundled_corpus_is_valid():
    is_valid, errors = validate_corpus_yaml(os.path.join(os.path.dirname(__file__), "..", "data", "corpus.yaml"))
    assert is_valid, errors


def test_validate_env_file():
    """Test validation of .env file."""
    with tempfile.TemporaryDirectory() as tmpdir:
        env_file = os.path.join(tmpdir, ".env")

        with open(env_file, "w") as f:
            f.write("FOAMKH_LOG_LEVEL=DEBUG\nFOAMKH_FORMAT=json\nFOAMKH_LEVEL=fast\nFOAMKH_THREADS=4\n")
        is_valid, errors = validate_env_file(env_file)
        assert is_valid
        assert len(errors) == 0

        with open(env_file, "w") as f:
            f.write("FOAMKH_FORMAT=xml\nFOAMKH_THREADS=0\n")
        is_valid, errors = validate_env_file(env_file)
        assert not is_valid
        assert len(errors) == 2

        is_valid, errors = validate_env_file(os.path.join(tmpdir, "nope.env"))
        assert not is_valid
        assert "not found" in errors[0]
