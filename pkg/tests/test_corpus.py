"""
Tests over the bundled corpus: every diagram passes the full verify suite,
homology is independent of the outer region, and R3 moves on corpus diagrams
induce isomorphisms.
"""
import re

import pytest
from sympy import Matrix

from core.cli import compare_diagram, verify_diagram
from core.corpus import find_entry, load_corpus
from core.diagram import build_diagram
from core.differential import totalize
from core.homology import BigradedGroup, determinant, homology, is_thin
from core.models import RunConfig
from core.moves import parse_movie
from core.reidemeister import reidemeister_step, triangle_sites

CORPUS = load_corpus()
CFG = RunConfig(memoize=False)
KNOT_NAME = re.compile(r"^(\d+)_\d+$")


def _entries(max_crossings=None):
    entries = CORPUS
    if max_crossings is not None:
        entries = [e for e in CORPUS if 0 < e.pd_code().crossing_count <= max_crossings]
    return pytest.mark.parametrize("entry", entries, ids=[e.name for e in entries])


def _homology(entry) -> BigradedGroup:
    return homology(totalize(build_diagram(entry.pd_code()), memoize=False))


def _mirror_free_and_torsion(g: BigradedGroup):
    """Free part at (-h, -q); torsion moves to (1 - h, -q)."""
    free = {(-h, -q): r for (h, q), r in g.free_part().items()}
    torsion = {(1 - h, -q): t for (h, q), t in g.torsion_part().items()}
    return free, torsion


def _is_isomorphism(chain_map) -> bool:
    for data in chain_map.induced().values():
        free = data["free"]
        if free and (len(free) != len(free[0]) or abs(Matrix(free).det()) != 1):
            return False
    return True


def test_corpus_covers_small_knot_table():
    names = {e.name for e in CORPUS}
    table = {"3_1", "4_1"} | {f"5_{i}" for i in (1, 2)} | {f"6_{i}" for i in (1, 2, 3)}
    table |= {f"7_{i}" for i in range(1, 8)} | {f"8_{i}" for i in range(1, 22)}
    assert table <= names
    assert all(e.determinant is not None for e in CORPUS if e.name != "empty")


@_entries()
def test_corpus_entry_passes_verify(entry):
    report = verify_diagram(entry.name, entry.pd_code(), CFG, entry.expected, entry.determinant, entry.thin)
    assert report.error is None
    assert report.matches_plain
    assert report.verification.passed
    assert report.burnside is not None and report.burnside.passed
    if entry.expected is not None:
        assert report.poincare == entry.expected
    if entry.determinant is not None:
        assert report.matches_determinant
    if entry.thin:
        assert report.thin
    assert report.passed


@_entries()
def test_corpus_entry_shape(entry):
    pd = entry.pd_code()
    match = KNOT_NAME.match(entry.name)
    if match:
        assert pd.component_count == 1
        assert pd.crossing_count >= int(match.group(1))
    if entry.link:
        assert pd.component_count >= 2
    if entry.rational is not None or entry.pretzel is not None:
        assert pd.crossing_count == sum(abs(a) for a in entry.rational or entry.pretzel)


@_entries(max_crossings=6)
def test_outer_face_independence(entry):
    d = build_diagram(entry.pd_code())
    report = compare_diagram(d, CFG)
    assert report.passed, report.message
    assert len(report.outer_faces_checked) == len(d.regions) - len(d.unknot_regions)


def test_thin_knot_torsion_is_two():
    for name in ("3_1", "4_1", "5_2", "7_4", "8_5"):
        g = _homology(find_entry(CORPUS, name))
        assert is_thin(g)
        assert {t for orders in g.torsion_part().values() for t in orders} == {2}


def test_8_19_is_not_thin():
    g = _homology(find_entry(CORPUS, "8_19"))
    assert not is_thin(g)
    assert determinant(g) == 3


def test_pretzel_matches_torus_knot():
    """P(-2,3,3) and the closure of (s1 s1 s1 s2)^2 are the same knot up to mirror image."""
    braid = _homology(find_entry(CORPUS, "8_19"))
    pretzel = _homology(find_entry(CORPUS, "P(-2,3,3)"))
    direct = (pretzel.free_part(), pretzel.torsion_part())
    assert direct in ((braid.free_part(), braid.torsion_part()), _mirror_free_and_torsion(braid))


def test_determinant_of_split_and_empty_diagrams():
    assert determinant(_homology(find_entry(CORPUS, "two_unknots"))) == 0
    assert determinant(_homology(find_entry(CORPUS, "empty"))) is None


@pytest.mark.parametrize("name, sites", [("T(3,3)", 3), ("8_19", 2)])
def test_r3_on_corpus_diagrams(name, sites):
    """R3 at distinct triangles of a corpus diagram gives chain maps inducing isomorphisms."""
    c = totalize(build_diagram(find_entry(CORPUS, name).pd_code()), memoize=False)
    expected = homology(c)
    faces = triangle_sites(c.diagram)
    assert len(set(faces)) >= sites
    for face in faces[:sites]:
        step = parse_movie(f"r3 site={face}", initial=c.diagram.pd).steps[0]
        moved, m = reidemeister_step(c, step)
        assert m.is_chain_map()
        assert homology(moved) == expected
        assert _is_isomorphism(m)
