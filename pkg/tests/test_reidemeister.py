"""
Tests for Reidemeister moves: diagram surgery, Gaussian elimination and the
induced chain maps.
"""
import pytest
from sympy import Matrix

from core.diagram import braid_closure_pd, build_diagram, parse_pd
from core.differential import totalize
from core.homology import homology, poincare_string
from core.moves import MovieError, birth_pd, evaluate_movie, parse_movie
from core.reidemeister import (
    Elimination, EliminationError, bigon_arcs, bigon_sites, insert_bigon, insert_kink, kink_sites,
    reidemeister_step, triangle, triangle_move, triangle_sites, undo_bigon, undo_kink
)

TREFOIL = "PD[X[1,4,2,5],X[3,6,4,1],X[5,2,6,3]]"
UNKNOT = "PD[];O[cw]"


def _complex(pd):
    if isinstance(pd, str):
        pd = parse_pd(pd)
    return totalize(build_diagram(pd), memoize=False)


def _step(c, line):
    return reidemeister_step(c, parse_movie(line, initial=c.diagram.pd).steps[0])


def _is_isomorphism(chain_map) -> bool:
    """Every free block of the induced map is square with determinant +-1."""
    for data in chain_map.induced().values():
        free = data["free"]
        if free and (len(free) != len(free[0]) or abs(Matrix(free).det()) != 1):
            return False
    return True


def test_insert_kink_on_unknot():
    d = build_diagram(parse_pd(UNKNOT))
    pd, site = insert_kink(d, 1, 1)
    assert pd.crossings == ((1, 2, 2, 1),)
    assert pd.unknots == ()
    assert site.loop == 2
    assert site.seg_map == {1: 1, 2: None}


def test_insert_kink_on_arc_appends_crossing():
    d = build_diagram(parse_pd(TREFOIL))
    pd, site = insert_kink(d, 1, -1)
    assert len(pd.crossings) == 4
    assert pd.crossings[3] == (1, 8, 7, 7)
    d2 = build_diagram(pd)
    assert d2.crossings[3].sign < 0
    assert kink_sites(d2) == [3]


@pytest.mark.parametrize("kind", ["r1+", "r1-"])
def test_kink_maps_are_quasi_isomorphisms(kind):
    c = _complex(UNKNOT)
    big, m = _step(c, f"{kind} arc=1")
    assert big.diagram.n == 1
    assert m.failures() == []
    assert poincare_string(homology(big)) == "q + q^-1"
    assert _is_isomorphism(m)


@pytest.mark.parametrize("kind", ["r1+", "r1-"])
@pytest.mark.parametrize("arc", [1, 3, 5])
def test_kink_on_trefoil_arc(kind, arc):
    c = _complex(TREFOIL)
    big, m = _step(c, f"{kind} arc={arc}")
    assert m.is_chain_map()
    assert homology(big) == homology(c)
    assert _is_isomorphism(m)


def test_undo_kink():
    c = _complex("PD[X[1,2,2,1]]")
    small, m = _step(c, "r1 undo crossing=1")
    assert small.diagram.n == 0
    assert len(small.diagram.pd.unknots) == 1
    assert m.is_chain_map()
    assert _is_isomorphism(m)


@pytest.mark.parametrize("code, kind", [("PD[X[1,2,2,1]]", "r1+"), ("PD[X[1,1,2,2]]", "r1-")])
def test_undo_lone_kink(code, kind):
    """Both edges of a lone curl are loops; the one through slot 2 is removed."""
    d = build_diagram(parse_pd(code))
    pd, site = undo_kink(d, 0)
    assert site.kind == kind
    assert site.loop == 2
    assert site.seg_map == {1: 1, 2: None}
    assert pd.crossings == ()
    assert len(pd.unknots) == 1
    small, m = _step(_complex(code), "r1 undo crossing=1")
    assert poincare_string(homology(small)) == "q + q^-1"
    assert _is_isomorphism(m)


@pytest.mark.parametrize("kind", ["r1+", "r1-"])
def test_kink_then_undo_movie(kind):
    result = evaluate_movie(parse_movie(f"PD[];O[cw]\n{kind} arc=1\nr1 undo crossing=1\n"))
    assert result.complexes[1].diagram.n == 1
    assert result.complexes[-1].diagram.n == 0
    assert all(m.is_chain_map() for m in result.maps)
    assert _is_isomorphism(result.composite)


def test_undo_kink_rejects_plain_crossing():
    d = build_diagram(parse_pd(TREFOIL))
    with pytest.raises(MovieError):
        undo_kink(d, 0)
    with pytest.raises(MovieError):
        undo_kink(d, 7)


def test_kink_needs_outer_circles():
    d0 = build_diagram(parse_pd(UNKNOT))
    d = build_diagram(birth_pd(d0.pd, d0.unknot_regions[0]))
    assert d.unknot_hosts[1] != d.outer
    with pytest.raises(MovieError):
        insert_kink(d, 1, 1)


def test_r2_insert_and_undo():
    d = build_diagram(parse_pd(TREFOIL))
    a, b, face = bigon_sites(d)[0]
    pd, site = insert_bigon(d, a, b, face)
    assert len(pd.crossings) == 5
    assert site.crossings == (3, 4)
    d2 = build_diagram(pd)
    assert d2.crossings[3].sign != d2.crossings[4].sign
    assert bigon_arcs(d2, 3, 4) is not None
    back, _ = undo_bigon(d2, 3, 4)
    assert build_diagram(back).n == 3


@pytest.mark.parametrize("index", [0, 1, 2])
def test_r2_maps(index):
    c = _complex(TREFOIL)
    a, b, face = bigon_sites(c.diagram)[index]
    big, up = _step(c, f"r2 arcs={a},{b} face={face}")
    assert up.is_chain_map()
    assert homology(big) == homology(c)
    assert _is_isomorphism(up)
    small, down = _step(big, "r2 undo crossings=4,5")
    assert down.is_chain_map()
    assert homology(small) == homology(c)
    assert _is_isomorphism(up.then(down))


def test_r2_rejects_bad_input():
    d = build_diagram(parse_pd(TREFOIL))
    with pytest.raises(MovieError):
        insert_bigon(d, 1, 1)
    with pytest.raises(MovieError):
        insert_bigon(d, 1, 99)
    with pytest.raises(MovieError):
        undo_bigon(d, 0, 1)


def test_triangle_roles():
    d = build_diagram(braid_closure_pd([1, 2, 1], 3))
    sites = triangle_sites(d)
    assert sites
    tri = triangle(d, face=sites[0])
    assert len({tri.bottom, tri.top, tri.middle}) == 3
    assert {tri.p, tri.q, tri.c} == {0, 1, 2}
    assert tri.corner_bit in (0, 1)


def test_triangle_rejects_alternating_triangle():
    """Every edge of an alternating triangle passes over at one end and under at the other."""
    d = build_diagram(parse_pd(TREFOIL))
    outer = d.outer
    with pytest.raises(MovieError):
        triangle(d, face=outer)


def test_r3_moves_are_quasi_isomorphisms():
    """Every triangle of the closure of s1 s2 s1 gives an invertible induced map."""
    c = _complex(braid_closure_pd([1, 2, 1], 3))
    expected = homology(c)
    for face in triangle_sites(c.diagram):
        pd, site, _ = triangle_move(c.diagram, face)
        assert len(pd.crossings) == 3
        assert len(site.internal) == 3
        c2, m = _step(c, f"r3 site={face}")
        assert m.is_chain_map()
        assert homology(c2) == expected
        assert _is_isomorphism(m)


def test_movie_with_reidemeister_steps():
    result = evaluate_movie(parse_movie("PD[];O[cw]\nr1+ arc=1\nr1 undo crossing=1\n"))
    assert len(result.maps) == 2
    assert poincare_string(homology(result.complexes[-1])) == "q + q^-1"
    assert _is_isomorphism(result.composite)


def test_elimination_of_unit_pivot():
    """Cancelling the first differential entry of the unknot-with-kink complex."""
    c = _complex("PD[X[1,2,2,1]]")
    elim = Elimination(c)
    pairs = [(x, y) for x, row in elim.out.items() for y, v in row.items() if abs(v) == 1]
    assert pairs
    b, target = pairs[0]
    elim.eliminate(b, target)
    assert b not in elim.alive and target not in elim.alive
    assert set(elim.project({target: 1})) <= elim.alive
    assert elim.include(next(iter(elim.alive)))


def test_elimination_rejects_non_unit():
    c = _complex("PD[X[1,2,2,1]]")
    elim = Elimination(c)
    x, y = sorted(elim.out)[:2]
    elim.out[x][y] = 2
    with pytest.raises(EliminationError):
        elim.eliminate(x, y)
