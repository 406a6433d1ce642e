"""
Tests for the Morse cobordism maps and movie scripts.
"""
import pytest

from core.chain_map import ChainMap
from core.diagram import build_diagram, parse_pd
from core.differential import totalize
from core.generators import ONE, X
from core.homology import homology, poincare_string
from core.moves import (
    MovieError, apply_step, birth_map, death_map, evaluate_movie, parse_movie, plan_saddle, saddle_map
)

TREFOIL = "PD[X[1,4,2,5],X[3,6,4,1],X[5,2,6,3]]"
HOPF_AND_CIRCLE = "PD[X[1,3,2,4],X[3,1,4,2]];O[cw]"


def _complex(text):
    return totalize(build_diagram(parse_pd(text)), memoize=False)


def _is_signed_identity(m: ChainMap) -> bool:
    for sign in (1, -1):
        if all(m.block(h) == ChainMap.identity(m.source).block(h).scale(sign) for h in m.source.hdegs()):
            return True
    return False


def test_birth_from_empty():
    """The new circle is labelled One, raising q by one."""
    c = _complex("PD[]")
    c2, m = birth_map(c)
    assert c2.diagram.n == 0
    assert len(c2.diagram.pd.unknots) == 1
    assert m.qshift == 1
    assert m.is_chain_map()
    entries = list(m.block(0).entries.items())
    assert len(entries) == 1
    (row, _), value = entries[0]
    assert value == 1
    assert c2.generators[0][row].labels[0][1] == ONE


def test_death_kills_one():
    c = _complex("PD[];O[cw]")
    c2, m = death_map(c, 1)
    assert c2.diagram.pd.unknots == ()
    block = m.block(0)
    ones = [i for i, g in enumerate(c.generators[0]) if g.labels[0][1] == ONE]
    xs = [i for i, g in enumerate(c.generators[0]) if g.labels[0][1] == X]
    assert all(block[(0, i)] == 0 for i in ones)
    assert all(abs(block[(0, i)]) == 1 for i in xs)


def test_sphere_evaluates_to_zero():
    c = _complex("PD[]")
    c2, born = birth_map(c)
    _, dead = death_map(c2, 1)
    assert born.then(dead).is_zero()


def test_birth_then_merge_is_identity():
    c = _complex("PD[];O[cw]")
    c2, born = birth_map(c)
    c3, merged = saddle_map(c2, 1, 2)
    assert len(c3.diagram.pd.unknots) == 1
    assert _is_signed_identity(born.then(merged))


def test_death_rejects_crossing_component():
    with pytest.raises(MovieError):
        death_map(_complex(TREFOIL), 1)


def test_birth_rejects_missing_region():
    with pytest.raises(MovieError):
        birth_map(_complex(TREFOIL), 42)


def test_split_of_circle_beside_hopf_is_chain_map():
    c = _complex(HOPF_AND_CIRCLE)
    c2, m = saddle_map(c, 5, 5)
    assert len(c2.diagram.pd.unknots) == 2
    assert m.qshift == -1
    assert m.failures() == []


def test_merge_beside_hopf_is_chain_map():
    c = _complex(HOPF_AND_CIRCLE)
    c2, born = birth_map(c)
    c3, merged = saddle_map(c2, 5, 6)
    assert born.is_chain_map()
    assert merged.is_chain_map()
    assert _is_signed_identity(born.then(merged))


def test_saddle_between_crossing_arcs():
    """Two arcs running the same way around one region."""
    d = build_diagram(parse_pd(TREFOIL))
    pairs = []
    for region in d.regions:
        arcs = sorted(a for a in d.arcs if d.left_region(a) == region.id)
        if len(arcs) >= 2:
            pairs.append((arcs[0], arcs[1]))
    assert pairs
    a, b = pairs[0]
    c = totalize(d, memoize=False)
    c2, m = saddle_map(c, a, b)
    assert m.qshift == -1
    assert m.failures() == []
    assert c2.diagram.n == 3


def test_saddle_errors():
    d = build_diagram(parse_pd(TREFOIL))
    with pytest.raises(MovieError):
        plan_saddle(d, 1, 1)
    with pytest.raises(MovieError):
        plan_saddle(d, 1, 99)


def test_parse_movie():
    movie = parse_movie("PD[];O[cw]\n# comment\nbirth\nsaddle arcs=1,2\n\ndeath comp=1\n")
    assert [s.kind for s in movie.steps] == ["birth", "saddle", "death"]
    assert movie.steps[1].two("arcs") == (1, 2)
    assert movie.steps[2].line == 6


def test_parse_movie_errors():
    with pytest.raises(MovieError) as exc:
        parse_movie("PD[]\nteleport")
    assert "line 2" in str(exc.value)
    with pytest.raises(MovieError):
        parse_movie("PD[]\nsaddle")
    with pytest.raises(MovieError):
        parse_movie("birth")


def test_parse_movie_reidemeister_steps():
    movie = parse_movie("r1+ arc=1\nr2 arcs=1,2 face=0\nr3 site=4\nr1 undo crossing=2\nr2 undo crossings=1,2",
                        initial=parse_pd(TREFOIL))
    assert [s.kind for s in movie.steps] == ["r1+", "r2", "r3", "r1 undo", "r2 undo"]
    assert movie.steps[1].params["face"] == [0]


def test_empty_movie_is_identity():
    result = evaluate_movie(parse_movie("PD[];O[cw]"))
    assert result.maps == []
    assert _is_signed_identity(result.composite)


def test_movie_births_and_merges():
    result = evaluate_movie(parse_movie("PD[]\nbirth\nbirth\nsaddle arcs=1,2\ndeath comp=1\n"))
    assert len(result.complexes) == 5
    assert [r.target_crossings for r in result.reports] == [0, 0, 0, 0]
    assert poincare_string(homology(result.complexes[-1])) == "1"
    assert all(m.is_chain_map() for m in result.maps)


def test_apply_step_dispatches_morse_moves():
    c = _complex("PD[]")
    movie = parse_movie("PD[]\nbirth")
    c2, m = apply_step(c, movie.steps[0])
    assert len(c2.diagram.pd.unknots) == 1
