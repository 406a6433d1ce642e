"""
Tests for resolutions and cube-edge surgery data.
"""
import pytest

from core.cache import clear_cache, get_cache_stats
from core.cube import (
    MERGE, ORIENTED, SPLIT, UNZIP, WEB, ZIP, SurgeryError, cube_edges, cube_faces, flip, hdeg,
    qshift, resolution_to_dict, resolve, resolve_all, surgery_data, vertices
)
from core.diagram import build_diagram, canonical_flow, parse_pd

TREFOIL = "PD[X[1,4,2,5],X[3,6,4,1],X[5,2,6,3]]"
HOPF = "PD[X[1,3,2,4],X[3,1,4,2]]"


@pytest.fixture
def trefoil():
    d = build_diagram(parse_pd(TREFOIL))
    return d, canonical_flow(d)


@pytest.fixture
def hopf():
    d = build_diagram(parse_pd(HOPF))
    return d, canonical_flow(d)


def test_cube_counts():
    assert len(list(vertices(3))) == 8
    assert len(list(cube_edges(3))) == 12
    assert len(list(cube_faces(3))) == 6


def test_flip():
    assert flip((0, 0, 1), 0) == (1, 0, 1)
    assert flip((0, 0, 1), 1, 2) == (0, 1, 0)


def test_trefoil_extreme_resolutions(trefoil):
    """All-oriented has 2 circles, all-web has 3."""
    d, f = trefoil
    oriented = resolve(d, f, (0, 0, 0), memoize=False)
    web = resolve(d, f, (1, 1, 1), memoize=False)
    assert set(oriented.crossing_state) == {ORIENTED}
    assert set(web.crossing_state) == {WEB}
    assert oriented.circle_count == 2
    assert web.circle_count == 3


def test_circles_partition_segments(trefoil):
    d, f = trefoil
    for u, res in resolve_all(d, f, memoize=False).items():
        covered = sorted(s for c in res.circles for s in c)
        assert covered == d.segment_ids()
        assert list(res.circle_ids) == sorted(res.circle_ids)


def test_hopf_edges(hopf):
    d, f = hopf
    res = resolve_all(d, f, memoize=False)
    first = surgery_data(res[(0, 0)], res[(1, 0)], 0)
    second = surgery_data(res[(1, 0)], res[(1, 1)], 1)
    assert first.kind == MERGE
    assert second.kind == SPLIT
    assert len(first.sources) == 2 and len(first.targets) == 1
    assert len(second.sources) == 1 and len(second.targets) == 2


def test_negative_crossing_edges_unzip(hopf):
    """Both Hopf crossings are negative: bit 0 is the web, so every edge unzips."""
    d, f = hopf
    res = resolve_all(d, f, memoize=False)
    for u, i, v in cube_edges(2):
        assert surgery_data(res[u], res[v], i).direction == UNZIP


def test_positive_crossing_edges_zip(trefoil):
    d, f = trefoil
    res = resolve_all(d, f, memoize=False)
    for u, i, v in cube_edges(3):
        s = surgery_data(res[u], res[v], i)
        assert s.direction == ZIP
        assert s.site_flow in (1, -1)


def test_surgery_rejects_non_edges(trefoil):
    d, f = trefoil
    res = resolve_all(d, f, memoize=False)
    with pytest.raises(SurgeryError):
        surgery_data(res[(0, 0, 0)], res[(1, 1, 0)], 0)
    with pytest.raises(SurgeryError):
        surgery_data(res[(1, 0, 0)], res[(0, 0, 0)], 0)


def test_qshift_and_hdeg(trefoil, hopf):
    d, _ = trefoil
    assert qshift(d, (0, 0, 0)) == -3
    assert qshift(d, (1, 1, 1)) == -6
    assert hdeg(d, (1, 0, 1)) == 2
    h, _ = hopf
    assert qshift(h, (0, 0)) == 4
    assert hdeg(h, (0, 0)) == -2


def test_wrong_vertex_length(trefoil):
    d, f = trefoil
    with pytest.raises(ValueError):
        resolve(d, f, (0, 1))


def test_resolutions_are_memoised(trefoil):
    d, f = trefoil
    clear_cache()
    first = resolve(d, f, (0, 1, 0))
    second = resolve(d, f, (0, 1, 0))
    assert first is second
    assert get_cache_stats()["hits"] >= 1


def test_threaded_resolution_matches_serial(trefoil):
    d, f = trefoil
    serial = resolve_all(d, f, threads=1, memoize=False)
    threaded = resolve_all(d, f, threads=4, memoize=False)
    assert {u: r.circles for u, r in serial.items()} == {u: r.circles for u, r in threaded.items()}


def test_resolution_dump(trefoil):
    d, f = trefoil
    dump = resolution_to_dict(resolve(d, f, (1, 1, 1), memoize=False))
    assert dump["vertex"] == [1, 1, 1]
    assert len(dump["circles"]) == 3
    assert set(dump["web_left_flow"]) == {"0", "1", "2"}
