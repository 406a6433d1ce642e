"""
Tests for integer homology, Poincare strings and explicit homology bases.
"""
import csv
import io
import json

import pytest

from core.diagram import braid_closure_pd, build_diagram, mirror_pd, parse_pd
from core.differential import PLAIN, totalize
from core.homology import (
    BigradedGroup, HomologyBasis, Summand, euler_characteristic, homology, homology_mod_p,
    induced_matrix, laurent_string, matrix_invariants, poincare_string, prime_power_split, to_csv,
    to_json, torsion_images, universal_coefficient_ranks
)
from core.linalg import SparseMatrix

TREFOIL = "PD[X[1,4,2,5],X[3,6,4,1],X[5,2,6,3]]"
FIGURE_EIGHT = "PD[X[4,2,5,1],X[8,6,1,5],X[6,3,7,4],X[2,7,3,8]]"


def _complex(text, **kwargs):
    return totalize(build_diagram(parse_pd(text)), memoize=False, **kwargs)


@pytest.fixture(scope="module")
def trefoil():
    c = _complex(TREFOIL)
    return c, homology(c)


def test_unknot():
    assert poincare_string(homology(_complex("PD[];O[cw]"))) == "q + q^-1"


def test_empty_link():
    assert poincare_string(homology(_complex("PD[]"))) == "1"


def test_two_unknots():
    assert poincare_string(homology(_complex("PD[];O[cw];O[ccw]"))) == "q^2 + 2 + q^-2"


def test_kinks_are_unknots():
    assert poincare_string(homology(_complex("PD[X[1,2,2,1]]"))) == "q + q^-1"
    assert poincare_string(homology(_complex("PD[X[1,1,2,2]]"))) == "q + q^-1"


def test_trefoil_homology(trefoil):
    """Free ranks at (0,1), (0,3), (2,5), (3,9) and one Z/2 at (3,7)."""
    _, g = trefoil
    assert g.free_part() == {(0, 1): 1, (0, 3): 1, (2, 5): 1, (3, 9): 1}
    assert g.torsion_part() == {(3, 7): (2,)}
    assert poincare_string(g) == "q^3 + q + t^2q^5 + t^3q^9 + t^3q^7[Z/2]"


def test_figure_eight_homology():
    g = homology(_complex(FIGURE_EIGHT))
    assert poincare_string(g) == (
        "t^-2q^-5 + t^-1q^-1 + t^-1q^-3[Z/2] + q + q^-1 + tq + t^2q^5 + t^2q^3[Z/2]"
    )


def test_plain_signs_give_same_homology(trefoil):
    _, g = trefoil
    assert homology(_complex(TREFOIL, policy=PLAIN)) == g


def test_threaded_homology_matches(trefoil):
    c, g = trefoil
    assert homology(c, threads=3) == g


def test_euler_characteristic_agrees(trefoil):
    """Jones polynomial q + q^3 + q^5 - q^9, from chains and from homology."""
    c, g = trefoil
    assert euler_characteristic(c) == euler_characteristic(g)
    assert euler_characteristic(g) == {1: 1, 3: 1, 5: 1, 9: -1}
    assert laurent_string(euler_characteristic(g)) == "-q^9 + q^5 + q^3 + q"


def test_mirror_negates_quantum_grading(trefoil):
    _, g = trefoil
    mirrored = homology(totalize(build_diagram(mirror_pd(parse_pd(TREFOIL))), memoize=False))
    assert euler_characteristic(mirrored) == {-q: v for q, v in euler_characteristic(g).items()}


def test_braid_closure_matches_pd(trefoil):
    _, g = trefoil
    braid = homology(totalize(build_diagram(braid_closure_pd([1, 1, 1], 2)), memoize=False))
    assert braid == g


def test_mod_two_ranks_follow_universal_coefficients(trefoil):
    c, g = trefoil
    mod2 = homology_mod_p(c, 2)
    assert mod2.free_part() == universal_coefficient_ranks(g, 2)
    assert mod2[(2, 7)].free_rank == 1
    assert homology_mod_p(c, 3).free_part() == g.free_part()


def test_prime_power_split():
    assert prime_power_split(12) == [3, 4]
    assert prime_power_split(2) == [2]


def test_matrix_invariants():
    assert matrix_invariants(SparseMatrix.from_dense([[2, 0], [0, 1]])) == (2, [2])
    assert matrix_invariants(SparseMatrix(3, 3)) == (0, [])


def test_zero_groups_are_dropped():
    g = BigradedGroup({(0, 1): Summand(1), (1, 3): Summand()})
    assert list(g.groups) == [(0, 1)]
    assert poincare_string(BigradedGroup()) == "0"


def test_json_and_csv(trefoil):
    _, g = trefoil
    rows = json.loads(to_json(g))
    assert {"h": 3, "q": 7, "free_rank": 0, "torsion": [2]} in rows
    table = list(csv.DictReader(io.StringIO(to_csv(g))))
    assert len(table) == 5
    assert [r["torsion"] for r in table if r["h"] == "3" and r["q"] == "7"] == ["2"]


def test_homology_basis(trefoil):
    c, _ = trefoil
    torsion = HomologyBasis(c, 3, 7)
    assert torsion.free_rank == 0
    assert torsion.torsion_orders == [2]
    free = HomologyBasis(c, 0, 1)
    assert free.free_rank == 1
    rep = free.free_representatives[0]
    assert free.coordinates(rep) == ([1], [])


def test_identity_induces_identity(trefoil):
    c, _ = trefoil
    for h, q in [(0, 3), (2, 5), (3, 7)]:
        basis = HomologyBasis(c, h, q)
        identity = SparseMatrix.identity(basis.dim)
        assert induced_matrix(basis, basis, identity) == [
            [1 if i == j else 0 for j in range(basis.free_rank)] for i in range(basis.free_rank)
        ]
        assert torsion_images(basis, basis, identity) == [
            [1 if i == j else 0 for j in range(len(basis.torsion_orders))]
            for i in range(len(basis.torsion_orders))
        ]
