"""
Tests for sparse integer matrices and the Smith normal form.
"""
import random

import pytest
from sympy import ZZ, Matrix
from sympy.matrices.normalforms import smith_normal_form as sympy_snf

from core.linalg import (
    SparseMatrix, block, dense_mul, integer_rank, rank_mod_p, smith_normal_form
)


def _sympy_factors(dense):
    snf = sympy_snf(Matrix(dense), domain=ZZ)
    rows, cols = snf.shape
    return sorted(abs(int(snf[i, i])) for i in range(min(rows, cols)) if snf[i, i] != 0)


@pytest.mark.parametrize("dense, expected", [
    ([[2]], [2]),
    ([[1, 1], [1, 1]], [1]),
    ([[2, 4], [6, 8]], [2, 4]),
])
def test_invariant_factors(dense, expected):
    assert smith_normal_form(dense).invariant_factors() == expected


def test_transforms_diagonalise():
    dense = [[2, 4, 4], [-6, 6, 12], [10, -4, -16]]
    snf = smith_normal_form(dense)
    D = dense_mul(dense_mul(snf.L, dense), snf.R)
    for i, row in enumerate(D):
        for j, v in enumerate(row):
            if i == j and i < snf.rank:
                assert v == snf.diagonal[i]
            else:
                assert v == 0
    identity = [[1 if i == j else 0 for j in range(3)] for i in range(3)]
    assert dense_mul(snf.L, snf.L_inv) == identity
    assert dense_mul(snf.R, snf.R_inv) == identity


def test_divisibility_chain():
    snf = smith_normal_form([[2, 4, 4], [-6, 6, 12], [10, -4, -16]])
    factors = snf.invariant_factors()
    assert factors == [2, 6, 12]
    assert all(b % a == 0 for a, b in zip(factors, factors[1:]))


def test_random_matrices_against_sympy():
    rng = random.Random(7)
    for _ in range(25):
        rows, cols = rng.randint(1, 5), rng.randint(1, 5)
        dense = [[rng.randint(-6, 6) for _ in range(cols)] for _ in range(rows)]
        assert smith_normal_form(dense).invariant_factors() == _sympy_factors(dense)


def test_zero_and_empty_matrices():
    assert smith_normal_form([[0, 0], [0, 0]]).rank == 0
    assert smith_normal_form(SparseMatrix(0, 3)).rank == 0
    assert smith_normal_form(SparseMatrix(3, 0)).rank == 0


def test_sparse_arithmetic():
    a = SparseMatrix.from_dense([[1, 2], [0, 3]])
    b = SparseMatrix.identity(2)
    assert (a @ b) == a
    assert (a - a).is_zero()
    assert (a + a) == a.scale(2)
    assert a.transpose().to_dense() == [[1, 0], [2, 3]]
    assert a.apply([1, 1]) == [3, 3]
    assert a.nnz == 3
    assert a.triplets() == [(0, 0, 1), (0, 1, 2), (1, 1, 3)]


def test_shape_mismatch():
    with pytest.raises(ValueError):
        SparseMatrix(2, 3) @ SparseMatrix(2, 3)


def test_submatrix_and_block():
    a = SparseMatrix.from_dense([[1, 2, 3], [4, 5, 6], [7, 8, 9]])
    assert a.submatrix([0, 2], [1, 2]).to_dense() == [[2, 3], [8, 9]]
    b = block([1, 1], [1, 1], [(0, 0, SparseMatrix.identity(1)), (1, 1, SparseMatrix.identity(1).scale(-1))])
    assert b.to_dense() == [[1, 0], [0, -1]]


def test_rank_mod_p():
    a = SparseMatrix.from_dense([[2, 0], [0, 3]])
    assert rank_mod_p(a, 2) == 1
    assert rank_mod_p(a, 3) == 1
    assert rank_mod_p(a, 5) == 2
    assert integer_rank(a) == 2
