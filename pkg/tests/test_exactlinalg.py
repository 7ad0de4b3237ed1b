"""Exact rational/Gaussian linear algebra: RREF, nullspace, inversion."""

import random
from fractions import Fraction

import pytest

from poissondarboux import gaussian
from poissondarboux.exactlinalg import (
    SingularMatrixError,
    identity,
    invert,
    mat_mul,
    nullspace,
    rref,
    transpose,
)


class TestRref:
    def test_pivots_and_reduction(self):
        rows, pivots = rref([[2, 4], [1, 3]])
        assert rows == [[1, 0], [0, 1]]
        assert pivots == [0, 1]

    def test_rank_deficient(self):
        rows, pivots = rref([[1, 2], [2, 4]])
        assert pivots == [0]
        assert rows[1] == [0, 0]

    def test_gaussian_entries(self):
        rows, pivots = rref([[gaussian(0, 1), 1], [0, 1]])
        assert rows == [[1, 0], [0, 1]]


class TestNullspace:
    def test_line_kernel(self):
        basis = nullspace([[1, 2]], 2)
        assert len(basis) == 1
        v = basis[0]
        assert v[0] + 2 * v[1] == 0

    def test_full_rank_trivial_kernel(self):
        assert nullspace([[1, 0], [0, 1]], 2) == []

    def test_kernel_vectors_annihilate(self):
        rng = random.Random(13)
        for _ in range(25):
            mat = [[rng.randint(-4, 4) for _ in range(4)] for _ in range(2)]
            for v in nullspace(mat, 4):
                for row in mat:
                    assert sum(a * b for a, b in zip(row, v)) == 0


class TestInvert:
    def test_known_inverse(self):
        inv = invert([[1, 1], [0, 1]])
        assert inv == [[1, -1], [0, 1]]

    def test_random_round_trip(self):
        rng = random.Random(37)
        count = 0
        while count < 25:
            mat = [[Fraction(rng.randint(-5, 5)) for _ in range(3)] for _ in range(3)]
            try:
                inv = invert(mat)
            except SingularMatrixError:
                continue
            count += 1
            assert mat_mul(mat, inv) == identity(3)

    def test_singular_raises(self):
        with pytest.raises(SingularMatrixError):
            invert([[1, 2], [2, 4]])


def test_transpose():
    assert transpose([[1, 2, 3], [4, 5, 6]]) == [[1, 4], [2, 5], [3, 6]]
