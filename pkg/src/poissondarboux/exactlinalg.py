"""Small exact linear-algebra helpers over the Gaussian rationals.

Matrices are lists of row lists whose entries are int, Fraction, or
GaussianRational.  Everything here runs exact Gauss-Jordan elimination;
pivots are normalized to 1 so results are canonical.
"""

from __future__ import annotations

from .polycore import EXACT, coeff_div


class SingularMatrixError(ArithmeticError):
    """Raised when a matrix that must be invertible is not."""


def rref(rows: list) -> tuple:
    """Reduced row echelon form; returns (new_rows, pivot_columns)."""
    mat = [list(row) for row in rows]
    if not mat:
        return [], []
    ncols = len(mat[0])
    pivots = []
    r = 0
    for c in range(ncols):
        pivot_row = next((k for k in range(r, len(mat)) if mat[k][c]), None)
        if pivot_row is None:
            continue
        mat[r], mat[pivot_row] = mat[pivot_row], mat[r]
        inv = coeff_div(1, mat[r][c], EXACT)
        mat[r] = [inv * v for v in mat[r]]
        for k in range(len(mat)):
            if k != r and mat[k][c]:
                factor = mat[k][c]
                mat[k] = [a - factor * b for a, b in zip(mat[k], mat[r])]
        pivots.append(c)
        r += 1
        if r == len(mat):
            break
    return mat, pivots


def nullspace(rows: list, ncols: int) -> list:
    """Basis of the right kernel, one vector per free column."""
    reduced, pivots = rref(rows)
    pivot_set = set(pivots)
    basis = []
    for free in range(ncols):
        if free in pivot_set:
            continue
        vec = [0] * ncols
        vec[free] = 1
        for r, pc in enumerate(pivots):
            vec[pc] = -reduced[r][free]
        basis.append(tuple(vec))
    return basis


def identity(n: int) -> list:
    return [[1 if r == c else 0 for c in range(n)] for r in range(n)]


def invert(rows: list) -> list:
    """Exact inverse of a square matrix, or SingularMatrixError."""
    n = len(rows)
    if any(len(row) != n for row in rows):
        raise ValueError("matrix must be square")
    aug = [list(row) + ident_row for row, ident_row in zip(rows, identity(n))]
    reduced, pivots = rref(aug)
    if len(pivots) < n or pivots[:n] != list(range(n)):
        raise SingularMatrixError("matrix is singular")
    return [row[n:] for row in reduced[:n]]


def mat_mul(a: list, b: list) -> list:
    """Product of two matrices of exact scalars."""
    inner = len(b)
    if any(len(row) != inner for row in a):
        raise ValueError("incompatible shapes")
    cols = len(b[0]) if b else 0
    return [
        [sum(row[k] * b[k][c] for k in range(inner)) for c in range(cols)]
        for row in a
    ]


def transpose(a: list) -> list:
    return [list(col) for col in zip(*a)]
