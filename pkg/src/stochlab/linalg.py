"""Exact Gaussian elimination over the rationals.

Matrices are lists of rows of Fractions. Pivots are chosen by largest
absolute value among the remaining rows; with exact arithmetic this only
affects intermediate sizes, not results.
"""
from __future__ import annotations

from fractions import Fraction
from typing import Sequence

Matrix = list[list[Fraction]]


class SingularMatrix(ArithmeticError):
    pass


def _copy(a: Sequence[Sequence]) -> Matrix:
    return [[Fraction(x) for x in row] for row in a]


def identity(n: int) -> Matrix:
    return [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]


def matmul(a: Sequence[Sequence], b: Sequence[Sequence]) -> Matrix:
    cols = list(zip(*b))
    return [[sum((x * y for x, y in zip(row, col)), Fraction(0)) for col in cols] for row in a]


def rref(a: Sequence[Sequence]) -> tuple[Matrix, list[int]]:
    """Reduced row echelon form and the pivot column indices."""
    m = _copy(a)
    rows = len(m)
    cols = len(m[0]) if rows else 0
    pivots: list[int] = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        best = max(range(r, rows), key=lambda i: abs(m[i][c]))
        if m[best][c] == 0:
            continue
        m[r], m[best] = m[best], m[r]
        piv = m[r][c]
        m[r] = [x / piv for x in m[r]]
        for i in range(rows):
            if i != r and m[i][c] != 0:
                f = m[i][c]
                m[i] = [x - f * y for x, y in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
    return m, pivots


def solve(a: Sequence[Sequence], b: Sequence) -> list[Fraction]:
    """Unique solution of a x = b; raises SingularMatrix otherwise."""
    n = len(a)
    if any(len(row) != n for row in a) or len(b) != n:
        raise ValueError("solve needs a square system")
    aug = [list(row) + [bi] for row, bi in zip(a, b)]
    m, pivots = rref(aug)
    if pivots != list(range(n)):
        raise SingularMatrix("system is singular")
    return [m[i][n] for i in range(n)]


def inverse(a: Sequence[Sequence]) -> Matrix:
    n = len(a)
    aug = [list(row) + e for row, e in zip(a, identity(n))]
    m, pivots = rref(aug)
    if pivots[:n] != list(range(n)) or len(pivots) < n:
        raise SingularMatrix("matrix is singular")
    return [row[n:] for row in m]


def rank(a: Sequence[Sequence]) -> int:
    return len(rref(a)[1]) if a else 0


def min_norm_solve(a: Sequence[Sequence], b: Sequence) -> tuple[list[Fraction], bool]:
    """Minimum-Euclidean-norm solution of a consistent system a x = b.

    Returns ``(x, unique)``. Raises SingularMatrix when the system is
    inconsistent. The solution is taken in the row space of ``a``:
    x = R^T z with R a basis of independent rows, so it is exact.
    """
    n_cols = len(a[0])
    aug = [list(row) + [bi] for row, bi in zip(a, b)]
    _, pivots = rref(aug)
    if n_cols in pivots:
        raise SingularMatrix("system is inconsistent")
    # independent rows of a: pivot rows of the transpose
    _, row_pivots = rref([list(col) for col in zip(*a)])
    basis = [list(map(Fraction, a[i])) for i in row_pivots]
    rhs = [Fraction(b[i]) for i in row_pivots]
    gram = matmul(basis, [list(col) for col in zip(*basis)])
    z = solve(gram, rhs)
    x = [sum((z[k] * basis[k][j] for k in range(len(basis))), Fraction(0)) for j in range(n_cols)]
    return x, len(basis) == n_cols
