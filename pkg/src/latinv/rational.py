"""Exact rational linear algebra on plain tuples of Fractions."""

from __future__ import annotations

import math
from fractions import Fraction

Matrix = tuple[tuple[Fraction, ...], ...]


def as_fraction(x) -> Fraction:
    """Coerce ints, Fractions and 'p/q' strings to Fraction; reject floats."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    raise TypeError(f"expected exact rational, got {type(x).__name__}")


def format_fraction(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"


def mat(rows) -> Matrix:
    return tuple(tuple(as_fraction(x) for x in row) for row in rows)


def identity(n: int) -> Matrix:
    return tuple(
        tuple(Fraction(1 if i == j else 0) for j in range(n)) for i in range(n)
    )


def mat_mul(a: Matrix, b: Matrix) -> Matrix:
    bt = tuple(zip(*b)) if b else ()
    return tuple(
        tuple(sum(x * y for x, y in zip(row, col)) for col in bt) for row in a
    )


def transpose(a: Matrix) -> Matrix:
    return tuple(zip(*a)) if a else ()


def is_symmetric(a: Matrix) -> bool:
    n = len(a)
    return all(a[i][j] == a[j][i] for i in range(n) for j in range(i))


def det(a: Matrix) -> Fraction:
    """Determinant by fraction-free-ish Gaussian elimination (n is small)."""
    n = len(a)
    if n == 0:
        return Fraction(1)
    m = [list(row) for row in a]
    sign = 1
    d = Fraction(1)
    for i in range(n):
        piv = next((r for r in range(i, n) if m[r][i] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != i:
            m[i], m[piv] = m[piv], m[i]
            sign = -sign
        d *= m[i][i]
        inv = 1 / m[i][i]
        for r in range(i + 1, n):
            if m[r][i] == 0:
                continue
            f = m[r][i] * inv
            for c in range(i, n):
                m[r][c] -= f * m[i][c]
    return sign * d


def inverse(a: Matrix) -> Matrix:
    """Exact inverse via Gauss-Jordan; raises ValueError on singular input."""
    n = len(a)
    m = [list(row) + [Fraction(1 if i == j else 0) for j in range(n)]
         for i, row in enumerate(a)]
    for i in range(n):
        piv = next((r for r in range(i, n) if m[r][i] != 0), None)
        if piv is None:
            raise ValueError("singular matrix")
        m[i], m[piv] = m[piv], m[i]
        inv = 1 / m[i][i]
        m[i] = [x * inv for x in m[i]]
        for r in range(n):
            if r != i and m[r][i] != 0:
                f = m[r][i]
                m[r] = [x - f * y for x, y in zip(m[r], m[i])]
    return tuple(tuple(row[n:]) for row in m)


def leading_minors_positive(a: Matrix) -> bool:
    """Sylvester criterion: every leading principal minor is > 0."""
    return all(det(tuple(row[: k + 1] for row in a[: k + 1])) > 0
               for k in range(len(a)))


def log_fraction(x: Fraction) -> float:
    """log of a positive rational without overflowing huge integers."""
    if x <= 0:
        raise ValueError("log of non-positive rational")
    return math.log(x.numerator) - math.log(x.denominator)


def row_hermite_basis(rows: list[list[int]]) -> list[list[int]]:
    """Z-basis (Hermite-style row echelon) of the integer row span.

    Returns k echelon rows generating the same subgroup of Z^n as the input.
    """
    if not rows:
        return []
    n = len(rows[0])
    work = [list(r) for r in rows if any(r)]
    basis: list[list[int]] = []
    col = 0
    while work and col < n:
        nz = [r for r in work if r[col] != 0]
        rest = [r for r in work if r[col] == 0]
        if not nz:
            col += 1
            continue
        # gcd-reduce the column with repeated Euclidean row steps
        while len(nz) > 1:
            nz.sort(key=lambda r: abs(r[col]))
            piv = nz[0]
            out = [piv]
            for r in nz[1:]:
                q = r[col] // piv[col]
                red = [x - q * y for x, y in zip(r, piv)]
                if red[col] != 0:
                    out.append(red)
                elif any(red):
                    rest.append(red)
            nz = out
        piv = nz[0]
        if piv[col] < 0:
            piv = [-x for x in piv]
        basis.append(piv)
        work = rest
        col += 1
    # reduce entries above each pivot for a canonical-ish echelon form
    for i in reversed(range(len(basis))):
        p = next(j for j, x in enumerate(basis[i]) if x != 0)
        for r in range(i):
            q = basis[r][p] // basis[i][p]
            if q:
                basis[r] = [x - q * y for x, y in zip(basis[r], basis[i])]
    return basis
