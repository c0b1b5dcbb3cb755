"""Exact rational LLL reduction, working directly on Gram matrices."""

from __future__ import annotations

from fractions import Fraction

from . import rational as rat
from .core import DegenerateBasis, GramForm

DEFAULT_DELTA = Fraction(99, 100)


def _gso(g, n):
    """Gram-Schmidt data (mu, B) from a Gram matrix, all exact."""
    mu = [[Fraction(0)] * n for _ in range(n)]
    B = [Fraction(0)] * n
    for i in range(n):
        for j in range(i):
            s = g[i][j] - sum(mu[i][k] * mu[j][k] * B[k] for k in range(j))
            mu[i][j] = s / B[j]
        B[i] = g[i][i] - sum(mu[i][k] ** 2 * B[k] for k in range(i))
        if B[i] <= 0:
            raise DegenerateBasis("gram matrix is not positive definite")
    return mu, B


def lll_transform(gram: GramForm, delta: Fraction = DEFAULT_DELTA):
    """Unimodular U (rows = new basis in old coordinates) with U G U^T
    LLL-reduced at parameter delta, plus the reduced Gram matrix."""
    if not Fraction(1, 4) < delta < 1:
        raise ValueError("delta must lie in (1/4, 1)")
    n = gram.n
    if n <= 1:
        return rat.identity(n), gram.entries
    g = [list(row) for row in gram.entries]
    u = [[Fraction(1 if i == j else 0) for j in range(n)] for i in range(n)]

    def apply_shift(i, j, q):
        # b_i <- b_i - q b_j, updating gram and transform rows
        for c in range(n):
            u[i][c] -= q * u[j][c]
        for c in range(n):
            g[i][c] -= q * g[j][c]
        for r in range(n):
            g[r][i] -= q * g[r][j]

    def swap(i, j):
        u[i], u[j] = u[j], u[i]
        g[i], g[j] = g[j], g[i]
        for r in range(n):
            g[r][i], g[r][j] = g[r][j], g[r][i]

    mu, B = _gso(g, n)
    k = 1
    while k < n:
        for j in range(k - 1, -1, -1):
            if abs(mu[k][j]) > Fraction(1, 2):
                q = round(mu[k][j])
                apply_shift(k, j, q)
                mu, B = _gso(g, n)
        if B[k] >= (delta - mu[k][k - 1] ** 2) * B[k - 1]:
            k += 1
        else:
            swap(k, k - 1)
            mu, B = _gso(g, n)
            k = max(k - 1, 1)
    return tuple(tuple(row) for row in u), tuple(tuple(row) for row in g)


def is_lll_reduced(gram, delta: Fraction = DEFAULT_DELTA) -> bool:
    g = rat.mat(gram.entries if isinstance(gram, GramForm) else gram)
    n = len(g)
    if n <= 1:
        return True
    mu, B = _gso([list(r) for r in g], n)
    size_ok = all(abs(mu[i][j]) <= Fraction(1, 2)
                  for i in range(n) for j in range(i))
    lovasz_ok = all(B[k] >= (delta - mu[k][k - 1] ** 2) * B[k - 1]
                    for k in range(1, n))
    return size_ok and lovasz_ok


def lll_reduce(basis, ambient: GramForm | None = None,
               delta: Fraction = DEFAULT_DELTA):
    """LLL-reduce basis rows under an ambient form (identity by default).

    Returns (reduced_basis_rows, transform) with reduced = transform @ basis
    and |det transform| = 1.
    """
    b = rat.mat(basis)
    if rat.det(b) == 0:
        raise DegenerateBasis("basis rows are linearly dependent")
    a = ambient.entries if ambient is not None else rat.identity(len(b[0]))
    gram = GramForm(rat.mat_mul(rat.mat_mul(b, a), rat.transpose(b)))
    u, _ = lll_transform(gram, delta)
    return rat.mat_mul(u, b), u
