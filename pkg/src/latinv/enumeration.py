"""Lattice-point enumeration in norm balls, counts, and successive minima.

The workhorse is a vectorized branch-and-bound sweep over a Cholesky
factorization (floating point with outward slack), with every candidate
re-checked by an exact integerized norm comparison. Diagonal forms get
exact fast paths (product formula for sup-norm balls, meet-in-the-middle
for diagonal quadratic and weighted-l1 balls) so that huge counts never
materialize points.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from . import rational as rat
from .core import (
    Box,
    BoxDual,
    BudgetExceeded,
    GramForm,
    KindMismatch,
    NormedModule,
    Quadratic,
    dual,
)
from .reduction import lll_transform

DEFAULT_BUDGET = 10 ** 8
_CHUNK = 1 << 19
_PAD = 1e-9  # outward slack on float interval bounds; exact re-check trims


@dataclass(frozen=True)
class LatticePoint:
    """One lattice element with its exact norm data."""

    coords: tuple[int, ...]
    norm_sq: Fraction | None = None  # quadratic modules
    norm: Fraction | None = None  # box / l1 modules

    def norm_float(self) -> float:
        if self.norm_sq is not None:
            return math.sqrt(float(self.norm_sq))
        return float(self.norm)


@dataclass(frozen=True)
class EnumerationResult:
    """Ball enumeration output; points are one representative per +-pair
    plus the zero vector, counts are full and torsion-multiplied."""

    radius: Fraction
    strict: bool
    points: tuple[LatticePoint, ...]
    closed_count: int
    open_count: int

    def expand_points(self):
        """Yield every point, expanding +- pairs."""
        for p in self.points:
            yield p
            if any(p.coords):
                yield LatticePoint(tuple(-c for c in p.coords),
                                   p.norm_sq, p.norm)


def _isqrt_frac(x: Fraction) -> int:
    """Largest integer k >= 0 with k*k <= x (x >= 0)."""
    if x < 0:
        return -1
    k = math.isqrt(x.numerator // x.denominator)
    while (k + 1) * (k + 1) <= x:
        k += 1
    while k * k > x:
        k -= 1
    return k


def _integerize(rows) -> tuple[list[list[int]], int]:
    """Write a rational matrix as M / d with integer M and positive d."""
    d = 1
    for row in rows:
        for x in row:
            d = d * x.denominator // math.gcd(d, x.denominator)
    m = [[int(x * d) for x in row] for row in rows]
    return m, d


@lru_cache(maxsize=256)
def _quad_prep(form: GramForm):
    """LLL-reduced enumeration data for a quadratic form (cached).

    Returns (U, M_red, d, chol_rows, max_abs_m) where U is the unimodular
    transform (rows), reduced gram = M_red / d, and chol_rows is the float
    upper-triangular Cholesky factor of the reduced gram.
    """
    n = form.n
    if n == 0:
        return rat.identity(0), [], 1, np.zeros((0, 0)), 0
    if form.is_diagonal():
        u = rat.identity(n)
        g_red = form.entries
    else:
        u, g_red = lll_transform(form)
    m_red, d = _integerize(g_red)
    gf = np.array([[float(x) for x in row] for row in g_red], dtype=float)
    try:
        chol = np.linalg.cholesky(gf).T  # upper triangular, G = R^T R
    except np.linalg.LinAlgError as exc:
        raise ValueError("gram matrix too ill-conditioned to factor") from exc
    max_abs = max(abs(v) for row in m_red for v in row)
    return u, m_red, d, np.ascontiguousarray(chol), max_abs


def _ellipsoid_batches(chol, C, *, reps_only=True, want="coords",
                       chunk=_CHUNK, budget=DEFAULT_BUDGET):
    """Yield batches of integer points y with y^T G y <= C (approximately;
    intervals carry outward slack, callers re-check exactly).

    want="coords": (k, n) int64 batches. want="normsq": (k,) float batches
    of y^T G y. With reps_only, only the zero vector and one vector per
    +-pair are produced (the one whose highest-index nonzero entry is > 0).
    """
    n = chol.shape[0]
    if n == 0:
        yield (np.zeros((1, 0), np.int64) if want == "coords"
               else np.zeros(1))
        return
    keep_coords = want == "coords"
    diag = np.diag(chol)
    visited = 0
    init_coords = np.zeros((1, n), np.int64) if keep_coords else None
    stack = [(n, np.zeros(1), np.zeros((1, n)), init_coords,
              np.ones(1, bool))]
    while stack:
        level, S, offs, coords, z = stack.pop()
        i = level - 1
        rii = diag[i]
        c = offs[:, i]
        rem = np.maximum(C - S, 0.0)
        sq = np.sqrt(rem)
        dead = (C - S) < -_PAD * (1.0 + abs(C))
        lo = np.ceil((-sq - c) / rii - _PAD).astype(np.int64)
        hi = np.floor((sq - c) / rii + _PAD).astype(np.int64)
        if reps_only:
            lo = np.where(z, np.maximum(lo, 0), lo)
        cnt = np.maximum(hi - lo + 1, 0)
        cnt[dead] = 0
        csum = np.cumsum(cnt)
        total = int(csum[-1]) if len(csum) else 0
        if total == 0:
            continue
        if total > budget or (i == 0 and visited + total > budget):
            raise BudgetExceeded(
                f"enumeration would exceed the point budget ({budget})")
        if total > chunk and len(S) > 1:
            k = min(max(int(np.searchsorted(csum, total // 2)) + 1, 1),
                    len(S) - 1)
            tail = (level, S[k:], offs[k:],
                    coords[k:] if keep_coords else None, z[k:])
            head = (level, S[:k], offs[:k],
                    coords[:k] if keep_coords else None, z[:k])
            stack.append(tail)
            stack.append(head)
            continue
        if total > chunk:  # single parent with a huge range: segment it
            lo0, hi0 = int(lo[0]), int(hi[0])
            segs = []
            start = lo0
            while start <= hi0:
                end = min(start + chunk - 1, hi0)
                ys = np.arange(start, end + 1, dtype=np.int64)
                vals = rii * ys + c[0]
                S2 = S[0] + vals * vals
                z2 = z[0] & (ys == 0)
                if keep_coords:
                    coords2 = np.repeat(coords, len(ys), axis=0)
                    coords2[:, i] = ys
                else:
                    coords2 = None
                offs2 = np.repeat(offs, len(ys), axis=0)
                if i > 0:
                    offs2[:, :i] += np.outer(ys, chol[:i, i])
                segs.append((i, S2, offs2, coords2, z2))
                start = end + 1
            if i == 0:
                for _, S2, _, coords2, _ in segs:
                    visited += len(S2)
                    yield coords2 if keep_coords else S2
            else:
                stack.extend(reversed(segs))
            continue
        rep = np.repeat(np.arange(len(S)), cnt)
        ys = lo[rep] + (np.arange(total) - np.repeat(csum - cnt, cnt))
        vals = diag[i] * ys + c[rep]
        S2 = S[rep] + vals * vals
        if i == 0:
            visited += total
            if keep_coords:
                coords2 = coords[rep]
                coords2[:, 0] = ys
                yield coords2
            else:
                yield S2
            continue
        offs2 = offs[rep]
        offs2[:, :i] += np.outer(ys, chol[:i, i])
        if keep_coords:
            coords2 = coords[rep]
            coords2[:, i] = ys
        else:
            coords2 = None
        stack.append((i, S2, offs2, coords2, z[rep] & (ys == 0)))


def _int_quad_values(batch: np.ndarray, m_int, max_abs: int) -> np.ndarray:
    """Exact y^T M y per row; falls back to object dtype on overflow risk."""
    n = batch.shape[1]
    if n == 0:
        return np.zeros(len(batch), dtype=np.int64)
    ymax = int(np.abs(batch).max(initial=0))
    if n * n * max_abs * ymax * ymax < 2 ** 62:
        m = np.asarray(m_int, dtype=np.int64)
        return np.einsum("ij,jk,ik->i", batch, m, batch)
    m = np.asarray(m_int, dtype=object)
    b = batch.astype(object)
    return (np.dot(b, m) * b).sum(axis=1)


def _compare_masks(vals: np.ndarray, a: int, b: int):
    """Masks for a*v <= b and a*v < b, exact for arbitrary magnitudes."""
    if vals.dtype != object:
        vmax = int(np.abs(vals).max(initial=0))
        if a * vmax < 2 ** 62 and abs(b) < 2 ** 62:
            scaled = a * vals
            return scaled <= b, scaled < b
    closed = np.fromiter((a * int(v) <= b for v in vals), bool, len(vals))
    opened = np.fromiter((a * int(v) < b for v in vals), bool, len(vals))
    return closed, opened


def _quad_thresholds(m: NormedModule, radius: Fraction, d: int):
    """Integer comparison data: scaled value A*(y^T M y) vs bound B."""
    sp, sq = m.scale.numerator, m.scale.denominator
    rp, rq = radius.numerator, radius.denominator
    A = sp * sp * rq * rq
    B = rp * rp * sq * sq * d
    return A, B


def _box_bounds(weights, scale, radius):
    """Per-coordinate integer bounds for |x_i| under closed/strict balls."""
    closed, strict = [], []
    for w in weights:
        t = w * radius / scale
        closed.append(math.floor(t))
        strict.append(math.ceil(t) - 1)
    return closed, strict


def _l1_data(weights, scale, radius):
    """Integer l1 coefficients c_i and rational threshold T = D*r/s."""
    c, d = _integerize([list(weights)])
    t = Fraction(d) * radius / scale
    return c[0], t


def enumerate_ball(m: NormedModule, radius, strict: bool = False,
                   budget: int = DEFAULT_BUDGET) -> EnumerationResult:
    """All lattice points of norm <= radius (< radius when strict).

    Points are found by branch-and-bound on the (John) form and re-checked
    with exact rational arithmetic; box/l1 norms enumerate their John
    ellipsoid and filter by the exact membership test.
    """
    radius = rat.as_fraction(radius)
    if radius <= 0:
        raise ValueError("radius must be positive")
    n = m.n
    tors = m.torsion
    if n == 0:
        zero = LatticePoint((), norm_sq=Fraction(0)) \
            if isinstance(m.norm, Quadratic) else \
            LatticePoint((), norm=Fraction(0))
        return EnumerationResult(radius, strict, (zero,), tors, tors)

    pts: list[LatticePoint] = []
    n_closed = 0
    n_open = 0
    if isinstance(m.norm, Quadratic):
        u, m_int, d, chol, max_abs = _quad_prep(m.norm.form)
        A, B = _quad_thresholds(m, radius, d)
        c_enum = float((radius / m.scale) ** 2)
        c_enum += _PAD * (1.0 + c_enum)
        umat = np.array([[int(x) for x in row] for row in u], np.int64)
        sp2 = m.scale.numerator ** 2
        sq2d = m.scale.denominator ** 2 * d
        for batch in _ellipsoid_batches(chol, c_enum, budget=budget):
            vals = _int_quad_values(batch, m_int, max_abs)
            scaled = A * vals.astype(object) if vals.dtype == object \
                else A * vals
            closed_mask = scaled <= B
            open_mask = scaled < B
            n_closed += int(np.count_nonzero(closed_mask))
            n_open += int(np.count_nonzero(open_mask))
            keep = open_mask if strict else closed_mask
            if not keep.any():
                continue
            xs = batch[keep] @ umat
            for x, v in zip(xs, vals[keep]):
                pts.append(LatticePoint(tuple(int(t) for t in x),
                                        norm_sq=Fraction(sp2 * int(v), sq2d)))
    else:
        weights = m.norm.weights
        if isinstance(m.norm, Box):
            form = [Fraction(1) / (w * w) for w in weights]
            c_enum = float(n * (radius / m.scale) ** 2)
            bc, bs = _box_bounds(weights, m.scale, radius)
        else:
            form = [w * w for w in weights]
            c_enum = float((radius / m.scale) ** 2)
            coeffs, t_l1 = _l1_data(weights, m.scale, radius)
            t_closed, t_strict = math.floor(t_l1), math.ceil(t_l1) - 1
        c_enum += _PAD * (1.0 + c_enum)
        chol = np.diag([math.sqrt(float(f)) for f in form])
        for batch in _ellipsoid_batches(chol, c_enum, budget=budget):
            ab = np.abs(batch)
            if isinstance(m.norm, Box):
                closed_mask = np.ones(len(batch), bool)
                open_mask = np.ones(len(batch), bool)
                for i in range(n):
                    closed_mask &= ab[:, i] <= bc[i]
                    open_mask &= ab[:, i] <= bs[i]
            else:
                vals = ab @ np.asarray(coeffs, np.int64)
                closed_mask = vals <= t_closed
                open_mask = vals <= t_strict
            n_closed += int(np.count_nonzero(closed_mask))
            n_open += int(np.count_nonzero(open_mask))
            keep = open_mask if strict else closed_mask
            for x in batch[keep]:
                coords = tuple(int(t) for t in x)
                pts.append(LatticePoint(coords, norm=m.norm_value(coords)))
    closed_total = tors * (2 * n_closed - 1)
    open_total = tors * (2 * n_open - 1)
    return EnumerationResult(radius, strict, tuple(pts),
                             closed_total, open_total)


def _mitm_count(value_lists, t_closed: int, t_strict: int,
                budget: int) -> tuple[int, int]:
    """Exact (closed, open) counts of sum-decomposable forms by sorting
    half sums and binary searching. value_lists[i] holds the contribution
    of coordinate i over its full signed range."""
    order = sorted(range(len(value_lists)),
                   key=lambda i: -len(value_lists[i]))
    halves: list[list[int]] = [[], []]
    sizes = [1.0, 1.0]
    for i in order:
        k = 0 if sizes[0] <= sizes[1] else 1
        halves[k].append(i)
        sizes[k] *= max(len(value_lists[i]), 1)

    def combine(idxs):
        q = np.zeros(1, dtype=np.int64)
        for i in idxs:
            vals = value_lists[i]
            q = (q[:, None] + vals[None, :]).ravel()
            q = q[q <= t_closed]
            if len(q) > budget:
                raise BudgetExceeded(
                    f"half-form count exceeds the budget ({budget})")
        return q

    qa = np.sort(combine(halves[0]))
    qb = combine(halves[1])
    closed = int(np.searchsorted(qa, t_closed - qb, side="right").sum())
    opened = int(np.searchsorted(qa, t_strict - qb, side="right").sum())
    return closed, opened


def count_ball(m: NormedModule, radius,
               budget: int = DEFAULT_BUDGET) -> tuple[int, int]:
    """Exact (closed, open) point counts at a rational radius, including
    the zero vector, multiplied by the torsion order."""
    radius = rat.as_fraction(radius)
    if radius <= 0:
        raise ValueError("radius must be positive")
    n = m.n
    tors = m.torsion
    if n == 0:
        return tors, tors

    if isinstance(m.norm, Box):
        bc, bs = _box_bounds(m.norm.weights, m.scale, radius)
        closed = math.prod(2 * b + 1 for b in bc)
        opened = math.prod(2 * b + 1 for b in bs) if all(
            b >= 0 for b in bs) else 0
        if opened == 0:  # zero vector always has norm 0 < radius
            opened = 1
        return tors * closed, tors * opened

    if isinstance(m.norm, BoxDual):
        coeffs, t = _l1_data(m.norm.weights, m.scale, radius)
        t_closed, t_strict = math.floor(t), math.ceil(t) - 1
        ranges = [t_closed // c for c in coeffs]
        projected = math.prod(2 * r + 1 for r in ranges)
        if projected > 300_000:
            vals = [np.abs(np.arange(-r, r + 1, dtype=np.int64)) * c
                    for r, c in zip(ranges, coeffs)]
            closed, opened = _mitm_count(vals, t_closed, t_strict, budget)
            return tors * closed, tors * opened
        res = enumerate_ball(NormedModule(m.norm, 1, m.scale), radius,
                             budget=budget)
        return tors * res.closed_count, tors * res.open_count

    form = m.norm.form
    t = (radius / m.scale) ** 2  # threshold on x^T G x
    if form.is_diagonal() and n >= 2:
        diag = [form.entries[i][i] for i in range(n)]
        ranges = [_isqrt_frac(t / d) for d in diag]
        projected = math.prod(2 * r + 1 for r in ranges)
        if projected > 300_000:
            coeffs, dd = _integerize([diag])
            tt = t * dd
            t_closed, t_strict = math.floor(tt), math.ceil(tt) - 1
            if t_closed < 2 ** 62:
                vals = [np.arange(-r, r + 1, dtype=np.int64) ** 2 * c
                        for r, c in zip(ranges, coeffs[0])]
                closed, opened = _mitm_count(vals, t_closed, t_strict,
                                             budget)
                return tors * closed, tors * opened
    if form.is_diagonal() and n == 1:
        d0 = form.entries[0][0]
        kc = _isqrt_frac(t / d0)
        ks = kc - 1 if d0 * kc * kc == t else kc
        return tors * (2 * kc + 1), tors * (2 * max(ks, 0) + 1)

    u, m_int, d, chol, max_abs = _quad_prep(form)
    A, B = _quad_thresholds(m, radius, d)
    c_enum = float(t)
    c_enum += _PAD * (1.0 + c_enum)
    n_closed = 0
    n_open = 0
    for batch in _ellipsoid_batches(chol, c_enum, budget=budget):
        vals = _int_quad_values(batch, m_int, max_abs)
        scaled = A * vals.astype(object) if vals.dtype == object else A * vals
        n_closed += int(np.count_nonzero(scaled <= B))
        n_open += int(np.count_nonzero(scaled < B))
    return tors * (2 * n_closed - 1), tors * (2 * n_open - 1)


def h0(m: NormedModule, budget: int = DEFAULT_BUDGET) -> float:
    """log of the number of module elements of norm <= 1."""
    closed, _ = count_ball(m, Fraction(1), budget=budget)
    return math.log(closed)


def h1(m: NormedModule, budget: int = DEFAULT_BUDGET) -> float:
    """h0 of the dual module."""
    return h0(dual(m), budget=budget)


def _axis_norms(m: NormedModule) -> list[Fraction] | None:
    """Exact per-axis norm data when the module is axis-aligned:
    squared norms for quadratic diagonal, plain norms for box kinds."""
    if isinstance(m.norm, Quadratic):
        if not m.norm.form.is_diagonal():
            return None
        s2 = m.scale * m.scale
        return sorted(s2 * m.norm.form.entries[i][i] for i in range(m.n))
    if isinstance(m.norm, Box):
        return sorted(m.scale / w for w in m.norm.weights)
    if isinstance(m.norm, BoxDual):
        return sorted(m.scale * w for w in m.norm.weights)
    raise KindMismatch(f"unknown norm kind {type(m.norm).__name__}")


def successive_minima_exact(m: NormedModule,
                            budget: int = DEFAULT_BUDGET) -> tuple:
    """Successive minima as exact rationals (squared for quadratic norms,
    plain values for box/l1 norms), in nondecreasing order.

    Axis-aligned modules use the sorted axis norms (the i-th minimum of an
    orthogonal lattice is the i-th shortest basis vector); general
    quadratic forms are LLL-reduced, the ball of radius max_i ||b_i|| is
    enumerated, and linearly independent vectors are selected greedily in
    nondecreasing norm order with exact rank tracking.
    """
    n = m.n
    if n == 0:
        return ()
    axes = _axis_norms(m)
    if axes is not None:
        return tuple(axes)

    form = m.norm.form
    u, m_int, d, chol, max_abs = _quad_prep(form)
    g_red = rat.mat_mul(rat.mat_mul(u, form.entries), rat.transpose(u))
    r_sq = max(g_red[i][i] for i in range(n))  # covers lambda_n
    c_enum = float(r_sq)
    c_enum += _PAD * (1.0 + c_enum)
    A = 1
    B = r_sq.numerator * d
    Aq = r_sq.denominator
    candidates = []
    umat = np.array([[int(x) for x in row] for row in u], np.int64)
    for batch in _ellipsoid_batches(chol, c_enum, budget=budget):
        vals = _int_quad_values(batch, m_int, max_abs)
        if vals.dtype == object:
            keep = np.array([Aq * int(v) <= B for v in vals])
        else:
            keep = Aq * vals <= B
        keep &= np.any(batch != 0, axis=1)
        xs = batch[keep] @ umat
        for x, v in zip(xs, vals[keep]):
            coords = tuple(int(t) for t in x)
            neg = tuple(-c for c in coords)
            candidates.append((Fraction(int(v), d), min(coords, neg)))
    candidates.sort()

    s2 = m.scale * m.scale
    echelon: list[list[Fraction]] = []
    pivots: list[int] = []
    minima = []
    for norm_sq, coords in candidates:
        vec = [Fraction(c) for c in coords]
        for row, p in zip(echelon, pivots):
            if vec[p] != 0:
                f = vec[p] / row[p]
                vec = [a - f * b for a, b in zip(vec, row)]
        piv = next((j for j, x in enumerate(vec) if x != 0), None)
        if piv is None:
            continue
        echelon.append(vec)
        pivots.append(piv)
        minima.append(s2 * norm_sq)
        if len(minima) == n:
            break
    if len(minima) < n:
        raise BudgetExceeded("search radius missed an independent vector")
    return tuple(minima)


def successive_minima(m: NormedModule,
                      budget: int = DEFAULT_BUDGET) -> tuple[float, ...]:
    """Successive minima as floats, nondecreasing."""
    exact = successive_minima_exact(m, budget=budget)
    if isinstance(m.norm, Quadratic):
        return tuple(math.sqrt(float(v)) for v in exact)
    return tuple(float(v) for v in exact)


def short_vector_sublattice(m: NormedModule, r,
                            budget: int = DEFAULT_BUDGET):
    """Sublattice generated by all points of norm < r, as a module with
    the induced form, plus the embedding matrix (basis rows in the
    coordinates of m). Quadratic modules only."""
    if not isinstance(m.norm, Quadratic):
        raise KindMismatch("short-vector sublattices need a quadratic norm")
    r = rat.as_fraction(r)
    if r <= 0:
        raise ValueError("radius must be positive")
    res = enumerate_ball(m, r, strict=True, budget=budget)
    gens = [list(p.coords) for p in res.points if any(p.coords)]
    basis = rat.row_hermite_basis(gens)
    if not basis:
        empty = NormedModule(Quadratic(GramForm(())), m.torsion, m.scale)
        return empty, []
    b = rat.mat(basis)
    g = rat.mat_mul(rat.mat_mul(b, m.norm.form.entries), rat.transpose(b))
    sub = NormedModule(Quadratic(GramForm(g)), m.torsion, m.scale)
    return sub, basis
