"""Normed Z-modules of finite rank and their basic arithmetic invariants.

A module is a free part Z^n carrying either a quadratic-form norm, a
weighted sup-norm ("box"), or a weighted l1-norm (the dual of a box),
plus a torsion order and a positive rational scale factor. All form data
is exact rational; floats appear only in final invariant values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

from . import rational as rat
from .rational import Fraction as _F  # noqa: F401  (re-export convenience)


class LatinvError(Exception):
    """Base class for all library errors."""


class DegenerateBasis(LatinvError):
    """Basis rows are linearly dependent."""


class KindMismatch(LatinvError):
    """Operation applied to an unsupported norm kind combination."""


class BudgetExceeded(LatinvError):
    """Enumeration would visit more points than the configured cap."""


class HypothesisNotMet(LatinvError):
    """Input does not satisfy a check's structural hypothesis."""


class GenerationFailed(LatinvError):
    """Corpus generator exhausted its rejection limit."""


@dataclass(frozen=True)
class GramForm:
    """Positive-definite symmetric matrix of exact rationals."""

    entries: rat.Matrix

    def __post_init__(self):
        entries = rat.mat(self.entries)
        object.__setattr__(self, "entries", entries)
        if any(len(row) != len(entries) for row in entries):
            raise ValueError("gram matrix must be square")
        if not rat.is_symmetric(entries):
            raise ValueError("gram matrix must be symmetric")
        if not rat.leading_minors_positive(entries):
            raise ValueError("gram matrix must be positive definite")

    @property
    def n(self) -> int:
        return len(self.entries)

    def det(self) -> Fraction:
        return rat.det(self.entries)

    def inverse(self) -> "GramForm":
        return GramForm(rat.inverse(self.entries))

    def is_diagonal(self) -> bool:
        return all(self.entries[i][j] == 0
                   for i in range(self.n) for j in range(self.n) if i != j)

    def norm_sq(self, coords) -> Fraction:
        """Exact x^T G x for an integer/rational coordinate vector."""
        xs = [rat.as_fraction(c) for c in coords]
        return sum(xs[i] * sum(g * xs[j] for j, g in enumerate(row))
                   for i, row in enumerate(self.entries))


@dataclass(frozen=True)
class Quadratic:
    """Norm ||x|| = sqrt(x^T G x)."""

    form: GramForm

    @property
    def n(self) -> int:
        return self.form.n


@dataclass(frozen=True)
class Box:
    """Norm ||x|| = max_i |x_i| / w_i (weighted sup-norm)."""

    weights: tuple[Fraction, ...]

    def __post_init__(self):
        ws = tuple(rat.as_fraction(w) for w in self.weights)
        object.__setattr__(self, "weights", ws)
        if any(w <= 0 for w in ws):
            raise ValueError("box weights must be positive")

    @property
    def n(self) -> int:
        return len(self.weights)


@dataclass(frozen=True)
class BoxDual:
    """Norm ||x|| = sum_i w_i |x_i| (weighted l1; dual of Box)."""

    weights: tuple[Fraction, ...]

    def __post_init__(self):
        ws = tuple(rat.as_fraction(w) for w in self.weights)
        object.__setattr__(self, "weights", ws)
        if any(w <= 0 for w in ws):
            raise ValueError("l1 weights must be positive")

    @property
    def n(self) -> int:
        return len(self.weights)


NormSpec = Quadratic | Box | BoxDual


@dataclass(frozen=True)
class NormedModule:
    """Free part Z^n with a norm, a torsion order, and a scale factor.

    The effective norm of a coordinate vector x is scale * (norm of x);
    torsion elements have norm 0, so every point count is multiplied by
    the torsion order.
    """

    norm: NormSpec
    torsion: int = 1
    scale: Fraction = field(default_factory=lambda: Fraction(1))

    def __post_init__(self):
        object.__setattr__(self, "scale", rat.as_fraction(self.scale))
        if self.torsion < 1:
            raise ValueError("torsion order must be >= 1")
        if self.scale <= 0:
            raise ValueError("scale must be positive")

    @property
    def n(self) -> int:
        return self.norm.n

    def is_quadratic(self) -> bool:
        return isinstance(self.norm, Quadratic)

    def norm_sq(self, coords) -> Fraction:
        """Exact squared effective norm (quadratic modules only)."""
        if not isinstance(self.norm, Quadratic):
            raise KindMismatch("norm_sq requires a quadratic norm")
        return self.scale ** 2 * self.norm.form.norm_sq(coords)

    def norm_value(self, coords) -> Fraction:
        """Exact effective norm for box / l1 modules (a rational)."""
        if isinstance(self.norm, Box):
            return self.scale * max(
                (abs(rat.as_fraction(c)) / w
                 for c, w in zip(coords, self.norm.weights)),
                default=Fraction(0))
        if isinstance(self.norm, BoxDual):
            return self.scale * sum(
                (abs(rat.as_fraction(c)) * w
                 for c, w in zip(coords, self.norm.weights)),
                start=Fraction(0))
        raise KindMismatch("norm_value requires a box or l1 norm")


@dataclass(frozen=True)
class InvariantReport:
    """All computed invariants of one module (log scale where applicable)."""

    rank: int
    torsion: int
    hhat0: float
    hhat1: float
    deg_hat: float
    chi_hat: float
    h0_theta: float | None
    h1_theta: float | None
    minima: tuple[float, ...]
    count_open: int
    count_closed: int
    covolume: float
    covolume_method: str


def diagonal_gram(diagonal) -> GramForm:
    ds = [rat.as_fraction(d) for d in diagonal]
    n = len(ds)
    return GramForm(tuple(
        tuple(ds[i] if i == j else Fraction(0) for j in range(n))
        for i in range(n)))


def zn(n: int, torsion: int = 1, scale=Fraction(1)) -> NormedModule:
    """The standard lattice Z^n with the Euclidean norm."""
    return NormedModule(Quadratic(GramForm(rat.identity(n))),
                        torsion=torsion, scale=rat.as_fraction(scale))


def gram_from_basis(basis, ambient: GramForm | None = None) -> GramForm:
    """Gram matrix of basis ROWS b_i under an ambient form: G = B A B^T."""
    b = rat.mat(basis)
    a = ambient.entries if ambient is not None else rat.identity(
        len(b[0]) if b else 0)
    if rat.det(b) == 0:
        raise DegenerateBasis("basis rows are linearly dependent")
    return GramForm(rat.mat_mul(rat.mat_mul(b, a), rat.transpose(b)))


def log_covolume(m: NormedModule) -> float:
    """log covolume; box/l1 modules use their John form ("via-John")."""
    n = m.n
    if n == 0:
        return 0.0
    s = n * rat.log_fraction(m.scale)
    if isinstance(m.norm, Quadratic):
        return s + 0.5 * rat.log_fraction(m.norm.form.det())
    if isinstance(m.norm, Box):
        return s - sum(rat.log_fraction(w) for w in m.norm.weights)
    if isinstance(m.norm, BoxDual):
        return (s + 0.5 * n * math.log(n)
                + sum(rat.log_fraction(w) for w in m.norm.weights))
    raise KindMismatch(f"unknown norm kind {type(m.norm).__name__}")


def covolume(m: NormedModule) -> float:
    return math.exp(log_covolume(m))


def covolume_method(m: NormedModule) -> str:
    return "exact" if isinstance(m.norm, Quadratic) else "via-john"


@lru_cache(maxsize=None)
def unit_ball_log_volume(n: int) -> float:
    """log of the Euclidean unit-ball volume v_n = pi^(n/2) / Gamma(n/2+1)."""
    if n < 0:
        raise ValueError("rank must be >= 0")
    return 0.5 * n * math.log(math.pi) - math.lgamma(0.5 * n + 1)


def stirling_bounds_check(n: int, slack: float = 1e-12) -> bool:
    """Whether both Stirling-type bounds on log v_n hold at this rank.

    Lower: -(n/2) log n + n log 2, upper: -(n/2) log n + (n/2)(log 2pi + 1).
    The lower bound is an exact equality at n=1, hence the tiny slack.
    """
    if n < 1:
        raise ValueError("rank must be >= 1")
    lv = unit_ball_log_volume(n)
    lo = -0.5 * n * math.log(n) + n * math.log(2)
    hi = -0.5 * n * math.log(n) + 0.5 * n * (math.log(2 * math.pi) + 1)
    return lo <= lv + slack and lv <= hi + slack


def stirling_threshold(n_max: int = 200) -> int:
    """Minimal n0 such that the Stirling bounds hold on all of [n0, n_max]."""
    n0 = None
    for n in range(n_max, 0, -1):
        if not stirling_bounds_check(n):
            break
        n0 = n
    if n0 is None:
        raise LatinvError(f"Stirling bounds fail at n_max={n_max}")
    return n0


def log_unit_ball_volume_of(m: NormedModule) -> float:
    """log vol of the module's unit ball in lattice coordinates."""
    n = m.n
    ls = rat.log_fraction(m.scale)
    if isinstance(m.norm, Quadratic):
        # ellipsoid x^T G x <= 1/scale^2
        return (unit_ball_log_volume(n)
                - 0.5 * rat.log_fraction(m.norm.form.det()) - n * ls)
    if isinstance(m.norm, Box):
        return (n * math.log(2)
                + sum(rat.log_fraction(w) for w in m.norm.weights) - n * ls)
    if isinstance(m.norm, BoxDual):
        return (n * math.log(2) - math.lgamma(n + 1)
                - sum(rat.log_fraction(w) for w in m.norm.weights) - n * ls)
    raise KindMismatch(f"unknown norm kind {type(m.norm).__name__}")


def chi_hat(m: NormedModule) -> float:
    """log #torsion - log(fundamental-domain volume / unit-ball volume).

    Computed in the fixed lattice-coordinate gauge, where the fundamental
    domain of Z^n has volume 1; the ratio is gauge-invariant.
    """
    if m.n == 0:
        return math.log(m.torsion)
    return math.log(m.torsion) + log_unit_ball_volume_of(m)


def arithmetic_degree(m: NormedModule) -> float:
    """chi_hat(m) - chi_hat(Z^n); equals log torsion - log covol for
    quadratic norms, and the ball-volume-normalized degree for box/l1."""
    if isinstance(m.norm, Quadratic):
        return math.log(m.torsion) - log_covolume(m)
    return chi_hat(m) - unit_ball_log_volume(m.n)


def dual(m: NormedModule) -> NormedModule:
    """Dual module: inverse Gram / swapped box-l1 kind, reciprocal scale.

    Hom_Z(E, Z) kills torsion, so the dual always has torsion order 1.
    """
    inv_scale = 1 / m.scale
    if isinstance(m.norm, Quadratic):
        return NormedModule(Quadratic(m.norm.form.inverse()), 1, inv_scale)
    if isinstance(m.norm, Box):
        return NormedModule(BoxDual(m.norm.weights), 1, inv_scale)
    if isinstance(m.norm, BoxDual):
        return NormedModule(Box(m.norm.weights), 1, inv_scale)
    raise KindMismatch(f"unknown norm kind {type(m.norm).__name__}")


def rescale(m: NormedModule, t) -> NormedModule:
    """Same module with the norm multiplied by t > 0."""
    t = rat.as_fraction(t)
    if t <= 0:
        raise ValueError("scale factor must be positive")
    return NormedModule(m.norm, m.torsion, m.scale * t)


def direct_sum(a: NormedModule, b: NormedModule) -> NormedModule:
    """Orthogonal direct sum; torsion orders multiply, scales are folded
    into the forms so mixed-scale summands stay exact."""
    if isinstance(a.norm, Quadratic) and isinstance(b.norm, Quadratic):
        na, nb = a.n, b.n
        ga, gb = a.norm.form.entries, b.norm.form.entries
        sa2, sb2 = a.scale ** 2, b.scale ** 2
        rows = []
        for i in range(na):
            rows.append(tuple(sa2 * ga[i][j] for j in range(na))
                        + (Fraction(0),) * nb)
        for i in range(nb):
            rows.append((Fraction(0),) * na
                        + tuple(sb2 * gb[i][j] for j in range(nb)))
        return NormedModule(Quadratic(GramForm(tuple(rows))),
                            a.torsion * b.torsion, Fraction(1))
    if isinstance(a.norm, Box) and isinstance(b.norm, Box):
        ws = tuple(w / a.scale for w in a.norm.weights) + tuple(
            w / b.scale for w in b.norm.weights)
        return NormedModule(Box(ws), a.torsion * b.torsion, Fraction(1))
    if isinstance(a.norm, BoxDual) and isinstance(b.norm, BoxDual):
        ws = tuple(w * a.scale for w in a.norm.weights) + tuple(
            w * b.scale for w in b.norm.weights)
        return NormedModule(BoxDual(ws), a.torsion * b.torsion, Fraction(1))
    raise KindMismatch("direct_sum requires matching norm kinds")


def john_form(m: NormedModule) -> GramForm:
    """Quadratic form of the maximal inscribed ellipsoid of the unit ball.

    Satisfies ||x|| <= ||x||_J <= sqrt(n) ||x|| (exact for quadratic norms).
    """
    if isinstance(m.norm, Quadratic):
        return m.norm.form
    if isinstance(m.norm, Box):
        return diagonal_gram([1 / (w * w) for w in m.norm.weights])
    if isinstance(m.norm, BoxDual):
        n = m.n
        return diagonal_gram([n * w * w for w in m.norm.weights])
    raise KindMismatch(f"unknown norm kind {type(m.norm).__name__}")


def unimodular_conjugate(m: NormedModule, u) -> NormedModule:
    """Re-base a quadratic module by a unimodular integer matrix (rows)."""
    if not isinstance(m.norm, Quadratic):
        raise KindMismatch("re-basing requires a quadratic norm")
    um = rat.mat(u)
    if abs(rat.det(um)) != 1:
        raise DegenerateBasis("transform must be unimodular")
    g = rat.mat_mul(rat.mat_mul(um, m.norm.form.entries), rat.transpose(um))
    return NormedModule(Quadratic(GramForm(g)), m.torsion, m.scale)
