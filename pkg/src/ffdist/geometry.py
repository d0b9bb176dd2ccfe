"""Distance sets, distance histograms, bisector energy and isosceles censuses in F_p^d.

All routines are exhaustive.  Quadratic routines are vectorised row by row so
the O(|E|^2) pair sets never materialise at once; each has an explicit budget
and raises :class:`BudgetExceededError` rather than truncating.
"""
from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import BudgetExceededError
from .field import FpSet, PrimeField, RepHistogram, difference_set, iterated_sumset, square_set
from .incidence import Line2, LineMultiset, PointMultiset2, canonicalize_lines, count_incidences_2d

__all__ = [
    "QuadraticForm",
    "PointSet",
    "SrHistogram",
    "NuHistogram",
    "BisectorCensus",
    "IsoscelesCensus",
    "algdist",
    "distance_set_explicit",
    "distance_set_product",
    "sr_histogram",
    "distance_energy",
    "bisector",
    "bisector_census",
    "isosceles_census",
    "isosceles_via_incidence",
    "max_line_circle_occupancy",
]

MAX_EXPLICIT_POINTS = 10_000
MAX_BISECTOR_POINTS = 4_000
MAX_TRIANGLE_WORK = 10**8
MAX_OCCUPANCY_POINTS = 300

SrHistogram = RepHistogram
NuHistogram = RepHistogram


class QuadraticForm(enum.Enum):
    EUCLIDEAN = "euclidean"
    MINKOWSKI = "minkowski"  # (x1 - y1)^2 - (x2 - y2)^2, plane only


@dataclass(frozen=True)
class PointSet:
    """A set of distinct points of F_p^d, stored in insertion order."""

    field: PrimeField
    points: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        if self.points:
            dims = {len(pt) for pt in self.points}
            if len(dims) != 1:
                raise ValueError("points of mixed dimension")
            if len(set(self.points)) != len(self.points):
                raise ValueError("points must be distinct")
            p = self.field.p
            if any(not 0 <= c < p for pt in self.points for c in pt):
                raise ValueError("coordinates must be reduced mod p")

    @classmethod
    def of(cls, field: PrimeField, points: Iterable[Sequence[int]]) -> "PointSet":
        p = field.p
        seen: dict[tuple[int, ...], None] = {}
        for pt in points:
            seen.setdefault(tuple(int(c) % p for c in pt), None)
        return cls(field, tuple(seen))

    @classmethod
    def product(cls, *factors: FpSet) -> "PointSet":
        """Cartesian product of subsets of F_p, e.g. ``product(A, A)`` for A x A."""
        field = factors[0].field
        for f in factors[1:]:
            field.check_same(f.field)
        return cls(field, tuple(itertools.product(*(f.members() for f in factors))))

    @classmethod
    def power(cls, A: FpSet, d: int) -> "PointSet":
        return cls.product(*([A] * d))

    @property
    def dim(self) -> int:
        return len(self.points[0]) if self.points else 0

    def __len__(self) -> int:
        return len(self.points)

    def __iter__(self):
        return iter(self.points)

    def array(self) -> np.ndarray:
        return np.array(self.points, dtype=np.int64).reshape(len(self.points), self.dim)

    def translate(self, t: Sequence[int]) -> "PointSet":
        return PointSet.of(self.field, (tuple(c + s for c, s in zip(pt, t)) for pt in self.points))

    def dilate(self, c: int) -> "PointSet":
        if c % self.field.p == 0:
            raise ValueError("dilation factor must be nonzero")
        return PointSet.of(self.field, (tuple(c * x for x in pt) for pt in self.points))

    def as_multiset(self) -> PointMultiset2:
        return PointMultiset2.from_items(self.field, self.points)


def _check_form(form: QuadraticForm, dim: int) -> None:
    if form is QuadraticForm.MINKOWSKI and dim != 2:
        raise ValueError("the Minkowski form is only defined in dimension 2")


def algdist(x: Sequence[int], y: Sequence[int], field: PrimeField,
            form: QuadraticForm = QuadraticForm.EUCLIDEAN) -> int:
    if len(x) != len(y):
        raise ValueError(f"dimension mismatch: {len(x)} vs {len(y)}")
    _check_form(form, len(x))
    sq = [(a - b) ** 2 for a, b in zip(x, y)]
    if form is QuadraticForm.MINKOWSKI:
        return (sq[0] - sq[1]) % field.p
    return sum(sq) % field.p


def _distances(X: np.ndarray, Y: np.ndarray, p: int, form: QuadraticForm) -> np.ndarray:
    """|X| x |Y| matrix of algebraic distances."""
    diff = (X[:, None, :] - Y[None, :, :]) % p
    sq = diff * diff % p
    if form is QuadraticForm.MINKOWSKI:
        return (sq[..., 0] - sq[..., 1]) % p
    return sq.sum(axis=2) % p


def _row_chunks(n_rows: int, n_cols: int):
    step = max(1, (1 << 21) // max(1, n_cols))
    for lo in range(0, n_rows, step):
        yield slice(lo, min(n_rows, lo + step))


def _guard(E: PointSet, limit: int, what: str, hint: str = "") -> None:
    if len(E) > limit:
        raise BudgetExceededError(f"{what}: |E| = {len(E)} exceeds the budget of {limit}{hint}")


def distance_set_explicit(E: PointSet, form: QuadraticForm = QuadraticForm.EUCLIDEAN) -> FpSet:
    """Distances realised by ordered pairs of E, the diagonal included."""
    _guard(E, MAX_EXPLICIT_POINTS, "distance_set_explicit",
           "; use distance_set_product for Cartesian products")
    p = E.field.p
    if not len(E):
        return FpSet.empty(E.field)
    _check_form(form, E.dim)
    X = E.array()
    hit = np.zeros(p, dtype=bool)
    for rows in _row_chunks(len(X), len(X)):
        hit[_distances(X[rows], X, p, form).ravel()] = True
    return FpSet.from_indicator(E.field, hit)


def distance_set_product(A: FpSet, d: int, form: QuadraticForm = QuadraticForm.EUCLIDEAN) -> FpSet:
    """Distance set of A^d as the d-fold sumset of (A - A)^2."""
    if form is not QuadraticForm.EUCLIDEAN:
        raise ValueError("the product identity needs the Euclidean form")
    if d < 1:
        raise ValueError("dimension must be positive")
    return iterated_sumset(square_set(difference_set(A)), d)


def sr_histogram(E: PointSet, form: QuadraticForm = QuadraticForm.EUCLIDEAN) -> RepHistogram:
    """counts[r] = #{(x, y) in E x E : ||x - y|| = r} over ordered pairs."""
    _guard(E, MAX_EXPLICIT_POINTS, "sr_histogram")
    p = E.field.p
    counts = np.zeros(p, dtype=np.int64)
    if len(E):
        _check_form(form, E.dim)
        X = E.array()
        for rows in _row_chunks(len(X), len(X)):
            counts += np.bincount(_distances(X[rows], X, p, form).ravel(), minlength=p)
    return RepHistogram.from_array(E.field, counts)


def distance_energy(E: PointSet, form: QuadraticForm = QuadraticForm.EUCLIDEAN) -> int:
    """Sum over r != 0 of S_r^2: the number of (x, y, z, t) with ||x-y|| = ||z-t|| != 0."""
    return sr_histogram(E, form).second_moment(skip_zero=True)


def bisector(a: Sequence[int], b: Sequence[int], field: PrimeField) -> tuple[Line2, bool]:
    """Canonical line {x : ||x - a|| = ||x - b||} and whether the pair is isotropic."""
    p = field.p
    a = tuple(int(c) % p for c in a)
    b = tuple(int(c) % p for c in b)
    if a == b:
        raise ValueError("degenerate pair: a == b has no bisector")
    line = Line2.canonical(field, 2 * (b[0] - a[0]), 2 * (b[1] - a[1]),
                           b[0] ** 2 + b[1] ** 2 - a[0] ** 2 - a[1] ** 2)
    return line, algdist(a, b, field) == 0


@dataclass(frozen=True)
class BisectorCensus:
    """Bisector lines of ordered pairs (a, b), a != b, of a planar set.

    ``lines`` holds the requested class only; both energies are always filled.
    """

    line_class: str
    lines: LineMultiset
    energy_nonisotropic: int
    energy_isotropic: int
    pairs_nonisotropic: int
    pairs_isotropic: int
    pair_convention: str = "ordered pairs (a, b) with a != b"

    @property
    def energy(self) -> int:
        return {"nonisotropic": self.energy_nonisotropic,
                "isotropic": self.energy_isotropic}.get(
            self.line_class, self.energy_nonisotropic + self.energy_isotropic)

    def dyadic_histogram(self) -> dict[int, int]:
        """Number of distinct lines with multiplicity in [2^k, 2^(k+1)), keyed by k."""
        out: dict[int, int] = {}
        for m in self.lines.counts.values():
            k = m.bit_length() - 1
            out[k] = out.get(k, 0) + 1
        return dict(sorted(out.items()))

    def to_json(self) -> dict:
        return {
            "line_class": self.line_class,
            "distinct_lines": self.lines.support_size,
            "mass": self.lines.total,
            "energy_nonisotropic": self.energy_nonisotropic,
            "energy_isotropic": self.energy_isotropic,
            "pairs_nonisotropic": self.pairs_nonisotropic,
            "pairs_isotropic": self.pairs_isotropic,
            "pair_convention": self.pair_convention,
        }


_LINE_CLASSES = ("nonisotropic", "isotropic", "all")


def bisector_census(E: PointSet, line_class: str = "nonisotropic") -> BisectorCensus:
    if line_class not in _LINE_CLASSES:
        raise ValueError(f"line_class must be one of {_LINE_CLASSES}")
    _guard(E, MAX_BISECTOR_POINTS, "bisector_census")
    field, p = E.field, E.field.p
    if len(E) and E.dim != 2:
        raise ValueError("bisectors are defined for planar sets")
    if len(E) < 2:
        return BisectorCensus(line_class, LineMultiset(field, {}), 0, 0, 0, 0)
    X = E.array()
    norms = (X * X).sum(axis=1)
    inv = field.inverse_table()
    idx = np.arange(len(X))
    keys = []
    for rows in _row_chunks(len(X), len(X)):
        a = X[rows]
        off = idx[rows][:, None] != idx[None, :]
        la = (2 * (X[None, :, 0] - a[:, None, 0]))[off]
        lb = (2 * (X[None, :, 1] - a[:, None, 1]))[off]
        lc = (norms[None, :] - norms[rows][:, None])[off]
        ca, cb, cc = canonicalize_lines(la, lb, lc, p, inv)
        keys.append((ca * p + cb) * p + cc)
    uniq, mult = np.unique(np.concatenate(keys), return_counts=True)
    ca, cb, cc = uniq // (p * p), uniq // p % p, uniq % p
    # isotropy is a property of the normal direction, hence of the line itself
    iso = (ca * ca + cb * cb) % p == 0
    m2 = mult.astype(object) ** 2
    energy_iso = int(m2[iso].sum()) if iso.any() else 0
    energy_non = int(m2[~iso].sum()) if (~iso).any() else 0
    keep = {"nonisotropic": ~iso, "isotropic": iso, "all": np.ones_like(iso)}[line_class]
    lines = {Line2(int(x), int(y), int(z)): int(m)
             for x, y, z, m in zip(ca[keep], cb[keep], cc[keep], mult[keep])}
    return BisectorCensus(line_class, LineMultiset(field, lines), energy_non, energy_iso,
                          int(mult[~iso].sum()), int(mult[iso].sum()))


@dataclass(frozen=True)
class IsoscelesCensus:
    """Triples (x, y, z), x an apex and y, z bases, with ||x-y|| = ||x-z|| != 0.

    ``T1``: ||y-z|| != 0.  ``T2_degenerate``: y = z.  ``T2_isotropic``: y != z,
    ||y-z|| = 0.  ``null_radius`` counts the excluded triples with
    ||x-y|| = ||x-z|| = 0 and a non-isotropic base; these lie on the bisector too.
    """

    T1: int
    T2_degenerate: int
    T2_isotropic: int
    null_radius: int

    @property
    def T2(self) -> int:
        return self.T2_degenerate + self.T2_isotropic

    @property
    def T(self) -> int:
        return self.T1 + self.T2

    def to_json(self) -> dict:
        return {"T": self.T, "T1": self.T1, "T2_degenerate": self.T2_degenerate,
                "T2_isotropic": self.T2_isotropic, "null_radius": self.null_radius}


def _triangle_guard(apexes: PointSet, bases: PointSet, what: str) -> None:
    work = len(apexes) * len(bases) ** 2
    if work > MAX_TRIANGLE_WORK:
        raise BudgetExceededError(f"{what}: |apexes| |bases|^2 = {work} exceeds {MAX_TRIANGLE_WORK}")


def isosceles_census(apexes: PointSet, bases: PointSet,
                     form: QuadraticForm = QuadraticForm.EUCLIDEAN) -> IsoscelesCensus:
    apexes.field.check_same(bases.field)
    _triangle_guard(apexes, bases, "isosceles_census")
    if not len(apexes) or not len(bases):
        return IsoscelesCensus(0, 0, 0, 0)
    _check_form(form, bases.dim)
    p = apexes.field.p
    X, Y = apexes.array(), bases.array()
    base_d = _distances(Y, Y, p, form)
    iy, iz = np.nonzero((base_d == 0) & ~np.eye(len(Y), dtype=bool))
    total = degenerate = isotropic = both_zero = zero_pairs = 0
    for rows in _row_chunks(len(X), len(Y) + len(iy)):
        d = _distances(X[rows], Y, p, form)
        nz = d != 0
        # per apex: sum over nonzero radii r of (#bases at radius r)^2
        offsets = np.arange(d.shape[0])[:, None] * p
        hist = np.bincount((d + offsets)[nz], minlength=d.shape[0] * p)
        total += int((hist.astype(np.int64) ** 2).sum())
        degenerate += int(nz.sum())
        k0 = (~nz).sum(axis=1).astype(np.int64)
        zero_pairs += int((k0 * (k0 - 1)).sum())
        if len(iy):
            eq = d[:, iy] == d[:, iz]
            isotropic += int((eq & nz[:, iy]).sum())
            both_zero += int((eq & ~nz[:, iy]).sum())
    T1 = total - degenerate - isotropic
    return IsoscelesCensus(T1, degenerate, isotropic, zero_pairs - both_zero)


def isosceles_via_incidence(apexes: PointSet, bases: PointSet) -> int:
    """Incidences between the apexes and the non-isotropic bisectors of the bases.

    Equals ``isosceles_census(...).T1 + null_radius``; the correction vanishes
    when p = 3 mod 4, where no nonzero vector has zero norm.
    """
    apexes.field.check_same(bases.field)
    _triangle_guard(apexes, bases, "isosceles_via_incidence")
    census = bisector_census(bases, "nonisotropic")
    return count_incidences_2d(apexes.as_multiset(), census.lines)


def max_line_circle_occupancy(E: PointSet) -> int:
    """Largest number of points of E on one line or one circle ||x - c|| = r (any r, any c)."""
    _guard(E, MAX_OCCUPANCY_POINTS, "max_line_circle_occupancy")
    n, field, p = len(E), E.field, E.field.p
    if n <= 2:
        return n
    X = E.array()
    inv = field.inverse_table()
    best = 2
    for i in range(n):
        v = (np.delete(X, i, axis=0) - X[i]) % p
        # normalise directions so the first nonzero coordinate is 1
        s = np.where(v[:, 0] != 0, inv[v[:, 0]], inv[v[:, 1]])
        key = (v[:, 0] * s % p) * p + v[:, 1] * s % p
        best = max(best, int(np.unique(key, return_counts=True)[1].max()) + 1)
    centers = np.array(list(itertools.product(range(p), repeat=2)), dtype=np.int64)
    for rows in _row_chunks(len(centers), max(n, p)):
        d = _distances(centers[rows], X, p, QuadraticForm.EUCLIDEAN)
        offsets = np.arange(d.shape[0])[:, None] * p
        best = max(best, int(np.bincount((d + offsets).ravel(), minlength=d.shape[0] * p).max()))
    return best
