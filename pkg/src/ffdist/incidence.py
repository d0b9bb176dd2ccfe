"""Exact point-line and point-plane incidence counting over F_p.

Lines and planes are kept in canonical form (first nonzero normal coefficient
scaled to 1) so they can key multiplicity maps.  Every count is a
multiplicity-weighted sum of exact integers.
"""
from __future__ import annotations

import math
from collections import Counter
from dataclasses import astuple, dataclass, field as dc_field
from fractions import Fraction
from typing import Any, ClassVar, Iterable, Mapping

import numpy as np

from .errors import EmptySetError
from .field import PrimeField

__all__ = [
    "Line2",
    "Plane3",
    "PointMultiset2",
    "PointMultiset3",
    "LineMultiset",
    "PlaneMultiset",
    "IncidenceReport",
    "count_incidences_2d",
    "count_incidences_3d",
    "line_point_counts",
    "vinh_check",
    "hanson_check",
    "vinh_plane_check",
    "stevens_dezeeuw_bound",
    "canonicalize_lines",
    "random_points2",
    "random_points3",
    "random_lines",
    "random_planes",
    "all_lines",
    "all_planes",
]

# relative slack on floating error budgets; counts stay exact
BUDGET_SLACK = 2.0**-40
# largest p^d for which a dense multiplicity grid is built
DENSE_GRID_LIMIT = 1 << 22
_CHUNK = 1 << 20


@dataclass(frozen=True, order=True)
class Line2:
    """The line aX + bY = c, with the first nonzero of (a, b) equal to 1."""

    a: int
    b: int
    c: int

    @classmethod
    def canonical(cls, field: PrimeField, a: int, b: int, c: int) -> "Line2":
        p = field.p
        a, b, c = a % p, b % p, c % p
        if a:
            s = pow(a, -1, p)
        elif b:
            s = pow(b, -1, p)
        else:
            raise ValueError("(a, b) = (0, 0) does not define a line")
        return cls(a * s % p, b * s % p, c * s % p)

    def contains(self, point: tuple[int, int], p: int) -> bool:
        x, y = point
        return (self.a * x + self.b * y - self.c) % p == 0


@dataclass(frozen=True, order=True)
class Plane3:
    """The plane aX + bY + cZ = d, with the first nonzero of (a, b, c) equal to 1."""

    a: int
    b: int
    c: int
    d: int

    @classmethod
    def canonical(cls, field: PrimeField, a: int, b: int, c: int, d: int) -> "Plane3":
        p = field.p
        a, b, c, d = a % p, b % p, c % p, d % p
        lead = a or b or c
        if not lead:
            raise ValueError("(a, b, c) = (0, 0, 0) does not define a plane")
        s = pow(lead, -1, p)
        return cls(a * s % p, b * s % p, c * s % p, d * s % p)

    def contains(self, point: tuple[int, int, int], p: int) -> bool:
        x, y, z = point
        return (self.a * x + self.b * y + self.c * z - self.d) % p == 0


def canonicalize_lines(a: np.ndarray, b: np.ndarray, c: np.ndarray, p: int,
                       inv_table: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Vectorised :meth:`Line2.canonical`; rows with (a, b) = (0, 0) must be filtered first."""
    a, b, c = a % p, b % p, c % p
    s = np.where(a != 0, inv_table[a], inv_table[b])
    return a * s % p, b * s % p, c * s % p


@dataclass(frozen=True)
class _Multiset:
    field: PrimeField
    counts: Mapping[Any, int]

    kind: ClassVar[str] = "element"

    def __post_init__(self):
        if any(int(m) <= 0 for m in self.counts.values()):
            raise ValueError("multiplicities must be positive")

    @classmethod
    def _normalize(cls, field: PrimeField, item: Any) -> Any:
        raise NotImplementedError

    @classmethod
    def from_items(cls, field: PrimeField, items: Iterable[Any]):
        return cls(field, dict(Counter(cls._normalize(field, x) for x in items)))

    @classmethod
    def from_counts(cls, field: PrimeField, counts: Mapping[Any, int]):
        merged: Counter = Counter()
        for x, m in counts.items():
            merged[cls._normalize(field, x)] += int(m)
        return cls(field, dict(merged))

    @property
    def total(self) -> int:
        """|X|: the total mass, sum of multiplicities."""
        return sum(self.counts.values())

    @property
    def second_moment(self) -> int:
        return sum(m * m for m in self.counts.values())

    @property
    def support_size(self) -> int:
        return len(self.counts)

    @property
    def is_simple(self) -> bool:
        return all(m == 1 for m in self.counts.values())

    def __len__(self) -> int:
        return self.total

    def __iter__(self):
        return iter(self.counts)

    def items(self):
        return self.counts.items()


def _point(field: PrimeField, item: Any, dim: int) -> tuple[int, ...]:
    pt = tuple(int(v) % field.p for v in item)
    if len(pt) != dim:
        raise ValueError(f"expected a point of F_p^{dim}, got {item!r}")
    return pt


class PointMultiset2(_Multiset):
    kind = "point2"

    @classmethod
    def _normalize(cls, field, item):
        return _point(field, item, 2)

    def translate(self, t: tuple[int, int]) -> "PointMultiset2":
        return PointMultiset2.from_counts(self.field, {(x + t[0], y + t[1]): m for (x, y), m in self.items()})


class PointMultiset3(_Multiset):
    kind = "point3"

    @classmethod
    def _normalize(cls, field, item):
        return _point(field, item, 3)


class LineMultiset(_Multiset):
    kind = "line"

    @classmethod
    def _normalize(cls, field, item):
        if isinstance(item, Line2):
            item = (item.a, item.b, item.c)
        return Line2.canonical(field, *item)

    def translate(self, t: tuple[int, int]) -> "LineMultiset":
        # ax + by = c moved by t becomes ax + by = c + a t0 + b t1
        return LineMultiset.from_counts(
            self.field, {(l.a, l.b, l.c + l.a * t[0] + l.b * t[1]): m for l, m in self.items()})


class PlaneMultiset(_Multiset):
    kind = "plane"

    @classmethod
    def _normalize(cls, field, item):
        if isinstance(item, Plane3):
            item = (item.a, item.b, item.c, item.d)
        return Plane3.canonical(field, *item)


def _arrays(ms: _Multiset, width: int) -> tuple[np.ndarray, np.ndarray]:
    keys = [k if isinstance(k, tuple) else astuple(k) for k in ms.counts]
    coords = np.array(keys, dtype=np.int64).reshape(len(keys), width)
    mult = np.array(list(ms.counts.values()), dtype=np.int64)
    return coords, mult


def _pairwise(pts: np.ndarray, pm: np.ndarray, objs: np.ndarray, p: int) -> np.ndarray:
    """Per point, test every line/plane; returns sum of m(u) over points on each object."""
    dim = pts.shape[1]
    per_obj = np.zeros(len(objs), dtype=np.int64)
    step = max(1, _CHUNK // max(1, len(objs)))
    for lo in range(0, len(pts), step):
        lhs = pts[lo:lo + step] @ objs[:, :dim].T  # entries < dim * p^2, safe in int64 for p < 2^31
        hit = (lhs - objs[:, dim][None, :]) % p == 0
        per_obj += pm[lo:lo + step] @ hit.astype(np.int64)
    return per_obj


def _scan_lines(pts: np.ndarray, pm: np.ndarray, lines: np.ndarray, lm: np.ndarray, p: int) -> int:
    """Per line, walk its p points and look them up in a dense grid."""
    grid = np.zeros((p, p), dtype=np.int64)
    np.add.at(grid, (pts[:, 0], pts[:, 1]), pm)
    inv = PrimeField(p).inverse_table()
    xs = np.arange(p, dtype=np.int64)
    total = 0
    vertical = lines[:, 1] == 0
    if vertical.any():
        # canonical vertical lines are X = c
        total += int(grid.sum(axis=1)[lines[vertical, 2]] @ lm[vertical])
    sl, sm = lines[~vertical], lm[~vertical]
    step = max(1, _CHUNK // p)
    for lo in range(0, len(sl), step):
        a, b, c = sl[lo:lo + step].T
        ys = (c[:, None] - a[:, None] * xs[None, :]) % p * inv[b][:, None] % p
        total += int(grid[xs[None, :], ys].sum(axis=1) @ sm[lo:lo + step])
    return total


def _scan_planes(pts: np.ndarray, pm: np.ndarray, planes: np.ndarray, hm: np.ndarray, p: int) -> int:
    grid = np.zeros((p, p, p), dtype=np.int64)
    np.add.at(grid, (pts[:, 0], pts[:, 1], pts[:, 2]), pm)
    inv = PrimeField(p).inverse_table()
    total = 0
    a, b, c, d = planes.T
    # c == 0 and b == 0: X = d
    sel = (c == 0) & (b == 0)
    if sel.any():
        total += int(grid.sum(axis=(1, 2))[d[sel]] @ hm[sel])
    # c == 0, b != 0: aX + bY = d, Z free
    sel = (c == 0) & (b != 0)
    if sel.any():
        col = grid.sum(axis=2)
        xs = np.arange(p, dtype=np.int64)
        ys = (d[sel][:, None] - a[sel][:, None] * xs[None, :]) % p * inv[b[sel]][:, None] % p
        total += int(col[xs[None, :], ys].sum(axis=1) @ hm[sel])
    # c != 0: Z = (d - aX - bY) / c
    sel = c != 0
    if sel.any():
        xx, yy = np.meshgrid(np.arange(p), np.arange(p), indexing="ij")
        xx, yy = xx.ravel(), yy.ravel()
        idx = np.flatnonzero(sel)
        step = max(1, _CHUNK // (p * p))
        for lo in range(0, len(idx), step):
            j = idx[lo:lo + step]
            zs = (d[j][:, None] - a[j][:, None] * xx[None, :] - b[j][:, None] * yy[None, :]) % p
            zs = zs * inv[c[j]][:, None] % p
            total += int(grid[xx[None, :], yy[None, :], zs].sum(axis=1) @ hm[j])
    return total


def _choose(strategy: str, n_pts: int, n_objs: int, p: int, dim: int) -> str:
    if strategy not in ("auto", "by_point", "by_line"):
        raise ValueError(f"unknown strategy {strategy!r}")
    dense_ok = p**dim <= DENSE_GRID_LIMIT
    if strategy == "by_line" and not dense_ok:
        raise ValueError(f"per-line scan needs a dense grid; p^{dim} too large")
    if strategy != "auto":
        return strategy
    scan_cost = n_objs * p ** (dim - 1) + p**dim
    return "by_line" if dense_ok and scan_cost < n_pts * n_objs else "by_point"


def count_incidences_2d(P: PointMultiset2, L: LineMultiset, strategy: str = "auto") -> int:
    """Sum of m(u) m(l) over point-line pairs with u on l.

    ``by_line`` walks every line; ``by_point`` tests every line at each point.
    ``auto`` picks the cheaper; the result does not depend on the choice.
    """
    P.field.check_same(L.field)
    if not P.counts or not L.counts:
        return 0
    p = P.field.p
    pts, pm = _arrays(P, 2)
    lines, lm = _arrays(L, 3)
    if _choose(strategy, len(pts), len(lines), p, 2) == "by_line":
        return _scan_lines(pts, pm, lines, lm, p)
    return int(_pairwise(pts, pm, lines, p) @ lm)


def count_incidences_3d(P: PointMultiset3, H: PlaneMultiset, strategy: str = "auto") -> int:
    P.field.check_same(H.field)
    if not P.counts or not H.counts:
        return 0
    p = P.field.p
    pts, pm = _arrays(P, 3)
    planes, hm = _arrays(H, 4)
    if _choose(strategy, len(pts), len(planes), p, 3) == "by_line":
        return _scan_planes(pts, pm, planes, hm, p)
    return int(_pairwise(pts, pm, planes, p) @ hm)


def line_point_counts(P: PointMultiset2, L: LineMultiset) -> dict[Line2, int]:
    """i(l): multiplicity-weighted number of points of P on each distinct line of L."""
    P.field.check_same(L.field)
    if not L.counts:
        return {}
    if not P.counts:
        return {l: 0 for l in L.counts}
    pts, pm = _arrays(P, 2)
    lines, _ = _arrays(L, 3)
    return {l: int(i) for l, i in zip(L.counts, _pairwise(pts, pm, lines, P.field.p))}


@dataclass(frozen=True)
class IncidenceReport:
    kind: str
    incidences: int
    size_points: int
    size_lines: int
    main_term: Fraction
    error_budget: float
    satisfied: bool
    extra: dict = dc_field(default_factory=dict)

    @property
    def gap(self) -> float:
        return float(abs(self.incidences - self.main_term))

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "incidences": self.incidences,
            "size_points": self.size_points,
            "size_lines": self.size_lines,
            "main_term": str(self.main_term),
            "gap": self.gap,
            "error_budget": self.error_budget,
            "satisfied": self.satisfied,
            **self.extra,
        }


def _within(deviation: Fraction, budget: float) -> bool:
    return float(deviation) <= budget * (1 + BUDGET_SLACK)


def _require_simple(*sets: _Multiset, alternative: str) -> None:
    for s in sets:
        if not s.is_simple:
            raise ValueError(f"{s.kind} input has repeated elements; use {alternative}")
        if not s.counts:
            raise EmptySetError(f"empty {s.kind} set")


def vinh_check(P: PointMultiset2, L: LineMultiset) -> IncidenceReport:
    """Two-sided point-line bound |I - |P||L|/p| <= sqrt(p |P| |L|) for simple sets."""
    _require_simple(P, L, alternative="hanson_check")
    p = P.field.p
    I = count_incidences_2d(P, L)
    main = Fraction(P.total * L.total, p)
    budget = math.sqrt(p) * math.sqrt(P.total * L.total)
    return IncidenceReport("vinh", I, P.total, L.total, main, budget, _within(abs(I - main), budget))


def hanson_check(P: PointMultiset2, L: LineMultiset) -> IncidenceReport:
    """One-sided multiset bound I <= |P||L|/p + sqrt(p) (sum m(u)^2)^(1/2) (sum m(l)^2)^(1/2)."""
    p = P.field.p
    I = count_incidences_2d(P, L)
    main = Fraction(P.total * L.total, p)
    budget = math.sqrt(p) * math.sqrt(P.second_moment) * math.sqrt(L.second_moment)
    excess = max(Fraction(0), I - main)
    return IncidenceReport("hanson", I, P.total, L.total, main, budget, _within(excess, budget))


def vinh_plane_check(P: PointMultiset3, H: PlaneMultiset) -> IncidenceReport:
    """Two-sided point-plane bound |I - |P||H|/p| <= p sqrt(|P||H|) for simple sets."""
    _require_simple(P, H, alternative="a simple point/plane set")
    p = P.field.p
    I = count_incidences_3d(P, H)
    main = Fraction(P.total * H.total, p)
    budget = p * math.sqrt(P.total * H.total)
    return IncidenceReport("vinh_plane", I, P.total, H.total, main, budget, _within(abs(I - main), budget))


def stevens_dezeeuw_bound(size_a: int, size_l: int, p: int) -> float:
    """Value of |A|^{3/2}|L|/p^{1/2} + |A|^{5/4}|L|^{3/4} + |A|^2 + |L| (report-only)."""
    if size_a < 0 or size_l < 0:
        raise ValueError("sizes must be nonnegative")
    a, l = float(size_a), float(size_l)
    return a**1.5 * l / math.sqrt(p) + a**1.25 * l**0.75 + a * a + l


def _rng(seed) -> np.random.Generator:
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def random_points2(field: PrimeField, n: int, seed=None, max_mult: int = 1) -> PointMultiset2:
    rng, p = _rng(seed), field.p
    idx = rng.choice(p * p, size=n, replace=False)
    mult = rng.integers(1, max_mult + 1, size=n)
    return PointMultiset2.from_counts(field, {(int(i) // p, int(i) % p): int(m) for i, m in zip(idx, mult)})


def random_points3(field: PrimeField, n: int, seed=None, max_mult: int = 1) -> PointMultiset3:
    rng, p = _rng(seed), field.p
    idx = rng.choice(p**3, size=n, replace=False)
    mult = rng.integers(1, max_mult + 1, size=n)
    return PointMultiset3.from_counts(
        field, {(int(i) // (p * p), int(i) // p % p, int(i) % p): int(m) for i, m in zip(idx, mult)})


def _line_from_index(i: int, p: int) -> tuple[int, int, int]:
    # the p^2 + p lines: X + bY = c, then Y = c
    if i < p * p:
        return (1, i // p, i % p)
    return (0, 1, i - p * p)


def random_lines(field: PrimeField, n: int, seed=None, max_mult: int = 1) -> LineMultiset:
    rng, p = _rng(seed), field.p
    idx = rng.choice(p * p + p, size=n, replace=False)
    mult = rng.integers(1, max_mult + 1, size=n)
    return LineMultiset.from_counts(field, {_line_from_index(int(i), p): int(m) for i, m in zip(idx, mult)})


def _plane_from_index(i: int, p: int) -> tuple[int, int, int, int]:
    if i < p**3:
        return (1, i // (p * p), i // p % p, i % p)
    i -= p**3
    if i < p * p:
        return (0, 1, i // p, i % p)
    return (0, 0, 1, i - p * p)


def random_planes(field: PrimeField, n: int, seed=None) -> PlaneMultiset:
    rng, p = _rng(seed), field.p
    idx = rng.choice(p**3 + p * p + p, size=n, replace=False)
    return PlaneMultiset.from_counts(field, {_plane_from_index(int(i), p): 1 for i in idx})


def all_lines(field: PrimeField) -> LineMultiset:
    p = field.p
    return LineMultiset.from_counts(field, {_line_from_index(i, p): 1 for i in range(p * p + p)})


def all_planes(field: PrimeField) -> PlaneMultiset:
    p = field.p
    return PlaneMultiset.from_counts(field, {_plane_from_index(i, p): 1 for i in range(p**3 + p * p + p)})
