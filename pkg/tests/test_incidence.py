import math
from dataclasses import astuple

import pytest
from hypothesis import given, settings, strategies as st

import oracles
from ffdist import EmptySetError, FieldMismatchError, PrimeField
from ffdist.incidence import (
    Line2,
    LineMultiset,
    Plane3,
    PlaneMultiset,
    PointMultiset2,
    PointMultiset3,
    all_lines,
    all_planes,
    count_incidences_2d,
    count_incidences_3d,
    hanson_check,
    line_point_counts,
    random_lines,
    random_planes,
    random_points2,
    random_points3,
    stevens_dezeeuw_bound,
    vinh_check,
    vinh_plane_check,
)

F3, F5, F11, F31 = (PrimeField(p) for p in (3, 5, 11, 31))
STRATEGIES = ("by_point", "by_line", "auto")


def full_points2(field):
    return PointMultiset2.from_items(field, [(x, y) for x in range(field.p) for y in range(field.p)])


def full_points3(field):
    p = field.p
    return PointMultiset3.from_items(field, [(x, y, z) for x in range(p) for y in range(p) for z in range(p)])


class TestCanonicalForms:
    def test_scalar_multiples_collapse(self):
        assert Line2.canonical(F11, 2, 4, 6) == Line2.canonical(F11, 1, 2, 3) == Line2(1, 2, 3)
        assert Line2.canonical(F11, 0, 3, 6) == Line2(0, 1, 2)
        assert Plane3.canonical(F5, 0, 0, 2, 4) == Plane3(0, 0, 1, 2)

    def test_degenerate(self):
        with pytest.raises(ValueError):
            Line2.canonical(F5, 0, 0, 1)
        with pytest.raises(ValueError):
            Plane3.canonical(F5, 0, 0, 0, 1)

    @settings(max_examples=50, deadline=None)
    @given(st.integers(0, 10), st.integers(0, 10), st.integers(0, 10), st.integers(1, 10))
    def test_multiset_merges_multiples(self, a, b, c, s):
        if a == b == 0:
            return
        L = LineMultiset.from_items(F11, [(a, b, c), (s * a, s * b, s * c)])
        assert L.support_size == 1 and L.total == 2

    def test_positive_multiplicities(self):
        with pytest.raises(ValueError):
            PointMultiset2.from_counts(F5, {(0, 0): 0})


class TestCounting:
    @pytest.mark.parametrize("strategy", STRATEGIES)
    def test_examples(self, strategy):
        P = PointMultiset2.from_items(F5, [(0, 0), (1, 1)])
        assert count_incidences_2d(P, LineMultiset.from_items(F5, [(1, 4, 0)]), strategy) == 2
        assert count_incidences_2d(full_points2(F5), all_lines(F5), strategy) == 150
        P = PointMultiset2.from_counts(F5, {(0, 0): 3})
        L = LineMultiset.from_counts(F5, {(0, 1, 0): 2})
        assert count_incidences_2d(P, L, strategy) == 6

    @pytest.mark.parametrize("strategy", STRATEGIES)
    def test_examples_3d(self, strategy):
        assert count_incidences_3d(full_points3(F3), all_planes(F3), strategy) == 351
        P = PointMultiset3.from_items(F5, [(1, 2, 3)])
        H = PlaneMultiset.from_items(F5, [(1, 1, 1, 1)])
        assert count_incidences_3d(P, H, strategy) == 1

    def test_field_mismatch(self):
        with pytest.raises(FieldMismatchError):
            count_incidences_2d(full_points2(F5), all_lines(F3))
        with pytest.raises(FieldMismatchError):
            count_incidences_3d(full_points3(F3), all_planes(F5))

    @settings(max_examples=40, deadline=None)
    @given(st.sampled_from([5, 7, 11]), st.integers(1, 30), st.integers(1, 30), st.integers(0, 2**32))
    def test_strategies_match_oracle(self, p, n, m, seed):
        field = PrimeField(p)
        P = random_points2(field, min(n, p * p), seed, max_mult=4)
        L = random_lines(field, min(m, p * p + p), seed + 1, max_mult=4)
        expected = oracles.incidences(p, dict(P.items()), {astuple(l): k for l, k in L.items()})
        for strategy in STRATEGIES:
            assert count_incidences_2d(P, L, strategy) == expected
        assert sum(line_point_counts(P, L)[l] * k for l, k in L.items()) == expected

    @settings(max_examples=25, deadline=None)
    @given(st.integers(1, 40), st.integers(1, 40), st.integers(0, 2**32))
    def test_plane_strategies_match_oracle(self, n, m, seed):
        P = random_points3(F5, n, seed)
        H = random_planes(F5, m, seed + 1)
        expected = oracles.incidences(5, dict(P.items()), {astuple(h): k for h, k in H.items()})
        for strategy in STRATEGIES:
            assert count_incidences_3d(P, H, strategy) == expected

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 2**32), st.integers(0, 10), st.integers(0, 10))
    def test_translation_invariance(self, seed, tx, ty):
        P = random_points2(F11, 20, seed, max_mult=3)
        L = random_lines(F11, 20, seed + 1, max_mult=3)
        assert count_incidences_2d(P, L) == count_incidences_2d(P.translate((tx, ty)), L.translate((tx, ty)))


class TestBoundChecks:
    def test_vinh_full_configuration(self):
        r = vinh_check(full_points2(F5), all_lines(F5))
        assert r.incidences == 150 and r.main_term == 150 and r.gap == 0 and r.satisfied

    def test_vinh_random(self):
        r = vinh_check(random_points2(F11, 30, 1), random_lines(F11, 30, 2))
        assert r.satisfied and r.size_points == r.size_lines == 30

    def test_vinh_rejects_multisets(self):
        P = PointMultiset2.from_counts(F5, {(0, 0): 2})
        with pytest.raises(ValueError, match="use hanson_check"):
            vinh_check(P, all_lines(F5))
        with pytest.raises(EmptySetError):
            vinh_check(PointMultiset2.from_items(F5, []), all_lines(F5))

    def test_hanson_example(self):
        P = PointMultiset2.from_counts(F5, {(0, 0): 3})
        L = LineMultiset.from_counts(F5, {(0, 1, 0): 2})
        r = hanson_check(P, L)
        assert r.incidences == 6
        assert r.main_term == pytest.approx(6 / 5)
        assert r.error_budget == pytest.approx(math.sqrt(5) * 3 * 2)
        assert r.satisfied

    def test_hanson_reduces_to_one_sided_vinh(self):
        P, L = random_points2(F11, 25, 3), random_lines(F11, 25, 4)
        h, v = hanson_check(P, L), vinh_check(P, L)
        assert h.error_budget == pytest.approx(v.error_budget)
        assert h.incidences == v.incidences and h.main_term == v.main_term

    def test_hanson_random_multiset(self):
        assert hanson_check(random_points2(F31, 80, 5, max_mult=5), random_lines(F31, 80, 6, max_mult=5)).satisfied

    def test_plane_examples(self):
        r = vinh_plane_check(full_points3(F3), all_planes(F3))
        assert r.incidences == 351 and r.main_term == 351 and r.gap == 0 and r.satisfied
        assert vinh_plane_check(random_points3(F5, 40, 7), random_planes(F5, 40, 8)).satisfied
        r = vinh_plane_check(PointMultiset3.from_items(F3, [(0, 0, 0)]),
                             PlaneMultiset.from_items(F3, [(1, 0, 0, 0)]))
        assert r.gap == pytest.approx(2 / 3) and r.error_budget == 3 and r.satisfied

    def test_plane_rejects_multisets(self):
        P = PointMultiset3.from_counts(F3, {(0, 0, 0): 2})
        with pytest.raises(ValueError):
            vinh_plane_check(P, all_planes(F3))

    def test_report_json(self):
        data = vinh_check(full_points2(F5), all_lines(F5)).to_json()
        assert data["kind"] == "vinh" and data["main_term"] == "150" and data["satisfied"]


class TestStevensDeZeeuw:
    @pytest.mark.parametrize("a,l,p", [(4, 8, 101), (0, 0, 7), (1, 1, 5), (10, 37, 211)])
    def test_formula(self, a, l, p):
        direct = a ** 1.5 * l / p ** 0.5 + a ** 1.25 * l ** 0.75 + a * a + l
        assert stevens_dezeeuw_bound(a, l, p) == pytest.approx(direct, rel=1e-12)

    def test_values(self):
        assert stevens_dezeeuw_bound(4, 8, 101) == pytest.approx(57.2769, abs=1e-4)
        assert stevens_dezeeuw_bound(0, 0, 101) == 0
        assert stevens_dezeeuw_bound(1, 1, 5) == pytest.approx(3.4472, abs=1e-4)
