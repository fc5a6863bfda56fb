import itertools
import math

import pytest
import numpy as np
from numpy.testing import assert_allclose

from heiscount import chains, counting, picard, zeta
from heiscount.exceptions import (ClassificationException, ConstraintViolationException, GuardExceededException,
                                  ZeroLatticeException)
from heiscount.heis import HeisIntElem
from heiscount.quadint import QuadInt, ZLattice2, ideal_span


def window_bruteforce(field, window, box=3):
    """
    Points a/c, alpha/c with c a unit, listed by direct search
    """
    re_lo, re_hi, im_lo, im_hi, v_lo, v_hi = window
    found = set()
    for c in field.units:
        cc = c.embed()
        for ax, ay, bx, by in itertools.product(range(-box, box + 1), repeat=4):
            a, alpha = QuadInt(field, ax, ay), QuadInt(field, bx, by)
            if (a * c.conj()).trace() != alpha.norm():
                continue
            w0 = a.embed() / cc
            w = alpha.embed() / cc
            if re_lo <= w.real < re_hi and im_lo <= w.imag < im_hi and v_lo <= w0.imag < v_hi:
                found.add(a.key + alpha.key + c.key)
    return found


class TestMertens:
    def test_small_values(self, gaussian):
        assert counting.mertens_counts(gaussian, [1, 2, 4, 5]) == [4, 8, 16, 48]
        assert counting.mertens_count(gaussian, s=1) == 4

    def test_bruteforce_small(self, gaussian, eisenstein):
        assert counting.mertens_bruteforce(gaussian, [1, 2, 3, 4]) == [4, 8, 8, 16]
        assert counting.mertens_bruteforce(eisenstein, [1, 2, 3, 4]) == [6, 6, 18, 24]

    def test_oracle(self, small_field):
        s_values = list(range(1, 21))
        assert counting.mertens_counts(small_field, s_values) == counting.mertens_bruteforce(small_field, s_values)

    @pytest.mark.slow
    def test_oracle_to_fifty(self, small_field):
        s_values = list(range(1, 51))
        assert counting.mertens_counts(small_field, s_values) == counting.mertens_bruteforce(small_field, s_values)

    def test_oracle_congruence(self, gaussian):
        ideal = ideal_span([QuadInt(gaussian, 1, 1)])
        s_values = list(range(2, 21, 2))
        counts = counting.mertens_counts(gaussian, s_values, ideal)
        assert counts == counting.mertens_bruteforce(gaussian, s_values, ideal)
        assert all(n <= m for n, m in zip(counts, counting.mertens_counts(gaussian, s_values)))

    def test_nondecreasing(self, small_field):
        counts = counting.mertens_counts(small_field, range(1, 80))
        assert np.all(np.diff(counts) >= 0)

    def test_workers(self, gaussian):
        s_values = [10, 40, 90]
        assert counting.mertens_counts(gaussian, s_values, workers=2) == counting.mertens_counts(gaussian, s_values)

    def test_errors(self, gaussian, eisenstein):
        with pytest.raises(ValueError, match=r"at least 1"):
            counting.mertens_counts(gaussian, [0, 4])
        with pytest.raises(ZeroLatticeException):
            counting.mertens_counts(gaussian, [4], ZLattice2(gaussian))
        with pytest.raises(ValueError, match=r"not D = -4"):
            counting.mertens_counts(gaussian, [4], ideal_span([QuadInt(eisenstein, 2)]))

    def test_report(self, gaussian):
        report = counting.mertens_report(gaussian, [16, 64])
        assert report.counts == counting.mertens_counts(gaussian, [16, 64])
        assert_allclose(report.constant, 96 / math.pi ** 4, rtol=1e-9)
        assert_allclose(np.divide(report.ratios_stated, report.ratios), 12, rtol=1e-9)

    @pytest.mark.slow
    def test_asymptotic(self, gaussian):
        report = counting.mertens_report(gaussian, [256, 1024, 4096])
        errors = np.abs(np.asarray(report.ratios) - 1)
        assert errors[-1] < 0.1
        assert np.all(np.diff(errors) < 0)


class TestElements:
    def test_norm_bound(self, small_field):
        xs, ys = counting.elements_of_norm_at_most(small_field, 30)
        n = counting.norms(small_field, xs, ys)
        assert np.all((n > 0) & (n <= 30))
        assert np.all(np.diff(n) >= 0)
        assert len(xs) == len(set(zip(xs.tolist(), ys.tolist())))

    def test_units(self, small_field):
        xs, ys = counting.elements_of_norm_at_most(small_field, 1)
        assert len(xs) == len(small_field.units)

    def test_in_ideal(self, gaussian):
        ideal = ideal_span([QuadInt(gaussian, 1, 1)])
        xs, ys = counting.elements_of_norm_at_most(gaussian, 20, ideal)
        assert all(QuadInt(gaussian, int(x), int(y)) in ideal for x, y in zip(xs, ys))


class TestRationalPoints:
    window = (-1, 1, -1, 1, -1, 1)

    def test_bruteforce(self, gaussian):
        points = counting.rational_points_in_window(gaussian, 1, self.window)
        assert {t.key for _, t in points} == window_bruteforce(gaussian, self.window)
        assert len(points) == len({t.key for _, t in points})

    def test_origin(self, gaussian):
        points = counting.rational_points_in_window(gaussian, 1, (-0.5, 0.5, -0.5, 0.5, -0.5, 0.5))
        keys = {t.key for _, t in points}
        assert (0, 0, 0, 0, 1, 0) in keys

    def test_hyperconic(self, small_field):
        for p, t in counting.rational_points_in_window(small_field, 12, self.window):
            w0 = t.a.embed() / t.c.embed()
            assert abs(2 * w0.real - abs(p.zeta) ** 2) < 1e-12
            assert_allclose(p.u, -2 * w0.imag, atol=1e-12)
            assert 0 < t.c.norm() <= 12

    def test_window_errors(self, gaussian):
        with pytest.raises(ValueError, match=r"six finite numbers"):
            counting.rational_points_in_window(gaussian, 4, (0, 1, 0, 1, 0, np.inf))
        with pytest.raises(ValueError, match=r"six finite numbers"):
            counting.rational_points_in_window(gaussian, 4, (0, 1, 0, 1))
        with pytest.raises(ValueError, match=r"increasing"):
            counting.rational_points_in_window(gaussian, 4, (1, 0, 0, 1, 0, 1))


class TestEquidistribution:
    window = (-1, 1, -1, 1, -1, 1)

    def test_box_grid(self):
        boxes = counting.box_grid(self.window, 3)
        assert len(boxes) == 27
        volumes = [np.prod(np.subtract(hi, lo)) for lo, hi in boxes]
        assert_allclose(sum(volumes), 8.0)
        with pytest.raises(ValueError, match=r"positive"):
            counting.box_grid(self.window, 0)

    def test_box_order(self):
        lo, hi = counting.box_grid((0, 1, 2, 3, 4, 5), 1)[0]
        assert_allclose(lo, (4, 0, 2))
        assert_allclose(hi, (5, 1, 3))

    def test_counts_match_points(self, gaussian):
        boxes = counting.box_grid(self.window, 2)
        points = counting.rational_points_in_window(gaussian, 10, self.window)
        counts = counting.window_box_counts(gaussian, 10, boxes)
        assert counts.sum() == len(points)
        report = counting.equidist_statistic(points, 10, gaussian, boxes)
        assert list(report.counts) == list(counts)
        assert list(counting.window_box_counts(gaussian, 10, boxes, workers=2)) == list(counts)

    def test_report(self, gaussian):
        boxes = counting.box_grid(self.window, 2)
        report = counting.equidist_report(gaussian, 16, boxes)
        b = zeta.constants(-4)
        assert_allclose(report.constant, b.equidist_C_lattice)
        assert_allclose(report.masses, report.constant * report.counts / 16 ** 2)
        assert_allclose(report.volumes, 1.0)
        assert report.discrepancy == pytest.approx(np.max(np.abs(report.masses - 1.0)))
        stated = counting.equidist_report(gaussian, 16, boxes, normalization='stated')
        assert_allclose(stated.constant, b.equidist_C)
        with pytest.raises(ValueError, match=r"Unknown normalization"):
            counting.equidist_report(gaussian, 16, boxes, normalization='haar')

    def test_empty(self, gaussian):
        boxes = counting.box_grid(self.window, 1)
        report = counting.equidist_statistic([], 4, gaussian, boxes)
        assert_allclose(report.masses, 0.0)
        assert_allclose(report.discrepancy, 8.0)

    @pytest.mark.slow
    def test_asymptotic(self, gaussian):
        unit_box = [((0, 0, 0), (1, 1, 1)), ((-1, 0.5, -0.5), (0, 1.5, 0.5))]
        grid = counting.box_grid(self.window, 3)
        discrepancies = []
        for s in (256, 1024, 4096):
            discrepancies.append(counting.equidist_report(gaussian, s, grid).discrepancy)
        assert np.all(np.diff(discrepancies) < 0)
        report = counting.equidist_report(gaussian, 4096, unit_box)
        assert_allclose(report.masses, report.volumes, rtol=0.1)


class TestChains:
    def test_bound(self):
        assert counting.chain_bound(1, 0.5) == 16
        assert counting.chain_bound(1, 1 / 8) == 256
        assert counting.chain_bound(1, 3) == 0
        with pytest.raises(ValueError, match=r"positive"):
            counting.chain_bound(1, 0)

    def test_count(self, gaussian):
        gens = picard.default_generators(gaussian)
        report = counting.chain_count(gaussian, gens, [3.0, 1.0, 0.5], 24)
        assert report.bounds == [0, 4, 16]
        assert report.counts[0] == 0
        assert np.all(np.diff(report.counts) >= 0)
        assert all(report.saturated)
        assert not report.partial
        assert_allclose(report.constant, 12 / math.pi ** 2)
        assert_allclose(report.constant_stated, 512 / (3 * math.pi ** 2))

    def test_saturation_per_eps(self, gaussian):
        gens = picard.default_generators(gaussian)
        report = counting.chain_count(gaussian, gens, [3.0, 0.25], 2, saturation_levels=1)
        assert report.bounds == [0, 64]
        assert report.saturated == [True, False]
        assert not report.orbit.saturated

    @pytest.mark.slow
    def test_growth(self, gaussian):
        gens = picard.default_generators(gaussian)
        report = counting.chain_count(gaussian, gens, [1 / 2, 1 / 4, 1 / 8], 32)
        assert all(report.saturated)
        assert abs(report.slope - 4) < 0.3
        assert 0.5 < report.ratios[-1] < 2

    def test_centers(self, gaussian):
        gens = picard.default_generators(gaussian)
        window = (-1, 1, -1, 1, -1, 1)
        eps = 0.5
        centers, report = counting.chain_centers(gaussian, gens, eps, 24, window, grid=2)
        assert len(centers) == report.counts.sum()
        assert all(np.all(np.isfinite(p.as_list())) for p in centers)
        found = {tuple(np.round(p.as_list(), 9)) for p in centers}

        orbit = picard.orbit_bfs(chains.seed_chain(gaussian).v, gens, 24, 16, projective=True)
        n_checked = 0
        for v in orbit.vectors(16):
            p = chains.chain_center(chains.PolarPoint(v))
            re_w, im_w, u = p.as_list()
            if -1 <= re_w < 1 and -1 <= im_w < 1 and -1 <= -u / 2 < 1:
                assert tuple(np.round(p.as_list(), 9)) in found
                n_checked += 1
        assert n_checked > 0

    def test_centers_normalization(self, gaussian):
        gens = picard.default_generators(gaussian)
        window = (0, 1, 0, 1, 0, 1)
        _, report = counting.chain_centers(gaussian, gens, 1.0, 24, window)
        assert_allclose(report.constant, zeta.chain_center_constant(gaussian, 12 / math.pi ** 2))
        with pytest.raises(ValueError, match=r"Unknown normalization"):
            counting.chain_centers(gaussian, gens, 1.0, 24, window, normalization='haar')


class TestCubic:
    def test_below_seed(self, gaussian):
        seed = picard.default_cubic_seed(gaussian)
        report = counting.cubic_count(seed, picard.default_generators(gaussian), [1e-6, 1e-5], 4)
        assert report.counts == [0, 0]
        assert report.translation_length > 0
        assert report.search_radius == {'scale': 2.0, 'margin': 2.0}

    def test_search_radius(self, gaussian):
        seed = picard.default_cubic_seed(gaussian)
        gens = picard.default_generators(gaussian)
        report = counting.cubic_count(seed, gens, [1e-6], 2, radius_scale=1.0, radius_margin=0.5)
        assert report.search_radius == {'scale': 1.0, 'margin': 0.5}
        assert report.counts == [0]

    @pytest.mark.slow
    def test_counts(self, gaussian):
        seed = picard.default_cubic_seed(gaussian)
        report = counting.cubic_count(seed, picard.default_generators(gaussian), [0.5, 1, 2, 4], 6)
        assert np.all(np.diff(report.counts) >= 0)
        assert np.all(np.diff(report.complexities) >= 0)
        assert report.counts[-1] == np.sum(report.complexities <= 4)

    def test_rejects_parabolic(self, gaussian):
        m = picard.heis_to_matrix(HeisIntElem(gaussian.one(), QuadInt(gaussian, 1, 1)))
        with pytest.raises(ClassificationException, match=r"not loxodromic"):
            counting.cubic_count(m, picard.default_generators(gaussian), [1.0], 2)


class TestFiniteGroups:
    def test_trivial(self, gaussian):
        assert counting.finite_group_orders(gaussian) == (1, 1, False, 1)

    def test_ramified_prime(self, gaussian):
        orders = counting.finite_group_orders(gaussian, ideal_span([QuadInt(gaussian, 1, 1)]))
        assert orders.su_order == orders.su_bruteforce == 6
        assert orders.b_order == 2
        assert not orders.su_is_lower_bound
        assert orders.su_order % orders.b_order == 0

    def test_errors(self, gaussian):
        with pytest.raises(ConstraintViolationException, match=r"conjugation"):
            counting.finite_group_orders(gaussian, ideal_span([QuadInt(gaussian, 2, 1)]))
        with pytest.raises(GuardExceededException, match=r"guard"):
            counting.finite_group_orders(gaussian, ideal_span([QuadInt(gaussian, 3)]), max_ring_size=4)
