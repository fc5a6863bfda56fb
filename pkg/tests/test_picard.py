import itertools
import json
import math

import pytest
import numpy as np
from numpy.testing import assert_allclose

from heiscount import picard
from heiscount.exceptions import (ClassificationException, ConstraintViolationException, FieldMismatchException,
                                  UnsupportedFieldException)
from heiscount.heis import HeisIntElem, pi_lattice, vertical_part
from heiscount.picard import SUqMat
from heiscount.quadint import QuadInt, imaginary_generator, make_field


def random_word(rng, gens, length):
    word = SUqMat.identity(gens[0].field)
    for i in rng.integers(0, len(gens), length):
        word = word * gens[i]
    return word


def random_heis_matrix(rng, field, bound=5):
    w = QuadInt(field, 2, 0) * QuadInt(field, *rng.integers(-bound, bound + 1, 2)) + \
        QuadInt(field, 1, 1) * int(rng.integers(0, 2))
    w0 = vertical_part(w) + imaginary_generator(field) * int(rng.integers(-bound, bound + 1))
    return picard.heis_to_matrix(HeisIntElem(w0, w))


class TestSUqMat:
    def test_generators(self, gaussian):
        gens = picard.default_generators(gaussian)
        assert all(picard.check_membership(g) for g in gens)
        identity = SUqMat.identity(gaussian)
        assert all(g * g.inv() == identity for g in gens)
        s = picard.sigma(gaussian)
        assert s * s == identity
        assert not s.fixes_infinity()
        assert picard.diag_unit(gaussian.gen()).fixes_infinity()

    def test_unsupported_field(self, eisenstein):
        with pytest.raises(UnsupportedFieldException, match=r"D = -3"):
            picard.default_generators(eisenstein)

    def test_diag_unit(self, gaussian):
        d = picard.diag_unit(gaussian.gen())
        assert picard.check_membership(d)
        assert d[1, 1] == -1
        with pytest.raises(ConstraintViolationException, match=r"not a unit"):
            picard.diag_unit(QuadInt(gaussian, 1, 1))

    def test_form_preserved(self, gaussian):
        rng = np.random.default_rng(17)
        gens = picard.default_generators(gaussian)
        for _ in range(100):
            m = random_word(rng, gens, 6)
            assert picard.check_membership(m)
            v = tuple(QuadInt(gaussian, *rng.integers(-5, 6, 2)) for _ in range(3))
            assert picard.hermitian_form(m.apply(v)) == picard.hermitian_form(v)

    def test_non_member(self, gaussian):
        m = SUqMat.from_rows(gaussian, [[1, 1, 0], [0, 1, 0], [0, 0, 1]])
        assert not picard.check_membership(m)
        assert picard.check_membership([[gaussian.one(), gaussian.zero(), gaussian.zero()],
                                        [gaussian.zero(), gaussian.one(), gaussian.zero()],
                                        [gaussian.zero(), gaussian.zero(), gaussian.one()]])

    def test_mixed_fields(self, gaussian, eisenstein):
        with pytest.raises(FieldMismatchException):
            SUqMat(gaussian, [eisenstein.one()] * 9)


class TestGeneratorFiles:
    def test_roundtrip(self, gaussian, tmp_path):
        gens = picard.default_generators(gaussian)
        path = tmp_path / "gens.json"
        picard.save_generators(str(path), gens)
        loaded = picard.load_generators(str(path), gaussian)
        assert set(g.key for g in loaded) == set(g.key for g in gens)

    def test_wrong_field(self, gaussian, tmp_path):
        path = tmp_path / "gens.json"
        picard.save_generators(str(path), picard.default_generators(gaussian))
        with pytest.raises(FieldMismatchException):
            picard.load_generators(str(path), make_field(-3))

    def test_non_member(self, gaussian, tmp_path):
        path = tmp_path / "gens.json"
        path.write_text(json.dumps({'disc': -4, 'generators': [[[1, 1, 0], [0, 1, 0], [0, 0, 1]]]}))
        with pytest.raises(ConstraintViolationException, match=r"Generator 0"):
            picard.load_generators(str(path))

    def test_element(self, gaussian, tmp_path):
        seed = picard.default_cubic_seed(gaussian)
        path = tmp_path / "gamma.json"
        path.write_text(json.dumps({'disc': -4, 'gamma': seed.to_json()}))
        assert picard.load_element(str(path), gaussian) == seed


class TestCanonicalForm:
    def test_parabolic_invariance(self, gaussian):
        rng = np.random.default_rng(5)
        gens = picard.default_generators(gaussian)
        diags = [picard.diag_unit(u) for u in gaussian.units]
        seed = (gaussian.zero(), gaussian.one(), gaussian.zero())
        for _ in range(100):
            v = random_word(rng, gens, 8).apply(seed)
            if not v[2]:
                continue
            gamma = random_heis_matrix(rng, gaussian) * diags[int(rng.integers(0, 4))]
            for projective in (False, True):
                assert picard.canonical_key(gamma.apply(v), projective=projective) == \
                    picard.canonical_key(v, projective=projective)

    def test_projective_scalars(self, gaussian):
        v = (QuadInt(gaussian, 1, 1), QuadInt(gaussian, 2, 1), QuadInt(gaussian, 3, -1))
        iv = tuple(gaussian.gen() * z for z in v)
        assert picard.canonical_key(iv, projective=True) == picard.canonical_key(v, projective=True)

    def test_symmetries(self, gaussian, eisenstein):
        assert len(picard.column_symmetries(gaussian)) == 4
        assert len(picard.column_symmetries(gaussian, projective=True)) == 16
        assert len(picard.column_symmetries(eisenstein)) == 6


class TestClassification:
    def test_cubic_seed(self, gaussian):
        m = picard.default_cubic_seed(gaussian)
        assert picard.check_membership(m)
        assert m.trace() == QuadInt(gaussian, 8, 1)
        assert m.minor_sum() == QuadInt(gaussian, 8, -1)
        assert m.det() == 1
        assert picard.trace_discriminant(m) == 1464
        cls = picard.classify(m)
        assert cls.kind == 'loxodromic'
        assert picard.is_K_irreducible(m)
        assert picard.translation_length(m) > 0
        assert_allclose(np.prod(cls.eigenvalues), 1.0, atol=1e-9)

    def test_fixed_points(self, gaussian):
        m = picard.default_cubic_seed(gaussian)
        v_att, v_rep = picard.isotropic_eigenvectors(m)
        assert picard.complex_form_residual(v_att) < 1e-9
        assert picard.complex_form_residual(v_rep) < 1e-9
        att, rep = picard.fixed_boundary_points(m)
        assert att is not None and rep is not None
        assert abs(att.zeta - rep.zeta) + abs(att.u - rep.u) > 1e-6

    def test_parabolic(self, gaussian):
        m = picard.heis_to_matrix(HeisIntElem(gaussian.one(), QuadInt(gaussian, 1, 1)))
        assert picard.trace_discriminant(m) == 0
        assert picard.classify(m).kind == 'other'
        assert not picard.is_K_irreducible(m)
        with pytest.raises(ClassificationException, match=r"loxodromic"):
            picard.translation_length(m)


def q1_classes(field, bound):
    """
    Projective classes of q = 1 vectors with a, c in (1+i), by direct search
    """
    pi = pi_lattice(field).lattice
    keys = set()
    for cx in range(-3, 4):
        for cy in range(-3, 4):
            c = QuadInt(field, cx, cy)
            if not c or c.norm() > bound or c not in pi:
                continue
            box = 4 * int(np.ceil(np.sqrt(c.norm()))) + 4
            for alpha in pi.scaled(c).representatives():
                for ax in range(-box, box + 1):
                    for ay in range(-box, box + 1):
                        a = QuadInt(field, ax, ay)
                        if a not in pi or (a * c.conj()).trace() != alpha.norm() - 1:
                            continue
                        keys.add(picard.canonical_key((a, alpha, c), projective=True))
    return keys


class TestOrbitBFS:
    def test_lattice_points(self, gaussian):
        pi = pi_lattice(gaussian).lattice
        pts = picard.lattice_points_in_disc(pi, 0j, 2.0)
        assert set(p.key for p in pts) >= {(0, 0), (1, 1), (1, -1), (-1, 1), (-1, -1)}
        assert all(p in pi for p in pts)

    def test_chain_orbit(self, gaussian):
        seed = (gaussian.zero(), gaussian.one(), gaussian.zero())
        orbit = picard.orbit_bfs(seed, picard.default_generators(gaussian), 24, 8, projective=True)
        assert orbit.saturated
        assert not orbit.partial
        pi = pi_lattice(gaussian).lattice
        for v in orbit.vectors(8):
            assert picard.hermitian_form(v) == 1
            assert v[0] in pi and v[2] in pi
        finite = {k for k in orbit.keys() if orbit.classes[k].cnorm > 0}
        assert finite == q1_classes(gaussian, 8)
        assert orbit.count(8) == len(finite)

    def test_words_inside_orbit(self, gaussian):
        rng = np.random.default_rng(2024)
        gens = picard.default_generators(gaussian)
        seed = (gaussian.zero(), gaussian.one(), gaussian.zero())
        orbit = picard.orbit_bfs(seed, gens, 24, 16, projective=True)
        n_checked = 0
        for _ in range(300):
            v = random_word(rng, gens, int(rng.integers(1, 8))).apply(seed)
            if v[2] and v[2].norm() <= 16:
                assert v in orbit
                n_checked += 1
        assert n_checked > 0

    def test_witness(self, gaussian):
        seed = (gaussian.zero(), gaussian.one(), gaussian.zero())
        orbit = picard.orbit_bfs(seed, picard.default_generators(gaussian), 24, 8, projective=True)
        for key in sorted(orbit.keys())[:20]:
            w = orbit.witness(key)
            assert picard.check_membership(w)
            assert picard.canonical_key(w.apply(seed), projective=True) == key

    def test_workers_deterministic(self, gaussian):
        seed = (gaussian.zero(), gaussian.one(), gaussian.zero())
        gens = picard.default_generators(gaussian)
        serial = picard.orbit_bfs(seed, gens, 24, 8, projective=True)
        parallel = picard.orbit_bfs(seed, gens, 24, 8, projective=True, workers=2)
        assert serial.keys() == parallel.keys()
        assert serial.level_sizes == parallel.level_sizes

    def test_size_guard(self, gaussian):
        seed = (gaussian.zero(), gaussian.one(), gaussian.zero())
        orbit = picard.orbit_bfs(seed, picard.default_generators(gaussian), 24, 64, projective=True, max_size=5)
        assert orbit.partial
        assert not orbit.saturated

    def test_saturated_at(self, gaussian):
        seed = (gaussian.zero(), gaussian.one(), gaussian.zero())
        gens = picard.default_generators(gaussian)
        orbit = picard.orbit_bfs(seed, gens, 24, 8, projective=True)
        assert orbit.saturated_at(8)
        assert orbit.saturated_at(2)
        shallow = picard.orbit_bfs(seed, gens, 2, 16, projective=True, saturation_levels=1)
        assert shallow.saturated_at(0)
        assert not shallow.saturated_at(16)
        guarded = picard.orbit_bfs(seed, gens, 24, 64, projective=True, max_size=5)
        assert not guarded.saturated_at(0)


def translations_in_box(field, radius_sq, k_max):
    """
    Heisenberg translations with |w|^2 <= radius_sq and |k| <= k_max, by direct search over (x, y)
    """
    pi = pi_lattice(field).lattice
    nu = imaginary_generator(field)
    r = math.isqrt(int(radius_sq)) + 1
    mats = []
    for x, y in itertools.product(range(-r, r + 1), repeat=2):
        w = QuadInt(field, x, y)
        if w.norm() > radius_sq or w not in pi:
            continue
        for k in range(-k_max, k_max + 1):
            mats.append(picard.heis_to_matrix(HeisIntElem(vertical_part(w) + nu * k, w)))
    return mats


def sigma_level(field, vectors, translations, bound):
    """
    Classes of sigma * t * d * v over the given translations t and all diagonal units d, with n(c) <= bound
    """
    s = picard.sigma(field)
    diag = [picard.diag_unit(u) for u in field.units]
    out = {}
    for v in vectors:
        for d in diag:
            dv = d.apply(v)
            for t in translations:
                if (t[0, 0] * dv[0] + t[0, 1] * dv[1] + t[0, 2] * dv[2]).norm() > bound:
                    continue
                col = picard.canonical_column(s.apply(t.apply(dv)), field, projective=True)
                out.setdefault(picard.column_key(col), col)
    return out


class TestOrbitWords:
    bound = 4

    def test_contains_generator_words(self, gaussian):
        seed = (gaussian.zero(), gaussian.one(), gaussian.zero())
        gens = picard.default_generators(gaussian)
        orbit = picard.orbit_bfs(seed, gens, 2, self.bound, projective=True)
        words = [SUqMat.identity(gaussian)] + gens + [g * h for g in gens for h in gens]
        keys = set()
        for m in words:
            v = m.apply(seed)
            if v[2].norm() <= self.bound:
                keys.add(picard.canonical_key(v, gaussian, projective=True))
        assert any(orbit.classes[k].cnorm > 0 for k in keys & orbit.keys())
        assert keys <= orbit.keys()

    def test_equals_words_modulo_stabilizer(self, gaussian):
        seed = (gaussian.zero(), gaussian.one(), gaussian.zero())
        orbit = picard.orbit_bfs(seed, picard.default_generators(gaussian), 2, self.bound, projective=True)
        translations = translations_in_box(gaussian, 36, 24)
        level1 = sigma_level(gaussian, [seed], translations, self.bound)
        level2 = sigma_level(gaussian, list(level1.values()), translations, self.bound)
        expected = {picard.canonical_key(seed, gaussian, projective=True)} | set(level1) | set(level2)
        assert orbit.keys() == expected


class TestGeneratorMoves:
    def shifted_sigma(self, field):
        t = picard.heis_to_matrix(HeisIntElem(QuadInt(field, 1, 1), QuadInt(field, 1, 1)))
        return picard.sigma(field) * t

    def test_row_offset(self, gaussian):
        g = self.shifted_sigma(gaussian)
        assert picard.check_membership(g)
        assert not g.fixes_infinity()
        assert_allclose(picard.row_offset(g), 1 + 1j)
        assert picard.row_offset(picard.sigma(gaussian)) == 0

    def test_complete(self, gaussian):
        g = self.shifted_sigma(gaussian)
        bound = 8
        translations = translations_in_box(gaussian, 49, 30)
        i = gaussian.gen()
        one, zero = gaussian.one(), gaussian.zero()
        for v in [(zero, -one, one - i), (zero, one, zero), (one, zero, zero), (i, one + i, one + i)]:
            found = set()
            for w, k in picard.generator_moves(g, v, bound):
                t = picard.heis_to_matrix(HeisIntElem(vertical_part(w) + imaginary_generator(gaussian) * k, w))
                found.add(picard.column_key(g.apply(t.apply(v))))
            for t in translations:
                child = g.apply(t.apply(v))
                if child[2].norm() <= bound:
                    assert picard.column_key(child) in found

    def test_same_orbit_as_sigma(self, gaussian):
        seed = (gaussian.zero(), gaussian.one(), gaussian.zero())
        gens = picard.default_generators(gaussian)
        parabolic = [m for m in gens if m.fixes_infinity()]
        g = self.shifted_sigma(gaussian)
        shifted = picard.orbit_bfs(seed, parabolic + [g, g.inv()], 24, 8, projective=True)
        plain = picard.orbit_bfs(seed, gens, 24, 8, projective=True)
        assert shifted.saturated
        assert shifted.keys() == plain.keys()
