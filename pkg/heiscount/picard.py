from __future__ import annotations

import itertools
import json
import math
from collections import namedtuple
from functools import lru_cache

import numpy as np
from joblib import Parallel, delayed

from heiscount.exceptions import (ClassificationException, ConstraintViolationException, FieldMismatchException,
                                  UnsupportedFieldException)
from heiscount.heis import HeisIntElem, HeisPt, reduce_column, vertical_part, pi_lattice
from heiscount.helper import log
from heiscount.quadint import FieldSpec, QuadInt, imaginary_generator, make_field


class SUqMat:
    """
    3x3 matrix over O_K in the coordinates (z0, z1, z2). Membership in SU_q is checked by check_membership,
    not on construction, so that products can be formed cheaply during orbit expansion.
    """
    __slots__ = ('field', 'entries')

    def __init__(self, field: FieldSpec, entries) -> None:
        entries = tuple(entries)
        if len(entries) != 9:
            raise ValueError(f"SUqMat needs 9 entries, got {len(entries)}")
        for e in entries:
            if e.field is not field:
                raise FieldMismatchException("Matrix entry from a different field")
        self.field = field
        self.entries = entries

    @classmethod
    def from_rows(cls, field: FieldSpec, rows) -> SUqMat:
        entries = []
        for row in rows:
            for e in row:
                if isinstance(e, QuadInt):
                    entries.append(e)
                elif isinstance(e, (list, tuple)):
                    entries.append(QuadInt(field, e[0], e[1]))
                else:
                    entries.append(QuadInt(field, e, 0))
        return cls(field, entries)

    @classmethod
    def identity(cls, field: FieldSpec) -> SUqMat:
        z, o = field.zero(), field.one()
        return cls(field, (o, z, z, z, o, z, z, z, o))

    def __getitem__(self, ij) -> QuadInt:
        i, j = ij
        return self.entries[3 * i + j]

    def rows(self):
        return [self.entries[3 * i:3 * i + 3] for i in range(3)]

    def __repr__(self) -> str:
        return f"SUqMat(D={self.field.disc}, {[[e.key for e in r] for r in self.rows()]})"

    @property
    def key(self):
        return tuple(k for e in self.entries for k in e.key)

    def __eq__(self, other) -> bool:
        return isinstance(other, SUqMat) and self.field is other.field and self.key == other.key

    def __hash__(self) -> int:
        return hash((self.field.disc, self.key))

    def __mul__(self, other: SUqMat) -> SUqMat:
        a, b = self.entries, other.entries
        out = []
        for i in range(3):
            for j in range(3):
                out.append(a[3 * i] * b[j] + a[3 * i + 1] * b[3 + j] + a[3 * i + 2] * b[6 + j])
        return SUqMat(self.field, out)

    def apply(self, v):
        m = self.entries
        return tuple(m[3 * i] * v[0] + m[3 * i + 1] * v[1] + m[3 * i + 2] * v[2] for i in range(3))

    def conj_transpose(self) -> SUqMat:
        return SUqMat(self.field, [self[j, i].conj() for i in range(3) for j in range(3)])

    def inv(self) -> SUqMat:
        # M^-1 = J M^* J for M in SU_q
        j = form_matrix(self.field)
        return j * self.conj_transpose() * j

    def det(self) -> QuadInt:
        m = self
        return (m[0, 0] * (m[1, 1] * m[2, 2] - m[1, 2] * m[2, 1])
                - m[0, 1] * (m[1, 0] * m[2, 2] - m[1, 2] * m[2, 0])
                + m[0, 2] * (m[1, 0] * m[2, 1] - m[1, 1] * m[2, 0]))

    def trace(self) -> QuadInt:
        return self[0, 0] + self[1, 1] + self[2, 2]

    def minor_sum(self) -> QuadInt:
        m = self
        return (m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
                + m[0, 0] * m[2, 2] - m[0, 2] * m[2, 0]
                + m[1, 1] * m[2, 2] - m[1, 2] * m[2, 1])

    def to_complex(self):
        return np.array([[e.embed() for e in row] for row in self.rows()], dtype=np.complex128)

    def to_json(self):
        return [[list(e.key) for e in row] for row in self.rows()]

    def fixes_infinity(self) -> bool:
        return not self[1, 0] and not self[2, 0]


@lru_cache(maxsize=None)
def form_matrix(field: FieldSpec) -> SUqMat:
    return SUqMat.from_rows(field, [[0, 0, -1], [0, 1, 0], [-1, 0, 0]])


def hermitian_form(v) -> int:
    """
    q(z0, z1, z2) = -z0 conj(z2) - z2 conj(z0) + |z1|^2
    """
    z0, z1, z2 = v
    return z1.norm() - (z0 * z2.conj()).trace()


def check_membership(m) -> bool:
    if not isinstance(m, SUqMat):
        rows = [list(r) for r in m]
        field = rows[0][0].field
        m = SUqMat(field, [e for r in rows for e in r])
    j = form_matrix(m.field)
    return m.conj_transpose() * j * m == j and m.det() == 1


def heis_to_matrix(g: HeisIntElem) -> SUqMat:
    f = g.field
    return SUqMat(f, (f.one(), g.w.conj(), g.w0,
                      f.zero(), f.one(), g.w,
                      f.zero(), f.zero(), f.one()))


def diag_unit(a1: QuadInt) -> SUqMat:
    if not a1.is_unit():
        raise ConstraintViolationException(f"{a1} is not a unit")
    f = a1.field
    z = f.zero()
    a2 = a1.conj() * a1.conj()
    return SUqMat(f, (a1, z, z, z, a2, z, z, z, a1))


def sigma(field: FieldSpec) -> SUqMat:
    return SUqMat.from_rows(field, [[0, 0, 1], [0, -1, 0], [1, 0, 0]])


def _dedup(mats):
    seen = {}
    for m in mats:
        seen.setdefault(m.key, m)
    return list(seen.values())


def default_generators(field: FieldSpec) -> list[SUqMat]:
    if field.disc != -4:
        raise UnsupportedFieldException(
            f"No default generators for D = {field.disc}; supply a generator file")
    i = field.gen()
    one = field.one()
    gens = [
        heis_to_matrix(HeisIntElem(one, one + i)),
        heis_to_matrix(HeisIntElem(one, one - i)),
        heis_to_matrix(HeisIntElem(i, field.zero())),
        sigma(field),
        diag_unit(i),
    ]
    return _dedup(gens + [g.inv() for g in gens])


def load_generators(path, field: FieldSpec = None) -> list[SUqMat]:
    with open(path, 'r') as f:
        data = json.load(f)
    if isinstance(data, dict):
        disc = data.get('disc', None if field is None else field.disc)
        mats = data['generators']
    else:
        disc = None if field is None else field.disc
        mats = data
    if disc is None:
        raise ValueError(f"{path} does not name a discriminant and no field was given")
    if field is not None and disc != field.disc:
        raise FieldMismatchException(f"{path} holds generators for D = {disc}, requested D = {field.disc}")
    field = make_field(disc)

    gens = [SUqMat.from_rows(field, rows) for rows in mats]
    for i_gen, g in enumerate(gens):
        if not check_membership(g):
            raise ConstraintViolationException(f"Generator {i_gen} in {path} is not in SU_q(O_K)")
    return _dedup(gens + [g.inv() for g in gens])


def save_generators(path, gens):
    with open(path, 'w') as f:
        json.dump({'disc': gens[0].field.disc, 'generators': [g.to_json() for g in gens]}, f, indent=1)


def load_element(path, field: FieldSpec) -> SUqMat:
    """
    Single matrix from {'disc': D, 'gamma': rows} or bare rows; entries are [x, y] pairs or integers
    """
    with open(path, 'r') as f:
        data = json.load(f)
    if isinstance(data, dict):
        if data.get('disc', field.disc) != field.disc:
            raise FieldMismatchException(f"{path} holds an element for D = {data['disc']}, requested D = {field.disc}")
        data = data['gamma']
    m = SUqMat.from_rows(field, data)
    if not check_membership(m):
        raise ConstraintViolationException(f"The element in {path} is not in SU_q(O_K)")
    return m


# Column classes modulo Gamma_infinity
def column_key(col):
    a, alpha, c = col
    return c.key + alpha.key + a.key


@lru_cache(maxsize=None)
def column_symmetries(field: FieldSpec, projective=False):
    """
    Pairs (mu, r) acting on columns by (a, alpha, c) -> (mu a, r alpha, mu c): diagonal units diag(a1, conj(a1)^2, a1)
    together with the scalars that are quotiented (cube roots of unity in SU_q, all units projectively)
    """
    units = field.units
    elems = {(u.key, (u.conj() * u.conj()).key): (u, u.conj() * u.conj()) for u in units}
    for lam in units:
        if projective or (lam * lam * lam == 1):
            elems.setdefault((lam.key, lam.key), (lam, lam))

    # closure under componentwise products
    changed = True
    while changed:
        changed = False
        for (m1, r1), (m2, r2) in list(itertools.product(list(elems.values()), repeat=2)):
            m, r = m1 * m2, r1 * r2
            if (m.key, r.key) not in elems:
                elems[(m.key, r.key)] = (m, r)
                changed = True
    return tuple(elems[k] for k in sorted(elems))


def canonical_column(v, field: FieldSpec = None, projective=False):
    a, alpha, c = v
    field = c.field if field is None else field
    syms = column_symmetries(field, projective)
    if c:
        c_key = min((mu * c).key for mu, _ in syms)
        syms = [(mu, r) for mu, r in syms if (mu * c).key == c_key]
    best = None
    best_key = None
    for mu, r in syms:
        col = reduce_column(mu * a, r * alpha, mu * c)
        key = column_key(col)
        if best_key is None or key < best_key:
            best, best_key = col, key
    return best


def canonical_key(v, field: FieldSpec = None, projective=False):
    return column_key(canonical_column(v, field, projective))


# Classification
Classification = namedtuple('Classification', ['kind', 'eigenvalues', 'lam'])


def char_poly(m: SUqMat):
    """
    Coefficients (tr, c2, det) of x^3 - tr x^2 + c2 x - det
    """
    return m.trace(), m.minor_sum(), m.det()


def trace_discriminant(m: SUqMat) -> int:
    """
    |t|^4 - 8 Re(t^3) + 18 |t|^2 - 27 for t = tr(m), exact; positive exactly for loxodromic elements of SU_q
    """
    tr = m.trace()
    n = tr.norm()
    return n * n - 4 * (tr * tr * tr).trace() + 18 * n - 27


def classify(m: SUqMat) -> Classification:
    tr, c2, det = char_poly(m)
    if det != 1 or c2 != tr.conj():
        raise ConstraintViolationException("Classification needs an element of SU_q(O_K)")
    eig = np.roots([1, -tr.embed(), c2.embed(), -det.embed()])
    eig = eig[np.argsort(-np.abs(eig), kind='stable')]
    if trace_discriminant(m) > 0:
        return Classification('loxodromic', eig, complex(eig[0]))
    return Classification('other', eig, None)


def translation_length(m: SUqMat) -> float:
    cls = classify(m)
    if cls.kind != 'loxodromic':
        raise ClassificationException("Translation length requires a loxodromic element", classification=cls)
    return math.log(abs(cls.lam))


def is_K_irreducible(m: SUqMat) -> bool:
    # a root in K is integral and divides det = 1, so it is a unit
    tr, c2, det = char_poly(m)
    for u in m.field.units:
        if u * u * u - tr * u * u + c2 * u - det == 0:
            return False
    return True


def vector_to_boundary(v, tol=1e-12):
    """
    Boundary point [w0 : w : 1] of a complex vector as a HeisPt, None for the point at infinity
    """
    z0, z1, z2 = v
    if abs(z2) <= tol * max(abs(z0), abs(z1), abs(z2)):
        return None
    w0 = z0 / z2
    w = z1 / z2
    return HeisPt(complex(w), float(-2 * w0.imag))


def complex_form_residual(v):
    v = np.asarray(v, dtype=np.complex128)
    q = -2 * (v[0] * np.conj(v[2])).real + abs(v[1]) ** 2
    return abs(q) / float(np.vdot(v, v).real)


def isotropic_eigenvectors(m: SUqMat):
    """
    Eigenvectors for the eigenvalues of largest and smallest modulus of a loxodromic element
    """
    cls = classify(m)
    if cls.kind != 'loxodromic':
        raise ClassificationException("Fixed boundary points require a loxodromic element", classification=cls)
    vals, vecs = np.linalg.eig(m.to_complex())
    return vecs[:, int(np.argmax(np.abs(vals)))], vecs[:, int(np.argmin(np.abs(vals)))]


def fixed_boundary_points(m: SUqMat):
    """
    (attracting, repelling) boundary fixed points; None stands for infinity
    """
    v_att, v_rep = isotropic_eigenvectors(m)
    return vector_to_boundary(v_att), vector_to_boundary(v_rep)


def default_cubic_seed(field: FieldSpec) -> SUqMat:
    if field.disc != -4:
        raise UnsupportedFieldException(f"No default loxodromic seed for D = {field.disc}")
    i = field.gen()
    t = heis_to_matrix(HeisIntElem(field.one(), field.one() + i))
    return sigma(field) * heis_to_matrix(HeisIntElem(i, field.zero())) * t * t * t


# Orbit BFS over Gamma_infinity classes
OrbitClass = namedtuple('OrbitClass', ['vec', 'depth', 'cnorm', 'parent', 'move'])


def lattice_points_in_disc(lattice, center: complex, radius_sq: float):
    """
    Lattice points z with |z - center|^2 <= radius_sq (with a small margin; callers filter exactly)
    """
    if radius_sq < 0:
        return []
    field = lattice.field
    h11, h12, h22 = lattice.hnf
    half_sqrt = field.sqrt_abs_disc / 2
    radius = math.sqrt(radius_sq) + 1e-9
    # z = x + y*omega, Im z = y * sqrt|D|/2, y = j*h22
    j_min = math.ceil((center.imag - radius) / (half_sqrt * h22))
    j_max = math.floor((center.imag + radius) / (half_sqrt * h22))
    omega_re = field.omega.real
    points = []
    for j in range(j_min, j_max + 1):
        y = j * h22
        dy = y * half_sqrt - center.imag
        rem = radius * radius - dy * dy
        if rem < 0:
            continue
        span = math.sqrt(rem)
        # x = i*h11 + j*h12, Re z = x + y*omega_re
        base = j * h12 + y * omega_re
        i_min = math.ceil((center.real - span - base) / h11)
        i_max = math.floor((center.real + span - base) / h11)
        for i in range(i_min, i_max + 1):
            points.append(QuadInt(field, i * h11 + j * h12, y))
    return points


def _k_range(A0: QuadInt, step: QuadInt, bound):
    """
    Integers k with n(A0 + k*step) <= bound, plus one unit of slack on either side; callers filter exactly
    """
    n_s = step.norm()
    b = (A0 * step.conj()).trace()
    c0 = A0.norm() - bound
    disc = b * b - 4 * n_s * c0
    if disc < 0:
        return []
    root = math.sqrt(disc)
    k_lo = math.floor((-b - root) / (2 * n_s)) - 1
    k_hi = math.ceil((-b + root) / (2 * n_s)) + 1
    return range(k_lo, k_hi + 1)


def row_offset(g: SUqMat) -> complex:
    """
    Horizontal part w_g of the rational Heisenberg element h with (last row of g) = g[2, 0] * (top row of h);
    defined for every g not fixing infinity
    """
    return (g[2, 1].embed() / g[2, 0].embed()).conjugate()


def generator_moves(g: SUqMat, v, bound):
    """
    Heisenberg elements t, as (w, k) moves, with n((g t v)_2) <= bound for a generator g not fixing infinity.
    The last row of g t is g[2, 0] times the top row of a Heisenberg element with horizontal part w + w_g.
    """
    a, alpha, c = v
    field = c.field
    pi = pi_lattice(field).lattice
    r0, r1, r2 = g[2, 0], g[2, 1], g[2, 2]
    w_g = row_offset(g)
    scaled = bound / r0.norm()
    moves = []
    if c:
        nc = c.norm()
        zeta = (alpha * c.conj()).embed() / nc
        radius_sq = (hermitian_form(v) + 2 * math.sqrt(nc) * math.sqrt(scaled)) / nc
        step = r0 * imaginary_generator(field) * c
        for w in lattice_points_in_disc(pi, -zeta - w_g, radius_sq + 1e-9):
            tv = heis_to_matrix(HeisIntElem(vertical_part(w), w)).apply(v)
            C0 = r0 * tv[0] + r1 * tv[1] + r2 * tv[2]
            for k in _k_range(C0, step, bound):
                moves.append((w, k))
    elif alpha:
        # (a + conj(w) alpha, alpha, 0); w0 acts trivially
        na = alpha.norm()
        center = -(a * alpha.conj()).embed() / na - w_g.conjugate()
        for wbar in lattice_points_in_disc(pi, center, scaled / na + 1e-9):
            moves.append((wbar.conj(), 0))
    elif (r0 * a).norm() <= bound:
        moves.append((field.zero(), 0))
    return moves


def move_matrix(field: FieldSpec, gen: SUqMat, w: QuadInt, k: int, d: SUqMat) -> SUqMat:
    w0 = vertical_part(w) + imaginary_generator(field) * k
    return gen * heis_to_matrix(HeisIntElem(w0, w)) * d


def _expand_class(vec, gens, diag_mats, bound, projective):
    field = vec[2].field
    nu = imaginary_generator(field)
    children = []
    for i_d, d in enumerate(diag_mats):
        dv = d.apply(vec)
        for i_gen, g in enumerate(gens):
            for w, k in generator_moves(g, dv, bound):
                t = heis_to_matrix(HeisIntElem(vertical_part(w) + nu * k, w))
                child = g.apply(t.apply(dv))
                if child[2].norm() > bound:
                    continue
                key = canonical_key(child, field, projective)
                children.append((key, child, (i_gen, w.key, k, i_d)))
    return children


def _expand_chunk(chunk, gens, diag_mats, bound, projective):
    return [(parent_key, _expand_class(vec, gens, diag_mats, bound, projective)) for parent_key, vec in chunk]


class OrbitSet:
    """
    Gamma_infinity classes of an orbit of column vectors, keyed by their canonical form
    """

    def __init__(self, field: FieldSpec, seed, gens, projective, saturation_levels=3):
        self.field = field
        self.seed = tuple(seed)
        self.gens = gens
        self.projective = projective
        self.classes = {}
        self.saturated = False
        self.partial = False
        self.level_sizes = []
        self.saturation_levels = saturation_levels
        self.exhausted = False
        self.depth = 0

    def __len__(self):
        return len(self.classes)

    def __contains__(self, v):
        return canonical_key(v, self.field, self.projective) in self.classes

    def keys(self):
        return set(self.classes)

    def cnorms(self):
        return np.array([c.cnorm for c in self.classes.values()], dtype=np.int64)

    def count(self, bound, finite_only=True):
        cn = self.cnorms()
        mask = cn <= bound
        if finite_only:
            mask &= cn > 0
        return int(mask.sum())

    def saturated_at(self, bound) -> bool:
        """
        Whether the count below bound is final: the frontier ran empty, or the last saturation_levels levels added
        no finite class with n(c) <= bound
        """
        if self.partial:
            return False
        if self.exhausted:
            return True
        if self.depth < self.saturation_levels:
            return False
        last = self.depth - self.saturation_levels
        return not any(0 < cl.cnorm <= bound and cl.depth > last for cl in self.classes.values())

    def vectors(self, bound=None, finite_only=True):
        out = []
        for key in sorted(self.classes):
            cl = self.classes[key]
            if finite_only and cl.cnorm == 0:
                continue
            if bound is not None and cl.cnorm > bound:
                continue
            out.append(cl.vec)
        return out

    def witness(self, key) -> SUqMat:
        """
        Matrix W in the generated group with W*seed equal to the stored vector of the class
        """
        diag_mats = [diag_unit(u) for u in self.field.units]
        moves = []
        cl = self.classes[key]
        while cl.parent is not None:
            moves.append(cl.move)
            cl = self.classes[cl.parent]
        w_mat = SUqMat.identity(self.field)
        for i_gen, w_key, k, i_d in reversed(moves):
            w = QuadInt(self.field, *w_key)
            w_mat = move_matrix(self.field, self.gens[i_gen], w, k, diag_mats[i_d]) * w_mat
        return w_mat


def orbit_bfs(seed, gens, max_depth, norm_bound, expand_bound=None, projective=False, max_size=2_000_000,
              workers=1, saturation_levels=3, verbose=0) -> OrbitSet:
    seed = tuple(seed)
    field = seed[2].field
    if expand_bound is None:
        expand_bound = norm_bound

    active = [g for g in gens if not g.fixes_infinity()]
    diag_mats = [diag_unit(u) for u in field.units]

    orbit = OrbitSet(field, seed, active, projective, saturation_levels)
    seed_key = canonical_key(seed, field, projective)
    orbit.classes[seed_key] = OrbitClass(seed, 0, seed[2].norm(), None, None)
    frontier = [seed_key] if seed[2].norm() <= expand_bound else []
    orbit.level_sizes.append(1)

    empty_levels = 0
    for depth in range(1, max_depth + 1):
        if not frontier:
            orbit.exhausted = orbit.saturated = True
            break

        chunk_items = [(key, orbit.classes[key].vec) for key in frontier]
        if workers > 1 and len(chunk_items) > 1:
            n_chunks = min(len(chunk_items), 4 * workers)
            chunks = [chunk_items[i::n_chunks] for i in range(n_chunks)]
            results = Parallel(n_jobs=workers)(
                delayed(_expand_chunk)(chunk, active, diag_mats, expand_bound, projective)
                for chunk in chunks)
            expanded = dict(item for res in results for item in res)
        else:
            expanded = dict(_expand_chunk(chunk_items, active, diag_mats, expand_bound, projective))

        # deterministic merge: parents in sorted order, children in generation order
        new_keys = []
        for parent_key in sorted(expanded):
            for key, child, move in expanded[parent_key]:
                if key in orbit.classes:
                    continue
                orbit.classes[key] = OrbitClass(child, depth, child[2].norm(), parent_key, move)
                new_keys.append(key)

        n_reported = sum(1 for key in new_keys if 0 < orbit.classes[key].cnorm <= norm_bound)
        orbit.level_sizes.append(len(new_keys))
        orbit.depth = depth
        if verbose > 1:
            log(f"BFS level {depth}: {len(new_keys)} new classes, {len(orbit)} total")

        frontier = sorted(key for key in new_keys if orbit.classes[key].cnorm <= expand_bound)
        empty_levels = empty_levels + 1 if n_reported == 0 else 0
        if empty_levels >= saturation_levels:
            orbit.saturated = True
            break
        if len(orbit) > max_size:
            orbit.partial = True
            log(f"WARNING: orbit size guard {max_size} exceeded at depth {depth}, result is partial")
            break
    else:
        orbit.exhausted = orbit.saturated = not frontier

    return orbit
