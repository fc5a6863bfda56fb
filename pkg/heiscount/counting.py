from __future__ import annotations

import itertools
import math
from collections import namedtuple
from functools import lru_cache

import numpy as np
from joblib import Parallel, delayed

from heiscount import zeta
from heiscount.chains import seed_chain
from heiscount.exceptions import (ClassificationException, ConstraintViolationException, GuardExceededException,
                                  ZeroLatticeException)
from heiscount.heis import (HeisIntElem, HeisPt, Triple, cygan_second_array, dilate, heis_inv, heis_mul, pi_lattice,
                            reduce_column, vertical_part)
from heiscount.helper import ext_gcd, factorize, fit_loglog_slope, log, smallest_prime_factors
from heiscount.picard import (SUqMat, classify, column_key, default_generators, diag_unit, heis_to_matrix,
                              is_K_irreducible, isotropic_eigenvectors, lattice_points_in_disc, orbit_bfs,
                              translation_length)
from heiscount.quadint import FieldSpec, QuadInt, ZLattice2, imaginary_generator, is_coprime_triple, norms

CHAIN_CAVEAT = ("Counts enumerate the orbit of the subgroup generated by the supplied generators; "
                "they match the full Picard group only if these generate it.")

MertensReport = namedtuple('MertensReport', ['disc', 'ideal', 's_values', 'counts', 'constant', 'ratios',
                                             'constant_stated', 'ratios_stated'])
EquidistReport = namedtuple('EquidistReport', ['s', 'boxes', 'counts', 'masses', 'volumes', 'discrepancy',
                                               'constant'])
ChainCountReport = namedtuple('ChainCountReport', ['eps', 'bounds', 'counts', 'saturated', 'partial', 'slope',
                                                   'constant', 'ratios', 'constant_stated', 'ratios_stated',
                                                   'orbit'])
CubicReport = namedtuple('CubicReport', ['s_values', 'counts', 'slope', 'translation_length', 'constant',
                                         'complexities', 'saturated', 'partial', 'search_radius'])
FiniteGroupOrders = namedtuple('FiniteGroupOrders', ['su_order', 'b_order', 'su_is_lower_bound', 'su_bruteforce'])


# Lattice helpers
def lattice_contains(hnf, xs, ys):
    h11, h12, h22 = hnf
    return (ys % h22 == 0) & ((xs - (ys // h22) * h12) % h11 == 0)


def elements_of_norm_at_most(field: FieldSpec, s, ideal: ZLattice2 = None):
    """
    Coordinates (xs, ys) of the nonzero c in the ideal (default O_K) with n(c) <= s, ordered by (n(c), x, y)
    """
    abs_d = -field.disc
    y_max = int(math.isqrt(4 * s // abs_d)) + 1
    xs, ys = [], []
    for y in range(-y_max, y_max + 1):
        rem = s - abs_d * y * y / 4
        if rem < 0:
            continue
        centre = -field.q * y / 2
        span = math.sqrt(rem)
        x = np.arange(math.floor(centre - span) - 1, math.ceil(centre + span) + 2, dtype=np.int64)
        xs.append(x)
        ys.append(np.full_like(x, y))
    xs = np.concatenate(xs)
    ys = np.concatenate(ys)
    n = norms(field, xs, ys)
    mask = (n > 0) & (n <= s)
    if ideal is not None:
        mask &= lattice_contains(ideal.hnf, xs, ys)
    xs, ys, n = xs[mask], ys[mask], n[mask]
    order = np.lexsort((ys, xs, n))
    return xs[order], ys[order]


@lru_cache(maxsize=None)
def prime_ideals_above(field: FieldSpec, p) -> tuple:
    roots = [r for r in range(p) if (r * r - field.q * r - field.p) % p == 0]
    if not roots:
        return ZLattice2.from_hnf(field, p, 0, p),
    return tuple(ZLattice2.from_vectors(field, [(p, 0), (-r, 1)]) for r in roots)


def prime_ideals_containing(c: QuadInt, spf):
    return [P for p in sorted(factorize(c.norm(), spf)) for P in prime_ideals_above(c.field, p) if P.contains(c)]


def _mul_coords(field, x1, y1, x2, y2):
    return x1 * x2 + field.p * y1 * y2, x1 * y2 + x2 * y1 + field.q * y1 * y2


class _TraceSolver:
    """
    Solutions a of tr(a conj(c)) = n for fixed c: a = a*(n) + j*kappa, solvable iff g | n,
    classes modulo Z*nu*c indexed by j in [0, idx)
    """

    def __init__(self, c: QuadInt):
        field = c.field
        cbar = c.conj()
        t1 = cbar.trace()
        t2 = (field.gen() * cbar).trace()
        self.g, self.s1, self.s2 = ext_gcd(t1, t2)
        self.kappa = (t2 // self.g, -t1 // self.g)
        nu_c = imaginary_generator(field) * c
        self.idx = math.gcd(nu_c.x, nu_c.y)

    def particular(self, n):
        k = n // self.g
        return k * self.s1, k * self.s2


# Mertens count
def _mertens_for_c(field: FieldSpec, cx, cy, ideal_hnf, spf):
    c = QuadInt(field, int(cx), int(cy))
    h11, _, h22 = pi_lattice(field).lattice.scaled(c).hnf
    ax, ay = np.meshgrid(np.arange(h11, dtype=np.int64), np.arange(h22, dtype=np.int64), indexing='ij')
    ax, ay = ax.ravel(), ay.ravel()
    if ideal_hnf is not None:
        mask = lattice_contains(ideal_hnf, ax, ay)
        ax, ay = ax[mask], ay[mask]

    solver = _TraceSolver(c)
    n_alpha = norms(field, ax, ay)
    solvable = n_alpha % solver.g == 0
    ax, ay, n_alpha = ax[solvable], ay[solvable], n_alpha[solvable]
    total = len(ax) * solver.idx

    primes = prime_ideals_containing(c, spf)
    if not primes or not len(ax):
        return total

    a0x, a0y = solver.particular(n_alpha)
    bad = np.zeros((len(ax), solver.idx), dtype=bool)
    j = np.arange(solver.idx, dtype=np.int64)
    for P in primes:
        in_alpha = lattice_contains(P.hnf, ax, ay)
        if not in_alpha.any():
            continue
        a_x = a0x[in_alpha, None] + j[None, :] * solver.kappa[0]
        a_y = a0y[in_alpha, None] + j[None, :] * solver.kappa[1]
        bad[in_alpha] |= lattice_contains(P.hnf, a_x, a_y)
    return total - int(bad.sum())


def _mertens_chunk(field, cxs, cys, ideal_hnf, spf):
    return [_mertens_for_c(field, cx, cy, ideal_hnf, spf) for cx, cy in zip(cxs, cys)]


def _check_ideal(field, ideal):
    if ideal is None:
        return None
    if ideal.is_zero():
        raise ZeroLatticeException("The congruence ideal must be nonzero")
    if ideal.field is not field:
        raise ValueError(f"Ideal lives in D = {ideal.field.disc}, not D = {field.disc}")
    if not ideal.is_omega_stable():
        raise ValueError(f"{ideal} is not an ideal of O_K")
    return ideal


def mertens_counts(field: FieldSpec, s_values, ideal: ZLattice2 = None, workers=1):
    """
    Psi_m(s) for every s in s_values from one enumeration of c
    """
    ideal = _check_ideal(field, ideal)
    s_values = [int(s) for s in s_values]
    if min(s_values) < 1:
        raise ValueError(f"s must be at least 1, got {min(s_values)}")
    s_max = max(s_values)
    spf = smallest_prime_factors(s_max)
    cxs, cys = elements_of_norm_at_most(field, s_max, ideal)
    ideal_hnf = None if ideal is None else ideal.hnf

    if workers > 1 and len(cxs) > 1:
        n_chunks = min(len(cxs), 8 * workers)
        results = Parallel(n_jobs=workers)(
            delayed(_mertens_chunk)(field, cxs[i::n_chunks], cys[i::n_chunks], ideal_hnf, spf)
            for i in range(n_chunks))
        per_c = np.empty(len(cxs), dtype=np.int64)
        for i, res in enumerate(results):
            per_c[i::n_chunks] = res
    else:
        per_c = np.array(_mertens_chunk(field, cxs, cys, ideal_hnf, spf), dtype=np.int64)

    c_norms = norms(field, cxs, cys)
    return [int(per_c[c_norms <= s].sum()) for s in s_values]


def mertens_count(field: FieldSpec, ideal: ZLattice2 = None, s=1, workers=1) -> int:
    return mertens_counts(field, [s], ideal, workers)[0]


def mertens_bruteforce(field: FieldSpec, s_values, ideal: ZLattice2 = None):
    """
    Psi_m(s) by direct search: c over a coordinate box, alpha over a residue box of the shear lattice, a over
    every integer solution of tr(a conj(c)) = n(alpha) in a strip one translation period wide. Primitivity through
    the ideal span, classes deduplicated with the shear reduction.
    """
    ideal = _check_ideal(field, ideal)
    s_max = int(max(s_values))
    y_max = math.isqrt(4 * s_max // -field.disc) + 1
    x_max = math.isqrt(s_max) + y_max + 1
    per_norm = {}
    for cx, cy in itertools.product(range(-x_max, x_max + 1), range(-y_max, y_max + 1)):
        c = QuadInt(field, cx, cy)
        n_c = c.norm()
        if not 0 < n_c <= s_max or (ideal is not None and c not in ideal):
            continue

        h11, _, h22 = pi_lattice(field).lattice.scaled(c).hnf
        alphas = [QuadInt(field, x, y) for x, y in itertools.product(range(h11), range(h22))]
        if ideal is not None:
            alphas = [alpha for alpha in alphas if alpha in ideal]
        if not alphas:
            continue
        n_alpha = np.array([alpha.norm() for alpha in alphas], dtype=np.int64)

        # tr(a conj(c)) = x*t1 + y*t2 for a = x + y*omega; solve for one coordinate, run the other
        t1 = c.conj().trace()
        t2 = (field.gen() * c.conj()).trace()
        nu_c = imaginary_generator(field) * c
        run = np.arange(-abs(nu_c.x) - abs(nu_c.y) - 1, abs(nu_c.x) + abs(nu_c.y) + 2, dtype=np.int64)
        if t1:
            num = n_alpha[:, None] - run[None, :] * t2
            i_alpha, i_run = np.nonzero(num % t1 == 0)
            coords = zip(num[i_alpha, i_run] // t1, run[i_run])
        else:
            solvable = n_alpha % t2 == 0
            i_alpha, i_run = np.nonzero(np.broadcast_to(solvable[:, None], (len(alphas), len(run))))
            coords = zip(run[i_run], n_alpha[i_alpha] // t2)

        keys = set()
        for i, (x, y) in zip(i_alpha, coords):
            a = QuadInt(field, int(x), int(y))
            if is_coprime_triple(a, alphas[i], c):
                keys.add(column_key(reduce_column(a, alphas[i], c)))
        per_norm[n_c] = per_norm.get(n_c, 0) + len(keys)
    return [sum(v for k, v in per_norm.items() if k <= s) for s in s_values]


def mertens_report(field: FieldSpec, s_values, ideal: ZLattice2 = None, group_ratio=1, zeta_opts=None, workers=1):
    counts = mertens_counts(field, s_values, ideal, workers)
    L3 = zeta.field_L3(field, zeta_opts)
    stated = zeta.mertens_C(field, L3, group_ratio)
    constant = zeta.mertens_C_lattice(field, L3) if ideal is None else None
    if constant is None:
        constant = stated
    return MertensReport(
        disc=field.disc,
        ideal=None if ideal is None else ideal.hnf,
        s_values=list(s_values),
        counts=counts,
        constant=constant,
        ratios=[n / (constant * s ** 2) for n, s in zip(counts, s_values)],
        constant_stated=stated,
        ratios_stated=[n / (stated * s ** 2) for n, s in zip(counts, s_values)],
    )


# Rational points of the hyperconic
def _check_window(window):
    window = np.asarray(window, dtype=np.float64)
    if window.shape != (6,) or not np.all(np.isfinite(window)):
        raise ValueError(f"Window must be six finite numbers, got {window!r}")
    if np.any(window[1::2] <= window[0::2]):
        raise ValueError(f"Window ranges must be increasing, got {window!r}")
    return window


def _window_for_c(field: FieldSpec, cx, cy, window, spf):
    """
    Triples (a, alpha, c) for one c whose point has Re w, Im w, Im w0 in the half-open window.
    Returns integer coordinate arrays ax, ay, alx, aly.
    """
    re_lo, re_hi, im_lo, im_hi, v_lo, v_hi = window
    c = QuadInt(field, int(cx), int(cy))
    n_c = c.norm()
    h = field.sqrt_abs_disc / 2
    cb = c.conj()

    corners = np.array([complex(x, y) for x in (re_lo, re_hi) for y in (im_lo, im_hi)]) * c.embed()
    y_lo = math.floor(corners.imag.min() / h) - 1
    y_hi = math.ceil(corners.imag.max() / h) + 1
    omega_re = field.omega.real
    x_lo = math.floor(corners.real.min() - max(abs(y_lo), abs(y_hi)) * omega_re) - 1
    x_hi = math.ceil(corners.real.max() + max(abs(y_lo), abs(y_hi)) * omega_re) + 1
    alx, aly = np.meshgrid(np.arange(x_lo, x_hi + 1, dtype=np.int64), np.arange(y_lo, y_hi + 1, dtype=np.int64),
                           indexing='ij')
    alx, aly = alx.ravel(), aly.ravel()

    # w = alpha conj(c) / n(c): Re w = (2X + qY)/(2 n(c)), Im w = Y h / n(c)
    X, Y = _mul_coords(field, alx, aly, cb.x, cb.y)
    tr2 = 2 * X + field.q * Y
    mask = (tr2 >= 2 * n_c * re_lo) & (tr2 < 2 * n_c * re_hi) & (Y >= im_lo * n_c / h) & (Y < im_hi * n_c / h)
    alx, aly = alx[mask], aly[mask]

    solver = _TraceSolver(c)
    n_alpha = norms(field, alx, aly)
    solvable = n_alpha % solver.g == 0
    alx, aly, n_alpha = alx[solvable], aly[solvable], n_alpha[solvable]
    a0x, a0y = solver.particular(n_alpha)

    # Im(a_j conj(c)) coefficient is linear in j
    _, Y0 = _mul_coords(field, a0x, a0y, cb.x, cb.y)
    _, Yk = _mul_coords(field, solver.kappa[0], solver.kappa[1], cb.x, cb.y)
    lo_Y = v_lo * n_c / h
    hi_Y = v_hi * n_c / h
    j1 = (lo_Y - Y0) / Yk
    j2 = (hi_Y - Y0) / Yk
    j_min = np.floor(np.minimum(j1, j2)).astype(np.int64) - 1
    j_max = np.ceil(np.maximum(j1, j2)).astype(np.int64) + 1
    counts = np.maximum(j_max - j_min + 1, 0)
    rep = np.repeat(np.arange(len(alx)), counts)
    offsets = np.arange(counts.sum()) - np.repeat(np.cumsum(counts) - counts, counts)
    jj = j_min[rep] + offsets

    ax = a0x[rep] + jj * solver.kappa[0]
    ay = a0y[rep] + jj * solver.kappa[1]
    alx, aly = alx[rep], aly[rep]
    Yj = Y0[rep] + jj * Yk
    keep = (Yj >= lo_Y) & (Yj < hi_Y)
    ax, ay, alx, aly = ax[keep], ay[keep], alx[keep], aly[keep]

    for P in prime_ideals_containing(c, spf):
        bad = lattice_contains(P.hnf, ax, ay) & lattice_contains(P.hnf, alx, aly)
        ax, ay, alx, aly = ax[~bad], ay[~bad], alx[~bad], aly[~bad]
    return ax, ay, alx, aly


def _window_coordinates(field, cx, cy, ax, ay, alx, aly):
    """
    (Im w0, Re w, Im w) of the points a/c, alpha/c
    """
    c = QuadInt(field, int(cx), int(cy))
    cb_x, cb_y = c.conj().key
    n_c = c.norm()
    h = field.sqrt_abs_disc / 2
    X, Y = _mul_coords(field, alx, aly, cb_x, cb_y)
    _, Ya = _mul_coords(field, ax, ay, cb_x, cb_y)
    return np.column_stack([Ya * h / n_c, (2 * X + field.q * Y) / (2 * n_c), Y * h / n_c])


def rational_points_in_window(field: FieldSpec, s, window):
    """
    All primitive (a, alpha, c) with 0 < n(c) <= s whose point (a/c, alpha/c) lies in the window,
    window = (Re w, Im w, Im w0) ranges, half-open
    """
    window = _check_window(window)
    spf = smallest_prime_factors(int(s))
    out = []
    for cx, cy in zip(*elements_of_norm_at_most(field, s)):
        ax, ay, alx, aly = _window_for_c(field, cx, cy, window, spf)
        coords = _window_coordinates(field, cx, cy, ax, ay, alx, aly)
        c = QuadInt(field, int(cx), int(cy))
        for i in range(len(ax)):
            t = Triple(QuadInt(field, int(ax[i]), int(ay[i])), QuadInt(field, int(alx[i]), int(aly[i])), c)
            v, re_w, im_w = coords[i]
            out.append((HeisPt(complex(re_w, im_w), -2 * float(v)), t))
    return out


def box_grid(window, k):
    """
    k x k x k half-open boxes of a window given as (Re w, Im w, Im w0) ranges; boxes are (lo, hi) in the
    order (Im w0, Re w, Im w)
    """
    window = _check_window(window)
    if k < 1:
        raise ValueError(f"Grid size must be positive, got {k}")
    re_w = np.linspace(window[0], window[1], k + 1)
    im_w = np.linspace(window[2], window[3], k + 1)
    im_w0 = np.linspace(window[4], window[5], k + 1)
    boxes = []
    for i, j, l in itertools.product(range(k), repeat=3):
        boxes.append(((im_w0[i], re_w[j], im_w[l]), (im_w0[i + 1], re_w[j + 1], im_w[l + 1])))
    return boxes


def _boxes_window(boxes):
    lo = np.min([b[0] for b in boxes], axis=0)
    hi = np.max([b[1] for b in boxes], axis=0)
    return [lo[1], hi[1], lo[2], hi[2], lo[0], hi[0]]


def _count_in_boxes(coords, boxes):
    coords = np.asarray(coords, dtype=np.float64).reshape(-1, 3)
    counts = []
    for lo, hi in boxes:
        inside = np.all((coords >= np.asarray(lo)) & (coords < np.asarray(hi)), axis=1)
        counts.append(int(inside.sum()))
    return np.array(counts, dtype=np.int64)


def _window_chunk(field, cxs, cys, window, boxes, spf):
    counts = np.zeros(len(boxes), dtype=np.int64)
    for cx, cy in zip(cxs, cys):
        ax, ay, alx, aly = _window_for_c(field, cx, cy, window, spf)
        if len(ax):
            counts += _count_in_boxes(_window_coordinates(field, cx, cy, ax, ay, alx, aly), boxes)
    return counts


def window_box_counts(field: FieldSpec, s, boxes, workers=1):
    """
    Number of rational points per box, streamed per c
    """
    window = _check_window(_boxes_window(boxes))
    spf = smallest_prime_factors(int(s))
    cxs, cys = elements_of_norm_at_most(field, s)
    if workers > 1 and len(cxs) > 1:
        n_chunks = min(len(cxs), 8 * workers)
        results = Parallel(n_jobs=workers)(
            delayed(_window_chunk)(field, cxs[i::n_chunks], cys[i::n_chunks], window, boxes, spf)
            for i in range(n_chunks))
        return np.sum(results, axis=0)
    return _window_chunk(field, cxs, cys, window, boxes, spf)


def equidist_constant(field: FieldSpec, normalization='lattice', zeta_opts=None):
    L3 = zeta.field_L3(field, zeta_opts)
    if normalization == 'lattice':
        constant = zeta.equidist_C_lattice(field, L3)
        if constant is not None:
            return constant
    elif normalization != 'stated':
        raise ValueError(f"Unknown normalization {normalization}")
    return zeta.equidist_C(field, L3)


def _report_from_counts(s, boxes, counts, constant, scale):
    counts = np.asarray(counts, dtype=np.int64)
    volumes = np.array([np.prod(np.asarray(hi) - np.asarray(lo)) for lo, hi in boxes], dtype=np.float64)
    masses = constant * scale * counts
    discrepancy = float(np.max(np.abs(masses - volumes))) if len(boxes) else 0.0
    return EquidistReport(s, boxes, counts, masses, volumes, discrepancy, constant)


def equidist_statistic(points, s, field: FieldSpec, boxes, normalization='lattice', zeta_opts=None):
    """
    Normalised masses constant * s^-2 * count per box; points are (HeisPt, Triple) pairs or an (N, 3) array
    of (Im w0, Re w, Im w)
    """
    if len(points) and isinstance(points[0], tuple):
        coords = np.array([(-p.u / 2, p.zeta.real, p.zeta.imag) for p, _ in points])
    else:
        coords = np.asarray(points, dtype=np.float64).reshape(-1, 3)
    constant = equidist_constant(field, normalization, zeta_opts)
    return _report_from_counts(s, boxes, _count_in_boxes(coords, boxes), constant, float(s) ** -2)


def equidist_report(field: FieldSpec, s, boxes, normalization='lattice', zeta_opts=None, workers=1):
    constant = equidist_constant(field, normalization, zeta_opts)
    return _report_from_counts(s, boxes, window_box_counts(field, s, boxes, workers), constant, float(s) ** -2)


# Chains
def chain_bound(qval, eps):
    if not eps > 0:
        raise ValueError(f"eps must be positive, got {eps}")
    return math.floor(4 * qval / eps ** 2 + 1e-9)


def chain_constants(field: FieldSpec, zeta_opts=None, covolume=None, n0=4):
    L3 = zeta.field_L3(field, zeta_opts)
    if covolume is None and field.disc == -4:
        covolume = math.pi / 3
    stated = None if covolume is None else zeta.chain_constant(field, L3, covolume, n0)
    return zeta.chain_C_lattice(field, L3), stated


def chain_count(field: FieldSpec, gens, eps_grid, max_depth, saturation_levels=3, max_size=2_000_000, workers=1,
                zeta_opts=None, covolume=None, n0=4, verbose=0) -> ChainCountReport:
    eps_grid = [float(e) for e in eps_grid]
    P0 = seed_chain(field)
    bounds = [chain_bound(P0.qval, e) for e in eps_grid]
    orbit = orbit_bfs(P0.v, gens, max_depth, max(bounds), projective=True, max_size=max_size, workers=workers,
                      saturation_levels=saturation_levels, verbose=verbose)
    counts = [orbit.count(b) for b in bounds]

    constant, stated = chain_constants(field, zeta_opts, covolume, n0)

    def ratios(c):
        if c is None:
            return [None] * len(counts)
        return [n * e ** 4 / c for n, e in zip(counts, eps_grid)]

    return ChainCountReport(
        eps=eps_grid,
        bounds=bounds,
        counts=counts,
        saturated=[orbit.saturated_at(b) for b in bounds],
        partial=orbit.partial,
        slope=fit_loglog_slope([1 / e for e in eps_grid], counts),
        constant=constant,
        ratios=ratios(constant),
        constant_stated=stated,
        ratios_stated=ratios(stated),
        orbit=orbit,
    )


def _projective_key(v):
    field = v[2].field
    return min(tuple(k for z in v for k in (u * z).key) for u in field.units)


def chain_centers(field: FieldSpec, gens, eps, max_depth, window, orbit=None, grid=1, normalization='lattice',
                  zeta_opts=None, covolume=None, n0=4, workers=1, max_size=2_000_000):
    """
    Centers of all chains of the orbit with diameter at least eps whose center lies in the window
    ((Re w, Im w, Im w0) ranges), and their box statistic
    """
    window = _check_window(window)
    re_lo, re_hi, im_lo, im_hi, v_lo, v_hi = window
    P0 = seed_chain(field)
    bound = chain_bound(P0.qval, eps)
    if orbit is None:
        orbit = orbit_bfs(P0.v, gens, max_depth, bound, projective=True, max_size=max_size, workers=workers)

    pi = pi_lattice(field).lattice
    nu = imaginary_generator(field)
    nu_im = nu.embed().imag
    rect_center = complex((re_lo + re_hi) / 2, (im_lo + im_hi) / 2)
    rect_radius_sq = ((re_hi - re_lo) ** 2 + (im_hi - im_lo) ** 2) / 4 + 1e-9
    diag_mats = [diag_unit(u) for u in field.units]

    seen = set()
    centers = []
    for v in orbit.vectors(bound):
        for d in diag_mats:
            a, alpha, c = d.apply(v)
            zeta0 = (alpha * c.conj()).embed() / c.norm()
            for w in lattice_points_in_disc(pi, rect_center - zeta0, rect_radius_sq):
                z = zeta0 + w.embed()
                if not (re_lo <= z.real < re_hi and im_lo <= z.imag < im_hi):
                    continue
                a1 = a + w.conj() * alpha + vertical_part(w) * c
                alpha1 = alpha + w * c
                v0 = (a1 * c.conj()).embed().imag / c.norm()
                for k in range(math.floor((v_lo - v0) / nu_im) - 1, math.ceil((v_hi - v0) / nu_im) + 2):
                    im_w0 = v0 + k * nu_im
                    if not v_lo <= im_w0 < v_hi:
                        continue
                    vec = (a1 + nu * k * c, alpha1, c)
                    key = _projective_key(vec)
                    if key in seen:
                        continue
                    seen.add(key)
                    centers.append(HeisPt(z, -2 * im_w0))

    constant, stated = chain_constants(field, zeta_opts, covolume, n0)
    if normalization == 'stated':
        constant = stated
    elif normalization == 'empirical':
        constant = orbit.count(bound) * eps ** 4
    elif normalization != 'lattice':
        raise ValueError(f"Unknown normalization {normalization}")
    if constant is None:
        raise ValueError(f"No {normalization} chain constant for D = {field.disc}")

    boxes = box_grid(window, grid)
    coords = np.array([(-p.u / 2, p.zeta.real, p.zeta.imag) for p in centers]).reshape(-1, 3)
    report = _report_from_counts(eps, boxes, _count_in_boxes(coords, boxes),
                                 zeta.chain_center_constant(field, constant), eps ** 4)
    return centers, report


# Hermitian cubic points
def pair_complexity(p1: HeisPt, p2: HeisPt) -> float:
    return 1 / float(cygan_second_array(p1.zeta, p1.u, p2.zeta, p2.u))


def _boundary_arrays(vecs):
    """
    (zeta, u) arrays of the columns of a (3, k) complex array; nan where the point is infinity
    """
    z0, z1, z2 = vecs
    finite = np.abs(z2) > 1e-12 * np.max(np.abs(vecs), axis=0)
    with np.errstate(divide='ignore', invalid='ignore'):
        zeta = np.where(finite, z1 / z2, np.nan)
        u = np.where(finite, -2 * (z0 / z2).imag, np.nan)
    return zeta, u


def _reducing_point(field: FieldSpec, m: HeisPt) -> HeisPt:
    """
    Point of Heis_3(O_K) moving m into the fundamental box of the integral Heisenberg lattice
    """
    h11, h12, h22 = pi_lattice(field).lattice.hnf
    b2 = complex(h12, 0) + h22 * field.omega
    beta = m.zeta.imag / b2.imag
    alpha = (m.zeta.real - beta * b2.real) / h11
    jb = math.floor(beta + 1e-9)
    ja = math.floor(alpha + 1e-9)
    w = QuadInt(field, -ja * h11 - jb * h12, -jb * h22)
    t = HeisIntElem(vertical_part(w), w).point()
    moved = heis_mul(t, m)
    step = 2 * imaginary_generator(field).embed().imag
    k = math.floor(moved.u / step + 1e-9)
    return heis_mul(HeisPt(0j, -k * step), t)


def _rotations(field: FieldSpec):
    rots = {}
    for a1 in field.units:
        r = a1.conj() ** 3
        rots.setdefault(r.key, r.embed())
    return [rots[k] for k in sorted(rots)]


def pair_key(field: FieldSpec, p1: HeisPt, p2: HeisPt, ndigits=9):
    """
    Key of an unordered boundary pair modulo Heis_3(O_K) and the diagonal rotations
    """
    best = None
    for rot in _rotations(field):
        x0 = HeisPt(rot * p1.zeta, p1.u)
        y0 = HeisPt(rot * p2.zeta, p2.u)
        for x, y in ((x0, y0), (y0, x0)):
            base = heis_mul(x, dilate(heis_mul(heis_inv(x), y), 0.5))
            t = _reducing_point(field, base)
            vals = heis_mul(t, x).as_list() + heis_mul(t, y).as_list()
            key = tuple(round(val, ndigits) + 0.0 for val in vals)
            if best is None or key < best:
                best = key
    return best


def cubic_count(gamma0, gens, s_values, max_depth, ndigits=9, iota0=1, n0=1, zeta_opts=None,
                max_size=200_000, saturation_levels=3, radius_scale=2.0, radius_margin=2.0,
                verbose=0) -> CubicReport:
    """
    Translations tried around a pair of complexity x move its midpoint by at most r = radius_scale * sqrt(s_max / x)
    + radius_margin horizontally and r**2 vertically
    """
    field = gamma0.field
    cls = classify(gamma0)
    if cls.kind != 'loxodromic':
        raise ClassificationException("The seed element is not loxodromic", classification=cls)
    if not is_K_irreducible(gamma0):
        raise ClassificationException("The seed element preserves a point or line over K", classification=cls)

    v_att, v_rep = isotropic_eigenvectors(gamma0)
    V = np.column_stack([v_att, v_rep])
    s_values = [float(s) for s in s_values]
    s_max = max(s_values)
    active = [g for g in gens if not g.fixes_infinity()]
    diag_mats = [diag_unit(u) for u in field.units]
    pi = pi_lattice(field).lattice
    nu = imaginary_generator(field)
    step = 2 * nu.embed().imag

    def pair_of(vecs):
        zeta, u = _boundary_arrays(vecs)
        return HeisPt(complex(zeta[0]), float(u[0])), HeisPt(complex(zeta[1]), float(u[1]))

    p1, p2 = pair_of(V)
    classes = {}
    seed_key = pair_key(field, p1, p2, ndigits)
    seed_complexity = pair_complexity(p1, p2)
    classes[seed_key] = (SUqMat.identity(field), seed_complexity, 0)
    frontier = [seed_key] if seed_complexity <= s_max else []

    saturated = False
    partial = False
    empty_levels = 0
    for depth in range(1, max_depth + 1):
        if not frontier:
            saturated = True
            break
        new_keys = []
        for key in frontier:
            g, complexity, _ = classes[key]
            radius = radius_scale * math.sqrt(s_max / complexity) + radius_margin
            for d in diag_mats:
                dg = d * g
                W = dg.to_complex() @ V
                x, y = pair_of(W)
                base = heis_mul(x, dilate(heis_mul(heis_inv(x), y), 0.5))
                moves = []
                for w in lattice_points_in_disc(pi, -base.zeta, radius ** 2):
                    t0 = HeisIntElem(vertical_part(w), w)
                    u1 = heis_mul(t0.point(), base).u
                    k_lo = math.ceil((u1 - radius ** 2) / step)
                    k_hi = math.floor((u1 + radius ** 2) / step)
                    moves.extend((w, k) for k in range(k_lo, k_hi + 1))
                if not moves:
                    continue
                w_arr = np.array([w.embed() for w, _ in moves])
                w0_arr = np.array([(vertical_part(w) + nu * k).embed() for w, k in moves])
                for gen in active:
                    G = gen.to_complex()
                    cand = []
                    for col in range(2):
                        z0, z1, z2 = W[:, col]
                        shifted = np.vstack([z0 + np.conj(w_arr) * z1 + w0_arr * z2, z1 + w_arr * z2,
                                             np.full_like(w_arr, z2)])
                        cand.append(_boundary_arrays(G @ shifted))
                    (za, ua), (zb, ub) = cand
                    ok = np.isfinite(za) & np.isfinite(zb)
                    comp = np.full(len(moves), np.inf)
                    with np.errstate(divide='ignore'):
                        comp[ok] = 1 / cygan_second_array(za[ok], ua[ok], zb[ok], ub[ok])
                    for i in np.nonzero(comp <= s_max)[0]:
                        q1 = HeisPt(complex(za[i]), float(ua[i]))
                        q2 = HeisPt(complex(zb[i]), float(ub[i]))
                        new_key = pair_key(field, q1, q2, ndigits)
                        if new_key in classes:
                            continue
                        w, k = moves[i]
                        t = heis_to_matrix(HeisIntElem(vertical_part(w) + nu * k, w))
                        classes[new_key] = (gen * t * dg, float(comp[i]), depth)
                        new_keys.append(new_key)

        if verbose > 1:
            log(f"Cubic BFS level {depth}: {len(new_keys)} new classes, {len(classes)} total")
        frontier = sorted(new_keys)
        empty_levels = empty_levels + 1 if not new_keys else 0
        if empty_levels >= saturation_levels:
            saturated = True
            break
        if len(classes) > max_size:
            partial = True
            log(f"WARNING: cubic orbit guard {max_size} exceeded at depth {depth}, result is partial")
            break
    else:
        saturated = not frontier

    complexities = np.array(sorted(c for _, c, _ in classes.values()))
    counts = [int(np.searchsorted(complexities, s, side='right')) for s in s_values]
    ell = translation_length(gamma0)
    L3 = zeta.field_L3(field, zeta_opts)
    return CubicReport(
        s_values=s_values,
        counts=counts,
        slope=fit_loglog_slope(s_values, counts),
        translation_length=ell,
        constant=zeta.cubic_constant(field, L3, ell, iota0, n0),
        complexities=complexities,
        saturated=saturated,
        partial=partial,
        search_radius={'scale': radius_scale, 'margin': radius_margin},
    )


# Finite unitary groups over O_K/m
class _QuotientRing:

    def __init__(self, field: FieldSpec, ideal: ZLattice2):
        self.field = field
        self.ideal = ideal
        self.elements = [ideal.reduce(z) for z in ideal.representatives()]

    def red(self, z: QuadInt) -> QuadInt:
        return self.ideal.reduce(z)

    def mul(self, a, b):
        return self.red(a * b)

    def inverse(self, a):
        for b in self.elements:
            if self.red(a * b) == self.red(self.field.one()):
                return b
        return None


def _reduce_matrix(ring, m):
    return tuple(ring.red(e) for e in m.entries)


def _mat_mul(ring, a, b):
    return tuple(ring.red(a[3 * i] * b[j] + a[3 * i + 1] * b[3 + j] + a[3 * i + 2] * b[6 + j])
                 for i in range(3) for j in range(3))


def _mat_key(m):
    return tuple(k for e in m for k in e.key)


def _in_su_mod(ring, m):
    field = ring.field
    j = (0, 0, -1, 0, 1, 0, -1, 0, 0)
    jm = tuple(ring.red(QuadInt(field, x)) for x in j)
    mstar = tuple(m[3 * c + r].conj() for r in range(3) for c in range(3))
    lhs = _mat_mul(ring, _mat_mul(ring, mstar, jm), m)
    det = (m[0] * (m[4] * m[8] - m[5] * m[7]) - m[1] * (m[3] * m[8] - m[5] * m[6])
           + m[2] * (m[3] * m[7] - m[4] * m[6]))
    return _mat_key(lhs) == _mat_key(jm) and ring.red(det) == ring.red(field.one())


def _borel_order(ring):
    count = 0
    for a1 in ring.elements:
        a1_inv = ring.inverse(a1)
        if a1_inv is None:
            continue
        a3 = ring.inverse(a1.conj())
        a2 = ring.inverse(ring.mul(a1, a3))
        if ring.mul(a2, a2.conj()) != ring.red(ring.field.one()):
            continue
        for z in ring.elements:
            rhs = ring.red(z * z.conj())
            count += sum(1 for y in ring.elements if ring.red(y.conj() * a3 + y * a3.conj()) == rhs)
    return count


def _closure_order(ring, gens, max_size):
    gens = [_reduce_matrix(ring, g) for g in gens]
    one, zero = ring.red(ring.field.one()), ring.red(ring.field.zero())
    identity = (one, zero, zero, zero, one, zero, zero, zero, one)
    seen = {_mat_key(identity)}
    frontier = [identity]
    while frontier:
        nxt = []
        for m in frontier:
            for g in gens:
                p = _mat_mul(ring, g, m)
                key = _mat_key(p)
                if key not in seen:
                    seen.add(key)
                    nxt.append(p)
        if len(seen) > max_size:
            raise GuardExceededException(f"Closure of the reduced generators exceeds {max_size} elements")
        frontier = nxt
    return len(seen)


def _bruteforce_su_order(ring):
    return sum(1 for m in itertools.product(ring.elements, repeat=9) if _in_su_mod(ring, m))


def finite_group_orders(field: FieldSpec, ideal: ZLattice2 = None, gens=None, max_ring_size=9,
                        max_group_size=200_000) -> FiniteGroupOrders:
    if ideal is None or ideal.index() == 1:
        return FiniteGroupOrders(1, 1, False, 1)
    ideal = _check_ideal(field, ideal)
    if not ideal.is_conj_stable():
        raise ConstraintViolationException(f"{ideal} is not stable under conjugation, q is not defined mod m")
    if ideal.index() > max_ring_size:
        raise GuardExceededException(f"|O_K/m| = {ideal.index()} exceeds the guard {max_ring_size}")

    ring = _QuotientRing(field, ideal)
    if gens is None:
        gens = default_generators(field)
    su = _closure_order(ring, gens, max_group_size)
    brute = _bruteforce_su_order(ring) if len(ring.elements) == 2 else None
    return FiniteGroupOrders(su, _borel_order(ring), brute is None or brute != su, brute)
