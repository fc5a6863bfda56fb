from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from heiscount.exceptions import ConstraintViolationException, DegenerateGeometryException, FieldMismatchException
from heiscount.quadint import FieldSpec, QuadInt, KNum, ZLattice2, imaginary_generator, reduce_mod_sublattice


@dataclass(frozen=True)
class HeisPt:
    zeta: complex
    u: float

    def __mul__(self, other: HeisPt) -> HeisPt:
        return heis_mul(self, other)

    def inv(self) -> HeisPt:
        return heis_inv(self)

    def as_list(self):
        return [float(np.real(self.zeta)), float(np.imag(self.zeta)), float(self.u)]


HEIS_ORIGIN = HeisPt(0j, 0.0)


def heis_mul(p: HeisPt, q: HeisPt) -> HeisPt:
    return HeisPt(p.zeta + q.zeta, p.u + q.u + 2 * (p.zeta * np.conj(q.zeta)).imag)


def heis_inv(p: HeisPt) -> HeisPt:
    return HeisPt(-p.zeta, -p.u)


@dataclass(frozen=True)
class HeisIntElem:
    """
    Element (w0, w) of Heis_3(O_K), tr(w0) = n(w)
    """
    w0: QuadInt
    w: QuadInt

    def __post_init__(self):
        if self.w0.field is not self.w.field:
            raise FieldMismatchException("w0 and w lie in different fields")
        if self.w0.trace() != self.w.norm():
            raise ConstraintViolationException(
                f"tr(w0) = {self.w0.trace()} differs from n(w) = {self.w.norm()}")

    @property
    def field(self) -> FieldSpec:
        return self.w.field

    def __mul__(self, other: HeisIntElem) -> HeisIntElem:
        return heis_int_mul(self, other)

    def inv(self) -> HeisIntElem:
        return heis_int_inv(self)

    def point(self) -> HeisPt:
        return HeisPt(self.w.embed(), -2 * self.w0.embed().imag)


def heis_int_mul(g: HeisIntElem, h: HeisIntElem) -> HeisIntElem:
    return HeisIntElem(g.w0 + h.w0 + g.w.conj() * h.w, g.w + h.w)


def heis_int_inv(g: HeisIntElem) -> HeisIntElem:
    return HeisIntElem(g.w0.conj(), -g.w)


def heis_identity(field: FieldSpec) -> HeisIntElem:
    return HeisIntElem(field.zero(), field.zero())


def vertical_part(w: QuadInt) -> QuadInt:
    """
    The w0 paired with w by the fixed tie-break: (n/2, 0) for even n(w), ((n-1)/2, 1) otherwise
    """
    n = w.norm()
    if n % 2 == 0:
        return QuadInt(w.field, n // 2, 0)
    if w.field.q == 0:
        raise ConstraintViolationException(f"n(w) = {n} is odd, so w is not the horizontal part of any element")
    return QuadInt(w.field, (n - 1) // 2, 1)


@dataclass(frozen=True)
class Triple:
    a: QuadInt
    alpha: QuadInt
    c: QuadInt

    def __post_init__(self):
        if not (self.a.field is self.alpha.field is self.c.field):
            raise FieldMismatchException("Triple entries lie in different fields")
        if (self.a * self.c.conj()).trace() != self.alpha.norm():
            raise ConstraintViolationException(
                f"tr(a conj(c)) = {(self.a * self.c.conj()).trace()} differs from n(alpha) = {self.alpha.norm()}")

    @property
    def field(self) -> FieldSpec:
        return self.c.field

    @property
    def key(self):
        return self.a.key + self.alpha.key + self.c.key

    def point(self) -> HeisPt:
        return triple_point(self)


def triple_point(t: Triple) -> HeisPt:
    if not t.c:
        raise DegenerateGeometryException("A triple with c = 0 is the point at infinity")
    w0 = KNum.ratio(t.a, t.c)
    w = KNum.ratio(t.alpha, t.c)
    return HeisPt(w.embed(), -2 * w0.imag())


def shear(g: HeisIntElem, t: Triple) -> Triple:
    a, alpha, c = shear_column(g, t.a, t.alpha, t.c)
    return Triple(a, alpha, c)


def shear_column(g: HeisIntElem, a: QuadInt, alpha: QuadInt, c: QuadInt):
    return a + g.w.conj() * alpha + g.w0 * c, alpha + g.w * c, c


@dataclass(frozen=True)
class PiLattice:
    lattice: ZLattice2
    representatives: tuple


@lru_cache(maxsize=None)
def pi_lattice(field: FieldSpec) -> PiLattice:
    # n^-1(tr(O_K)): residues mod 2 with even norm, plus 2*O_K
    if field.q == 1:
        gens = [field.one(), field.gen()]
    else:
        gens = [QuadInt(field, x, y) for x in (0, 1) for y in (0, 1) if QuadInt(field, x, y).norm() % 2 == 0]
        gens += [QuadInt(field, 2, 0), QuadInt(field, 0, 2)]
    lattice = ZLattice2.from_vectors(field, gens)

    reps = [QuadInt(field, x, y) for y in range(2) for x in range(2)]
    seen = {}
    for r in reps:
        seen.setdefault(lattice.reduce(r), r)
    return PiLattice(lattice, tuple(sorted(seen, key=lambda z: z.key)))


def reduce_column(a: QuadInt, alpha: QuadInt, c: QuadInt):
    """
    Representative of the column (a, alpha, c) modulo the unipotent action of Heis_3(O_K).
    The constraint tr(a conj(c)) = n(alpha) is not needed here.
    """
    field = c.field
    if not c:
        if not alpha:
            return a, alpha, c
        return pi_lattice(field).lattice.scaled(alpha).reduce(a), alpha, c

    r = reduce_mod_sublattice(alpha, pi_lattice(field).lattice.scaled(c))
    w = (r - alpha).exact_div(c)
    g = HeisIntElem(vertical_part(w), w)
    a, _, _ = shear_column(g, a, alpha, c)

    # remaining stabiliser: (k*nu, 0), shifting a by k*nu*c
    nu_c = imaginary_generator(field) * c
    k = (a * nu_c.conj()).trace() // (2 * nu_c.norm())
    return a - nu_c * k, r, c


def canonical_triple(t: Triple) -> Triple:
    if not t.c:
        raise DegenerateGeometryException("canonical_triple requires c != 0")
    return Triple(*reduce_column(t.a, t.alpha, t.c))


# Cygan type distances. All accept numpy arrays of equal shape for zeta (complex) and u (real).
def _gauge_arrays(zeta1, u1, zeta2, u2):
    zeta1 = np.asarray(zeta1, dtype=np.complex128)
    zeta2 = np.asarray(zeta2, dtype=np.complex128)
    dz = zeta2 - zeta1
    du = np.asarray(u2, dtype=np.float64) - np.asarray(u1, dtype=np.float64) \
        - 2 * (zeta1 * np.conj(zeta2)).imag
    return np.abs(dz) ** 2, du


def cygan_array(zeta1, u1, zeta2, u2):
    r2, du = _gauge_arrays(zeta1, u1, zeta2, u2)
    return np.sqrt(np.hypot(r2, du))


def cygan_prime_array(zeta1, u1, zeta2, u2):
    r2, du = _gauge_arrays(zeta1, u1, zeta2, u2)
    return np.sqrt(np.hypot(r2, du) + r2)


def cygan_second_array(zeta1, u1, zeta2, u2):
    r2, du = _gauge_arrays(zeta1, u1, zeta2, u2)
    d2 = np.hypot(r2, du)
    dp = np.sqrt(d2 + r2)
    return np.divide(d2, dp, out=np.zeros_like(d2), where=dp > 0)


def cygan(p: HeisPt, q: HeisPt) -> float:
    return float(cygan_array(p.zeta, p.u, q.zeta, q.u))


def cygan_prime(p: HeisPt, q: HeisPt) -> float:
    return float(cygan_prime_array(p.zeta, p.u, q.zeta, q.u))


def cygan_second(p: HeisPt, q: HeisPt) -> float:
    return float(cygan_second_array(p.zeta, p.u, q.zeta, q.u))


def dilate(p: HeisPt, lam: float) -> HeisPt:
    if not lam > 0:
        raise DegenerateGeometryException(f"Dilation factor {lam} is not positive")
    return HeisPt(lam * p.zeta, lam * lam * p.u)
