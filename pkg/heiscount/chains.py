from __future__ import annotations

import math
from collections import namedtuple
from fractions import Fraction

import numpy as np

from heiscount.exceptions import InfiniteChainException, NotAChainException
from heiscount.heis import HeisPt, heis_mul, cygan_array
from heiscount.picard import hermitian_form, vector_to_boundary
from heiscount.quadint import FieldSpec, KNum, QuadInt


class PolarPoint:
    """
    Polar point (z0, z1, z2) over O_K of a chain, q(P) > 0
    """
    __slots__ = ('v', 'qval')

    def __init__(self, v) -> None:
        v = tuple(v)
        if len(v) != 3:
            raise ValueError(f"A polar point has 3 coordinates, got {len(v)}")
        qval = hermitian_form(v)
        if qval <= 0:
            raise NotAChainException(f"q(P) = {qval} is not positive")
        self.v = v
        self.qval = qval

    def __repr__(self) -> str:
        return f"PolarPoint({[z.key for z in self.v]}, q={self.qval})"

    @property
    def field(self) -> FieldSpec:
        return self.v[2].field

    @property
    def is_finite(self) -> bool:
        return bool(self.v[2])

    def to_complex(self):
        return np.array([z.embed() for z in self.v], dtype=np.complex128)

    def radius_squared(self) -> Fraction:
        return Fraction(self.qval, self._require_finite().norm())

    def _require_finite(self) -> QuadInt:
        if not self.v[2]:
            raise InfiniteChainException("z2 = 0: the chain passes through infinity")
        return self.v[2]


ChainGeom = namedtuple('ChainGeom', ['center', 'R', 'diam', 'diam_prime', 'diam_second', 'translation'])


def chain_translation(P: PolarPoint) -> HeisPt:
    """
    Heisenberg translation gamma with gamma*P = [-a : 0 : b], a, b > 0, as a boundary point:
    w = -z1/z2, w0 = |w|^2/2 - i Im(z0/z2)
    """
    z2 = P._require_finite()
    z0, z1, _ = P.v
    w = -KNum.ratio(z1, z2).embed()
    return HeisPt(w, 2 * KNum.ratio(z0, z2).imag())


def chain_center(P: PolarPoint) -> HeisPt:
    z2 = P._require_finite()
    z0, z1, _ = P.v
    return HeisPt(KNum.ratio(z1, z2).embed(), -2 * KNum.ratio(z0, z2).imag())


def chain_from_polar(P: PolarPoint) -> ChainGeom:
    R = math.sqrt(P.radius_squared())
    return ChainGeom(
        center=chain_center(P),
        R=R,
        diam=2 * R,
        diam_prime=2 * math.sqrt(2) * R,
        diam_second=math.sqrt(2) * R,
        translation=chain_translation(P),
    )


def chain_from_orbit_vector(v) -> ChainGeom:
    return chain_from_polar(PolarPoint(v))


def seed_chain(field: FieldSpec) -> PolarPoint:
    return PolarPoint((field.zero(), field.one(), field.zero()))


def form_pairing(z, P):
    """
    B(z, P) = P^* J z for complex vectors; z may be (3,) or (3, k)
    """
    z = np.asarray(z, dtype=np.complex128)
    P = np.asarray(P, dtype=np.complex128)
    return -np.conj(P[0]) * z[2] + np.conj(P[1]) * z[1] - np.conj(P[2]) * z[0]


def reflexion_matrix(P: PolarPoint):
    """
    The order two map z -> z - 2 B(z, P) / q(P) * P fixing the projective line orthogonal to P
    """
    p = P.to_complex()
    j = np.array([[0, 0, -1], [0, 1, 0], [-1, 0, 0]], dtype=np.complex128)
    return np.eye(3, dtype=np.complex128) - 2 * np.outer(p, np.conj(p) @ j) / P.qval


def reflexion(P: PolarPoint, z):
    z = np.asarray(z, dtype=np.complex128)
    return z - 2 * form_pairing(z, P.to_complex()) / P.qval * (P.to_complex() if z.ndim == 1
                                                               else P.to_complex()[:, None])


def chain_center_by_reflexion(P: PolarPoint) -> HeisPt:
    P._require_finite()
    return vector_to_boundary(reflexion(P, np.array([1, 0, 0], dtype=np.complex128)))


def boundary_vectors(points):
    """
    Columns (w0, w, 1) of Heisenberg points, w0 = (|zeta|^2 - i u)/2
    """
    zeta = np.array([p.zeta for p in points], dtype=np.complex128)
    u = np.array([p.u for p in points], dtype=np.float64)
    return np.vstack([(np.abs(zeta) ** 2 - 1j * u) / 2, zeta, np.ones_like(zeta)])


def sample_chain(P: PolarPoint, k) -> list[HeisPt]:
    if k < 3:
        raise ValueError(f"Need at least 3 samples, got {k}")
    geom = chain_from_polar(P)
    theta = 2 * np.pi * np.arange(k) / k
    circle = geom.R * np.exp(1j * theta)
    return [heis_mul(geom.center, HeisPt(complex(z), 0.0)) for z in circle]


def sampled_diameter(points) -> float:
    zeta = np.array([p.zeta for p in points], dtype=np.complex128)
    u = np.array([p.u for p in points], dtype=np.float64)
    d = cygan_array(zeta[:, None], u[:, None], zeta[None, :], u[None, :])
    return float(d.max())


def hypersphere_residual(points) -> float:
    vecs = boundary_vectors(points)
    q = -2 * (vecs[0] * np.conj(vecs[2])).real + np.abs(vecs[1]) ** 2
    return float(np.max(np.abs(q) / np.sum(np.abs(vecs) ** 2, axis=0)))


def line_residual(P: PolarPoint, points) -> float:
    vecs = boundary_vectors(points)
    p = P.to_complex()
    return float(np.max(np.abs(form_pairing(vecs, p)) / (np.linalg.norm(p) * np.linalg.norm(vecs, axis=0))))


def chain_record(P: PolarPoint, n_samples) -> dict:
    geom = chain_from_polar(P)
    return {
        'polar': [list(z.key) for z in P.v],
        'qval': P.qval,
        'R': geom.R,
        'center': geom.center.as_list(),
        'samples': [p.as_list() for p in sample_chain(P, n_samples)],
    }
