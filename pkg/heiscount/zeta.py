from __future__ import annotations

import math
from collections import namedtuple
from functools import lru_cache

import numpy as np
from scipy import special

from heiscount.quadint import FieldSpec, check_fundamental, make_field


def jacobi_symbol(a, m):
    if m <= 0 or m % 2 == 0:
        raise ValueError(f"Jacobi symbol needs an odd positive modulus, got {m}")
    a %= m
    result = 1
    while a:
        while a % 2 == 0:
            a //= 2
            if m % 8 in (3, 5):
                result = -result
        a, m = m, a
        if a % 4 == 3 and m % 4 == 3:
            result = -result
        a %= m
    return result if m == 1 else 0


def kronecker_chi(disc, n):
    """
    Kronecker symbol (disc/n) for n >= 1, the quadratic character of Q(sqrt(disc))
    """
    if n < 1:
        raise ValueError(f"kronecker_chi is defined here for n >= 1, got {n}")
    k = 0
    while n % 2 == 0:
        n //= 2
        k += 1
    if k and disc % 2 == 0:
        return 0
    chi2 = 1 if disc % 8 in (1, 7) else -1
    return chi2 ** k * jacobi_symbol(disc, n)


@lru_cache(maxsize=None)
def character_table(disc):
    period = -disc
    return np.array([kronecker_chi(disc, n) if n else 0 for n in range(period)], dtype=np.float64)


def dirichlet_L3(disc, method='series', n_terms=1_000_000):
    """
    L(3, chi_disc); 'series' sums n_terms terms (tail below 2|disc|/n_terms^3), 'hurwitz' uses scipy's Hurwitz zeta
    """
    disc = check_fundamental(disc)
    period = -disc
    chi = character_table(disc)
    if method == 'series':
        n = np.arange(n_terms, 0, -1, dtype=np.float64)  # smallest terms first
        return float(np.sum(chi[np.arange(n_terms, 0, -1) % period] / n ** 3))
    elif method == 'hurwitz':
        a = np.arange(1, period)
        return float(np.sum(chi[a] * special.zeta(3, a / period)) / period ** 3)
    raise ValueError(f"Unknown L-function method {method}")


def zeta3(method='series', n_terms=10_000):
    if method == 'series':
        n = np.arange(n_terms, 0, -1, dtype=np.float64)
        partial = float(np.sum(1 / n ** 3))
        N = float(n_terms)
        # Euler-Maclaurin tail of sum_{n > N} n^-3
        return partial + 1 / (2 * N ** 2) - 1 / (2 * N ** 3) + 1 / (4 * N ** 4)
    elif method == 'scipy':
        return float(special.zeta(3))
    raise ValueError(f"Unknown zeta method {method}")


def as_field(field_or_disc) -> FieldSpec:
    if isinstance(field_or_disc, FieldSpec):
        return field_or_disc
    return make_field(field_or_disc)


def _delta(field):
    return 1 if field.disc == -3 else 0


def field_L3(field, zeta_opts=None):
    if zeta_opts is None:
        zeta_opts = {}
    return dirichlet_L3(field.disc, method=zeta_opts.get('method', 'series'),
                        n_terms=zeta_opts.get('series_terms', 1_000_000))


def mertens_C(field, L3, group_ratio=1):
    abs_d = -field.disc
    return 1 / (2 * math.pi * math.sqrt(abs_d) * L3 * group_ratio)


def equidist_C(field, L3, group_ratio=1):
    abs_d = -field.disc
    return math.pi * abs_d ** 1.5 * L3 * group_ratio


def cusp_volume(field):
    return (1 + 2 * _delta(field)) * (-field.disc) / (8 * len(field.units))


def covolume(field, L3, group_ratio=1):
    return (1 + 2 * _delta(field)) * (-field.disc) ** 2.5 * L3 * group_ratio / (48 * math.pi)


def heis_covolume(field):
    # [O_K : Pi] * covol(O_K) * t_K / 2 in the coordinates (Im w0, Re w, Im w)
    return field.pi_index * (field.sqrt_abs_disc / 2) * (field.t_K / 2)


def mertens_C_geometric(field, L3):
    units = len(field.units)
    return 2 * units ** 2 * cusp_volume(field) ** 2 / (3 * math.pi ** 2 * (1 + 2 * _delta(field))
                                                        * covolume(field, L3))


def chain_constant(field, L3, covol, n0):
    abs_d = -field.disc
    return 2048 * covol / (len(field.units) * abs_d ** 1.5 * L3 * n0)


def chain_center_constant(field, chain_C):
    return (1 + 2 * _delta(field)) * (-field.disc) / (2 * len(field.units) * chain_C)


def cubic_constant(field, L3, translation_length, iota0, n0):
    abs_d = -field.disc
    return 256 * translation_length / (3 * iota0 * n0 * len(field.units) * abs_d ** 1.5 * L3)


def mertens_C_lattice(field, L3):
    # Local densities of the per-c orbit counts; class number one only
    if not field.is_class_number_one:
        return None
    return 6 / (math.pi * field.sqrt_abs_disc * L3)


def equidist_C_lattice(field, L3):
    c = mertens_C_lattice(field, L3)
    if c is None:
        return None
    return heis_covolume(field) / c


def chain_C_lattice(field, L3):
    # Primitive q = 1 vectors with third coordinate in (1+i), modulo diagonal units and unit scalars
    if field.disc != -4:
        return None
    return 3 * math.pi / (8 * L3)


ConstantBundle = namedtuple('ConstantBundle', [
    'disc', 'zeta3', 'L_chi_3', 'zetaK3',
    'mertens_C', 'equidist_C', 'cusp_volume', 'picard_covolume', 'heis_covolume', 'chain_C',
    'mertens_C_geometric', 'mertens_C_lattice', 'equidist_C_lattice', 'chain_C_lattice',
])


def constants(field_or_disc, zeta_opts=None, chain_covolume=None, chain_n0=4) -> ConstantBundle:
    field = as_field(field_or_disc)
    z3 = zeta3('series')
    L3 = field_L3(field, zeta_opts)

    chain_C = None
    if chain_covolume is not None:
        chain_C = chain_constant(field, L3, chain_covolume, chain_n0)
    elif field.disc == -4:
        # seed chain stabiliser of the Gaussian Picard group
        chain_C = chain_constant(field, L3, math.pi / 3, 4)

    return ConstantBundle(
        disc=field.disc,
        zeta3=z3,
        L_chi_3=L3,
        zetaK3=z3 * L3,
        mertens_C=mertens_C(field, L3),
        equidist_C=equidist_C(field, L3),
        cusp_volume=cusp_volume(field),
        picard_covolume=covolume(field, L3),
        heis_covolume=heis_covolume(field),
        chain_C=chain_C,
        mertens_C_geometric=mertens_C_geometric(field, L3),
        mertens_C_lattice=mertens_C_lattice(field, L3),
        equidist_C_lattice=equidist_C_lattice(field, L3),
        chain_C_lattice=chain_C_lattice(field, L3),
    )
