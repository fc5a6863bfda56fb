import math

import pytest
import numpy as np
from numpy.testing import assert_allclose, assert_equal

from heiscount import zeta
from heiscount.exceptions import InvalidDiscriminantException
from heiscount.quadint import make_field


class TestCharacters:
    def test_chi_minus_four(self):
        assert_equal([zeta.kronecker_chi(-4, n) for n in range(1, 9)], [1, 0, -1, 0, 1, 0, -1, 0])

    def test_chi_minus_three(self):
        assert_equal([zeta.kronecker_chi(-3, n) for n in range(1, 7)], [1, -1, 0, 1, -1, 0])

    def test_chi_multiplicative(self):
        for disc in (-3, -4, -7, -8, -15):
            for m in range(1, 30):
                for n in range(1, 30):
                    assert zeta.kronecker_chi(disc, m * n) == zeta.kronecker_chi(disc, m) * zeta.kronecker_chi(disc, n)

    def test_chi_domain(self):
        with pytest.raises(ValueError, match=r"n >= 1"):
            zeta.kronecker_chi(-4, 0)


class TestSpecialValues:
    def test_L3_gaussian(self):
        assert_allclose(zeta.dirichlet_L3(-4), math.pi ** 3 / 32, atol=1e-10)

    @pytest.mark.parametrize("disc", [-3, -4, -7, -8, -11])
    def test_L3_methods_agree(self, disc):
        assert_allclose(zeta.dirichlet_L3(disc, method='series'), zeta.dirichlet_L3(disc, method='hurwitz'),
                        atol=1e-10)

    def test_L3_errors(self):
        with pytest.raises(InvalidDiscriminantException):
            zeta.dirichlet_L3(-12)
        with pytest.raises(ValueError, match=r"Unknown L-function method"):
            zeta.dirichlet_L3(-4, method='euler')

    def test_zeta3(self):
        assert_allclose(zeta.zeta3(), 1.2020569031595942, atol=1e-12)
        assert_allclose(zeta.zeta3('series'), zeta.zeta3('scipy'), atol=1e-12)


class TestConstants:
    def test_gaussian_bundle(self):
        b = zeta.constants(-4)
        assert_allclose(b.mertens_C, 8 / math.pi ** 4, rtol=1e-9)
        assert_allclose(b.cusp_volume, 1 / 8)
        assert_allclose(b.picard_covolume, math.pi ** 2 / 48, rtol=1e-9)
        assert_allclose(b.chain_C, 512 / (3 * math.pi ** 2), rtol=1e-9)
        assert_allclose(b.zetaK3, b.zeta3 * b.L_chi_3)
        assert_allclose(b.heis_covolume, 2.0)

    def test_lattice_constants(self):
        b = zeta.constants(-4)
        assert_allclose(b.mertens_C_lattice, 96 / math.pi ** 4, rtol=1e-9)
        assert_allclose(b.mertens_C_lattice / b.mertens_C, 12, rtol=1e-12)
        assert_allclose(b.equidist_C_lattice * b.mertens_C_lattice, b.heis_covolume)
        assert_allclose(b.chain_C_lattice, 12 / math.pi ** 2, rtol=1e-9)

    @pytest.mark.parametrize("disc", [-3, -4, -7, -8, -11])
    def test_geometric_mertens(self, disc):
        b = zeta.constants(disc)
        assert_allclose(b.mertens_C_geometric, b.mertens_C, rtol=1e-12)
        assert_allclose(b.heis_covolume, -disc / 2)

    def test_mertens_decreasing(self):
        values = [zeta.constants(d).mertens_C for d in (-3, -4, -7, -8, -11)]
        assert np.all(np.diff(values) < 0)

    def test_class_number_two(self):
        b = zeta.constants(-20)
        assert b.mertens_C_lattice is None
        assert b.equidist_C_lattice is None
        assert b.chain_C is None

    def test_chain_center_constant(self):
        field = make_field(-4)
        assert_allclose(zeta.chain_center_constant(field, 1.0), 0.5)
        assert_allclose(zeta.cusp_volume(make_field(-3)), 3 * 3 / 48)
