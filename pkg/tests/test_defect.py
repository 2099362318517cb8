import numpy as np
import pytest

from hadfam.defect import (
    affine_max_dim,
    conjectured_dim,
    linear_defect,
    linear_defect_product,
    numeric_defect,
    summary,
)
from hadfam.errors import DomainError
from hadfam.hcore import dephase, fourier, random_phases


def test_spot_values():
    assert linear_defect(6)[1] == 4
    assert linear_defect(12) == (40, 17)
    assert linear_defect(7)[1] == 0


@pytest.mark.parametrize("N", range(2, 101))
def test_gcd_sum_equals_product_formula(N):
    assert linear_defect(N)[1] == linear_defect_product(N)


def test_affine_dimension():
    assert [affine_max_dim(N) for N in (12, 18, 20)] == [9, 16, 17]
    for N in (4, 8, 9, 16, 25, 27, 32):
        assert affine_max_dim(N) == linear_defect(N)[1]


def test_conjectured_dimension():
    assert conjectured_dim(3, 2) == 13
    assert conjectured_dim(2, 3) == 22
    assert conjectured_dim(5, 2) == 25
    with pytest.raises(DomainError):
        conjectured_dim(2, 2)


def test_summary():
    s = summary(12)
    assert (s.D1, s.d1, s.dA, s.d_conj) == (40, 17, 9, 13)
    assert summary(30).d_conj is None


def test_numeric_defect_invariant_under_rephasing():
    rng = np.random.default_rng(0)
    H = random_phases((10, 1), rng) * fourier(10) * random_phases((1, 10), rng)
    r = numeric_defect(H)
    assert r.defect == linear_defect(10)[1]
    assert r.reliable
    assert numeric_defect(dephase(H)).defect == r.defect


def test_numeric_defect_prime():
    assert int(numeric_defect(fourier(11))) == 0
