from fractions import Fraction as Fr

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hadfam.errors import DomainError
from hadfam.genpert import (
    PerturbOrders,
    PolySystem,
    penrose_residuals,
    pseudo_inverse,
    series_value,
    solve_order,
    toy_closed_form,
    toy_series,
    toy_system,
)


def test_pseudo_inverse_examples():
    assert pseudo_inverse([[1, 0]], exact=True) == [[1], [0]]
    assert pseudo_inverse([[0, 0]], exact=True) == [[0], [0]]
    A = np.array([[2.0, 1.0], [1.0, 3.0]])
    assert np.allclose(pseudo_inverse(A), np.linalg.inv(A))
    assert pseudo_inverse(np.zeros((1, 2))).shape == (2, 1)


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 20), st.integers(1, 30), st.integers(0, 2**32 - 1), st.booleans())
def test_penrose_identities(m, n, seed, cplx):
    r = np.random.default_rng(seed)
    k = int(r.integers(0, min(m, n) + 1))
    A = r.normal(size=(m, k)) @ r.normal(size=(k, n))
    if cplx:
        A = A + 1j * (r.normal(size=(m, k)) @ r.normal(size=(k, n)))
    assert max(penrose_residuals(A, pseudo_inverse(A))) < 1e-10 * max(1.0, np.abs(A).max() ** 2)


def test_toy_coefficients():
    assert toy_system("origin").equations[0] == {
        (0,): 1, (0, 0): -2, (0, 0, 0): 1, (1, 1): -1, (1, 1, 1): -1, (1, 1, 1, 1): Fr(-7, 12)}
    assert toy_system("shifted").equations[0] == {
        (0, 0): 1, (0, 0, 0): 1, (1, 1): -1, (1, 1, 1): -1, (1, 1, 1, 1): Fr(-7, 12)}
    for at in ("origin", "shifted"):
        assert toy_system(at).evaluate([0, 0]) == [0]
    with pytest.raises(DomainError):
        toy_system("elsewhere")


def test_polysystem_validation():
    with pytest.raises(DomainError):
        PolySystem(1, ({(): 1},))
    with pytest.raises(DomainError):
        PolySystem(1, ({(0,) * 5: 1},))
    s = PolySystem.from_terms(2, [{(1, 0): 1, (0, 1): 1}])
    assert s.equations[0] == {(0, 1): 2}


def test_shifted_second_order_residual():
    sys_ = toy_system("shifted")
    orders = PerturbOrders()
    orders.push([Fr(3), Fr(5)], [0, 0], [0])
    sol = solve_order(sys_, orders, 2)
    assert sol.residual == [-9 + 25]  # -x1^2 + y1^2
    assert not sol.solvable


def test_linear_system_has_no_heterogeneous_part():
    sys_ = PolySystem(2, ({(0,): Fr(1)}, {(1,): Fr(2)}))
    orders = PerturbOrders()
    orders.push([Fr(1), Fr(1)], [0, 0], [0, 0])
    sol = solve_order(sys_, orders, 2)
    assert sol.H == [0, 0] and sol.residual == [0, 0]


def test_origin_series():
    s = toy_series("origin")
    assert s.X == [0, 1, 1, Fr(31, 12)]
    assert s.Y == [1, 0, 0, 0]
    assert all(r == 0 for r in s.residuals)


def test_shifted_branches():
    one = toy_series("shifted_I")
    two = toy_series("shifted_II")
    assert one.Y == [1, 0, Fr(-7, 24)]
    assert two.Y == [-1, -1, Fr(-17, 24)]
    # the same linear map fixes y at orders 3 and 4
    assert len(set(one.U)) == 1 and len(set(two.U)) == 1


def test_origin_alternate_parametrisation():
    s = toy_series("origin", {"y": [1, Fr(-1, 2), Fr(-2, 3)]})
    assert s.X == [0, 1, 0, 0]
    assert s.Y == [1, Fr(-1, 2), Fr(-2, 3), 0]


def test_branch_two_reparametrisation_consistent_value():
    # X = -t - t^2 + a t^3 gives Y = t exactly when a = -31/24
    s = toy_series("shifted_II", {"x": [-1, -1, Fr(-31, 24)]})
    assert s.Y == [1, 0, 0]


def test_closed_form_agreement():
    s = toy_series("origin")
    Y = 0.01
    assert abs(series_value(s.X, Y) - toy_closed_form(Y)) < 10 * Y**5


def test_degree_homogeneity():
    sys_ = toy_system("origin")
    base = PerturbOrders()
    scaled = PerturbOrders()
    base.push([0.0, 0.3], [0, 0], [0])
    scaled.push([0.0, 0.6], [0, 0], [0])
    h1 = solve_order(sys_, base, 2).H
    h2 = solve_order(sys_, scaled, 2).H
    assert np.allclose(h2, [4 * v for v in h1])
