import numpy as np
import pytest

from hadfam import n12
from hadfam.expansion import apply_pattern, breakdown_scan, homogeneous_x, random_assignment
from hadfam.hcore import transpose_x
from hadfam.numtheory import param_keys


def rng(*seed):
    return np.random.default_rng(list(seed))


def test_sum_rules():
    v = n12.reduce(random_assignment(12, rng(0)))
    assert abs(v.x3a + v.x3b + v.x3c) < 1e-12
    assert abs(v.x9a + v.x9b + v.x9c) < 1e-12


@pytest.mark.parametrize("label", ["I", "II", "1", "2", "3"])
def test_branch_points_solve_system_and_classify(label):
    for t in range(5):
        v = n12.branch_point(label, rng(1, t))
        assert n12.relative_system_residual(v) < 1e-10
        assert n12.classify(v) == label


def test_generic_point_is_generic():
    v = n12.branch_point("generic", rng(2))
    assert n12.relative_system_residual(v) > 1e-3
    assert n12.classify(v) == "generic"


def test_zero_point_is_type_one():
    zero = n12.N12Vars(*([0j] * 15))
    assert n12.classify(zero) == "I"


def test_engine_agrees_with_system():
    checks = n12.selftest(48, seed=3)
    assert all(c.agree for c in checks)
    assert {c.engine_zero for c in checks} == {True, False}


def _assignment_of(X):
    N = X.shape[0]
    return {k: complex(X[k.row_class, (k.row_class + k.diag) % N]) for k in param_keys(N)}


def test_transposition_swaps_types():
    for label, other in (("I", "II"), ("II", "I")):
        a = apply_pattern(12, "typeI" if label == "I" else "typeII").apply(random_assignment(12, rng(4)))
        Xt = transpose_x(homogeneous_x(12, a))
        # the transpose is again a first-order solution
        at = _assignment_of(Xt)
        assert np.allclose(homogeneous_x(12, at), Xt, atol=1e-12)
        assert n12.classify(n12.reduce(a)) == label
        assert n12.classify(n12.reduce(at)) == other


@pytest.mark.slow
@pytest.mark.parametrize("label,expected", [("I", None), ("II", None), ("1", 6), ("2", 6), ("3", 5)])
def test_branch_breakdown_orders(label, expected):
    r = breakdown_scan(12, 8 if expected is None else expected + 1, trials=2, seed=7,
                       sampler=n12.branch_sampler(label), label=label)
    assert r.first_break == expected
    assert all(t.linear_rank == 4 for t in r.per_trial)
