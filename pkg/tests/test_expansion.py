import numpy as np
import pytest

from hadfam.defect import conjectured_dim, linear_defect
from hadfam.errors import DomainError
from hadfam.expansion import (
    Arith,
    BrokenConsistency,
    SeriesState,
    apply_pattern,
    assignment_from_vector,
    assignment_vector,
    breakdown_scan,
    consistency_residuals,
    equation_residual,
    free_real_dimension,
    homogeneous_x,
    parse_precision,
    pattern_dimension,
    pattern_from_json,
    random_assignment,
    residual_vector,
    run_trial,
    unitary_series,
)
from hadfam.hcore import commutator_shift, h_of_x, is_hadamard, unitarity_residual
from hadfam.numtheory import ParamKey, is_prime, num_params, param_keys, split_p1_p2_squared


def rng(*seed):
    return np.random.default_rng(list(seed))


def test_homogeneous_x_solves_first_order():
    for N in (6, 8, 12):
        X = homogeneous_x(N, random_assignment(N, rng(N)))
        for n in range(1, N):
            assert np.max(np.abs(np.diagonal(commutator_shift(X, n)))) < 1e-12


def test_first_order_count():
    for N in range(2, 31):
        assert len(param_keys(N)) == num_params(N) == linear_defect(N)[0]
        assert free_real_dimension(N) == linear_defect(N)[0]
        if is_prime(N):
            assert num_params(N) == 2 * N - 1  # only trivial phases survive


def test_assignment_vector_roundtrip():
    a = random_assignment(10, rng(0))
    assert assignment_from_vector(10, assignment_vector(10, a)) == a


@pytest.mark.parametrize("N", range(2, 31))
def test_second_order_always_consistent(N):
    for t in range(5):
        st = SeriesState.start(N, random_assignment(N, rng(N, t)))
        rep = consistency_residuals(st, 2)
        assert rep.max_abs <= 1e-10 * max(rep.scale, 1.0)


def test_particular_solution_solves_order():
    st = SeriesState.start(6, random_assignment(6, rng(1)))
    for s in range(2, 7):
        X = st.advance()
        assert equation_residual(st, s, X) < 1e-12


def test_homogeneity_of_residuals():
    a = random_assignment(12, rng(5))
    a2 = {k: 2 * v for k, v in a.items()}
    for s in range(2, 5):
        r1 = residual_vector(12, a, s)
        r2 = residual_vector(12, a2, s)
        assert np.allclose(r2, 2**s * r1, rtol=1e-8, atol=1e-12)


def test_generic_n12_breaks_at_four():
    st = SeriesState.start(12, random_assignment(12, rng(2)))
    st.advance()
    st.advance()
    with pytest.raises(BrokenConsistency) as exc:
        st.advance()
    assert exc.value.report.order == 4


def test_big_precision_matches_double():
    a = random_assignment(6, rng(3))
    d = SeriesState.start(6, a)
    b = SeriesState.start(6, a, Arith(120))
    for _ in range(4):
        d.advance()
        b.advance()
    assert np.allclose(b.truncated_x(), d.truncated_x(), atol=1e-13)
    assert parse_precision("big:80").name == "big:80"
    with pytest.raises(DomainError):
        parse_precision("quad")


def test_unitary_series_is_nearly_hadamard():
    free = {k: 0.01 * v for k, v in random_assignment(6, rng(4)).items()}
    st = unitary_series(6, free, 4)
    M = h_of_x(st.truncated_x())
    assert unitarity_residual(M) < 1e-8
    assert is_hadamard(M, 1e-6).passes


def test_scan_is_deterministic():
    a = breakdown_scan(12, 5, trials=2, seed=11).to_json()
    b = breakdown_scan(12, 5, trials=2, seed=11).to_json()
    assert a == b
    assert a["first_break"] == 4
    assert a["rng"].startswith("numpy")


def test_patterns_need_p1p2_squared():
    with pytest.raises(DomainError):
        apply_pattern(30, "typeI")


@pytest.mark.parametrize("N", [12, 18, 20, 28, 44, 45, 50])
def test_pattern_dimension_matches_conjecture(N):
    p1, p2 = split_p1_p2_squared(N)
    for label in ("typeI", "typeII"):
        assert pattern_dimension(apply_pattern(N, label)) == conjectured_dim(p1, p2)


def test_custom_pattern_json():
    pat = pattern_from_json(12, [{"diag": 4, "classes": [[0, 2], [1, 3]]}, {"diag": 8, "classes": [[0, 2], [1, 3]]}])
    assert pat.conditions() == 4
    assert pattern_dimension(pat) == 13
    with pytest.raises(DomainError):
        pattern_from_json(12, [{"diag": 4, "classes": [[0, 7]]}])


def test_type_i_pattern_zeroes_order_four():
    pat = apply_pattern(12, "typeI")
    for t in range(3):
        a = pat.apply(random_assignment(12, rng(9, t)))
        res = run_trial(12, a, 4, resolve=True)
        assert res.first_break is None
        assert res.relative_residuals[-1] < 1e-10


def test_disagreeing_trials_are_inconclusive():
    from hadfam.expansion import InconclusiveScan

    pat = apply_pattern(12, "typeI")
    calls = []

    def alternating(r):
        calls.append(1)
        a = random_assignment(12, r)
        return pat.apply(a) if len(calls) % 2 else a

    with pytest.raises(InconclusiveScan) as exc:
        breakdown_scan(12, 4, trials=2, seed=0, sampler=alternating, resolve=False)
    assert exc.value.result.inconclusive
    calls.clear()
    res = breakdown_scan(12, 4, trials=2, seed=0, sampler=alternating, resolve=False, raise_inconclusive=False)
    assert res.inconclusive and [t.first_break for t in res.per_trial] == [None, 4]
