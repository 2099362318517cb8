import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hadfam.errors import DomainError
from hadfam.hcore import (
    commutator_shift,
    dephase,
    diag_conditions,
    fourier,
    from_json,
    h_of_x,
    is_hadamard,
    load_matrix,
    random_phases,
    random_unitary,
    save_matrix,
    shift,
    to_json,
    transpose_x,
    x_of_h,
)


@pytest.mark.parametrize("N", range(1, 21))
def test_fourier_is_hadamard(N):
    assert is_hadamard(fourier(N)).passes
    assert diag_conditions(np.eye(N)) == 0


def test_doubled_entry_fails_modulus():
    H = fourier(5)
    H[0, 0] *= 2
    rep = is_hadamard(H)
    assert not rep.passes and rep.modulus_residual > 0.5


@pytest.mark.parametrize("N", [4, 6, 8])
def test_hadamard_iff_unitary_with_vanishing_diagonals(N):
    rng = np.random.default_rng(N)
    F = fourier(N)
    for t in range(50):
        if t % 2:
            H = random_phases((N, 1), rng) * F * random_phases((1, N), rng)
        else:
            H = random_unitary(N, rng)
        M = H @ F.conj().T
        unitary = np.max(np.abs(M @ M.conj().T - np.eye(N))) < 1e-8
        assert is_hadamard(H, 1e-8).passes == (unitary and diag_conditions(M) < 1e-8)


def test_commutator_matches_dense_product():
    rng = np.random.default_rng(0)
    N = 7
    X = rng.normal(size=(N, N)) + 1j * rng.normal(size=(N, N))
    P = shift(N)
    for n in range(N):
        Pn = np.linalg.matrix_power(P, n)
        assert np.allclose(commutator_shift(X, n), Pn @ X - X @ Pn)


def test_fourier_diagonalises_shift():
    N = 9
    F = fourier(N)
    D = F.conj().T @ shift(N) @ F
    assert np.allclose(D, np.diag(np.diag(D)))


def test_x_h_roundtrip():
    rng = np.random.default_rng(1)
    H = random_unitary(6, rng)
    assert np.allclose(h_of_x(x_of_h(H)), H)
    assert np.allclose(x_of_h(fourier(6)), 0)


@settings(max_examples=20)
@given(st.integers(2, 10), st.integers(0, 2**32 - 1))
def test_dephase_keeps_hadamard_and_is_idempotent(N, seed):
    rng = np.random.default_rng(seed)
    H = random_phases((N, 1), rng) * fourier(N) * random_phases((1, N), rng)
    D = dephase(H)
    assert is_hadamard(D).passes
    assert np.allclose(D[0, :].imag, 0) and np.allclose(D[:, 0].imag, 0)
    assert np.all(D[0, :].real > 0) and np.all(D[:, 0].real > 0)
    assert np.allclose(dephase(D), D)
    assert np.allclose(D, fourier(N))


def test_dephase_zero_entry():
    H = fourier(3)
    H[0, 1] = 0
    with pytest.raises(DomainError):
        dephase(H)


def test_transpose_x_corresponds_to_transpose():
    rng = np.random.default_rng(2)
    H = random_unitary(5, rng)
    assert np.allclose(transpose_x(x_of_h(H)), x_of_h(H.T))


def test_non_hadamard_fails():
    rng = np.random.default_rng(3)
    assert not is_hadamard(random_unitary(4, rng)).passes


def test_json_roundtrip(tmp_path):
    H = fourier(4)
    assert np.array_equal(from_json(to_json(H)), H)
    save_matrix(tmp_path / "h.json", H)
    assert np.array_equal(load_matrix(tmp_path / "h.json"), H)
    with pytest.raises(DomainError):
        from_json({"n": 3, "re": [[0]], "im": [[0]]})
