"""Complex matrix substrate: Fourier and shift matrices, Hadamard checks, X <-> H.

The perturbative variable is ``X = 1 - H F^dagger``; the Fourier matrix sits at
``X = 0``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DomainError

DEFAULT_TOL = 1e-10


def fourier(N: int) -> np.ndarray:
    if N < 1:
        raise DomainError(f"dimension must be positive, got {N}")
    k = np.arange(N)
    # exponent reduced mod N before exponentiating keeps entries exact-ish
    return np.exp(2j * np.pi * (np.outer(k, k) % N) / N) / np.sqrt(N)


def shift(N: int) -> np.ndarray:
    """Cyclic shift P with P[i, j] = 1 iff j = i + 1 (mod N)."""
    if N < 1:
        raise DomainError(f"dimension must be positive, got {N}")
    return np.roll(np.eye(N, dtype=complex), 1, axis=1)


def commutator_shift(X: np.ndarray, n: int) -> np.ndarray:
    """[P^n, X] computed by index shifts: X[i+n, j] - X[i, j-n]."""
    return np.roll(X, -n, axis=0) - np.roll(X, n, axis=1)


@dataclass(frozen=True)
class HadamardReport:
    unitarity_residual: float
    modulus_residual: float
    tol: float

    @property
    def passes(self) -> bool:
        return self.unitarity_residual <= self.tol and self.modulus_residual <= self.tol


def is_hadamard(H: np.ndarray, tol: float = DEFAULT_TOL) -> HadamardReport:
    H = np.asarray(H, dtype=complex)
    N = H.shape[0]
    unit = np.max(np.abs(H @ H.conj().T - np.eye(N)))
    mod = np.max(np.abs(np.abs(H) * np.sqrt(N) - 1.0))
    return HadamardReport(float(unit), float(mod), tol)


def unitarity_residual(M: np.ndarray) -> float:
    M = np.asarray(M)
    return float(np.max(np.abs(M @ M.conj().T - np.eye(M.shape[0]))))


def diag_conditions(M: np.ndarray) -> float:
    """max over n in [1, N) and i of |(M P^n M^dagger)_ii|."""
    M = np.asarray(M, dtype=complex)
    N = M.shape[0]
    Md = M.conj().T
    worst = 0.0
    for n in range(1, N):
        # M P^n shifts the columns of M right by n
        d = np.einsum("ij,ji->i", np.roll(M, n, axis=1), Md)
        worst = max(worst, float(np.max(np.abs(d))))
    return worst


def x_of_h(H: np.ndarray) -> np.ndarray:
    H = np.asarray(H, dtype=complex)
    N = H.shape[0]
    return np.eye(N) - H @ fourier(N).conj().T


def h_of_x(X: np.ndarray) -> np.ndarray:
    X = np.asarray(X, dtype=complex)
    N = X.shape[0]
    return (np.eye(N) - X) @ fourier(N)


def dephase(H: np.ndarray) -> np.ndarray:
    """Bring H to dephased form: first row and column real positive.

    Row i is divided by the phase of H[i, 0], then column j by the phase of
    the row-fixed H[0, j].
    """
    H = np.array(H, dtype=complex)
    if np.any(H[0, :] == 0) or np.any(H[:, 0] == 0):
        raise DomainError("cannot dephase: zero entry in first row or column")
    H = H / (H[:, :1] / np.abs(H[:, :1]))
    H = H / (H[:1, :] / np.abs(H[:1, :]))
    return H


def transpose_x(X: np.ndarray) -> np.ndarray:
    """The image of X under H -> H^T, namely F X^T F^dagger."""
    X = np.asarray(X, dtype=complex)
    F = fourier(X.shape[0])
    return F @ X.T @ F.conj().T


def random_unitary(N: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random unitary (QR of a Ginibre matrix with phase fix)."""
    Z = (rng.standard_normal((N, N)) + 1j * rng.standard_normal((N, N))) / np.sqrt(2)
    Q, R = np.linalg.qr(Z)
    d = np.diag(R)
    return Q * (d / np.abs(d))


def random_phases(shape, rng: np.random.Generator) -> np.ndarray:
    return np.exp(2j * np.pi * rng.uniform(size=shape))


def to_json(H: np.ndarray) -> dict:
    H = np.asarray(H, dtype=complex)
    return {"n": int(H.shape[0]), "re": H.real.tolist(), "im": H.imag.tolist()}


def from_json(obj: dict) -> np.ndarray:
    re = np.asarray(obj["re"], dtype=float)
    im = np.asarray(obj["im"], dtype=float)
    n = int(obj["n"])
    if re.shape != (n, n) or im.shape != (n, n):
        raise DomainError(f"matrix payload shape {re.shape}/{im.shape} does not match n={n}")
    return re + 1j * im


def save_matrix(path: str | Path, H: np.ndarray) -> None:
    Path(path).write_text(json.dumps(to_json(H)))


def load_matrix(path: str | Path) -> np.ndarray:
    return from_json(json.loads(Path(path).read_text()))
