"""Linear defect of the Fourier matrix, affine-family dimensions, numeric defect."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd

import numpy as np

from .errors import DomainError
from .numtheory import factorize, is_prime, split_p1_p2_squared

DEFAULT_RANK_TOL = 1e-8


@dataclass(frozen=True)
class DefectSummary:
    N: int
    D1: int
    d1: int
    dA: int
    d_conj: int | None


def linear_defect(N: int) -> tuple[int, int]:
    """(D1, d1) by direct gcd summation."""
    if N < 1:
        raise DomainError(f"dimension must be positive, got {N}")
    D1 = sum(gcd(n, N) for n in range(N))
    return D1, D1 - (2 * N - 1)


def linear_defect_product(N: int) -> int:
    """d1 from the prime factorisation, prod(1 + k - k/p) N - 2N + 1."""
    if N < 2:
        raise DomainError(f"need N >= 2, got {N}")
    prod = Fraction(1)
    for p, k in factorize(N).items():
        prod *= 1 + k - Fraction(k, p)
    value = prod * N - 2 * N + 1
    assert value.denominator == 1
    return int(value)


def affine_max_dim(N: int) -> int:
    if N < 2:
        raise DomainError(f"need N >= 2, got {N}")
    f = factorize(N)
    return (sum(f.values()) - 1) * N - sum(k * N // p for p, k in f.items()) + 1


def conjectured_dim(p1: int, p2: int) -> int:
    """Conjectured dimension of the type I / II families for N = p1 p2^2."""
    if p1 == p2 or not (is_prime(p1) and is_prime(p2)):
        raise DomainError(f"need two distinct primes, got ({p1}, {p2})")
    N = p1 * p2 * p2
    d1 = linear_defect(N)[1]
    dA = affine_max_dim(N)
    if (d1 + dA) % 2:
        raise AssertionError(f"d1 + dA odd for N={N}")
    d = (d1 + dA) // 2
    closed = 3 * N - 3 * p1 * p2 - 2 * p2 * p2 + p2 + 1
    torus = Fraction(N) * (1 - Fraction(1, p1)) * (1 - Fraction(1, p2))
    assert d == closed == d1 - torus == dA + torus, (d, closed, d1 - torus, dA + torus)
    return d


def summary(N: int) -> DefectSummary:
    D1, d1 = linear_defect(N)
    dA = affine_max_dim(N) if N >= 2 else 0
    split = split_p1_p2_squared(N)
    d_conj = conjectured_dim(*split) if split else None
    return DefectSummary(N, D1, d1, dA, d_conj)


@dataclass(frozen=True)
class NumericDefect:
    defect: int
    nullity: int
    reliable: bool
    gap_ratio: float

    def __int__(self) -> int:
        return self.defect


def tangent_system(H: np.ndarray) -> np.ndarray:
    """Real matrix of the first-order conditions on R for H o EXP(iR).

    Rows: real and imaginary parts of sum_k H_ik conj(H_jk) (R_ik - R_jk) for
    each pair i < j. Columns: R flattened row-major.
    """
    H = np.asarray(H, dtype=complex)
    N = H.shape[0]
    iu, ju = np.triu_indices(N, k=1)
    c = H[iu, :] * H[ju, :].conj()  # (pairs, N)
    A = np.zeros((len(iu), N, N), dtype=complex)
    rows = np.arange(len(iu))
    A[rows, iu, :] += c
    A[rows, ju, :] -= c
    A = A.reshape(len(iu), N * N)
    return np.vstack([A.real, A.imag])


def numeric_defect(H: np.ndarray, rank_tol: float = DEFAULT_RANK_TOL) -> NumericDefect:
    """Dimension of first-order dephased deformations H o EXP(iR)."""
    H = np.asarray(H, dtype=complex)
    N = H.shape[0]
    A = tangent_system(H)
    sv = np.linalg.svd(A, compute_uv=False)
    sv = np.concatenate([sv, np.zeros(N * N - len(sv))])
    cut = rank_tol * sv[0]
    rank = int(np.sum(sv > cut))
    nullity = N * N - rank
    if 0 < rank < len(sv):
        lo = sv[rank]
        gap = float(sv[rank - 1] / lo) if lo > 0 else float("inf")
    else:
        gap = float("inf")
    return NumericDefect(nullity - (2 * N - 1), nullity, gap >= 10.0, gap)
