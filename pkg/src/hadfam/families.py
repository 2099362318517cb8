"""Affine families H o EXP(iR): Haagerup N=6, Dita compositions, prime powers,
and the self-cognate family for N = p1 p2^2.

Every construction here is a base matrix times entrywise phases that are
products of free parameters, so each family is described by integer
exponent matrices and reduced to a dephased basis.
"""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .hcore import fourier, is_hadamard
from .numtheory import is_prime

INPUT_TOL = 1e-8


# ---------------------------------------------------------------------------
# affine families


def dephase_exponent(E: np.ndarray) -> np.ndarray:
    """Remove the row and column phase freedom: R_ij - R_i0 - R_0j + R_00."""
    E = np.asarray(E, dtype=float)
    return E - E[:, :1] - E[:1, :] + E[0, 0]


def independent_basis(mats: Sequence[np.ndarray], tol: float = 1e-9) -> list[np.ndarray]:
    """Greedy selection of linearly independent dephased exponent matrices."""
    chosen: list[np.ndarray] = []
    flat = np.zeros((0, 0))
    for M in mats:
        D = dephase_exponent(M)
        if not np.any(D):
            continue
        cand = np.vstack([flat, D.ravel()]) if flat.size else D.ravel()[None, :]
        if np.linalg.matrix_rank(cand, tol=tol) > len(chosen):
            chosen.append(D)
            flat = cand
    return chosen


@dataclass(frozen=True)
class AffineFamily:
    """H(params) = base o EXP(i sum_k params_k basis_k), dephased."""

    base: np.ndarray
    basis: tuple[np.ndarray, ...]
    name: str = ""

    def __post_init__(self):
        for B in self.basis:
            if np.any(B[0, :]) or np.any(B[:, 0]):
                raise DomainError("basis matrices must vanish on the first row and column")

    @property
    def dim(self) -> int:
        return len(self.basis)

    @property
    def N(self) -> int:
        return self.base.shape[0]

    def phase_matrix(self, params: Sequence[float]) -> np.ndarray:
        params = np.asarray(params, dtype=float)
        if params.shape != (self.dim,):
            raise DomainError(f"expected {self.dim} parameters, got {params.shape}")
        R = np.zeros(self.base.shape)
        for p, B in zip(params, self.basis):
            R += p * B
        return R

    def member(self, params: Sequence[float]) -> np.ndarray:
        return self.base * np.exp(1j * self.phase_matrix(params))

    def sample(self, rng: np.random.Generator) -> np.ndarray:
        return self.member(rng.uniform(0, 2 * np.pi, self.dim))


def family_from_exponents(base: np.ndarray, exponents: Sequence[np.ndarray], name: str = "") -> AffineFamily:
    return AffineFamily(np.asarray(base, dtype=complex), tuple(independent_basis(exponents)), name)


def haagerup_family() -> AffineFamily:
    """The two-parameter N=6 family through the Fourier matrix."""
    Ra = np.zeros((6, 6))
    Rb = np.zeros((6, 6))
    for i in (1, 3, 5):
        Ra[i, [1, 4]] = 1
        Rb[i, [2, 5]] = 1
    return AffineFamily(fourier(6), (Ra, Rb), "haagerup")


# ---------------------------------------------------------------------------
# Dita construction


@dataclass(frozen=True)
class DitaSpec:
    """H0 (N1 x N1), N1 blocks (N2 x N2) and N1-1 phase vectors of length N2.

    Block (r, s) of the result is H0[r, s] * diag(phases[s-1]) @ blocks[s],
    with no phase on s = 0.
    """

    H0: np.ndarray
    blocks: tuple[np.ndarray, ...]
    phases: tuple[np.ndarray, ...]

    @classmethod
    def trivial(cls, H0: np.ndarray, blocks: Sequence[np.ndarray]) -> "DitaSpec":
        N2 = blocks[0].shape[0]
        return cls(np.asarray(H0), tuple(blocks), tuple(np.ones(N2, dtype=complex) for _ in range(len(blocks) - 1)))

    @property
    def N1(self) -> int:
        return self.H0.shape[0]

    @property
    def N2(self) -> int:
        return self.blocks[0].shape[0]

    def validate(self) -> None:
        if len(self.blocks) != self.N1 or len(self.phases) != self.N1 - 1:
            raise DomainError(f"need {self.N1} blocks and {self.N1 - 1} phase vectors")
        for M in (self.H0, *self.blocks):
            if not is_hadamard(M, INPUT_TOL).passes:
                raise DomainError("Dita inputs must be Hadamard")
        for d in self.phases:
            d = np.asarray(d)
            if d.shape != (self.N2,) or np.max(np.abs(np.abs(d) - 1)) > INPUT_TOL:
                raise DomainError("phase vectors must be unimodular of length N2")
            if abs(d[0] - 1) > INPUT_TOL:
                raise DomainError("first phase entry must be 1")


def dita(spec: DitaSpec) -> np.ndarray:
    spec.validate()
    N1, N2 = spec.N1, spec.N2
    out = np.empty((N1 * N2, N1 * N2), dtype=complex)
    for s in range(N1):
        col = spec.blocks[s] if s == 0 else spec.phases[s - 1][:, None] * spec.blocks[s]
        for r in range(N1):
            out[r * N2:(r + 1) * N2, s * N2:(s + 1) * N2] = spec.H0[r, s] * col
    return out


def dita_two_block(H1: np.ndarray, H2: np.ndarray, D: np.ndarray) -> np.ndarray:
    """[[H1, D H2], [H1, -D H2]] / sqrt 2, Hadamard of order 2N."""
    return dita(DitaSpec(fourier(2), (H1, H2), (np.asarray(D),)))


def dita_fourier_point(N1: int, N2: int) -> tuple[DitaSpec, np.ndarray]:
    """Phases x_m^(s) = w^(ms) and the column permutation giving fourier(N1 N2).

    ``perm`` satisfies dita(spec)[:, perm] == fourier(N): new column
    n N1 + s takes old column s N2 + n.
    """
    if N1 < 2 or N2 < 2:
        raise DomainError("need N1, N2 >= 2")
    N = N1 * N2
    w = np.exp(2j * np.pi / N)
    m = np.arange(N2)
    spec = DitaSpec(fourier(N1), tuple(fourier(N2) for _ in range(N1)),
                    tuple(w ** (m * s) for s in range(1, N1)))
    perm = np.empty(N, dtype=np.intp)
    for s in range(N1):
        for n in range(N2):
            perm[n * N1 + s] = s * N2 + n
    return spec, perm


def dita_family(H0: np.ndarray, block: AffineFamily, name: str = "") -> AffineFamily:
    """One Dita step with independent copies of ``block`` and free phases.

    Block (r, s) of the base is H0[r, s] * block.base; parameters are the
    N1 copies of the block family plus (N1 - 1)(N2 - 1) diagonal phases.
    """
    N1, N2 = H0.shape[0], block.N
    N = N1 * N2
    base = np.kron(np.asarray(H0), block.base)
    exps = []
    for s in range(N1):
        for B in block.basis:
            E = np.zeros((N, N))
            E[:, s * N2:(s + 1) * N2] = np.tile(B, (N1, 1))
            exps.append(E)
    for s in range(1, N1):
        for m in range(1, N2):
            E = np.zeros((N, N))
            E[m::N2, s * N2:(s + 1) * N2] = 1
            exps.append(E)
    return family_from_exponents(base, exps, name)


def dita_chain(primes: Sequence[int]) -> AffineFamily:
    """Start from F_{primes[0]} and apply Dita steps with H0 = F_p for the rest."""
    fam = AffineFamily(fourier(primes[0]), (), f"F{primes[0]}")
    for p in primes[1:]:
        fam = dita_family(fourier(p), fam, f"{fam.name}>{p}")
    return fam


def dita_variants(p1: int, p2: int) -> dict[str, AffineFamily]:
    """The three step orders for N = p1 p2^2: self-cognate and the two others."""
    return {
        "self_cognate": dita_chain((p2, p1, p2)),
        "p2_p2_p1": dita_chain((p2, p2, p1)),
        "p1_p2_p2": dita_chain((p1, p2, p2)),
    }


# ---------------------------------------------------------------------------
# prime powers


def prime_power_family(p: int, k: int) -> AffineFamily:
    """R_ij = sum_{n=1}^{k-1} phi_{n, i mod p^n, j mod p^(k-n)} on top of F_{p^k}.

    phi_{n,i,j} vanishes for i < p^(n-1) or j = 0.
    """
    if not is_prime(p):
        raise DomainError(f"{p} is not prime")
    if k < 2:
        raise DomainError("need exponent k >= 2")
    N = p**k
    if N > 64:
        raise DomainError(f"p^k = {N} exceeds 64")
    idx = np.arange(N)
    basis = []
    for n in range(1, k):
        for a in range(p ** (n - 1), p**n):
            for b in range(1, p ** (k - n)):
                E = np.outer(idx % p**n == a, idx % p ** (k - n) == b).astype(float)
                basis.append(E)
    return AffineFamily(fourier(N), tuple(basis), f"prime_power({p},{k})")


def prime_square_member(p: int, phi: np.ndarray) -> np.ndarray:
    """Member of the N = p^2 family from the p x p array phi_1 (row 0 and column 0 ignored)."""
    phi = np.array(phi, dtype=float)
    phi[0, :] = 0
    phi[:, 0] = 0
    idx = np.arange(p * p)
    return fourier(p * p) * np.exp(1j * phi[idx % p][:, idx % p])


def prime_square_x(p: int, phi: np.ndarray) -> np.ndarray:
    """Predicted displaced-diagonal values of X for an N = p^2 member.

    Entry [c, r] is X[i, i + r p] for any row i = c mod p. For r != 0 this is
    exact; on the main diagonal (r = 0) the identity adds 1.
    """
    N = p * p
    w = np.exp(2j * np.pi / N)
    phi = np.array(phi, dtype=float)
    phi[0, :] = 0
    phi[:, 0] = 0
    k = np.arange(p)
    out = np.empty((p, p), dtype=complex)
    for c in range(p):
        for r in range(p):
            out[c, r] = -np.sum(w ** (-p * k * r) * np.exp(1j * phi[c, k])) / p
    return out


# ---------------------------------------------------------------------------
# self-cognate family for N = p1 p2^2


@dataclass(frozen=True)
class SelfCognate:
    """Explicit two-step construction with the transposition-friendly column order.

    x has shape (p1, p2, p2) indexed [s, v, m]; y has shape (p2, p1 p2)
    indexed [v, r p2 + m]. Both are full unimodular arrays; the dephased
    family fixes the trivial entries but the map below does not need that.
    """

    p1: int
    p2: int

    @property
    def N(self) -> int:
        return self.p1 * self.p2 * self.p2

    def member(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        p1, p2 = self.p1, self.p2
        x = np.asarray(x)
        y = np.asarray(y)
        if x.shape != (p1, p2, p2) or y.shape != (p2, p1 * p2):
            raise DomainError(f"expected x {(p1, p2, p2)} and y {(p2, p1 * p2)}")
        q1 = np.exp(2j * np.pi / p1)
        q2 = np.exp(2j * np.pi / p2)
        u, r, m, n, s, v = np.ix_(*(np.arange(d) for d in (p2, p1, p2, p2, p1, p2)))
        H = q1 ** ((r * s) % p1) * q2 ** ((m * n + u * v) % p2) * x[s, v, m] * y[v, r * p2 + m]
        # axes (u, r, m) -> row p1 p2 u + r p2 + m, (n, s, v) -> column p1 p2 n + s p2 + v
        return H.reshape(self.N, self.N) / np.sqrt(self.N)

    def transpose_partner(self, x: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        p1, p2 = self.p1, self.p2
        x = np.asarray(x)
        y = np.asarray(y)
        xt = np.empty_like(x)
        yt = np.empty_like(y)
        for s in range(p1):
            for v in range(p2):
                for m in range(p2):
                    xt[s, v, m] = y[m, s * p2 + v]
                    yt[v, s * p2 + m] = x[s, m, v]
        return xt, yt

    def fourier_phases(self) -> tuple[np.ndarray, np.ndarray]:
        """Phases at which member() equals fourier(N) exactly."""
        p1, p2, N = self.p1, self.p2, self.N
        s, _, m = np.ix_(np.arange(p1), np.arange(p2), np.arange(p2))
        x = np.broadcast_to(np.exp(2j * np.pi * (m * s) / (p1 * p2)), (p1, p2, p2)).copy()
        vv, k = np.ix_(np.arange(p2), np.arange(p1 * p2))
        y = np.exp(2j * np.pi * ((k * vv) % N) / N)
        return x, y

    def random_phases(self, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
        p1, p2 = self.p1, self.p2
        x = np.exp(2j * np.pi * rng.uniform(size=(p1, p2, p2)))
        y = np.exp(2j * np.pi * rng.uniform(size=(p2, p1 * p2)))
        return x, y

    def family(self) -> AffineFamily:
        """Affine family at the Fourier point, one exponent per x and y entry."""
        p1, p2, N = self.p1, self.p2, self.N
        shape = (p2, p1, p2, p2, p1, p2)
        u, r, m, n, s, v = np.ix_(*(np.arange(d) for d in shape))
        exps = []
        for idx in np.ndindex(p1, p2, p2):
            hit = (s == idx[0]) & (v == idx[1]) & (m == idx[2])
            exps.append(np.broadcast_to(hit, shape).reshape(N, N).astype(float))
        for vi, k in np.ndindex(p2, p1 * p2):
            hit = (v == vi) & (r * p2 + m == k)
            exps.append(np.broadcast_to(hit, shape).reshape(N, N).astype(float))
        return family_from_exponents(fourier(N), exps, f"self_cognate({p1},{p2})")


def self_cognate_family(p1: int, p2: int) -> SelfCognate:
    if p1 == p2 or not (is_prime(p1) and is_prime(p2)):
        raise DomainError(f"need distinct primes, got ({p1}, {p2})")
    return SelfCognate(p1, p2)
