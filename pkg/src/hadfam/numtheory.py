"""Exact integer arithmetic behind the displaced-diagonal parametrisation.

Everything here is pure integer arithmetic modulo N. Positions (i, j) of an
N x N matrix are grouped by their displaced diagonal ``n = j - i mod N`` and,
within a diagonal, by the residue of the row index modulo ``gcd(n, N)``.
"""

from __future__ import annotations

import math
from functools import lru_cache
from typing import NamedTuple

from .errors import DomainError


def gcd(a: int, b: int) -> int:
    """Greatest common divisor with the convention ``gcd(0, N) = N``."""
    if a == 0 and b == 0:
        raise DomainError("gcd(0, 0) is undefined")
    return math.gcd(a, b)


def lcm(a: int, b: int) -> int:
    return math.lcm(a, b)


def mod_inverse(a: int, m: int) -> int:
    if m <= 0:
        raise DomainError(f"modulus must be positive, got {m}")
    try:
        return pow(a % m, -1, m)
    except ValueError:
        raise DomainError(f"{a} has no inverse modulo {m}") from None


def particular_steps(i: int, j: int, N: int) -> int:
    """Number of steps along the diagonal from (i, j) to a free-parameter cell.

    Returns the unique ``m`` in ``[0, N/g)``, ``g = gcd(i - j, N)``, with
    ``i + m (i - j) = i mod g`` (mod N). Free-parameter positions, those with
    ``i mod g == i``, give 0.
    """
    if not (0 <= i < N and 0 <= j < N):
        raise DomainError(f"indices ({i}, {j}) outside a {N}x{N} matrix")
    if i == j:
        raise DomainError("the main diagonal carries no constraint")
    step = (i - j) % N
    g = math.gcd(step, N)
    r = N // g
    target = ((i % g) - i) // g
    return (target * mod_inverse(step // g, r)) % r


class ParamKey(NamedTuple):
    """Canonical label of a free parameter: displaced diagonal and row class.

    Tuple ordering (diag, then row_class) is the stable parameter order.
    """

    diag: int
    row_class: int

    def __str__(self) -> str:
        return f"x_{self.row_class},{self.diag}"


def canonical_key(i: int, j: int, N: int) -> ParamKey:
    n = (j - i) % N
    return ParamKey(n, i % math.gcd(n, N))


@lru_cache(maxsize=None)
def param_keys(N: int) -> tuple[ParamKey, ...]:
    """All first-order parameter keys for dimension N, in canonical order."""
    return tuple(ParamKey(n, c) for n in range(N) for c in range(math.gcd(n, N)))


def num_params(N: int) -> int:
    return sum(math.gcd(n, N) for n in range(N))


def factorize(N: int) -> dict[int, int]:
    """Prime factorisation by trial division."""
    if N < 1:
        raise DomainError(f"cannot factorise {N}")
    out: dict[int, int] = {}
    p = 2
    while p * p <= N:
        while N % p == 0:
            out[p] = out.get(p, 0) + 1
            N //= p
        p += 1
    if N > 1:
        out[N] = out.get(N, 0) + 1
    return out


def is_prime(n: int) -> bool:
    return n >= 2 and factorize(n) == {n: 1}


def is_prime_power(n: int) -> bool:
    return n >= 2 and len(factorize(n)) == 1


def split_p1_p2_squared(N: int) -> tuple[int, int] | None:
    """Return (p1, p2) with N = p1 * p2**2 and p1 != p2, or None."""
    f = factorize(N)
    if len(f) != 2:
        return None
    (a, ka), (b, kb) = sorted(f.items())
    if (ka, kb) == (1, 2):
        return a, b
    if (ka, kb) == (2, 1):
        return b, a
    return None
