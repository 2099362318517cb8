"""Order-by-order solution of a graded polynomial system around a known zero.

A system f_m(x) = A x + (degree >= 2 terms) = 0 is expanded as
x = x^(1) + x^(2) + ...; at order s the linear problem is A x^(s) = B^(s),
where B^(s) collects minus the order-s part of the nonlinear terms. It is
solvable iff (1 - A Ahat) B^(s) = 0, and then
x^(s) = Ahat B^(s) + (1 - Ahat A) Z with Z free.

The toy model f(X, Y) = X (X - 1)^2 - (e^Y - 1)^2 is solved exactly with
``fractions.Fraction``.
"""

from __future__ import annotations

import itertools
import math
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
import sympy

from .errors import DomainError

MAX_DEGREE = 4

Monomial = tuple[int, ...]  # sorted variable indices, e.g. (0, 0, 1) = x0^2 x1


# ---------------------------------------------------------------------------
# pseudo-inverse


def pseudo_inverse(A, exact: bool = False, rcond: float = 1e-12):
    """Moore-Penrose inverse.

    Floating input goes through numpy's SVD. With ``exact`` the entries are
    taken as rationals and the result is a nested list of Fractions.
    """
    if not exact:
        A = np.asarray(A)
        if A.size == 0:
            return np.zeros(A.shape[::-1], dtype=A.dtype)
        return np.linalg.pinv(A, rcond=rcond)
    rows = [list(r) for r in A]
    M = sympy.Matrix([[sympy.Rational(Fraction(v).numerator, Fraction(v).denominator) for v in r] for r in rows])
    P = M.pinv()
    return [[Fraction(int(sympy.fraction(v)[0]), int(sympy.fraction(v)[1])) for v in P.row(i)] for i in range(P.rows)]


def penrose_residuals(A: np.ndarray, Ahat: np.ndarray) -> tuple[float, float, float, float]:
    """Max-abs violations of the four Penrose identities."""
    AAh = A @ Ahat
    AhA = Ahat @ A
    return (
        float(np.max(np.abs(AAh @ A - A), initial=0.0)),
        float(np.max(np.abs(AhA @ Ahat - Ahat), initial=0.0)),
        float(np.max(np.abs(AAh.conj().T - AAh), initial=0.0)),
        float(np.max(np.abs(AhA.conj().T - AhA), initial=0.0)),
    )


# ---------------------------------------------------------------------------
# polynomial systems


@dataclass(frozen=True)
class PolySystem:
    """Equations as maps from sorted variable multisets to coefficients.

    The constant term is absent, so x = 0 is a solution.
    """

    num_vars: int
    equations: tuple[Mapping[Monomial, object], ...]

    def __post_init__(self):
        for eq in self.equations:
            for mono in eq:
                if len(mono) == 0:
                    raise DomainError("constant term present: x = 0 is not a solution")
                if len(mono) > MAX_DEGREE:
                    raise DomainError(f"degree {len(mono)} exceeds {MAX_DEGREE}")
                if any(not 0 <= v < self.num_vars for v in mono):
                    raise DomainError(f"monomial {mono} refers to an unknown variable")
                if tuple(sorted(mono)) != tuple(mono):
                    raise DomainError(f"monomial {mono} is not sorted")

    @classmethod
    def from_terms(cls, num_vars: int, equations: Sequence[Mapping[Monomial, object]]) -> "PolySystem":
        """Accept unsorted monomials and merge duplicates."""
        out = []
        for eq in equations:
            merged: dict[Monomial, object] = {}
            for mono, c in eq.items():
                key = tuple(sorted(mono))
                merged[key] = merged.get(key, 0) + c
            out.append({k: v for k, v in merged.items() if v != 0})
        return cls(num_vars, tuple(out))

    @property
    def num_eqs(self) -> int:
        return len(self.equations)

    @property
    def degree(self) -> int:
        return max((len(m) for eq in self.equations for m in eq), default=0)

    def linear_part(self) -> list[list]:
        A = [[0] * self.num_vars for _ in self.equations]
        for m, eq in enumerate(self.equations):
            for mono, c in eq.items():
                if len(mono) == 1:
                    A[m][mono[0]] = c
        return A

    def evaluate(self, x: Sequence) -> list:
        return [sum((c * math.prod(x[v] for v in mono) for mono, c in eq.items()), 0) for eq in self.equations]

    def nonlinear_order(self, orders: Sequence[Sequence], s: int) -> list:
        """Order-s part of the degree >= 2 terms given x^(1..s-1).

        ``orders[r - 1]`` is x^(r). Each monomial of degree d contributes a
        sum over ordered splittings of s into d positive parts.
        """
        out = []
        for eq in self.equations:
            total = 0
            for mono, c in eq.items():
                d = len(mono)
                if d < 2 or d > s:
                    continue
                for parts in _compositions(s, d):
                    total = total + c * math.prod(orders[r - 1][v] for r, v in zip(parts, mono))
            out.append(total)
        return out


def _compositions(s: int, d: int):
    for cuts in itertools.combinations(range(1, s), d - 1):
        bounds = (0, *cuts, s)
        yield tuple(bounds[i + 1] - bounds[i] for i in range(d))


# ---------------------------------------------------------------------------
# order-by-order solving


@dataclass
class PerturbOrders:
    """x^(s) = h^(s) + H^(s) per order, with the order-s consistency residual."""

    h: list[list] = field(default_factory=list)
    H: list[list] = field(default_factory=list)
    residual: list[list] = field(default_factory=list)

    @property
    def order(self) -> int:
        return len(self.h)

    def x(self, s: int) -> list:
        return [a + b for a, b in zip(self.h[s - 1], self.H[s - 1])]

    def all_x(self) -> list[list]:
        return [self.x(s) for s in range(1, self.order + 1)]

    def total(self) -> list:
        return [sum(col, 0) for col in zip(*self.all_x())] if self.h else []

    def push(self, h: Sequence, H: Sequence, residual: Sequence) -> None:
        self.h.append(list(h))
        self.H.append(list(H))
        self.residual.append(list(residual))


def _matvec(M, v):
    return [sum((a * b for a, b in zip(row, v)), 0) for row in M]


def _identity_minus(P, n):
    return [[(1 if i == j else 0) - P[i][j] for j in range(n)] for i in range(n)]


def _matmul(P, Q):
    return [[sum((P[i][k] * Q[k][j] for k in range(len(Q))), 0) for j in range(len(Q[0]))] for i in range(len(P))]


@dataclass
class OrderSolution:
    H: list
    residual: list
    solvable: bool
    free_projector: list  # 1 - Ahat A, applied by the caller to its Z


def solve_order(system: PolySystem, orders: PerturbOrders, s: int, Ahat=None,
                tol: float = 1e-10) -> OrderSolution:
    """Heterogeneous part and consistency residual at order s.

    B^(s) = -(order-s nonlinear terms), H^(s) = Ahat B^(s) and the residual
    is (1 - A Ahat) B^(s). The homogeneous part is not chosen here.
    """
    if orders.order < s - 1:
        raise DomainError(f"orders 1..{s - 1} must be populated, have {orders.order}")
    A = system.linear_part()
    exact = _is_exact(A)
    if Ahat is None:
        Ahat = pseudo_inverse(A, exact=True) if exact else pseudo_inverse(np.array(A, dtype=complex)).tolist()
    n, m = system.num_vars, system.num_eqs
    if s == 1:
        B = [0] * m
    else:
        B = [-b for b in system.nonlinear_order(orders.all_x()[: s - 1], s)]
    H = _matvec(Ahat, B)
    AAh = _matmul(A, Ahat) if m and n else [[0] * m for _ in range(m)]
    res = _matvec(_identity_minus(AAh, m), B)
    free = _identity_minus(_matmul(Ahat, A) if m and n else [[0] * n for _ in range(n)], n)
    solvable = all(abs(r) <= tol for r in res)
    return OrderSolution(H, res, solvable, free)


def _is_exact(A) -> bool:
    return all(isinstance(v, (int, Fraction)) for row in A for v in row)


# ---------------------------------------------------------------------------
# toy model

TOY_VARS = ("X", "Y")


def toy_system(at: str = "origin") -> PolySystem:
    """Degree-4 truncation of X (X - 1)^2 - (e^Y - 1)^2 at (0,0) or (1,0)."""
    F = Fraction
    y_terms = {(1, 1): F(-1), (1, 1, 1): F(-1), (1, 1, 1, 1): F(-7, 12)}
    if at == "origin":
        eq = {(0,): F(1), (0, 0): F(-2), (0, 0, 0): F(1), **y_terms}
    elif at == "shifted":
        eq = {(0, 0): F(1), (0, 0, 0): F(1), **y_terms}
    else:
        raise DomainError(f"unknown base point {at!r}")
    return PolySystem(2, (eq,))


def toy_function(X: float, Y: float, at: str = "origin") -> float:
    if at == "shifted":
        X = X + 1
    return X * (X - 1) ** 2 - (math.exp(Y) - 1) ** 2


@dataclass
class ToySeries:
    """Per-order values at t = 1; index s - 1 holds the coefficient of t^s."""

    branch: str
    X: list[Fraction]
    Y: list[Fraction]
    residuals: list[Fraction]
    U: list[tuple[Fraction, Fraction]]  # linearised consistency map per fixed order

    def to_json(self) -> dict:
        return {
            "branch": self.branch,
            "X": [str(c) for c in self.X],
            "Y": [str(c) for c in self.Y],
            "residuals": [str(r) for r in self.residuals],
            "U": [[str(a), str(b)] for a, b in self.U],
        }


TOY_ORDER = 4


def toy_series(branch: str = "origin", free: Mapping[str, Sequence] | None = None,
               order: int = TOY_ORDER) -> ToySeries:
    """Exact series for one branch of the toy model.

    At the origin the free data are the Y components (default y_(1) = 1, rest
    0) and X follows. On the shifted branches the X components are free
    (default x_(1) = 1, rest 0), y_(1) = +-x_(1) solves the quadratic
    condition and y_(s-1) is fixed by the linear order-s condition.
    """
    F = Fraction
    if branch == "origin":
        system = toy_system("origin")
        ys = [F(v) for v in (free or {}).get("y", [1])]
        ys += [F(0)] * (order - len(ys))
        orders = PerturbOrders()
        residuals = []
        for s in range(1, order + 1):
            sol = solve_order(system, orders, s)
            h = _matvec(sol.free_projector, [F(0), ys[s - 1]])
            orders.push(h, sol.H, sol.residual)
            residuals.append(sol.residual[0])
        xs = orders.all_x()
        return ToySeries(branch, [v[0] for v in xs], [v[1] for v in xs], residuals, [])
    if branch not in ("shifted_I", "shifted_II"):
        raise DomainError(f"unknown branch {branch!r}")
    system = toy_system("shifted")
    xs = [F(v) for v in (free or {}).get("x", [1])]
    xs += [F(0)] * (order - len(xs))
    sign = 1 if branch == "shifted_I" else -1
    ys: list[Fraction] = [sign * xs[0]] + [F(0)] * (order - 1)

    def residual_at(s, y_vals):
        orders = PerturbOrders()
        for r in range(1, s):
            orders.push([xs[r - 1], y_vals[r - 1]], [F(0), F(0)], [F(0)])
        return solve_order(system, orders, s).residual[0]

    residuals = [F(0), residual_at(2, ys)]
    U = []
    for s in range(3, order + 1):
        # the order-s condition is affine in (x_(s-1), y_(s-1))
        j = s - 2
        base = residual_at(s, ys[:j] + [F(0)] + ys[j + 1:])
        dy = residual_at(s, ys[:j] + [F(1)] + ys[j + 1:]) - base
        xs0 = xs[j]
        xs[j] = F(0)
        b0 = residual_at(s, ys[:j] + [F(0)] + ys[j + 1:])
        xs[j] = F(1)
        dx = residual_at(s, ys[:j] + [F(0)] + ys[j + 1:]) - b0
        xs[j] = xs0
        U.append((dx, dy))
        if dy == 0:
            raise DomainError(f"order-{s} condition does not involve y_({j + 1})")
        ys[j] = -base / dy
        residuals.append(residual_at(s, ys))
    return ToySeries(branch, xs[: order - 1], ys[: order - 1], residuals, U)


def series_value(coeffs: Sequence, t: float) -> float:
    return sum(float(c) * t ** (k + 1) for k, c in enumerate(coeffs))


def toy_closed_form(Y: float) -> float:
    """Origin branch in closed form: X = (4/3) sin^2((1/3) arcsin((3 sqrt 3 / 2)(e^Y - 1)))."""
    return 4 / 3 * math.sin(math.asin(1.5 * math.sqrt(3) * (math.exp(Y) - 1)) / 3) ** 2
