"""Order-by-order solution of the Hadamard conditions around the Fourier matrix.

At order s the matrix X^(s) solves the linear system

    diag([P^n, X^(s)] + B^(s,n)) = 0,    n = 1 .. N-1,

whose inhomogeneity is built from lower orders by the recursion

    B^(1,n) = 0,
    B^(s,n) = sum_{r<s} ([P^n, X^(r)] + B^(r,n)) X^(s-r).

The system is solvable only if, on every displaced diagonal, the diagonal of
B^(s,n) sums to zero over each string of equal homogeneous parameters. When
those sums fail to vanish for generic first-order data the expansion breaks
down, and the order at which that first happens is the breakdown order.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Callable, Iterable, Mapping, Sequence
from dataclasses import dataclass, field
from functools import lru_cache

import mpmath
import numpy as np

from .errors import DomainError, NumericalInconsistencyError, StateError
from .hcore import commutator_shift
from .numtheory import ParamKey, canonical_key, gcd, param_keys, particular_steps, split_p1_p2_squared

log = logging.getLogger(__name__)

BREAKDOWN_TOL = 1e-6
SOLVE_TOL = 1e-10
RNG_NAME = "numpy.random.PCG64 (default_rng([seed, trial]))"

Assignment = Mapping[ParamKey, complex]


# ---------------------------------------------------------------------------
# index tables


@lru_cache(maxsize=None)
def _key_index(N: int) -> np.ndarray:
    """Integer matrix mapping position (i, j) to its ParamKey's position in param_keys(N)."""
    where = {k: t for t, k in enumerate(param_keys(N))}
    out = np.empty((N, N), dtype=np.intp)
    for i in range(N):
        for j in range(N):
            out[i, j] = where[canonical_key(i, j, N)]
    out.setflags(write=False)
    return out


@lru_cache(maxsize=None)
def _particular_tables(N: int) -> np.ndarray:
    """T[n-1] @ diag(B^(s,n)) gives the particular solution on diagonal -n.

    Entry T[n-1, i, k] counts how often B^(s,n)_kk enters X^(s)_{i, i-n}.
    """
    T = np.zeros((N - 1, N, N), dtype=np.int64)
    for n in range(1, N):
        for i in range(N):
            m = particular_steps(i, (i - n) % N, N)
            for q in range(m):
                T[n - 1, i, (i + q * n) % N] += 1
    T.setflags(write=False)
    return T


@lru_cache(maxsize=None)
def _string_tables(N: int) -> tuple[tuple[int, int, np.ndarray], ...]:
    """(n, class, row indices) for every consistency condition."""
    out = []
    for n in range(1, N):
        g = gcd(n, N)
        for c in range(g):
            out.append((n, c, np.arange(c, N, g)))
    return tuple(out)


# ---------------------------------------------------------------------------
# arithmetic backends


class Arith:
    """Scalar backend: double precision or mpmath at a fixed mantissa width."""

    def __init__(self, bits: int | None = None):
        self.bits = bits
        if bits is not None:
            self.ctx = mpmath.MPContext()
            self.ctx.prec = bits
            self._mpc = np.frompyfunc(self.ctx.mpc, 1, 1)

    @property
    def name(self) -> str:
        return "double" if self.bits is None else f"big:{self.bits}"

    def array(self, values) -> np.ndarray:
        a = np.asarray(values, dtype=complex if self.bits is None else object)
        if self.bits is None:
            return a
        return self._mpc(a) if a.size else a

    def zeros(self, shape) -> np.ndarray:
        return self.array(np.zeros(shape, dtype=complex))

    def absmax(self, a: np.ndarray) -> float:
        if a.size == 0:
            return 0.0
        if self.bits is None:
            return float(np.max(np.abs(a)))
        return float(max(abs(v) for v in a.ravel()))

    def to_complex(self, a: np.ndarray) -> np.ndarray:
        if self.bits is None:
            return np.asarray(a, dtype=complex)
        return np.vectorize(complex, otypes=[complex])(a)


def parse_precision(spec: str | None) -> Arith:
    if spec in (None, "double"):
        return Arith()
    if spec.startswith("big:"):
        bits = int(spec[4:])
        if bits < 53:
            raise DomainError("big precision needs at least 53 bits")
        return Arith(bits)
    raise DomainError(f"unknown precision mode {spec!r}")


# ---------------------------------------------------------------------------
# data types


@dataclass
class ConsistencyReport:
    order: int
    residuals: list[tuple[int, int, complex]]
    max_abs: float
    scale: float
    tol: float = BREAKDOWN_TOL

    @property
    def relative(self) -> float:
        return self.max_abs / self.scale if self.scale > 0 else (0.0 if self.max_abs == 0 else math.inf)

    @property
    def broken(self) -> bool:
        return self.relative > self.tol


class BrokenConsistency(Exception):
    def __init__(self, report: ConsistencyReport):
        super().__init__(
            f"consistency fails at order {report.order}: relative residual {report.relative:.3e}"
        )
        self.report = report


@dataclass
class SeriesState:
    """Orders X^(1..order) plus the cached inhomogeneities B^(s,n).

    ``B_cache[s]`` stacks B^(s,n) for n = 1..N-1 along axis 0; ``C_cache[s]``
    holds the matching [P^n, X^(s)] + B^(s,n) used by the recursion.
    """

    N: int
    assignment: dict[ParamKey, complex]
    higher_homogeneous: dict[int, dict[ParamKey, complex]] = field(default_factory=dict)
    arith: Arith = field(default_factory=Arith)
    X_orders: list[np.ndarray] = field(default_factory=list)
    B_cache: dict[int, np.ndarray] = field(default_factory=dict)
    C_cache: dict[int, np.ndarray] = field(default_factory=dict)
    reports: dict[int, ConsistencyReport] = field(default_factory=dict)

    @classmethod
    def start(cls, N: int, assignment: Assignment, arith: Arith | None = None) -> "SeriesState":
        state = cls(N, dict(assignment), arith=arith or Arith())
        X1 = state.arith.array(homogeneous_x(N, assignment))
        state.X_orders.append(X1)
        state.B_cache[1] = state.arith.zeros((N - 1, N, N))
        state.C_cache[1] = _commutators(X1) + state.B_cache[1]
        return state

    @property
    def order(self) -> int:
        return len(self.X_orders)

    @property
    def x_scale(self) -> float:
        return max((abs(v) for v in self.assignment.values()), default=0.0)

    def X(self, s: int) -> np.ndarray:
        if not 1 <= s <= self.order:
            raise StateError(f"order {s} not computed (have 1..{self.order})")
        return self.X_orders[s - 1]

    def B(self, s: int, n: int) -> np.ndarray:
        return compute_B(self, s)[n - 1]

    def advance(self, tol: float = BREAKDOWN_TOL) -> np.ndarray:
        """Compute the next order; raises BrokenConsistency if it is not solvable."""
        s = self.order + 1
        X = particular_x(self, s, tol=tol)
        self.X_orders.append(X)
        self.C_cache[s] = _commutators(X) + self.B_cache[s]
        return X

    def truncated_x(self, upto: int | None = None) -> np.ndarray:
        upto = self.order if upto is None else upto
        total = self.X_orders[0]
        for s in range(2, upto + 1):
            total = total + self.X_orders[s - 1]
        return self.arith.to_complex(total)


def _commutators(X: np.ndarray) -> np.ndarray:
    N = X.shape[0]
    return np.stack([commutator_shift(X, n) for n in range(1, N)])


# ---------------------------------------------------------------------------
# operations


def homogeneous_x(N: int, assignment: Assignment) -> np.ndarray:
    keys = param_keys(N)
    vec = np.array([complex(assignment.get(k, 0.0)) for k in keys])
    return vec[_key_index(N)]


def assignment_vector(N: int, assignment: Assignment) -> np.ndarray:
    return np.array([complex(assignment.get(k, 0.0)) for k in param_keys(N)])


def assignment_from_vector(N: int, vec: Sequence[complex]) -> dict[ParamKey, complex]:
    keys = param_keys(N)
    if len(vec) != len(keys):
        raise DomainError(f"need {len(keys)} parameters for N={N}, got {len(vec)}")
    return {k: complex(v) for k, v in zip(keys, vec)}


def compute_B(state: SeriesState, s: int) -> np.ndarray:
    """Stack of B^(s,n), n = 1..N-1 (cached)."""
    if s in state.B_cache:
        return state.B_cache[s]
    if s - 1 > state.order:
        raise StateError(f"B^({s}) needs X up to order {s - 1}; state has {state.order}")
    B = state.arith.zeros((state.N - 1, state.N, state.N))
    for r in range(1, s):
        B = B + state.C_cache[r] @ state.X(s - r)
    state.B_cache[s] = B
    return B


def _diagonals(B: np.ndarray) -> np.ndarray:
    return np.diagonal(B, axis1=1, axis2=2)


def consistency_residuals(state: SeriesState, s: int, tol: float = BREAKDOWN_TOL) -> ConsistencyReport:
    if s in state.reports and state.reports[s].tol == tol:
        return state.reports[s]
    b = _diagonals(compute_B(state, s))
    residuals = []
    worst = 0.0
    for n, c, rows in _string_tables(state.N):
        v = b[n - 1, rows].sum()
        a = abs(v)
        worst = max(worst, float(a))
        residuals.append((n, c, complex(v)))
    report = ConsistencyReport(s, residuals, worst, state.x_scale ** s, tol)
    state.reports[s] = report
    return report


def heterogeneous_part(state: SeriesState, s: int) -> np.ndarray:
    """Particular solution with every free-parameter cell set to zero."""
    N = state.N
    b = _diagonals(compute_B(state, s))
    T = _particular_tables(N)
    H = state.arith.zeros((N, N))
    rows = np.arange(N)
    for n in range(1, N):
        vals = T[n - 1] @ b[n - 1]
        H[rows, (rows - n) % N] = vals
    return H


def equation_residual(state: SeriesState, s: int, X: np.ndarray) -> float:
    """max_n,i |diag([P^n, X] + B^(s,n))|."""
    b = _diagonals(compute_B(state, s))
    worst = 0.0
    for n in range(1, state.N):
        d = np.diagonal(commutator_shift(X, n)) + b[n - 1]
        worst = max(worst, state.arith.absmax(d))
    return worst


def particular_x(state: SeriesState, s: int, tol: float = BREAKDOWN_TOL) -> np.ndarray:
    """X^(s) = homogeneous(higher_homogeneous[s]) + heterogeneous part."""
    if s == 1:
        return state.arith.array(homogeneous_x(state.N, state.assignment))
    report = consistency_residuals(state, s, tol)
    if report.broken:
        raise BrokenConsistency(report)
    X = heterogeneous_part(state, s)
    hom = state.higher_homogeneous.get(s)
    if hom:
        X = X + state.arith.array(homogeneous_x(state.N, hom))
    scale = max(report.scale, 1e-300)
    bad = equation_residual(state, s, X)
    # the solved equation holds up to the (sub-threshold) consistency residual
    if bad > max(SOLVE_TOL * scale, 2 * report.max_abs):
        raise NumericalInconsistencyError(f"order {s}: solved system residual {bad:.3e}")
    return X


# ---------------------------------------------------------------------------
# unitarity


def impose_unitarity(state: SeriesState, s: int, free: Assignment | None = None,
                     tol: float = 1e-8) -> dict[ParamKey, complex]:
    """Fix the order-s homogeneous parameters so that (1 - X) F stays unitary.

    ``free`` supplies the unconstrained data (imaginary parts on diagonals 0
    and N/2, and x_{c,n} for 0 < n < N/2); it defaults to zero. For s >= 2 the
    result is stored as ``state.higher_homogeneous[s]``. For s = 1 it is
    returned only, since the first order is fixed when the state starts.
    """
    N = state.N
    free = free or {}
    if s == 1:
        F = np.zeros((N, N), dtype=complex)
    else:
        if state.order != s - 1:
            raise StateError(f"impose_unitarity({s}) needs exactly orders 1..{s - 1}")
        report = consistency_residuals(state, s)
        if report.broken:
            raise BrokenConsistency(report)
        Hs = heterogeneous_part(state, s)
        acc = Hs + Hs.conj().T
        acc = -acc
        for r in range(1, s):
            acc = acc + state.X(s - r) @ state.X(r).conj().T
        F = state.arith.to_complex(acc)
        worst = max(float(np.max(np.abs(np.diagonal(commutator_shift(F, n))))) for n in range(1, N))
        scale = max(state.x_scale ** s, 1e-300)
        if worst > tol * scale:
            raise NumericalInconsistencyError(f"diag[P^n, F^({s})] = {worst:.3e} does not vanish")
    out = constrain_assignment(N, F, free)
    if s >= 2:
        state.higher_homogeneous[s] = out
    return out


def constrain_assignment(N: int, F: np.ndarray, free: Assignment) -> dict[ParamKey, complex]:
    out: dict[ParamKey, complex] = {}
    half = N // 2 if N % 2 == 0 else None
    for key in param_keys(N):
        n, c = key
        v = complex(free.get(key, 0.0))
        if n == 0:
            out[key] = F[c, c].real / 2 + 1j * v.imag
        elif half is not None and n == half:
            out[key] = F[c, (c + half) % N].real / 2 + 1j * v.imag
        elif 2 * n < N:
            out[key] = v
            mirror = ParamKey(N - n, c)
            # position (c, c - n) lies on diagonal N - n in class c
            out[mirror] = F[c, (c - n) % N] - v.conjugate()
    return out


def unitary_series(N: int, free: Assignment, order: int, arith: Arith | None = None) -> SeriesState:
    """Run the expansion with unitarity imposed at every order."""
    first = impose_unitarity(SeriesState(N, {}), 1, free)
    state = SeriesState.start(N, first, arith)
    for s in range(2, order + 1):
        impose_unitarity(state, s)
        state.advance()
    return state


def free_real_dimension(N: int) -> int:
    """Real parameters left after first-order unitarity: equals D1."""
    half = N // 2 if N % 2 == 0 else None
    count = 0
    for n, c in param_keys(N):
        if n == 0 or n == half:
            count += 1
        elif 2 * n < N:
            count += 2
    return count


# ---------------------------------------------------------------------------
# constraint patterns


@dataclass(frozen=True)
class ConstraintPattern:
    """Equality classes of first-order keys; keys in one class share a value."""

    N: int
    label: str
    partition: tuple[tuple[ParamKey, ...], ...] = ()

    def conditions(self) -> int:
        return sum(len(cls) - 1 for cls in self.partition)

    def apply(self, assignment: Assignment) -> dict[ParamKey, complex]:
        out = dict(assignment)
        for cls in self.partition:
            v = out.get(cls[0], 0.0)
            for k in cls[1:]:
                out[k] = v
        return out


def _validate_partition(N: int, partition: Iterable[Iterable[ParamKey]]) -> tuple[tuple[ParamKey, ...], ...]:
    valid = set(param_keys(N))
    seen: set[ParamKey] = set()
    out = []
    for cls in partition:
        cls = tuple(ParamKey(*k) for k in cls)
        if len({k.diag for k in cls}) > 1:
            raise DomainError(f"equality class {cls} mixes diagonals")
        for k in cls:
            if k not in valid:
                raise DomainError(f"{k} is not a parameter key for N={N}")
            if k in seen:
                raise DomainError(f"{k} appears in two classes")
            seen.add(k)
        if len(cls) > 1:
            out.append(cls)
    return tuple(out)


def apply_pattern(N: int, label: str, custom: Iterable[Iterable[ParamKey]] | None = None) -> ConstraintPattern:
    if label == "none":
        return ConstraintPattern(N, "none")
    if label == "custom":
        return ConstraintPattern(N, "custom", _validate_partition(N, custom or ()))
    if label not in ("typeI", "typeII"):
        raise DomainError(f"unknown pattern {label!r}")
    split = split_p1_p2_squared(N)
    if split is None:
        raise DomainError(f"pattern {label} needs N = p1 * p2^2, got {N}")
    p1, p2 = split
    classes = []
    if label == "typeI":
        target = p2 * p2
        for n in range(1, N):
            if gcd(n, N) == target:
                for c in range(p2):
                    classes.append(tuple(ParamKey(n, c + t * p2) for t in range(p2)))
    else:
        for n in range(1, N):
            if gcd(n, N) == p1:
                classes.append(tuple(ParamKey(n, c) for c in range(p1)))
    return ConstraintPattern(N, label, tuple(classes))


def free_real_basis(N: int) -> list[dict[ParamKey, complex]]:
    """First-order unitary assignments, one per free real parameter."""
    F = np.zeros((N, N), dtype=complex)
    half = N // 2 if N % 2 == 0 else None
    out = []
    for key in param_keys(N):
        n = key.diag
        if n == 0 or n == half:
            units = (1j,)
        elif 2 * n < N:
            units = (1.0, 1j)
        else:
            continue
        for u in units:
            out.append(constrain_assignment(N, F, {key: u}))
    return out


def pattern_real_rank(pattern: ConstraintPattern) -> int:
    """Real conditions the pattern imposes on unitary first-order data."""
    N = pattern.N
    basis = free_real_basis(N)
    rows = []
    for cls in pattern.partition:
        for a, b in zip(cls, cls[1:]):
            vals = np.array([v[a] - v[b] for v in basis])
            rows += [vals.real, vals.imag]
    if not rows:
        return 0
    return int(np.linalg.matrix_rank(np.array(rows)))


def pattern_dimension(pattern: ConstraintPattern) -> int:
    """Dephased first-order dimension left by the pattern, d1 minus its real rank."""
    d1 = sum(gcd(n, pattern.N) for n in range(pattern.N)) - (2 * pattern.N - 1)
    return d1 - pattern_real_rank(pattern)


def pattern_from_json(N: int, payload: list[dict]) -> ConstraintPattern:
    """Custom pattern file: [{"diag": d, "classes": [[i1, i2, ...], ...]}, ...]."""
    classes = []
    for entry in payload:
        d = int(entry["diag"])
        for cls in entry["classes"]:
            classes.append([ParamKey(d % N, int(i)) for i in cls])
    return apply_pattern(N, "custom", classes)


# ---------------------------------------------------------------------------
# breakdown scan


def random_assignment(N: int, rng: np.random.Generator) -> dict[ParamKey, complex]:
    """Complex parameters uniform on the unit disc, dephasing not imposed."""
    keys = param_keys(N)
    r = np.sqrt(rng.uniform(size=len(keys)))
    th = rng.uniform(0, 2 * np.pi, size=len(keys))
    return {k: complex(v) for k, v in zip(keys, r * np.exp(1j * th))}


Sampler = Callable[[np.random.Generator], Mapping[ParamKey, complex]]


@dataclass
class TrialResult:
    trial: int
    first_break: int | None
    relative_residuals: list[float]  # index 0 is order 2
    linear_rank: int | None = None

    def to_json(self) -> dict:
        return {
            "trial": self.trial,
            "first_break": self.first_break,
            "relative_residuals": self.relative_residuals,
            "linear_rank": self.linear_rank,
        }


@dataclass
class ScanResult:
    N: int
    pattern: str
    max_order: int
    trials: int
    seed: int
    tol: float
    precision: str
    first_break: int | None
    per_trial: list[TrialResult]
    inconclusive: bool = False

    @property
    def per_order_max_residual(self) -> list[float | None]:
        out = []
        for s in range(2, self.max_order + 1):
            vals = [t.relative_residuals[s - 2] for t in self.per_trial if len(t.relative_residuals) > s - 2]
            out.append(max(vals) if vals else None)
        return out

    def to_json(self) -> dict:
        return {
            "n": self.N,
            "pattern": self.pattern,
            "max_order": self.max_order,
            "trials": self.trials,
            "seed": self.seed,
            "tol": self.tol,
            "precision": self.precision,
            "rng": RNG_NAME,
            "first_break": self.first_break,
            "inconclusive": self.inconclusive,
            "per_order_max_residual": self.per_order_max_residual,
            "per_trial": [t.to_json() for t in self.per_trial],
        }


class InconclusiveScan(Exception):
    def __init__(self, result: ScanResult):
        breaks = [t.first_break for t in result.per_trial]
        super().__init__(f"trials disagree on the breakdown order: {breaks}")
        self.result = result


def run_trial(N: int, assignment: Assignment, max_order: int, tol: float = BREAKDOWN_TOL,
              arith: Arith | None = None, trial: int = 0, resolve: bool = False) -> TrialResult:
    """Advance one first-order point until its consistency conditions fail.

    With ``resolve`` the point is treated as lying on a constrained branch:
    once some order k has a non-trivial consistency map, a later violation at
    order s is absorbed, where possible, by the order s - k + 1 homogeneous
    parameters (see :func:`resolve_order`).
    """
    state = SeriesState.start(N, assignment, arith)
    rel: list[float] = []
    lin: LinearisedConditions | None = None
    probed = 1
    for s in range(2, max_order + 1):
        report = consistency_residuals(state, s, tol)
        if report.broken and resolve:
            while lin is None and probed < s - 1:
                probed += 1
                lin = linearised_conditions(N, assignment, probed)
            if lin is not None:
                state, report = resolve_order(state, lin, s, tol)
        rel.append(report.relative)
        log.debug("N=%d trial=%d order=%d relative residual %.3e", N, trial, s, report.relative)
        if report.broken:
            return TrialResult(trial, s, rel, lin.rank if lin else None)
        state.advance(tol)
    return TrialResult(trial, None, rel, lin.rank if lin else None)


@dataclass
class LinearisedConditions:
    """Derivative U of the order-k consistency map at a first-order point."""

    order: int
    U: np.ndarray
    rank: int


def linearised_conditions(N: int, assignment: Assignment, k: int,
                          rtol: float = 1e-8) -> LinearisedConditions | None:
    """U = d(order-k residuals)/d(first-order keys), or None if it vanishes."""
    J = residual_jacobian(N, assignment, k)
    scale = max(abs(v) for v in assignment.values()) ** (k - 1)
    if np.max(np.abs(J)) <= BREAKDOWN_TOL * scale:
        return None
    return LinearisedConditions(k, J, numerical_rank(J, rtol))


def resolve_order(state: SeriesState, lin: LinearisedConditions, s: int,
                  tol: float = BREAKDOWN_TOL) -> tuple[SeriesState, ConsistencyReport]:
    """Absorb the order-s residual into the order s-k+1 homogeneous parameters.

    The order-s residual is affine in h^(s-k+1) with linear part U, the same
    matrix at every order. The minimum-norm solution of U h = -R is applied
    and the series recomputed; whatever part of R lies outside the range of
    U survives as the new residual.
    """
    N = state.N
    j = s - lin.order + 1
    R = np.array([v for _, _, v in consistency_residuals(state, s, tol).residuals])
    h = -np.linalg.pinv(lin.U, rcond=1e-10) @ R
    hom = {k: dict(v) for k, v in state.higher_homogeneous.items()}
    prev = hom.get(j, {})
    hom[j] = {k: prev.get(k, 0) + complex(d) for k, d in zip(param_keys(N), h)}
    fresh = SeriesState.start(N, state.assignment, state.arith)
    fresh.higher_homogeneous = hom
    for _ in range(2, s):
        fresh.advance(tol)
    return fresh, consistency_residuals(fresh, s, tol)


def breakdown_scan(N: int, max_order: int, pattern: ConstraintPattern | None = None, trials: int = 3,
                   seed: int = 0, tol: float = BREAKDOWN_TOL, arith: Arith | None = None,
                   sampler: Sampler | None = None, label: str | None = None,
                   raise_inconclusive: bool = True, resolve: bool | None = None) -> ScanResult:
    """Smallest order whose consistency residual breaks in every trial.

    Each trial draws fresh first-order parameters (``sampler`` if given, else
    unit-disc values with ``pattern`` equalities imposed). Higher homogeneous
    parts start at zero; on constrained runs (a pattern or sampler, unless
    ``resolve`` says otherwise) they are solved for once a lower order has
    fixed part of the first-order data.
    """
    if max_order < 2:
        raise DomainError("max_order must be at least 2")
    pattern = pattern or ConstraintPattern(N, "none")
    arith = arith or Arith()
    if resolve is None:
        resolve = sampler is not None or pattern.label != "none"
    results = []
    for t in range(trials):
        rng = np.random.default_rng([seed, t])
        if sampler is not None:
            a = dict(sampler(rng))
        else:
            a = pattern.apply(random_assignment(N, rng))
        results.append(run_trial(N, a, max_order, tol, arith, t, resolve))
    breaks = {r.first_break for r in results}
    out = ScanResult(N, label or pattern.label, max_order, trials, seed, tol, arith.name,
                     breaks.pop() if len(breaks) == 1 else None, results)
    if len({r.first_break for r in results}) > 1:
        out.inconclusive = True
        if raise_inconclusive:
            raise InconclusiveScan(out)
    return out


# ---------------------------------------------------------------------------
# local rank of the consistency conditions


def residual_vector(N: int, assignment: Assignment, s: int, arith: Arith | None = None) -> np.ndarray:
    """Order-s consistency residuals (requires consistency through order s-1)."""
    state = SeriesState.start(N, assignment, arith)
    for _ in range(2, s):
        state.advance()
    report = consistency_residuals(state, s)
    return np.array([v for _, _, v in report.residuals])


def residual_jacobian(N: int, assignment: Assignment, s: int, radius: float = 1e-3) -> np.ndarray:
    """Holomorphic Jacobian of the order-s residuals w.r.t. first-order keys.

    The residuals are degree-s polynomials, so the derivative along each key
    is recovered exactly (up to rounding) by a discrete Cauchy integral over
    s + 1 points on a small circle.
    """
    keys = param_keys(N)
    base = assignment_vector(N, assignment)
    K = s + 1
    roots = np.exp(2j * np.pi * np.arange(K) / K)
    cols = []
    for t in range(len(keys)):
        acc = 0
        for w in roots:
            v = base.copy()
            v[t] += radius * w
            acc = acc + residual_vector(N, assignment_from_vector(N, v), s) / w
        cols.append(acc / (K * radius))
    return np.array(cols).T


def numerical_rank(A: np.ndarray, rtol: float = 1e-8) -> int:
    sv = np.linalg.svd(A, compute_uv=False)
    if sv.size == 0 or sv[0] == 0:
        return 0
    return int(np.sum(sv > rtol * sv[0]))
