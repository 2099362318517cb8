"""The N = 12 fourth-order consistency system in reduced variables.

The equations are kept as coefficient tables, transcribed once and checked
against the expansion engine rather than re-derived.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Mapping

import numpy as np

from .expansion import apply_pattern, random_assignment, residual_vector
from .numtheory import ParamKey

N = 12

# reduced variable -> {(diag, row_class): coefficient}
REDUCED: dict[str, dict[tuple[int, int], int]] = {
    "x2": {(2, 0): 1, (2, 1): -1},
    "x10": {(10, 0): 1, (10, 1): -1},
    "x4a": {(4, 0): 1, (4, 2): -1},
    "x4b": {(4, 1): 1, (4, 3): -1},
    "x8a": {(8, 0): 1, (8, 2): -1},
    "x8b": {(8, 1): 1, (8, 3): -1},
    "x6a": {(6, 0): 1, (6, 3): -1},
    "x6b": {(6, 4): 1, (6, 1): -1},
    "x6c": {(6, 2): 1, (6, 5): -1},
    "x3a": {(3, 0): 2, (3, 1): -1, (3, 2): -1},
    "x3b": {(3, 1): 2, (3, 0): -1, (3, 2): -1},
    "x3c": {(3, 2): 2, (3, 0): -1, (3, 1): -1},
    "x9a": {(9, 0): 2, (9, 1): -1, (9, 2): -1},
    "x9b": {(9, 1): 2, (9, 0): -1, (9, 2): -1},
    "x9c": {(9, 2): 2, (9, 0): -1, (9, 1): -1},
}

# x_a * x_b * (p1+p2+p3) + x_c * (x6a p1 + x6b p2 + x6c p3)
MIXED = (("x4a", "x10", "x8a"), ("x4b", "x10", "x8b"), ("x8a", "x2", "x4a"), ("x8b", "x2", "x4b"))

# 3 x_a (x10 p4 + x2 p5) + 2 p6 (x_a (2 x_c + x6c) + x_b (x6c - x_d))
CUBIC = (
    ("x3a", "x3b", "x6a", "x6b"),
    ("x3b", "x3a", "x6b", "x6a"),
    ("x9a", "x9b", "x6a", "x6b"),
    ("x9b", "x9a", "x6b", "x6a"),
)

LABELS = ("I", "II", "1", "2", "3", "generic")


@dataclass(frozen=True)
class N12Vars:
    x2: complex
    x10: complex
    x4a: complex
    x4b: complex
    x8a: complex
    x8b: complex
    x6a: complex
    x6b: complex
    x6c: complex
    x3a: complex
    x3b: complex
    x3c: complex
    x9a: complex
    x9b: complex
    x9c: complex

    @classmethod
    def from_independent(cls, **kw) -> "N12Vars":
        """Build from the 13 independent values; x3c and x9c follow from the sum rules."""
        kw = {k: complex(v) for k, v in kw.items()}
        kw["x3c"] = -kw["x3a"] - kw["x3b"]
        kw["x9c"] = -kw["x9a"] - kw["x9b"]
        return cls(**kw)

    def as_dict(self) -> dict[str, complex]:
        return asdict(self)

    def scale(self) -> float:
        return max(abs(v) for v in self.as_dict().values())


def reduce(assignment: Mapping[ParamKey, complex]) -> N12Vars:
    vals = {}
    for name, coeffs in REDUCED.items():
        vals[name] = sum(c * complex(assignment.get(ParamKey(*k), 0.0)) for k, c in coeffs.items())
    return N12Vars(**vals)


def aux_polys(v: N12Vars) -> tuple[complex, ...]:
    p1 = v.x3a**2 + v.x9a**2
    p2 = v.x3b**2 + v.x9b**2
    p3 = v.x3c**2 + v.x9c**2
    p4 = v.x4a**2 - v.x4b**2
    p5 = v.x8a**2 - v.x8b**2
    p6 = v.x4a * v.x8a - v.x4b * v.x8b
    return p1, p2, p3, p4, p5, p6


def evaluate_system(v: N12Vars) -> np.ndarray:
    """Left-hand sides of the 13 quartic consistency conditions."""
    d = v.as_dict()
    p1, p2, p3, p4, p5, p6 = aux_polys(v)
    S = p1 + p2 + p3
    T = v.x6a * p1 + v.x6b * p2 + v.x6c * p3
    Q = v.x10 * p4 + v.x2 * p5
    out = [p1 * p6, p2 * p6, p3 * p6, S * p4, S * p5]
    out += [d[a] * d[b] * S + d[c] * T for a, b, c in MIXED]
    out += [3 * d[a] * Q + 2 * p6 * (d[a] * (2 * d[c] + v.x6c) + d[b] * (v.x6c - d[e])) for a, b, c, e in CUBIC]
    return np.array(out, dtype=complex)


def relative_system_residual(v: N12Vars) -> float:
    s = v.scale()
    if s == 0:
        return 0.0
    return float(np.max(np.abs(evaluate_system(v)))) / s**4


def classify(v: N12Vars, tol: float = 1e-8) -> str:
    def small(*xs):
        return all(abs(x) <= tol for x in xs)

    p1, p2, p3, p4, p5, p6 = aux_polys(v)
    if small(v.x4a, v.x4b, v.x8a, v.x8b):
        return "I"
    if small(v.x3a, v.x3b, v.x9a, v.x9b):
        return "II"
    if small(p4, p5, p6):
        return "1"
    if small(p1, p2, p3):
        return "2"
    if small(p1 + p2 + p3, p6, v.x6a * p1 + v.x6b * p2 + v.x6c * p3, v.x10 * p4 + v.x2 * p5):
        return "3"
    return "generic"


# ---------------------------------------------------------------------------
# points on each branch


def with_reduced(assignment: Mapping[ParamKey, complex], targets: Mapping[str, complex]) -> dict[ParamKey, complex]:
    """Smallest change of ``assignment`` giving the requested reduced values."""
    out = dict(assignment)
    by_diag: dict[int, list[str]] = {}
    for name in targets:
        diag = next(iter(REDUCED[name]))[0]
        by_diag.setdefault(diag, []).append(name)
    for diag, names in by_diag.items():
        keys = sorted({k for nm in names for k in REDUCED[nm]})
        A = np.array([[REDUCED[nm].get(k, 0) for k in keys] for nm in names], dtype=complex)
        x = np.array([complex(out.get(ParamKey(*k), 0.0)) for k in keys])
        want = np.array([complex(targets[nm]) for nm in names])
        x = x + np.linalg.lstsq(A, want - A @ x, rcond=None)[0]
        for k, val in zip(keys, x):
            out[ParamKey(*k)] = complex(val)
    return out


def _independent(v: dict[str, complex]) -> dict[str, complex]:
    return {k: val for k, val in v.items() if k not in ("x3c", "x9c")}


def _cplx(rng: np.random.Generator) -> complex:
    r, th = np.sqrt(rng.uniform()), rng.uniform(0, 2 * np.pi)
    return complex(r * np.exp(1j * th))


def _random_vars(rng: np.random.Generator) -> dict[str, complex]:
    names = [k for k in REDUCED if k not in ("x3c", "x9c")]
    return {k: _cplx(rng) for k in names}


def branch_point(label: str, rng: np.random.Generator) -> N12Vars:
    """A random point satisfying the whole system on the given branch."""
    v = _random_vars(rng)
    if label == "generic":
        pass
    elif label == "I":
        v.update(x4a=0, x4b=0, x8a=0, x8b=0)
    elif label == "II":
        v.update(x3a=0, x3b=0, x9a=0, x9b=0)
    elif label == "1":
        a, b = v["x4a"], v["x8a"]
        v.update(x4b=a, x8b=b)
        w = N12Vars.from_independent(**v)
        p1, p2, p3, *_ = aux_polys(w)
        S = p1 + p2 + p3
        T = -a * v["x10"] * S / b
        v["x6c"] = (T - v["x6a"] * p1 - v["x6b"] * p2) / p3
        v["x2"] = -a * T / (b * S)
    elif label == "near1":
        # p4 = p5 = p6 = 0 but the remaining type-1 conditions left open
        v.update(x4b=v["x4a"], x8b=v["x8a"])
    elif label == "near3":
        # only p1 + p2 + p3 = 0
        x3 = np.array([v["x3a"], v["x3b"], -v["x3a"] - v["x3b"]])
        d9 = np.array([v["x9a"], v["x9b"], -v["x9a"] - v["x9b"]])
        t = np.sqrt(-np.sum(x3**2) / np.sum(d9**2))
        v["x9a"], v["x9b"] = t * d9[0], t * d9[1]
    elif label == "2":
        v.update(x3a=1j * v["x9a"], x3b=1j * v["x9b"])
        w = N12Vars.from_independent(**v)
        *_, p4, p5, p6 = aux_polys(w)
        Q = v["x10"] * p4 + v["x2"] * p5
        x3a, x3b, x6c = v["x3a"], v["x3b"], v["x6c"]
        # two linear equations in (x6a, x6b)
        A = np.array([[4 * p6 * x3a, -2 * p6 * x3b], [-2 * p6 * x3a, 4 * p6 * x3b]])
        rhs = -np.array([3 * x3a * Q + 2 * p6 * x6c * (x3a + x3b), 3 * x3b * Q + 2 * p6 * x6c * (x3b + x3a)])
        v["x6a"], v["x6b"] = np.linalg.solve(A, rhs)
    elif label == "3":
        x3 = np.array([v["x3a"], v["x3b"], -v["x3a"] - v["x3b"]])
        d9 = np.array([v["x9a"], v["x9b"], -v["x9a"] - v["x9b"]])
        t = np.sqrt(-np.sum(x3**2) / np.sum(d9**2))
        v["x9a"], v["x9b"] = t * d9[0], t * d9[1]
        w = N12Vars.from_independent(**v)
        p1, p2, p3, *_ = aux_polys(w)
        v["x6c"] = -(v["x6a"] * p1 + v["x6b"] * p2) / p3
        v["x8a"] = v["x4b"] * v["x8b"] / v["x4a"]
        w = N12Vars.from_independent(**v)
        *_, p4, p5, _ = aux_polys(w)
        v["x10"] = -v["x2"] * p5 / p4
    else:
        raise ValueError(f"unknown branch {label!r}")
    return N12Vars.from_independent(**_independent(v))


def branch_assignment(label: str, rng: np.random.Generator) -> dict[ParamKey, complex]:
    """Random unit-disc first-order data moved onto the given branch."""
    base = random_assignment(N, rng)
    if label in ("I", "II"):
        return apply_pattern(N, "typeI" if label == "I" else "typeII").apply(base)
    v = branch_point(label, rng)
    return with_reduced(base, _independent(v.as_dict()))


def branch_sampler(label: str):
    return lambda rng: branch_assignment(label, rng)


# ---------------------------------------------------------------------------
# cross-validation against the engine


@dataclass(frozen=True)
class CrossCheck:
    label: str
    engine_relative: float
    system_relative: float
    engine_zero: bool
    system_zero: bool

    @property
    def agree(self) -> bool:
        return self.engine_zero == self.system_zero


def cross_check(assignment: Mapping[ParamKey, complex], label: str = "", tol: float = 1e-8) -> CrossCheck:
    r = residual_vector(N, assignment, 4)
    scale = max(abs(v) for v in assignment.values()) ** 4
    eng = float(np.max(np.abs(r))) / scale
    sysr = relative_system_residual(reduce(assignment))
    return CrossCheck(label, eng, sysr, eng <= tol, sysr <= tol)


SELFTEST_LABELS = ("generic", "I", "II", "1", "2", "3", "near1", "near3")


def selftest(samples: int = 100, seed: int = 0, tol: float = 1e-8) -> list[CrossCheck]:
    """Engine vs printed system on branch points and near misses, cycling labels."""
    labels = SELFTEST_LABELS
    out = []
    for t in range(samples):
        rng = np.random.default_rng([seed, t])
        label = labels[t % len(labels)]
        out.append(cross_check(branch_assignment(label, rng), label, tol))
    return out
