"""Command-line front end.

Every subcommand prints a JSON report (or an aligned table with
``--format text``) that embeds the fully resolved configuration. Progress
goes to stderr.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__, defect, families, genpert, n12
from .errors import DomainError
from .expansion import (
    BREAKDOWN_TOL,
    RNG_NAME,
    InconclusiveScan,
    SeriesState,
    apply_pattern,
    breakdown_scan,
    consistency_residuals,
    parse_precision,
    pattern_from_json,
    random_assignment,
    unitary_series,
)
from .hcore import fourier, h_of_x, is_hadamard, save_matrix, unitarity_residual
from .numtheory import ParamKey, param_keys

log = logging.getLogger("hadfam")

EXIT_OK, EXIT_DOMAIN, EXIT_INCONCLUSIVE, EXIT_USAGE = 0, 1, 2, 64


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: error: {message}\n{self.format_usage()}")


@dataclass
class RunConfig:
    subcommand: str
    options: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {"subcommand": self.subcommand, **self.options}


# ---------------------------------------------------------------------------
# helpers


def parse_range(text: str) -> list[int]:
    """'a..b' (inclusive) or a comma list."""
    try:
        if ".." in text:
            a, b = text.split("..")
            lo, hi = int(a), int(b)
            if hi < lo:
                raise ValueError
            return list(range(lo, hi + 1))
        return [int(v) for v in text.split(",")]
    except ValueError:
        raise DomainError(f"bad range {text!r}; use a..b or a,b,c") from None


def _dims(args) -> list[int]:
    if getattr(args, "range", None):
        return parse_range(args.range)
    if getattr(args, "n", None) is not None:
        return [args.n]
    raise DomainError("give --n or --range")


def _positive(x: str) -> float:
    v = float(x)
    if not v > 0:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def _seed(x: str) -> int:
    v = int(x)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must fit in 64 bits")
    return v


def _pattern(N: int, spec: str):
    if spec.startswith("custom:"):
        payload = json.loads(Path(spec[len("custom:"):]).read_text())
        return pattern_from_json(N, payload)
    return apply_pattern(N, spec)


def _table(rows: list[dict], columns: list[str]) -> str:
    cells = [[_fmt(r.get(c)) for c in columns] for r in rows]
    widths = [max(len(c), *(len(row[i]) for row in cells)) if cells else len(c) for i, c in enumerate(columns)]
    lines = ["  ".join(c.rjust(w) for c, w in zip(columns, widths))]
    lines += ["  ".join(v.rjust(w) for v, w in zip(row, widths)) for row in cells]
    return "\n".join(lines)


def _fmt(v) -> str:
    if v is None:
        return "-"
    if isinstance(v, float):
        return f"{v:.3e}"
    return str(v)


def _emit(args, report: dict, text: str) -> None:
    payload = json.dumps(report, indent=2, sort_keys=False)
    if args.out:
        Path(args.out).write_text(payload + "\n")
    if args.format == "text":
        print(text)
    elif not args.out:
        print(payload)


def _key_json(k: ParamKey) -> str:
    return f"{k.diag}:{k.row_class}"


# ---------------------------------------------------------------------------
# subcommands


def cmd_defect(args) -> int:
    rows = []
    for N in _dims(args):
        s = defect.summary(N)
        row = asdict(s)
        if args.numeric:
            row["numeric"] = defect.numeric_defect(fourier(N), args.rank_tol).defect
        rows.append(row)
    if args.csv:
        with open(args.csv, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["N", "D1", "d1", "dA", "d_conj"])
            for r in rows:
                w.writerow([r["N"], r["D1"], r["d1"], r["dA"], "" if r["d_conj"] is None else r["d_conj"]])
    cols = ["N", "D1", "d1", "dA", "d_conj"] + (["numeric"] if args.numeric else [])
    _emit(args, {"config": args.config.to_json(), "rows": rows}, _table(rows, cols))
    return EXIT_OK


def cmd_scan(args) -> int:
    arith = parse_precision(args.precision)
    reports = []
    status = EXIT_OK
    for N in _dims(args):
        sampler = None
        label = None
        if args.branch:
            if N != 12:
                raise DomainError("--branch is only defined for N = 12")
            sampler = n12.branch_sampler(args.branch)
            label = f"branch:{args.branch}"
        log.info("scan N=%d up to order %d (%d trials)", N, args.max_order, args.trials)
        result = breakdown_scan(N, args.max_order, None if sampler else _pattern(N, args.pattern),
                                args.trials, args.seed, args.tol, arith, sampler=sampler, label=label,
                                raise_inconclusive=False)
        if result.inconclusive:
            status = EXIT_INCONCLUSIVE
        rep = result.to_json()
        rep["config"] = args.config.to_json()
        reports.append(rep)
    rows = [{"N": r["n"], "pattern": r["pattern"], "first_break": r["first_break"],
             "inconclusive": r["inconclusive"]} for r in reports]
    _emit(args, reports[0] if len(reports) == 1 else {"config": args.config.to_json(), "scans": reports},
          _table(rows, ["N", "pattern", "first_break", "inconclusive"]))
    if status == EXIT_INCONCLUSIVE:
        log.warning("trials disagree on the breakdown order")
    return status


def cmd_expand(args) -> int:
    N = args.n
    arith = parse_precision(args.precision)
    rng = np.random.default_rng([args.seed, 0])
    a = {k: args.scale * v for k, v in random_assignment(N, rng).items()}
    rows = []
    if args.unitary:
        state = unitary_series(N, a, args.order, arith)
        for s in range(2, args.order + 1):
            rows.append({"order": s, "relative_residual": state.reports[s].relative if s in state.reports else None})
    else:
        state = SeriesState.start(N, a, arith)
        for s in range(2, args.order + 1):
            rep = consistency_residuals(state, s, args.tol)
            rows.append({"order": s, "relative_residual": rep.relative})
            if rep.broken:
                log.info("order %d: consistency fails", s)
                break
            state.advance(args.tol)
    M = h_of_x(state.truncated_x())
    report = {
        "config": args.config.to_json(),
        "rng": RNG_NAME,
        "n": N,
        "orders_computed": state.order,
        "per_order": rows,
        "unitarity_residual": unitarity_residual(M),
        "first_order": {_key_json(k): [v.real, v.imag] for k, v in state.assignment.items()},
    }
    if args.export:
        save_matrix(args.export, M)
    _emit(args, report, _table(rows, ["order", "relative_residual"])
          + f"\nunitarity residual {report['unitarity_residual']:.3e}")
    return EXIT_OK


def _load_n12_vars(path: str) -> n12.N12Vars:
    data = json.loads(Path(path).read_text())
    vals = {}
    for k, v in data.items():
        vals[k] = complex(*v) if isinstance(v, list) else complex(v)
    if "x3c" in vals and "x9c" in vals:
        return n12.N12Vars(**vals)
    return n12.N12Vars.from_independent(**vals)


def cmd_n12(args) -> int:
    if args.selftest:
        checks = n12.selftest(args.samples, args.seed, args.tol)
        rows = [asdict(c) | {"agree": c.agree} for c in checks]
        bad = sum(not c.agree for c in checks)
        report = {"config": args.config.to_json(), "samples": len(checks), "disagreements": bad, "checks": rows}
        _emit(args, report, _table(rows, ["label", "engine_relative", "system_relative", "agree"])
              + f"\n{bad} disagreement(s)")
        return EXIT_OK if bad == 0 else EXIT_DOMAIN
    if not args.vars:
        raise DomainError("give --vars FILE or --selftest")
    v = _load_n12_vars(args.vars)
    vals = n12.evaluate_system(v)
    report = {
        "config": args.config.to_json(),
        "classification": n12.classify(v, args.tol),
        "relative_residual": n12.relative_system_residual(v),
        "equations": [[z.real, z.imag] for z in vals],
    }
    rows = [{"eq": i + 1, "abs": float(abs(z))} for i, z in enumerate(vals)]
    _emit(args, report, _table(rows, ["eq", "abs"]) + f"\ntype {report['classification']}")
    return EXIT_OK


def cmd_families(args) -> int:
    rng = np.random.default_rng([args.seed, 0])
    kind = args.kind
    out: dict = {"config": args.config.to_json(), "kind": kind}
    samples: list[np.ndarray] = []
    if kind == "haagerup":
        fam = families.haagerup_family()
    elif kind == "prime-power":
        fam = families.prime_power_family(args.p, args.k)
        out["d1"] = defect.linear_defect(args.p**args.k)[1]
    elif kind in ("self-cognate", "variant-a", "variant-b"):
        if kind == "self-cognate":
            sc = families.self_cognate_family(args.p1, args.p2)
            fam = sc.family()
            closure = []
            for _ in range(args.samples):
                x, y = sc.random_phases(rng)
                H = sc.member(x, y)
                closure.append(float(np.max(np.abs(H.T - sc.member(*sc.transpose_partner(x, y))))))
            out["transpose_closure_max"] = max(closure, default=0.0)
        else:
            fam = families.dita_variants(args.p1, args.p2)["p2_p2_p1" if kind == "variant-a" else "p1_p2_p2"]
        out["dA"] = defect.affine_max_dim(args.p1 * args.p2**2)
    elif kind == "dita12":
        fam = families.dita_family(fourier(2), families.haagerup_family(), "dita12")
    elif kind == "fourier-point":
        spec, perm = families.dita_fourier_point(args.n1, args.n2)
        H = families.dita(spec)[:, perm]
        out["perm"] = perm.tolist()
        out["max_error"] = float(np.max(np.abs(H - fourier(args.n1 * args.n2))))
        if args.export:
            save_matrix(args.export, H)
        _emit(args, out, f"fourier point ({args.n1},{args.n2}) max error {out['max_error']:.3e}")
        return EXIT_OK
    else:  # pragma: no cover - argparse restricts choices
        raise DomainError(kind)
    rows = []
    for t in range(args.samples):
        H = fam.sample(rng)
        samples.append(H)
        rep = is_hadamard(H)
        row = {"sample": t, "unitarity": rep.unitarity_residual, "modulus": rep.modulus_residual,
               "hadamard": rep.passes}
        if args.numeric:
            row["numeric_defect"] = defect.numeric_defect(H).defect
        rows.append(row)
    out.update(N=fam.N, dim=fam.dim, samples=rows, all_hadamard=all(r["hadamard"] for r in rows))
    if args.export and samples:
        save_matrix(args.export, samples[0])
    cols = ["sample", "unitarity", "modulus", "hadamard"] + (["numeric_defect"] if args.numeric else [])
    _emit(args, out, f"{fam.name}: N={fam.N} dim={fam.dim}\n" + _table(rows, cols))
    return EXIT_OK


def cmd_toy(args) -> int:
    branches = ("origin", "shifted_I", "shifted_II") if args.branch == "all" else (args.branch,)
    series = [genpert.toy_series(b) for b in branches]
    report = {"config": args.config.to_json(), "series": [s.to_json() for s in series]}
    lines = []
    for s in series:
        if s.branch == "origin":
            lines.append(f"{s.branch}: Y = t, X = {_poly(s.X, 't')}")
        else:
            lines.append(f"{s.branch}: Y = {_poly(s.Y, 'X')}   (X shifted by 1)")
        coeffs = s.X if s.branch == "origin" else s.Y
        lines.append("  decimals: " + ", ".join(f"{float(c):.10g}" for c in coeffs))
    _emit(args, report, "\n".join(lines))
    return EXIT_OK


def _poly(coeffs, var: str) -> str:
    out = ""
    for k, c in enumerate(coeffs, start=1):
        c = Fraction(c)
        if c == 0:
            continue
        mono = var if k == 1 else f"{var}^{k}"
        mag = abs(c)
        term = mono if mag == 1 else f"{mag} {mono}"
        if not out:
            out = f"-{term}" if c < 0 else term
        else:
            out += f" - {term}" if c < 0 else f" + {term}"
    return out or "0"


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--out", help="write the JSON report to this file")
    common.add_argument("--format", choices=("json", "text"), default="json")
    common.add_argument("-v", "--verbose", action="store_true")

    p = _Parser(prog="hadfam", description="Families of complex Hadamard matrices around the Fourier matrix.")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="subcommand", required=True, parser_class=_Parser)

    d = sub.add_parser("defect", parents=[common], help="linear defect table")
    d.add_argument("--n", type=int)
    d.add_argument("--range")
    d.add_argument("--csv")
    d.add_argument("--numeric", action="store_true", help="also compute the numeric defect of F_N")
    d.add_argument("--rank-tol", type=_positive, default=defect.DEFAULT_RANK_TOL)
    d.set_defaults(func=cmd_defect)

    s = sub.add_parser("scan", parents=[common], help="breakdown-order scan")
    s.add_argument("--n", type=int)
    s.add_argument("--range")
    s.add_argument("--max-order", type=int, default=8)
    s.add_argument("--trials", type=int, default=3)
    s.add_argument("--seed", type=_seed, required=True)
    s.add_argument("--tol", type=_positive, default=BREAKDOWN_TOL)
    s.add_argument("--pattern", default="none", help="none, typeI, typeII or custom:<file>")
    s.add_argument("--branch", choices=("I", "II", "1", "2", "3", "generic"), help="N=12 branch sampler")
    s.add_argument("--precision", default="double", help="double or big:<bits>")
    s.set_defaults(func=cmd_scan)

    e = sub.add_parser("expand", parents=[common], help="expand one random point")
    e.add_argument("--n", type=int, required=True)
    e.add_argument("--order", type=int, default=4)
    e.add_argument("--seed", type=_seed, required=True)
    e.add_argument("--scale", type=_positive, default=0.01)
    e.add_argument("--tol", type=_positive, default=BREAKDOWN_TOL)
    e.add_argument("--unitary", action="store_true", help="impose unitarity at every order")
    e.add_argument("--precision", default="double")
    e.add_argument("--export", help="write the truncated matrix (hcore JSON)")
    e.set_defaults(func=cmd_expand)

    q = sub.add_parser("n12", parents=[common], help="N=12 quartic system")
    q.add_argument("--vars", help="JSON file of reduced variables")
    q.add_argument("--selftest", action="store_true")
    q.add_argument("--samples", type=int, default=100)
    q.add_argument("--seed", type=_seed, default=0)
    q.add_argument("--tol", type=_positive, default=1e-8)
    q.set_defaults(func=cmd_n12)

    f = sub.add_parser("families", parents=[common], help="affine family constructions")
    f.add_argument("--kind", required=True,
                   choices=("haagerup", "dita12", "prime-power", "self-cognate", "variant-a", "variant-b",
                            "fourier-point"))
    f.add_argument("--p", type=int, default=2)
    f.add_argument("--k", type=int, default=2)
    f.add_argument("--p1", type=int, default=3)
    f.add_argument("--p2", type=int, default=2)
    f.add_argument("--n1", type=int, default=2)
    f.add_argument("--n2", type=int, default=3)
    f.add_argument("--samples", type=int, default=10)
    f.add_argument("--seed", type=_seed, required=True)
    f.add_argument("--numeric", action="store_true", help="numeric defect of each sample")
    f.add_argument("--export", help="write the first sample (hcore JSON)")
    f.set_defaults(func=cmd_families)

    t = sub.add_parser("toy", parents=[common], help="exact toy-model series")
    t.add_argument("--branch", choices=("origin", "shifted_I", "shifted_II", "all"), default="all")
    t.set_defaults(func=cmd_toy)
    return p


def _resolved(args) -> RunConfig:
    skip = {"func", "subcommand", "config", "verbose", "format", "out"}
    return RunConfig(args.subcommand, {k: v for k, v in sorted(vars(args).items()) if k not in skip})


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        sys.stderr.write(str(exc))
        return EXIT_USAGE
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                        format="%(levelname)s %(message)s", stream=sys.stderr)
    args.config = _resolved(args)
    try:
        return args.func(args)
    except InconclusiveScan as exc:
        log.error("%s", exc)
        return EXIT_INCONCLUSIVE
    except (DomainError, FileNotFoundError, json.JSONDecodeError) as exc:
        log.error("%s", exc)
        return EXIT_DOMAIN


if __name__ == "__main__":
    raise SystemExit(main())
