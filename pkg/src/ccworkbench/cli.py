"""Command-line front end.

Subcommands: ``solve``, ``verify``, ``sweep``, ``propcheck`` and ``embed``.
Every subcommand prints machine-readable output; diagnostics go to stderr.

Exit codes: 0 success, 1 invalid input, 2 no convergence, 3 only spurious
roots found, 4 property violation, 5 configuration rejected by ``verify``.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io as _io
import itertools
import json
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from . import analysis, lemmas
from .dziobek import Tolerances, as_exponent, find_roots, parse_pattern, solution_from_positions
from .errors import CCError, NotRealizable
from .geometry import MassVector, embed
from .io import dumps, positions_dict, read_distances, read_positions

EXIT_OK, EXIT_INPUT, EXIT_NOCONV, EXIT_SPURIOUS, EXIT_PROPERTY, EXIT_REJECTED = 0, 1, 2, 3, 4, 5


class InputError(ValueError):
    pass


def _parse_floats(text: str, what: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise InputError(f"{what} must be a comma-separated list of numbers: {text!r}") from None


def _masses(text: str) -> MassVector:
    values = _parse_floats(text, "masses")
    if any(v <= 0 for v in values):
        raise InputError("masses must be positive")
    if len(values) < 3:
        raise InputError("need at least 3 masses")
    return MassVector(values)


def _exponent(value: float, allow_positive: bool = False):
    if value == 0:
        raise InputError("exponent a must be nonzero")
    if value > 0 and not allow_positive:
        raise InputError("the solver requires a < 0")
    return as_exponent(value)


def _pattern(text: str | None, n: int) -> str:
    if text is None:
        return "--" + "+" * (n - 2)
    try:
        sigma = parse_pattern(text)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    if sigma.size != n:
        raise InputError(f"pattern has {sigma.size} signs for {n} masses")
    if np.all(sigma > 0) or np.all(sigma < 0):
        raise InputError("pattern needs both signs")
    return text


def _tolerances(args) -> Tolerances:
    return Tolerances(
        t_spread=args.tol_t,
        dziobek_fit=args.tol_fit,
        cayley_menger=args.tol_cm,
        realizability=args.tol_real,
        direct=args.tol_direct,
    )


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
        if not text.endswith("\n"):
            sys.stdout.write("\n")


# ---------------------------------------------------------------------------
# solve


def run_solve(args) -> int:
    masses = _masses(args.masses)
    e = _exponent(args.a)
    pattern = _pattern(args.pattern, masses.n)
    if masses.n < 4:
        raise InputError("the barycentric solver needs n >= 4 bodies")
    search = find_roots(masses, e, pattern, seed=args.seed, starts=args.starts,
                        tolerances=_tolerances(args))
    if search.accepted:
        sol = search.accepted[0]
        payload = sol.to_dict()
        payload["analysis"] = analysis.analysis_report(sol)
        payload["flags"] = {
            "delta12_equal": bool(abs(sol.deltas[0] - sol.deltas[1])
                                  < 1e-8 * np.max(np.abs(sol.deltas))),
            "convexity": str(analysis.convexity_class(sol.deltas)),
        }
        payload["alternatives"] = [s.to_dict() for s in search.accepted[1:]]
        payload["spurious_rejections"] = len(search.rejected)
        code = EXIT_OK
    else:
        payload = {
            "masses": [float(x) for x in masses.masses],
            "a": e.a,
            "accepted": False,
            "best_residual": search.best_residual,
            "spurious_rejections": len(search.rejected),
            "rejected": [
                {"deltas": list(map(float, d)), "reason": why, "residuals": res}
                for d, why, res in search.rejected
            ],
        }
        if search.rejected:
            payload["error"] = "SpuriousRoot"
            code = EXIT_SPURIOUS
        else:
            payload["error"] = "NoConvergence"
            code = EXIT_NOCONV
        print(f"solve: {payload['error']} (best t-residual {search.best_residual:.3e})",
              file=sys.stderr)
    _emit(dumps(payload), args.out)
    return code


# ---------------------------------------------------------------------------
# verify


def run_verify(args) -> int:
    config, masses = read_positions(args.input)
    if args.masses:
        masses = _masses(args.masses)
    if masses is None:
        raise InputError("masses must be given in the positions file or with --masses")
    e = _exponent(args.a, allow_positive=True)
    if config.dim != config.n - 2:
        raise InputError(f"verify needs {config.n} points in dimension {config.n - 2}")
    sol = solution_from_positions(config, masses, e, _tolerances(args))
    payload = {
        "accepted": sol.accepted,
        "residuals": sol.residuals,
        "lambda_over_M": sol.lambda_over_M,
        "mu": sol.mu,
        "deltas": sol.deltas,
        "convexity": str(analysis.convexity_class(sol.deltas)),
    }
    if sol.accepted and sol.n in (4, 5):
        payload["analysis"] = analysis.analysis_report(sol)
    _emit(dumps(payload), args.out)
    return EXIT_OK if sol.accepted else EXIT_REJECTED


# ---------------------------------------------------------------------------
# embed


def run_embed(args) -> int:
    s, dim = read_distances(args.input)
    dim = args.dim if args.dim is not None else dim
    if dim is None:
        raise InputError("target dimension missing (--dim or \"dim\" in the file)")
    try:
        config = embed(s, dim)
    except NotRealizable as exc:
        raise InputError(str(exc)) from None
    _emit(dumps(positions_dict(config)), args.out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# sweep


@dataclass
class SweepSpec:
    mass_grid: list
    exponents: list
    sign_pattern: str
    tolerances: dict = field(default_factory=dict)
    seed: int = 0
    starts: int = 16
    parallelism: int = 1

    def __post_init__(self):
        if not self.mass_grid:
            raise InputError("mass grid is empty")
        n = len(self.mass_grid[0])
        for row in self.mass_grid:
            if len(row) != n:
                raise InputError("all grid points need the same number of masses")
            if any(v <= 0 for v in row):
                raise InputError("masses must be positive")
        if not self.exponents or any(a == 0 for a in self.exponents):
            raise InputError("exponents must be a nonempty list of nonzero values")
        if any(a > 0 for a in self.exponents):
            raise InputError("the solver requires a < 0")

    def digest(self) -> str:
        blob = json.dumps(asdict(self), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()


def _axis(token: str) -> list[float]:
    token = token.strip()
    if ":" in token:
        parts = token.split(":")
        if len(parts) != 3:
            raise InputError(f"range must be lo:hi:step, got {token!r}")
        lo, hi, step = (float(p) for p in parts)
        if step <= 0 or hi < lo:
            raise InputError(f"bad range {token!r}")
        count = int(np.floor((hi - lo) / step + 1e-9)) + 1
        return [lo + k * step for k in range(count)]
    return _parse_floats(token, "grid axis")


def parse_grid(text: str) -> list[list[float]]:
    """'1;1;0.5:2:0.375;0.5,1,2' -> cartesian product of the per-mass axes."""
    if not text.strip():
        return []
    axes = [_axis(tok) for tok in text.split(";")]
    if any(not ax for ax in axes):
        return []
    return [list(p) for p in itertools.product(*axes)]


CSV_RESIDUALS = ("t_spread", "dziobek_fit", "cayley_menger", "realizability", "direct")


def _g(x) -> str:
    return "" if x is None else format(float(x), ".17g")


def _sweep_point(job):
    idx, masses, a, pattern, tol, seed, starts = job
    n = len(masses)
    row = {"index": idx, "a": a, "masses": masses}
    try:
        search = find_roots(masses, a, pattern, seed=seed, starts=starts, tolerances=Tolerances(**tol))
    except CCError as exc:
        row.update(status=f"error:{type(exc).__name__}", accepted=0, rejected=0)
        return row
    row["accepted"] = len(search.accepted)
    row["rejected"] = len(search.rejected)
    if not search.accepted:
        row["status"] = "spurious" if search.rejected else "no-convergence"
        return row
    sol = search.accepted[0]
    row["status"] = "accepted"
    row["deltas"] = list(map(float, sol.deltas))
    sym = analysis.symmetry_report(sol)
    row["asym12"] = sym[0].distance_asymmetry
    row["symmetric12"] = sym[0].symmetric
    row["symmetric34"] = sym[1].symmetric if n == 4 else None
    order = analysis.ordering_report(sol)
    row["mass_order"] = order.mass_order
    row["ordering_consistent"] = order.consistent
    row["residuals"] = {k: sol.residuals[k] for k in CSV_RESIDUALS}
    row["routh"] = analysis.routh_residual(sol) if n == 4 else None
    row["product"] = analysis.product_relation_residual(sol) if n == 4 else None
    return row


def sweep(spec: SweepSpec) -> tuple[str, dict, str]:
    """Run a sweep; returns (csv text, summary dict, plot-data csv text)."""
    t0 = time.perf_counter()
    jobs = [
        (k, list(map(float, masses)), float(a), spec.sign_pattern, spec.tolerances,
         spec.seed + k, spec.starts)
        for k, (masses, a) in enumerate(itertools.product(spec.mass_grid, spec.exponents))
    ]
    if spec.parallelism > 1:
        with ProcessPoolExecutor(max_workers=spec.parallelism) as pool:
            rows = list(pool.map(_sweep_point, jobs))
    else:
        rows = [_sweep_point(j) for j in jobs]

    n = len(spec.mass_grid[0])
    tol = Tolerances(**spec.tolerances)
    header = (["index"] + [f"m{i + 1}" for i in range(n)] + ["a", "status", "accepted", "rejected"]
              + [f"delta{i + 1}" for i in range(n)]
              + ["symmetric12", "symmetric34", "asym12", "mass_order", "ordering_consistent"]
              + list(CSV_RESIDUALS) + ["routh", "product"])
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    plot = _io.StringIO()
    pw = csv.writer(plot, lineterminator="\n")
    pw.writerow(["x", "y"])
    counts = {"accepted": 0, "no_convergence": 0, "spurious": 0, "errors": 0}
    violations = {"symmetry": 0, "ordering": 0, "residual": 0}
    for row in rows:
        m = row["masses"]
        ok = row["status"] == "accepted"
        deltas = row.get("deltas", [None] * n)
        res = row.get("residuals", {})
        w.writerow(
            [row["index"]] + [_g(x) for x in m] + [_g(row["a"]), row["status"], row["accepted"],
                                                   row["rejected"]]
            + [_g(x) for x in deltas]
            + [row.get("symmetric12", ""), "" if row.get("symmetric34") is None else row["symmetric34"],
               _g(row.get("asym12")), row.get("mass_order", ""), row.get("ordering_consistent", "")]
            + [_g(res.get(k)) for k in CSV_RESIDUALS] + [_g(row.get("routh")), _g(row.get("product"))]
        )
        if ok:
            counts["accepted"] += 1
            equal = abs(m[0] - m[1]) < 1e-12 * (m[0] + m[1])
            if equal != row["symmetric12"]:
                violations["symmetry"] += 1
            if not row["ordering_consistent"]:
                violations["ordering"] += 1
            if any(not res[k] < getattr(tol, k) for k in CSV_RESIDUALS):
                violations["residual"] += 1
            pw.writerow([_g((m[1] - m[0]) / (m[0] + m[1])), _g(row["asym12"])])
        elif row["status"] == "no-convergence":
            counts["no_convergence"] += 1
        elif row["status"] == "spurious":
            counts["spurious"] += 1
        else:
            counts["errors"] += 1
    summary = {
        "spec_hash": spec.digest(),
        "points": len(rows),
        **counts,
        "violations": violations,
        "wall_time": time.perf_counter() - t0,
    }
    return buf.getvalue(), summary, plot.getvalue()


def _sweep_spec_from_args(args) -> SweepSpec:
    if args.spec:
        with open(args.spec) as fh:
            return SweepSpec(**json.load(fh))
    if args.grid is None:
        raise InputError("sweep needs --grid or --spec")
    return SweepSpec(
        mass_grid=parse_grid(args.grid),
        exponents=_parse_floats(args.a, "exponents"),
        sign_pattern=args.pattern or "--" + "+" * (len(args.grid.split(";")) - 2),
        tolerances=asdict(_tolerances(args)),
        seed=args.seed,
        starts=args.starts,
        parallelism=args.workers,
    )


def run_sweep(args) -> int:
    spec = _sweep_spec_from_args(args)
    _pattern(spec.sign_pattern, len(spec.mass_grid[0]))
    text, summary, plot = sweep(spec)
    _emit(text, args.out)
    if args.plot_data:
        _emit(plot, args.plot_data)
    if args.summary:
        _emit(dumps(summary), args.summary)
    else:
        print(dumps(summary), file=sys.stderr)
    return EXIT_OK


# ---------------------------------------------------------------------------
# propcheck


def run_propcheck(args) -> int:
    if args.lemma not in lemmas.PROPERTY_SUITES:
        raise InputError(f"unknown lemma {args.lemma!r}; choose from {sorted(lemmas.PROPERTY_SUITES)}")
    kwargs = {"seed": args.seed}
    if args.samples is not None:
        kwargs["samples"] = args.samples
    report = lemmas.PROPERTY_SUITES[args.lemma](**kwargs)
    payload = report.to_dict()
    if args.lemma == "lemma2":
        margin = lemmas.lemma2_minimize(runs=args.minimizer_runs, seed=args.seed, objective="margin")
        raw = lemmas.lemma2_minimize(runs=args.minimizer_runs, seed=args.seed, objective="A")
        payload["minimizer_margin"] = margin.to_dict()
        # raw A has infimum 0 on the faces rho2 = rho1 and rho2 = 0; informational only
        payload["minimizer_raw_A"] = raw.to_dict()
        payload["pass"] = bool(report.passed and margin.passed)
    _emit(dumps(payload), args.out)
    return EXIT_OK if payload["pass"] else EXIT_PROPERTY


# ---------------------------------------------------------------------------


def _add_tolerances(p):
    t = Tolerances()
    p.add_argument("--tol-t", type=float, default=t.t_spread, help="t-spread tolerance")
    p.add_argument("--tol-fit", type=float, default=t.dziobek_fit, help="Dziobek fit tolerance")
    p.add_argument("--tol-cm", type=float, default=t.cayley_menger, help="Cayley-Menger tolerance")
    p.add_argument("--tol-real", type=float, default=t.realizability, help="realizability tolerance")
    p.add_argument("--tol-direct", type=float, default=t.direct, help="force-balance tolerance")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ccworkbench", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="normalized convex central configuration for given masses")
    p.add_argument("--masses", required=True)
    p.add_argument("--a", type=float, default=-1.5)
    p.add_argument("--pattern", help="signs of Delta, e.g. --++ (default: first two negative)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--starts", type=int, default=16)
    p.add_argument("--out")
    p.add_argument("--format", choices=["json"], default="json")
    _add_tolerances(p)
    p.set_defaults(func=run_solve)

    p = sub.add_parser("verify", help="validate a configuration from a positions JSON file")
    p.add_argument("input")
    p.add_argument("--masses")
    p.add_argument("--a", type=float, default=-1.5)
    p.add_argument("--out")
    p.add_argument("--format", choices=["json"], default="json")
    _add_tolerances(p)
    p.set_defaults(func=run_verify)

    p = sub.add_parser("sweep", help="solve over a grid of masses and exponents")
    p.add_argument("--grid", help="per-mass axes separated by ';': value, list a,b,c or lo:hi:step")
    p.add_argument("--spec", help="JSON file holding a SweepSpec")
    p.add_argument("--a", default="-1.5", help="comma-separated exponents")
    p.add_argument("--pattern")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--starts", type=int, default=16)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", help="CSV output (default stdout)")
    p.add_argument("--summary", help="summary JSON output (default stderr)")
    p.add_argument("--plot-data", help="x,y CSV of asymmetry against relative mass gap")
    p.add_argument("--format", choices=["csv"], default="csv")
    _add_tolerances(p)
    p.set_defaults(func=run_sweep)

    p = sub.add_parser("propcheck", help="sampled certification of a lemma")
    p.add_argument("lemma")
    p.add_argument("--samples", type=int)
    p.add_argument("--seed", type=int, default=lemmas.DEFAULT_SEED)
    p.add_argument("--minimizer-runs", type=int, default=100)
    p.add_argument("--out")
    p.set_defaults(func=run_propcheck)

    p = sub.add_parser("embed", help="coordinates from a squared-distance JSON file")
    p.add_argument("input")
    p.add_argument("--dim", type=int)
    p.add_argument("--out")
    p.set_defaults(func=run_embed)
    return parser


def _join_pattern(argv: list[str]) -> list[str]:
    # argparse reads "--pattern --++" as two options; glue the value on
    out, i = [], 0
    while i < len(argv):
        if argv[i] == "--pattern" and i + 1 < len(argv) and set(argv[i + 1]) <= set("+-"):
            out.append(f"--pattern={argv[i + 1]}")
            i += 2
        else:
            out.append(argv[i])
            i += 1
    return out


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(_join_pattern(list(sys.argv[1:] if argv is None else argv)))
    try:
        return args.func(args)
    except (InputError, CCError, ValueError, KeyError, OSError, json.JSONDecodeError) as exc:
        msg = str(exc) or type(exc).__name__
        print(f"error: {msg}", file=sys.stderr)
        sys.stdout.write(dumps({"error": type(exc).__name__, "message": msg}) + "\n")
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
