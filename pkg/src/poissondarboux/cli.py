"""Command-line interface.

Every subcommand reads a JSON problem file, prints a JSON report to stdout,
and exits 0 on success, 1 when a verification fails, 2 on bad input.
--verbose adds prose progress notes on stderr, keeping stdout parseable.
"""

from __future__ import annotations

import argparse
import json
import sys

from .darboux import (
    NotDarbouxError,
    search_bilinear_restricted,
    search_with_cofactor,
)
from .exprparse import ParseError, ProblemFormatError, load_problem, render
from .integrals import (
    NaturalSpec,
    construct_HF,
    hypothesis_report,
    independence_report,
    instance_from_problem,
    structure_from_problem,
    system_from_problem,
    verify_first_integral,
)
from .exactlinalg import SingularMatrixError
from .numlab import drift_report, integrate, write_csv
from .polycore import EXACT, FLOAT, RationalizeError, rationalize
from .poissoncore import StructureError, check_casimir, check_jacobi, generic_rank
from .exprparse import parse_expression

_EXIT_OK = 0
_EXIT_FAILED = 1
_EXIT_USAGE = 2


def _note(args, text: str) -> None:
    if args.verbose:
        print(text, file=sys.stderr)


def _qp_names(pd) -> list:
    return list(pd.canonical.names[: 2 * pd.m])


def cmd_check_structure(args) -> tuple:
    pd = load_problem(args.file)
    _note(args, f"loaded {args.file}: n = {2 * pd.m + pd.s}, mode = {pd.mode}")
    try:
        J, casimirs = structure_from_problem(pd)
    except StructureError as exc:
        return {"ok": False, "skew": False, "error": str(exc)}, _EXIT_FAILED
    jac = check_jacobi(J)
    _note(args, f"jacobi: {'ok' if jac.ok else f'{len(jac.violations)} violations'}")
    rank = generic_rank(J, samples=args.samples, seed=args.seed)
    names = pd.variables.names
    casimir_rows = []
    for c in casimirs:
        casimir_rows.append(
            {"expression": render(c, names), "is_casimir": check_casimir(J, c)}
        )
    ok = jac.ok and all(row["is_casimir"] for row in casimir_rows)
    payload = {
        "ok": ok,
        "n": J.n,
        "m": pd.m,
        "s": pd.s,
        "mode": pd.mode,
        "skew": True,
        "jacobi": {
            "ok": jac.ok,
            "violations": [[i + 1, j + 1, k + 1] for i, j, k, _ in jac.violations],
        },
        "generic_rank": rank,
        "casimirs": casimir_rows,
    }
    return payload, _EXIT_OK if ok else _EXIT_FAILED


def _monomial_exps(text: str, names, mode: str) -> tuple:
    poly = parse_expression(text.strip(), names, mode)
    terms = poly.terms()
    if len(terms) != 1 or terms[0][1] != 1:
        raise ValueError(f"cofactor basis entry {text!r} is not a plain monomial")
    return terms[0][0]


def cmd_find_darboux(args) -> tuple:
    pd = load_problem(args.file)
    spec = NaturalSpec(pd.m, pd.mu, pd.V)
    field = spec.field()
    names = _qp_names(pd)
    if args.cofactor_basis:
        basis = [
            _monomial_exps(entry, names, pd.mode)
            for entry in args.cofactor_basis.split(",")
        ]
        _note(args, f"bilinear search: degree {args.degree}, {args.attempts} attempts")
        candidates = search_bilinear_restricted(
            field, basis, args.degree, attempts=args.attempts, seed=args.seed
        )
        payload = {
            "search": "bilinear",
            "degree": args.degree,
            "candidates": [
                {
                    "F": render(c.F, names),
                    "cofactor": render(c.cofactor, names),
                    "proper": c.proper,
                    "exact": c.F.mode == EXACT,
                }
                for c in candidates
            ],
        }
        return payload, _EXIT_OK
    if pd.cofactor is None:
        raise ValueError(
            "file has no cofactor entry; pass --cofactor-basis to search for one"
        )
    _note(args, f"kernel search for the given cofactor at degree {args.degree}")
    results = search_with_cofactor(field, pd.cofactor, args.degree)
    payload = {
        "search": "kernel",
        "degree": args.degree,
        "cofactor": render(pd.cofactor, names),
        "results": [render(p, names) for p in results],
    }
    return payload, _EXIT_OK


def cmd_build_integral(args) -> tuple:
    pd = load_problem(args.file)
    if pd.F is None:
        raise ValueError("file has no F entry; build-integral needs one")
    inst = instance_from_problem(pd, args.theorem)
    _note(args, f"instance kind {inst.kind}, mode {inst.mode}")
    HF = construct_HF(inst, pd.F)
    if HF.mode == FLOAT:
        # float noise in F*flip(F) cancels by construction; snap when it does
        try:
            HF = rationalize(HF)
        except RationalizeError:
            pass
    system = system_from_problem(pd, args.theorem)
    certificate = HF if HF.mode == system.mode else HF.to_float()
    report = verify_first_integral(system, certificate)
    hyp = hypothesis_report(inst, pd.F)
    ind = independence_report(system, HF.to_float(), seed=args.seed)
    _note(args, f"verified = {report.ok} (exact)" if system.mode == EXACT
          else f"verified = {report.ok}")
    proper = next((ok for name, ok, _ in hyp.entries if name == "F_proper"), None)
    payload = {
        "ok": report.ok,
        "proper": proper,
        "additional": ind.additional,
        "theorem": inst.kind,
        "H_F": render(HF, pd.variables.names),
        "mode": HF.mode,
        "verified": report.ok,
        "exact_certificate": report.ok and system.mode == EXACT and HF.mode == EXACT,
        "residual": render(report.residual, pd.variables.names),
        "residual_max": report.residual.max_abs_coeff(),
        "hypothesis_flags": [
            {"name": name, "ok": ok, "detail": detail}
            for name, ok, detail in hyp.entries
        ],
        "independence": {
            "additional": ind.additional,
            "full_rank": ind.full_rank,
            "ranks": list(ind.ranks),
        },
    }
    return payload, _EXIT_OK if report.ok else _EXIT_FAILED


def cmd_verify(args) -> tuple:
    pd = load_problem(args.file)
    system = system_from_problem(pd)
    integral = parse_expression(args.integral, pd.variables, pd.mode)
    report = verify_first_integral(system, integral, tol=args.tol)
    payload = {
        "ok": report.ok,
        "mode": pd.mode,
        "residual": render(report.residual, pd.variables.names),
        "residual_max": report.residual.max_abs_coeff(),
    }
    return payload, _EXIT_OK if report.ok else _EXIT_FAILED


def _integral_for(pd, args):
    if args.integral is not None:
        return parse_expression(args.integral, pd.variables, pd.mode)
    if pd.F is None:
        raise ValueError("give --integral or a file with an F entry")
    return construct_HF(instance_from_problem(pd, None), pd.F)


def cmd_independence(args) -> tuple:
    pd = load_problem(args.file)
    system = system_from_problem(pd)
    integral = _integral_for(pd, args)
    report = independence_report(
        system, integral.to_float(), samples=args.samples, seed=args.seed
    )
    payload = {
        "ok": report.additional,
        "additional": report.additional,
        "full_rank": report.full_rank,
        "ranks": list(report.ranks),
    }
    return payload, _EXIT_OK if report.additional else _EXIT_FAILED


def cmd_simulate(args) -> tuple:
    pd = load_problem(args.file)
    system = system_from_problem(pd)
    n = len(pd.variables)
    x0 = [float(v) for v in args.x0.split(",")]
    if len(x0) != n:
        raise ValueError(f"--x0 needs {n} comma-separated values")
    _note(args, f"integrating with {args.method} to t = {args.t_end}")
    traj = integrate(
        system,
        x0,
        t_end=args.t_end,
        dt=args.dt,
        method=args.method,
        tol=args.tol,
        max_steps=args.max_steps,
        backend=args.backend,
    )
    monitors = {"H": system.H}
    for k, c in enumerate(system.casimirs):
        monitors[f"C{k + 1}"] = c
    if pd.F is not None:
        try:
            HF = construct_HF(instance_from_problem(pd, None), pd.F)
            monitors["H_F"] = HF
        except (ValueError, NotDarbouxError, SingularMatrixError):
            pass
    drift = drift_report(traj, monitors, backend=args.backend)
    if args.csv:
        write_csv(traj, args.csv, names=pd.variables.names, invariants=monitors,
                  backend=args.backend)
        _note(args, f"wrote {len(traj.times)} samples to {args.csv}")
    payload = {
        "ok": traj.completed,
        "method": traj.method,
        "dt": traj.dt,
        "tol": traj.tol,
        "samples": int(len(traj.times)),
        "t_final": float(traj.times[-1]),
        "completed": traj.completed,
        "status": traj.status,
        "drift": drift,
    }
    if args.csv:
        payload["csv"] = args.csv
    return payload, _EXIT_OK if traj.completed else _EXIT_FAILED


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="poisson-darboux",
        description="Structure checks, Darboux-polynomial searches, first-integral "
        "construction, and numeric drift evidence for polynomial Poisson systems.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_text):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("file", help="problem file (JSON)")
        p.add_argument("--verbose", action="store_true", help="prose notes on stderr")
        p.set_defaults(func=func)
        return p

    p = add("check-structure", cmd_check_structure,
            "skew-symmetry, Jacobi identity, generic rank, declared Casimirs")
    p.add_argument("--samples", type=int, default=8, help="rank sample points")
    p.add_argument("--seed", type=int, default=0)

    p = add("find-darboux", cmd_find_darboux,
            "search for Darboux polynomials of the natural canonical-chart flow")
    p.add_argument("--degree", type=int, default=2, help="max degree of F")
    p.add_argument("--cofactor-basis",
                   help="comma-separated cofactor monomials, e.g. 'q2,p1'; "
                   "without it the file's cofactor entry drives a kernel search")
    p.add_argument("--attempts", type=int, default=40)
    p.add_argument("--seed", type=int, default=0)

    p = add("build-integral", cmd_build_integral,
            "construct H_F from the file's F and verify it on the transformed system")
    p.add_argument("--theorem", type=int, choices=(1, 2, 3), default=None,
                   help="construction to use (default: inferred from the file)")
    p.add_argument("--seed", type=int, default=0, help="independence sampling seed")

    p = add("verify", cmd_verify, "check an expression is a first integral")
    p.add_argument("--integral", required=True, help="expression in the file's variables")
    p.add_argument("--tol", type=float, default=1e-9)

    p = add("independence", cmd_independence,
            "numeric functional-independence evidence for an integral")
    p.add_argument("--integral", help="expression (default: H_F built from the file's F)")
    p.add_argument("--samples", type=int, default=8)
    p.add_argument("--seed", type=int, default=0)

    p = add("simulate", cmd_simulate, "integrate the flow and report invariant drift")
    p.add_argument("--x0", required=True, help="comma-separated initial state")
    p.add_argument("--t-end", type=float, required=True)
    p.add_argument("--dt", type=float, default=1e-2, help="rk4 step size")
    p.add_argument("--method", choices=("rk4", "rk45"), default="rk4")
    p.add_argument("--tol", type=float, default=1e-8, help="rk45 step tolerance")
    p.add_argument("--max-steps", type=int, default=1_000_000)
    p.add_argument("--csv", help="write the trajectory (and monitors) to this path")
    p.add_argument("--backend", choices=("numba", "numpy"), default=None)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        payload, code = args.func(args)
    except (ProblemFormatError, ParseError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return _EXIT_USAGE
    except (NotDarbouxError, StructureError, SingularMatrixError) as exc:
        print(json.dumps({"ok": False, "error": str(exc)}, indent=2))
        return _EXIT_FAILED
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return _EXIT_USAGE
    print(json.dumps(payload, indent=2))
    return code


if __name__ == "__main__":
    sys.exit(main())
