"""Command line front end.

Exit codes: 0 success, 1 solver failure or failed verification, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys

from . import bounds, freefall
from .continuation import Branch, sweep
from .errors import FrozenPlanetError, SchemaError
from .integrate import IntegratorOptions
from .io import export_csv, read_any, write_branch, write_orbit
from .solve import SolvedOrbit, newton_solve, seed_r1

log = logging.getLogger("frozen_planet")

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


def _add_integrator_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--tol", type=float, default=1e-10, help="Newton residual tolerance")
    p.add_argument("--rel-tol", type=float, default=1e-10)
    p.add_argument("--abs-tol", type=float, default=1e-10)
    p.add_argument("--collision-threshold", type=float, default=IntegratorOptions.collision_threshold)


def _options(args) -> IntegratorOptions:
    return IntegratorOptions(rel_tol=args.rel_tol, abs_tol=args.abs_tol,
                             collision_threshold=args.collision_threshold)


def _last_orbit(obj) -> SolvedOrbit:
    if isinstance(obj, Branch):
        if not obj.orbits:
            raise SchemaError("branch file holds no orbits")
        return obj.orbits[-1]
    return obj


def cmd_solve(args) -> int:
    opts = _options(args)
    r = args.r
    if args.seed:
        orb = newton_solve(_last_orbit(read_any(args.seed)).unknowns, r, args.tol, opts=opts)
    elif r == 1.0:
        orb = newton_solve(seed_r1(), 1.0, args.tol, opts=opts)
    else:
        n = max(1, math.ceil((1.0 - r) / args.max_step))
        branch = sweep(1.0, r, n, opts, tol=args.tol)
        if branch.stall:
            log.error("continuation to r=%g stalled: %s", r, branch.stall)
            return EXIT_FAIL
        orb = branch.orbits[-1]
    write_orbit(orb, args.out)
    print(f"r = {orb.r!r}")
    for name, value in orb.unknowns._asdict().items():
        print(f"{name} = {value!r}")
    print(f"residual_norm = {orb.residual_norm:.3e}")
    return EXIT_OK


def cmd_sweep(args) -> int:
    seed = _last_orbit(read_any(args.seed)).unknowns if args.seed else None
    branch = sweep(args.r_from, args.r_to, args.steps, _options(args), seed=seed, tol=args.tol)
    write_branch(branch, args.out)
    print(f"orbits = {len(branch)}")
    for f in branch.failures:
        log.warning("corrector failure at r=%g (step %g): %s", f["r"], f["step"], f["error"])
    if branch.stall:
        log.error("BranchStall: %s", branch.stall)
        return EXIT_FAIL
    return EXIT_OK


def cmd_verify(args) -> int:
    obj = read_any(args.file)
    orbits = obj.orbits if isinstance(obj, Branch) else [obj]
    ledger = bounds.compute_constants(args.eps)
    reports = [bounds.verify_orbit(o, ledger, args.report_tol) for o in orbits]
    ok = bool(reports) and all(rep.passed for rep in reports)
    for rep in reports:
        print(f"r = {rep.r!r}: {'PASS' if rep.passed else 'FAIL'} "
              f"({len(rep.checks) - len(rep.failed())}/{len(rep.checks)} checks, "
              f"admissible eps = {rep.info['admissible_eps']:.6f})")
        for c in rep.failed():
            log.error("r=%r %s failed: %s, margin %.3e", rep.r, c.name, c.inequality, c.margin)
    if args.report:
        payload = {
            "ledger": ledger.as_dict(),
            "passed": ok,
            "orbits": [{"r": rep.r, "passed": rep.passed, "info": rep.info,
                        "checks": [{"name": c.name, "inequality": c.inequality, "left": c.left,
                                    "right": c.right, "margin": c.margin, "passed": c.passed}
                                   for c in rep.checks]}
                       for rep in reports],
        }
        with open(args.report, "w") as fh:
            json.dump(payload, fh, indent=1)
            fh.write("\n")
    return EXIT_OK if ok else EXIT_FAIL


def cmd_freefall(args) -> int:
    if args.quadrature:
        kappa = freefall.kappa_quadrature(args.alpha)
    else:
        kappa = freefall.kappa_gamma(args.alpha)
    print(f"alpha = {args.alpha!r}")
    print(f"kappa = {kappa!r}")
    print(f"tau = {freefall.fall_time(args.alpha, args.q0, args.strength)!r}")
    return EXIT_OK


def cmd_constants(args) -> int:
    for name, value in bounds.compute_constants(args.eps).as_dict().items():
        print(f"{name} = {value!r}")
    return EXIT_OK


def cmd_export(args) -> int:
    export_csv(read_any(args.file), args.out, args.what)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="frozen-planet",
                                     description="Symmetric frozen planet orbits and their a-priori bounds.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="solve at one value of r")
    p.add_argument("--r", type=float, required=True)
    p.add_argument("--seed", help="orbit or branch file providing the initial guess")
    p.add_argument("--out", required=True)
    p.add_argument("--max-step", type=float, default=0.05, help="r-step when continuing from r = 1")
    _add_integrator_flags(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("sweep", help="continue a branch in r")
    p.add_argument("--r-from", type=float, default=1.0)
    p.add_argument("--r-to", type=float, default=0.0)
    p.add_argument("--steps", type=int, default=20)
    p.add_argument("--seed")
    p.add_argument("--out", required=True)
    _add_integrator_flags(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("verify", help="audit orbits against the bound chain")
    p.add_argument("file")
    p.add_argument("--eps", type=float, default=bounds.DEFAULT_EPS)
    p.add_argument("--report-tol", type=float, default=bounds.REPORT_TOL)
    p.add_argument("--report")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("freefall", help="mean height of a fall in -1/q**alpha")
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--quadrature", action="store_true")
    p.add_argument("--q0", type=float, default=1.0)
    p.add_argument("--strength", type=float, default=0.5)
    p.set_defaults(func=cmd_freefall)

    p = sub.add_parser("constants", help="print the constant chain")
    p.add_argument("--eps", type=float, default=bounds.DEFAULT_EPS)
    p.set_defaults(func=cmd_constants)

    p = sub.add_parser("export", help="CSV export")
    p.add_argument("file")
    p.add_argument("--what", choices=("trajectory", "symmetric", "branch-summary"), default="trajectory")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_export)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        return args.func(args)
    except (SchemaError, OSError) as exc:
        log.error("%s", exc)
        return EXIT_USAGE
    except (FrozenPlanetError, ValueError) as exc:
        log.error("%s", exc)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
