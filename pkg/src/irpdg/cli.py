"""Command line driver.

    irpdg run --example ex3-sod --degree 2 --cells 200 --flux lxf-local \
              --limiter irp --tfinal 0.16 --cfl practical --out out/sod
    irpdg table --example ex1 --degree 1 --cells 16,32,64,128,256
    irpdg riemann --left 1,0,1 --right 0.125,0,0.1 --gamma 1.4

Exit status 0 on success, 2 when a run aborts because a cell average left
the admissible region.
"""

from __future__ import annotations

import argparse
import sys

from .fluxes import FLUX_TOKENS, exact_riemann
from .harness import ExperimentSpec, load_spec_config, run_experiment
from .limiter import RegionViolationError


def _add_run_args(p: argparse.ArgumentParser):
    p.add_argument("--example", help="experiment id (ex1-1d-accuracy, ex3-sod, ...)")
    p.add_argument("--degree", type=int, help="polynomial degree k")
    p.add_argument("--cells", help="cell count, or comma list for sweeps; "
                                   "'nx,ny' selects an anisotropic 2D mesh on run")
    p.add_argument("--flux", choices=FLUX_TOKENS, help="numerical flux")
    p.add_argument("--limiter", choices=("irp", "positivity", "off"))
    p.add_argument("--tfinal", type=float, help="final time (default: example's)")
    p.add_argument("--cfl", choices=("theoretical", "practical"))
    p.add_argument("--dt-divisor", type=float, dest="dt_divisor",
                   help="override: dt = dx/(divisor*sigma) resp. 1/(divisor*eta)")
    p.add_argument("--safety", type=float, help="CFL safety factor in (0, 1]")
    p.add_argument("--gamma", type=float, help="heat capacity ratio")
    p.add_argument("--out", dest="out_dir", help="output directory")
    p.add_argument("--config", help="key=value spec file (CLI flags override)")
    p.add_argument("--checkpoint", help="state file for --example custom")


def _build_spec(args, sweep: bool) -> ExperimentSpec:
    values = {}
    if args.config:
        values.update(load_spec_config(args.config))
    for key in ("example", "degree", "flux", "limiter", "tfinal", "cfl",
                "dt_divisor", "safety", "gamma", "out_dir", "checkpoint"):
        v = getattr(args, key, None)
        if v is not None:
            values[key] = v
    if getattr(args, "cells", None) is not None:
        values["cells"] = tuple(int(s) for s in str(args.cells).split(","))
    for key in ("example", "cells", "degree"):
        if key not in values:
            raise ValueError(f"{key} is required (--{key} or config file)")
    if not sweep and len(values["cells"]) == 2:
        from .harness import EXAMPLES, _resolve_example

        ex = _resolve_example(values["example"])
        if ex in EXAMPLES and EXAMPLES[ex].dim == 2:
            # 'nx,ny' on run selects one anisotropic 2D mesh, not a sweep
            values["cells"] = (values["cells"],)
    return ExperimentSpec(**values)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="irpdg", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run one experiment")
    _add_run_args(run_p)

    table_p = sub.add_parser("table", help="run a mesh sweep and print a convergence table")
    _add_run_args(table_p)

    riemann_p = sub.add_parser("riemann", help="print exact Riemann star-state values")
    riemann_p.add_argument("--left", required=True, help="rho,u,p of the left state")
    riemann_p.add_argument("--right", required=True, help="rho,u,p of the right state")
    riemann_p.add_argument("--gamma", type=float, default=1.4)

    args = parser.parse_args(argv)

    if args.command == "riemann":
        from .euler import GasModel, conserved_1d

        g = GasModel(args.gamma)
        left = conserved_1d(*(float(v) for v in args.left.split(",")), g)
        right = conserved_1d(*(float(v) for v in args.right.split(",")), g)
        star = exact_riemann(left, right, g)
        print(f"p_star = {star.p_star!r}")
        print(f"u_star = {star.u_star!r}")
        print(f"rho_star_l = {star.rho_star_l!r}")
        print(f"rho_star_r = {star.rho_star_r!r}")
        return 0

    try:
        spec = _build_spec(args, sweep=args.command == "table")
        report = run_experiment(spec)
    except RegionViolationError as exc:
        print(f"irpdg: aborted: {exc}", file=sys.stderr)
        return 2
    except (ValueError, FileNotFoundError) as exc:
        print(f"irpdg: error: {exc}", file=sys.stderr)
        return 1

    if args.command == "table" and report.cells:
        print(report.markdown())
    else:
        print(f"wrote artifacts to {spec.out_dir}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
