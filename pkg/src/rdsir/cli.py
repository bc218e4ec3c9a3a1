"""Command-line interface: run scenarios, inspect the spectral data, and
summarize manifests.  Exit status is 0 iff every requested check passed.
"""

from __future__ import annotations

import argparse
import json
import sys

from .harness import RunManifest, ScenarioError, ensemble_summary, load_scenario, run_scenario
from .spatial import build_grid, first_eigenpair, laplacian_eigenvalue_exact


def _cmd_run(args) -> int:
    scn = load_scenario(args.scenario, overrides=args.override)
    manifest = run_scenario(scn, args.out, seeds=args.seeds)
    summary = ensemble_summary([manifest])
    json.dump(summary, sys.stdout, indent=1, sort_keys=True)
    print()
    print(f"manifest: {manifest.path}")
    return 0 if manifest.checks_passed else 1


def _cmd_eig(args) -> int:
    scn = load_scenario(args.scenario, overrides=args.override)
    g = scn["grid"]
    grid = build_grid(g["dimension"], g["lengths"], g["n"])
    spec = first_eigenpair(grid, a0=scn["noise"]["a0"])
    json.dump({
        "lambda1_h": spec.lambda1,
        "lambda1_h_analytic": laplacian_eigenvalue_exact(grid),
        "lambda0_h": spec.lambda0,
        "residual": spec.residual,
        "h": list(grid.h),
    }, sys.stdout, indent=1, sort_keys=True)
    print()
    return 0


def _cmd_report(args) -> int:
    manifests = []
    for path in args.manifest:
        with open(path) as fh:
            manifests.append(RunManifest(data=json.load(fh), path=path))
    summary = ensemble_summary(manifests)
    json.dump(summary, sys.stdout, indent=1, sort_keys=True)
    print()
    return 0 if summary["all_passed"] else 1


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="rdsir",
        description="Random-coefficient SIR reaction-diffusion laboratory.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a scenario and write outputs")
    p_run.add_argument("scenario", help="scenario JSON file")
    p_run.add_argument("--out", default="out", help="output directory (default: out)")
    p_run.add_argument("--seeds", type=int, default=None, help="override ensemble size")
    p_run.add_argument("--override", action="append", default=[], metavar="KEY=VALUE",
                       help="dotted-key scenario override, e.g. run.t1=20")
    p_run.set_defaults(func=_cmd_run)

    p_eig = sub.add_parser("eig", help="print the first eigenpair data for a scenario grid")
    p_eig.add_argument("scenario", help="scenario JSON file")
    p_eig.add_argument("--override", action="append", default=[], metavar="KEY=VALUE")
    p_eig.set_defaults(func=_cmd_eig)

    p_rep = sub.add_parser("report", help="summarize one or more run manifests")
    p_rep.add_argument("manifest", nargs="+", help="manifest JSON file(s)")
    p_rep.set_defaults(func=_cmd_report)

    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
