"""Command-line interface: run, sweep, converge, and check experiments."""

from __future__ import annotations

import argparse
import dataclasses
import sys

from .config import ConvergenceExperiment, SpecError, bundled_spec_names, load_spec
from .core import ConfigError


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="phasefront",
        description="Phase-change heat conduction experiments: solve, export CSV tables, render figures.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("spec", help="path to a .ini spec, or the name of a bundled one")
        p.add_argument("--out", default=None, help="output root (overrides spec and env)")
        p.add_argument(
            "--no-figures", action="store_true", help="write tables only, skip the PNG report"
        )

    add_common(sub.add_parser("run", help="execute one experiment"))

    p_sweep = sub.add_parser("sweep", help="run a cross-product of parameter overrides")
    add_common(p_sweep)
    p_sweep.add_argument(
        "--param",
        action="append",
        required=True,
        metavar="section.key=v1,v2,...",
        help="values to sweep; repeat for a cross-product",
    )
    p_sweep.add_argument("--workers", type=int, default=4)

    p_conv = sub.add_parser("converge", help="grid-convergence study for a spec")
    add_common(p_conv)
    p_conv.add_argument("--levels", type=int, default=3)
    p_conv.add_argument("--refine", type=int, default=2)

    p_check = sub.add_parser("check", help="run the invariant suite, exit nonzero on violation")
    p_check.add_argument("spec")

    sub.add_parser("specs", help="list the bundled experiment specs")
    return parser


def _parse_sweep_params(items: list[str]) -> dict[str, list[str]]:
    out: dict[str, list[str]] = {}
    for item in items:
        if "=" not in item:
            raise SpecError(f"--param {item!r}: expected section.key=v1,v2,...")
        key, values = item.split("=", 1)
        vals = [v for v in values.split(",") if v]
        if not vals:
            raise SpecError(f"--param {item!r}: no values given")
        out[key.strip()] = vals
    return out


def cli_main(argv: list[str] | None = None) -> int:
    from . import runner  # deferred so --help stays fast

    args = _build_parser().parse_args(argv)

    if args.command == "specs":
        for name in bundled_spec_names():
            print(name)
        return 0

    try:
        spec = load_spec(args.spec)

        if args.command == "run":
            out_dir, _ = runner.run_experiment(
                spec, out_root=args.out, figures=not args.no_figures
            )
            print(f"wrote {out_dir}")
            return 0

        if args.command == "sweep":
            params = _parse_sweep_params(args.param)
            sweep_root, results = runner.sweep_experiment(
                spec,
                params,
                out_root=args.out,
                figures=not args.no_figures,
                workers=args.workers,
            )
            print(f"wrote {len(results)} runs under {sweep_root}")
            return 0

        if args.command == "converge":
            if spec.kind == "cartesian-1d":
                exp = ConvergenceExperiment(
                    base=spec.config, levels=args.levels, refine=args.refine, reference="fine"
                )
                sections = dict(spec.sections)
                sections["convergence"] = {
                    "levels": args.levels, "refine": args.refine, "reference": "fine",
                }
                spec = dataclasses.replace(spec, kind="convergence", sections=sections, config=exp)
            elif spec.kind == "convergence":
                exp = dataclasses.replace(spec.config, levels=args.levels, refine=args.refine)
                spec = dataclasses.replace(spec, config=exp)
            else:
                raise SpecError(f"converge needs a cartesian-1d spec, got {spec.kind!r}")
            out_dir, result = runner.run_experiment(
                spec, out_root=args.out, figures=not args.no_figures
            )
            print(f"fitted order {result.fitted_order:.3f}; wrote {out_dir}")
            return 0

        # check
        ok, lines = runner.check_experiment(spec)
        for line in lines:
            print(line)
        return 0 if ok else 1

    except (SpecError, ConfigError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # runtime failure inside a solver
        print(f"runtime failure: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(cli_main())


if __name__ == "__main__":
    main()
