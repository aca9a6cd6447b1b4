"""Command line interface: ``ldg-orlicz {solve,eoc,props,export-fields}``."""
import argparse
import json
import logging
import os
import sys

from .errors import ConfigurationError, LdgError, LinearSolverError, NonConvergenceError
from .experiments import (RunConfig, error_concentration, error_quantities, export_fields,
                          meshes, run_convergence_study, solve_level)

# config-file keys and their types; CLI flags override the file
_KEYS = {
    "p": float, "delta": float, "alpha": float, "k": int, "levels": int, "beta": float,
    "atol": float, "rtol": float, "max_iter": int, "shift_mode": str, "linear_solver": str,
    "continuation": lambda s: s.strip().lower() in ("1", "true", "yes", "on"), "out": str,
}


def read_config(path):
    """Parse a flat ``key = value`` file; ``#`` starts a comment."""
    out = {}
    with open(path) as fh:
        for n, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigurationError(f"{path}:{n}: expected key = value")
            key, value = (s.strip() for s in line.split("=", 1))
            key = key.replace("-", "_")
            if key not in _KEYS:
                raise ConfigurationError(f"{path}:{n}: unknown key {key!r}")
            out[key] = _KEYS[key](value)
    return out


def build_parser():
    parser = argparse.ArgumentParser(prog="ldg-orlicz", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(sp, levels_default):
        sp.add_argument("--config", help="flat key=value file; flags override it")
        sp.add_argument("--p", type=float)
        sp.add_argument("--delta", type=float)
        sp.add_argument("--alpha", type=float, help="default: tabulated value for p")
        sp.add_argument("--k", type=int)
        sp.add_argument("--levels", type=int, help=f"number of meshes (default {levels_default})")
        sp.add_argument("--atol", type=float)
        sp.add_argument("--rtol", type=float)
        sp.add_argument("--max-iter", type=int, dest="max_iter")
        sp.add_argument("--shift-mode", choices=("lagged", "full"), dest="shift_mode")
        sp.add_argument("--linear-solver", choices=("direct", "bicgstab"), dest="linear_solver")
        sp.add_argument("--continuation", action=argparse.BooleanOptionalAction, default=None,
                        help="start each level from the previous solution (default on)")
        sp.add_argument("--out")
        sp.set_defaults(levels_default=levels_default)

    common(sub.add_parser("solve", help="solve on the finest of --levels meshes"), 1)
    common(sub.add_parser("eoc", help="convergence study"), 5)
    common(sub.add_parser("export-fields", help="write field magnitude CSVs"), 5)
    props = sub.add_parser("props", help="sampled property checks")
    props.add_argument("--samples", type=int, default=100_000)
    props.add_argument("--out")
    return parser


def make_config(parser, args):
    values = read_config(args.config) if args.config else {}
    for key in _KEYS:
        v = getattr(args, key, None)
        if v is not None:
            values[key] = v
    if "p" not in values:
        parser.error("--p is required (on the command line or in --config)")
    values.setdefault("levels", args.levels_default)
    try:
        return RunConfig(**values)
    except ConfigurationError as exc:
        parser.error(str(exc))


def _write_json(obj, out, name):
    text = json.dumps(obj, indent=2)
    if out:
        os.makedirs(out, exist_ok=True)
        with open(os.path.join(out, name), "w") as fh:
            fh.write(text)
    print(text)


def _finest(config):
    previous = None
    for mesh in meshes(config):
        system, exact, report = solve_level(config, mesh, previous)
        previous = report.u
    return system, exact, report


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.command == "props":
        from .properties import property_report
        _write_json(property_report(samples=args.samples), args.out, "props.json")
        return 0

    config = make_config(parser, args)
    try:
        if args.command == "solve":
            system, exact, report = _finest(config)
            data = report.to_dict()
            data.update(level=system.data.mesh.level, dofs=system.ndofs)
            _write_json(data, config.out, "solve.json")
        elif args.command == "eoc":
            rows = run_convergence_study(config)
            for row in rows:
                print(",".join(row.csv_row()))
        else:
            system, exact, report = _finest(config)
            out = config.out or "."
            paths = export_fields(system, report, exact, out)
            errs = dict(zip(("grad", "L", "A", "jump"), error_quantities(system, report, exact)))
            _write_json({"fields": paths, "errors": errs,
                         "error_share_near_origin": error_concentration(system, report, exact)},
                        out, "fields.json")
    except (NonConvergenceError, LinearSolverError) as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return 1
    except LdgError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
