"""Command-line entry point: ``bellfield sweep | figure | validate``.

Exit codes: 0 success, 1 usage error, 2 validation failure, 3 I/O error.
"""

import argparse
import json
import os
import sys

from . import __version__
from .figures import FIGURE_IDS, recipe, reproduce_figure, sweep_svg
from .sweep import SpecError, SweepSpec, provenance, run_sweep, set_override, to_csv, to_json
from .validation import format_report, perturb_entry, run_validation

EXIT_OK, EXIT_USAGE, EXIT_VALIDATION, EXIT_IO = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad arguments; route that to our usage code instead
    def error(self, message):
        raise UsageError(message)


def build_parser():
    p = _Parser(prog="bellfield", description="Real-space Bell correlators of a coarse-grained Gaussian field.")
    p.add_argument("--version", action="version", version=f"bellfield {__version__}")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    s = sub.add_parser("sweep", help="evaluate a parameter grid from a JSON config")
    s.add_argument("--config", required=True, help="path to the JSON sweep config")
    s.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
                   help="override a config key (dotted path, JSON value)")
    s.add_argument("--out", help="output path (overrides 'output')")
    s.add_argument("--workers", type=int, help="worker processes (overrides 'workers')")
    s.add_argument("--plot", action="store_true", default=None, help="also write an SVG next to the table")

    f = sub.add_parser("figure", help="reproduce one figure dataset and plot")
    f.add_argument("id", help=f"one of {', '.join(FIGURE_IDS)}")
    f.add_argument("--out", required=True, help="output directory")
    f.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE")
    f.add_argument("--workers", type=int, default=None)

    v = sub.add_parser("validate", help="run the internal oracle checks")
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--fast", action="store_true", help="smaller grids and sample counts")
    v.add_argument("--out", help="also write the report to this file")
    v.add_argument("--perturb-gamma", type=float, default=None, help=argparse.SUPPRESS)
    return p


def _write(path, text):
    parent = os.path.dirname(os.path.abspath(path))
    os.makedirs(parent, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _load_config(path):
    with open(path, encoding="utf-8") as fh:
        try:
            return json.load(fh)
        except json.JSONDecodeError as exc:
            raise SpecError(f"{path}: invalid JSON ({exc})") from None


def cmd_sweep(args):
    cfg = _load_config(args.config)
    if not isinstance(cfg, dict):
        raise SpecError("config must be a JSON object")
    for item in args.overrides:
        set_override(cfg, item)
    if args.out is not None:
        cfg["output"] = args.out
    if args.workers is not None:
        cfg["workers"] = args.workers
    if args.plot:
        cfg["plot"] = True
    spec = SweepSpec.from_config(cfg)
    if spec.plot and not spec.output:
        raise SpecError("plot needs an output path")
    rows = run_sweep(spec)
    cols = spec.columns()
    prov = provenance(spec)
    text = to_csv(cols, rows, prov) if spec.format == "csv" else to_json(cols, rows, prov)
    if spec.output:
        _write(spec.output, text)
        if spec.plot:
            _write(os.path.splitext(spec.output)[0] + ".svg", sweep_svg(spec, rows))
    else:
        sys.stdout.write(text)
    n_err = sum(1 for r in rows if r.get("error"))
    print(f"{len(rows)} rows, {n_err} flagged", file=sys.stderr)
    return EXIT_OK


def cmd_figure(args):
    if args.id not in FIGURE_IDS:
        raise UsageError(f"unknown figure id {args.id!r}; known: {', '.join(FIGURE_IDS)}")
    cfg = recipe(args.id)
    for item in args.overrides:
        set_override(cfg, item)
    workers = args.workers or cfg.pop("workers", None) or os.cpu_count() or 1
    out = reproduce_figure(args.id, cfg, workers)
    prov = provenance(out.spec, {"figure": args.id})
    _write(os.path.join(args.out, f"{args.id}.csv"), to_csv(out.columns, out.rows, prov))
    _write(os.path.join(args.out, f"{args.id}.svg"), out.svg)
    print(f"wrote {args.id}.csv and {args.id}.svg to {args.out}", file=sys.stderr)
    return EXIT_OK


def cmd_validate(args):
    hook = perturb_entry(args.perturb_gamma) if args.perturb_gamma is not None else None
    checks = run_validation(args.seed, args.fast, hook)
    report = format_report(checks, args.seed, args.fast)
    sys.stdout.write(report)
    if args.out:
        _write(args.out, report)
    return EXIT_OK if all(c.passed for c in checks) else EXIT_VALIDATION


COMMANDS = {"sweep": cmd_sweep, "figure": cmd_figure, "validate": cmd_validate}


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise UsageError("a subcommand is required (sweep, figure or validate)")
        return COMMANDS[args.command](args)
    except (UsageError, SpecError) as exc:
        print(f"bellfield: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"bellfield: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
