"""Command line entry point: ``aggspec run | list-presets | validate``."""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .errors import AggSpecError
from .presets import PRESETS
from .scenario import load_scenario, parse_scenario


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="aggspec", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a scenario file or built-in preset")
    run.add_argument("scenario", help="path to a scenario file or a preset name")
    run.add_argument("--out-dir", default="out", type=Path)
    run.add_argument("--jobs", default=1, type=int, help="sweep points evaluated in parallel")
    run.add_argument("--grid-min", type=float)
    run.add_argument("--grid-max", type=float)
    run.add_argument("--grid-points", type=int)

    sub.add_parser("list-presets", help="list built-in scenarios")

    val = sub.add_parser("validate", help="parse and validate a scenario file")
    val.add_argument("file", type=Path)
    return p


def _cmd_run(args) -> int:
    from .runner import run

    spec = load_scenario(args.scenario)
    override = {}
    if args.grid_min is not None:
        override["e_min"] = args.grid_min
    if args.grid_max is not None:
        override["e_max"] = args.grid_max
    if args.grid_points is not None:
        override["n_points"] = args.grid_points
    manifest = run(spec, args.out_dir, jobs=max(1, args.jobs), grid_override=override or None)
    for entry in manifest.runs:
        line = f"{spec.id} p{entry['index']:03d} {entry['status']}"
        if entry["error"]:
            line += f" {entry['error']}"
        print(line)
    print(f"manifest: {manifest.manifest_path}")
    return 0 if manifest.ok else 1


def _cmd_list() -> int:
    for name in sorted(PRESETS):
        spec = parse_scenario(PRESETS[name])
        print(f"{name}\t{spec.description}")
    return 0


def _cmd_validate(path: Path) -> int:
    spec = parse_scenario(path.read_text(), base_dir=path.parent)
    n = len(spec.points())
    print(f"{path}: ok ({spec.id}, {spec.geometry['kind']}, {n} point{'s' if n != 1 else ''})")
    return 0


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "list-presets":
            return _cmd_list()
        return _cmd_validate(args.file)
    except (AggSpecError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
