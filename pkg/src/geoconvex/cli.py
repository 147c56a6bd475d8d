"""Command-line front end: batch runs and catalog listing.

Examples::

    geoconvex list
    geoconvex list --family schwarzschild
    geoconvex run --entry euclid-sphere-r3 --seed 7 --out report.json
    geoconvex run --config run.yaml
    geoconvex run --entry schwarzschild-shell --variant null --out shell.json

Exit codes: 0 all expectations met, 1 discrepancy (expected vs computed
mismatch), 2 inconclusive, 3 config or IO error.
"""

from __future__ import annotations

import argparse
import json
import sys

import yaml

from .errors import GeoConvexError
from .runs import (
    EXIT_CONFIG_ERROR,
    RunConfig,
    render_catalog_table,
    run_audit,
    write_report,
)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="geoconvex",
        description="Convexity audits for level-set hypersurfaces in semi-Riemannian charts",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_cmd = sub.add_parser("run", help="execute audits/probes/searches and write a report")
    run_cmd.add_argument("--config", help="YAML run config; flags below override its fields")
    run_cmd.add_argument("--entry", help="catalog id, or 'all'")
    run_cmd.add_argument("--op", help="run a single operation (with defaults) instead of "
                                      "the entry's expectations")
    run_cmd.add_argument("--seed", type=int, help="random seed (default 0)")
    run_cmd.add_argument("--out", help="path of the JSON report")
    run_cmd.add_argument("--tol-scale", type=float, dest="tol_scale",
                         help="scale factor on audit tolerances")
    run_cmd.add_argument("--variant", choices=["all", "time", "null", "space"],
                         help="causal variant override for variant-aware operations")
    run_cmd.add_argument("--workers", type=int, help="worker threads for audits")
    run_cmd.add_argument("--catalog", dest="catalog_path", help="user catalog YAML")
    run_cmd.add_argument("--print-report", action="store_true",
                         help="also print the JSON report to stdout")

    list_cmd = sub.add_parser("list", help="print the catalog table")
    list_cmd.add_argument("--family", help="filter by metric family")
    list_cmd.add_argument("--catalog", dest="catalog_path", help="user catalog YAML")
    return parser


def _config_from_args(args) -> RunConfig:
    cfg = {}
    if args.config:
        with open(args.config) as fh:
            cfg = yaml.safe_load(fh) or {}
    if args.entry:
        cfg["entry"] = args.entry
    if args.op:
        cfg["operations"] = [{"op": args.op, "config": {}, "expect": {}}]
    for key in ("seed", "out", "tol_scale", "variant", "workers", "catalog_path"):
        value = getattr(args, key, None)
        if value is not None:
            cfg[key] = value
    cfg.setdefault("entry", "all")
    return RunConfig.from_mapping(cfg)


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "list":
            sys.stdout.write(render_catalog_table(args.family, args.catalog_path))
            return 0
        config = _config_from_args(args)
        report, code = run_audit(config)
        if config.out:
            write_report(report, config.out)
        if args.print_report or not config.out:
            json.dump(report, sys.stdout, sort_keys=True, indent=1)
            sys.stdout.write("\n")
        summary = report["summary"]
        sys.stderr.write(
            f"checks: {summary['checks_met']} met, "
            f"{summary['checks_mismatched']} mismatched, "
            f"{summary['checks_inconclusive']} inconclusive\n"
        )
        return code
    except (GeoConvexError, OSError, yaml.YAMLError, KeyError, ValueError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_CONFIG_ERROR


if __name__ == "__main__":
    sys.exit(main())
