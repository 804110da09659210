"""Command line entry point: ``qaplon generate | analyze | batch | export``."""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import generators
from .experiment import (BatchConfig, atomic_write, metrics_csv, metrics_json,
                         parse_config_text, run_batch, write_single)
from .landscape import basins_from_owner, load_owner, map_basins, save_owner
from .lon import build_lon, export_edges, export_graphml
from .metrics import METRIC_COLUMNS, MetricsReport

COLUMNS_HELP = "metrics CSV column order: " + ", ".join(METRIC_COLUMNS)


def _int_list(s):
    return tuple(int(x) for x in s.split(",") if x.strip())


def _str_list(s):
    return tuple(x.strip() for x in s.split(",") if x.strip())


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="qaplon",
        description="Local optima networks of small QAP instances.",
        epilog=COLUMNS_HELP)
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="write a random instance", epilog=COLUMNS_HELP)
    g.add_argument("--class", dest="cls", required=True, choices=generators.CLASSES)
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--d-max", type=float, default=100.0)
    g.add_argument("--f-max", type=int, default=100)
    g.add_argument("--M", dest="M", type=float, default=0.0)
    g.add_argument("--K", dest="K", type=int, default=1)
    g.add_argument("--m", dest="m", type=float, default=100.0)
    g.add_argument("--A", dest="A", type=float, default=-10.0)
    g.add_argument("--B", dest="B", type=float, default=5.0)
    g.add_argument("--distance-mode", default="euclidean-points",
                   choices=("euclidean-points", "uniform-integers"))
    g.add_argument("-o", "--output", required=True)

    a = sub.add_parser("analyze", help="basins, LON and metrics of one instance", epilog=COLUMNS_HELP)
    a.add_argument("-i", "--input", required=True)
    a.add_argument("-o", "--output", help="metrics JSON path (default: stdout)")
    a.add_argument("--edges", help="write the LON edge list CSV here")
    a.add_argument("--graphml", help="write the LON as GraphML here")
    a.add_argument("--owner-dump", help="write the binary basin owner array here")
    a.add_argument("--eps", type=float, default=0.05)
    a.add_argument("--workers", type=int, default=1)

    b = sub.add_parser("batch", help="run the full experiment grid", epilog=COLUMNS_HELP)
    b.add_argument("--config", help="key = value config file; flags override it")
    b.add_argument("--dimensions", type=_int_list)
    b.add_argument("--instances-per-cell", type=int)
    b.add_argument("--classes", type=_str_list)
    b.add_argument("--base-seed", type=int)
    b.add_argument("--output-dir")
    b.add_argument("--workers", type=int)
    b.add_argument("--eps", type=float)
    b.add_argument("--write-edges", action="store_true", default=None)
    b.add_argument("--distance-mode", choices=("euclidean-points", "uniform-integers"))

    e = sub.add_parser("export", help="convert cached artifacts between formats", epilog=COLUMNS_HELP)
    e.add_argument("-i", "--instance", help="instance file to rebuild the LON from")
    e.add_argument("--owner-cache", help="binary owner array to reuse instead of re-climbing")
    e.add_argument("--edges", help="write the LON edge list CSV here")
    e.add_argument("--graphml", help="write the LON as GraphML here")
    e.add_argument("--owner-dump", help="write the binary owner array here")
    e.add_argument("--metrics-json", nargs="+", help="metrics JSON files to merge")
    e.add_argument("--metrics-csv", help="write the merged metrics CSV here")
    return p


def cmd_generate(args):
    cfg = generators.GeneratorConfig(
        cls=args.cls, n=args.n, seed=args.seed, d_max=args.d_max, f_max=args.f_max,
        M=args.M, K=args.K, m=args.m, A=args.A, B=args.B, distance_mode=args.distance_mode)
    atomic_write(args.output, generators.serialize_instance(generators.generate(cfg)))


def cmd_analyze(args):
    inst = generators.read_instance(args.input)
    report = write_single(inst, out_metrics=args.output, edges=args.edges, graphml=args.graphml,
                          owner_dump=args.owner_dump, eps=args.eps, workers=args.workers)
    if not args.output:
        sys.stdout.write(metrics_json(report))


def cmd_batch(args):
    if args.config:
        cfg = parse_config_text(Path(args.config).read_text())
    else:
        cfg = BatchConfig()
    overrides = {k: getattr(args, k) for k in (
        "dimensions", "instances_per_cell", "classes", "base_seed", "output_dir",
        "workers", "eps", "write_edges", "distance_mode") if getattr(args, k) is not None}
    if overrides:
        cfg = BatchConfig(**{**cfg.__dict__, **overrides})
    res = run_batch(cfg)
    print(f"{len(res.reports)} instances analyzed, {len(res.skipped)} skipped, "
          f"{len(res.failed)} failed; aggregates in {Path(cfg.output_dir) / 'aggregate.csv'}")
    for cls, n, i, reason in res.failed:
        print(f"failed {cls} n={n} #{i}: {reason}", file=sys.stderr)
    return 0 if res.ok else 1


def cmd_export(args):
    did = False
    if args.instance:
        inst = generators.read_instance(args.instance)
        if args.owner_cache:
            n, owner = load_owner(args.owner_cache)
            if n != inst.n:
                raise ValueError(f"owner cache is for n={n}, instance has n={inst.n}")
            bm = basins_from_owner(inst, owner)
        else:
            bm = map_basins(inst)
        lon = build_lon(inst, bm)
        if args.edges:
            atomic_write(args.edges, export_edges(lon))
        if args.graphml:
            atomic_write(args.graphml, export_graphml(lon))
        if args.owner_dump:
            save_owner(bm, args.owner_dump)
        did = True
    if args.metrics_json:
        if not args.metrics_csv:
            raise ValueError("--metrics-json needs --metrics-csv")
        reports = []
        for path in args.metrics_json:
            with open(path) as f:
                reports.append(MetricsReport.from_dict(json.load(f)))
        atomic_write(args.metrics_csv, metrics_csv(reports))
        did = True
    if not did:
        raise ValueError("nothing to export: give --instance or --metrics-json")


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    handlers = {"generate": cmd_generate, "analyze": cmd_analyze,
                "batch": cmd_batch, "export": cmd_export}
    try:
        return handlers[args.command](args) or 0
    except (OSError, ValueError, RuntimeError) as e:
        print(f"qaplon {args.command}: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
