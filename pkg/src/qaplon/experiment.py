"""Batch experiments: many instances per (class, n) cell, aggregated with Wald intervals.

Output layout::

    <output_dir>/<class>/nNN/iII/instance.dat
                                 metrics.json
                                 strength_vs_indegree.csv
                                 disparity_vs_outdegree.csv
                                 lon.csv            (only with write_edges)
                                 done               (completion marker)
    <output_dir>/metrics.csv      one row per instance
    <output_dir>/aggregate.csv    one row per (class, n, metric)
    <output_dir>/batch.log        timestamps live here only
"""
from __future__ import annotations

import csv
import hashlib
import io
import json
import logging
import os
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np
from scipy.stats import norm

from . import generators
from .generators import CLASSES, GeneratorConfig
from .landscape import MAX_N, ResourceLimitError, map_basins, save_owner
from .lon import build_lon, export_edges, export_graphml
from .metrics import METRIC_COLUMNS, SCHEMA_VERSION, MetricsReport, compute_metrics

log = logging.getLogger(__name__)

# per-instance statistics that get aggregated across a cell
AGGREGATE_METRICS = (
    "n_nodes", "n_edges_excl_self", "n_edges_incl_self",
    "rel_global_basin", "rel_max_basin", "rel_median_basin",
    "corr_fitness_logbasin", "near_opt_mass", "avg_w_ii", "avg_w_ij_offdiag",
    "avg_in_strength", "expected_in_strength", "corr_fitness_instrength",
    "transitivity", "mean_disparity", "avg_out_degree", "avg_path_length",
    "avg_dist_to_global_opt", "unreachable_pair_count", "neutrality_count",
)


def wald_ci(samples, confidence: float = 0.95):
    """Normal-approximation interval ``mean +- z * sd / sqrt(m)`` on the sample mean.

    ``sd`` uses the ``m - 1`` denominator. A single sample gives a zero-width
    interval. Returns None for an empty sample.
    """
    x = np.asarray([s for s in samples if s is not None], dtype=float)
    m = len(x)
    if m == 0:
        return None
    mean = float(x.mean())
    if m == 1:
        log.debug("single sample: zero-width interval")
        return mean, mean, mean
    z = norm.ppf(0.5 + confidence / 2)
    half = float(z * x.std(ddof=1) / np.sqrt(m))
    return mean, mean - half, mean + half


def cell_seed(base_seed: int, cls: str, n: int, index: int) -> int:
    """Stable 64-bit seed for one instance of a batch."""
    key = f"{base_seed}:{cls}:{n}:{index}".encode()
    return int.from_bytes(hashlib.blake2b(key, digest_size=8).digest(), "little")


@dataclass
class BatchConfig:
    dimensions: tuple = (5, 6, 7, 8, 9, 10)
    instances_per_cell: int = 30
    classes: tuple = CLASSES
    base_seed: int = 0
    output_dir: str = "out"
    workers: int = 1
    eps: float = 0.05
    write_edges: bool = False
    distance_mode: str = "euclidean-points"
    max_n: int = MAX_N

    def __post_init__(self):
        self.dimensions = tuple(int(d) for d in self.dimensions)
        self.classes = tuple(self.classes)
        if not self.dimensions or min(self.dimensions) < 2:
            raise ValueError("dimensions must be non-empty and each >= 2")
        if self.instances_per_cell < 1:
            raise ValueError("instances_per_cell must be >= 1")
        unknown = set(self.classes) - set(CLASSES)
        if unknown or not self.classes:
            raise ValueError(f"unknown classes: {sorted(unknown)}")


@dataclass
class AggregateRow:
    cls: str
    n: int
    metric: str
    mean: float | None
    ci_low: float | None
    ci_high: float | None
    sample_count: int
    undefined_count: int
    schema_version: int = SCHEMA_VERSION


AGGREGATE_COLUMNS = tuple(f.name for f in fields(AggregateRow))


@dataclass
class BatchResult:
    reports: dict = field(default_factory=dict)      # (cls, n, index) -> MetricsReport
    aggregates: list = field(default_factory=list)
    skipped: list = field(default_factory=list)      # (cls, n, index, reason)
    failed: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failed

    def aggregate(self, cls: str, n: int, metric: str) -> AggregateRow:
        for row in self.aggregates:
            if (row.cls, row.n, row.metric) == (cls, n, metric):
                return row
        raise KeyError((cls, n, metric))


# -- file helpers -----------------------------------------------------------

def atomic_write(path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", newline="") as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        os.unlink(tmp)
        raise


def _fmt(v) -> str:
    if v is None:
        return ""
    return repr(float(v)) if isinstance(v, float) else str(v)


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def metrics_json(report: MetricsReport) -> str:
    return json.dumps(report.to_dict(), indent=2) + "\n"


def metrics_csv(reports) -> str:
    """One row per report, columns in ``METRIC_COLUMNS`` order."""
    return _csv_text(METRIC_COLUMNS, ([r.scalars()[c] for c in METRIC_COLUMNS] for r in reports))


def aggregate_csv(rows) -> str:
    return _csv_text(AGGREGATE_COLUMNS, ([getattr(r, c) for c in AGGREGATE_COLUMNS] for r in rows))


def _parse_num(s: str):
    if s == "":
        return None
    try:
        return int(s)
    except ValueError:
        return float(s)


def read_aggregate_csv(text: str) -> list[AggregateRow]:
    rows = []
    for rec in csv.DictReader(io.StringIO(text)):
        rows.append(AggregateRow(
            cls=rec["cls"], n=int(rec["n"]), metric=rec["metric"],
            mean=_parse_num(rec["mean"]), ci_low=_parse_num(rec["ci_low"]),
            ci_high=_parse_num(rec["ci_high"]),
            sample_count=int(rec["sample_count"]),
            undefined_count=int(rec["undefined_count"]),
            schema_version=int(rec["schema_version"])))
    return rows


def strength_table_csv(report: MetricsReport) -> str:
    return _csv_text(("in_degree", "mean_in_strength", "node_count"), report.strength_vs_indegree)


def disparity_table_csv(report: MetricsReport) -> str:
    return _csv_text(("out_degree", "mean_disparity", "inverse_degree", "node_count"),
                     report.disparity_vs_outdegree)


# -- pipeline ---------------------------------------------------------------

def analyze_instance(inst, eps: float = 0.05, workers: int = 1, max_n: int = MAX_N):
    """Basins, network and metrics for one instance."""
    bm = map_basins(inst, workers=workers, max_n=max_n)
    lon = build_lon(inst, bm, workers=workers)
    return bm, lon, compute_metrics(bm, lon, eps=eps, meta=inst.meta)


def cell_dir(cfg: BatchConfig, cls: str, n: int, index: int) -> Path:
    return Path(cfg.output_dir) / cls / f"n{n:02d}" / f"i{index:02d}"


def run_cell(cfg: BatchConfig, cls: str, n: int, index: int) -> MetricsReport:
    d = cell_dir(cfg, cls, n, index)
    if (d / "done").exists():
        with open(d / "metrics.json") as f:
            return MetricsReport.from_dict(json.load(f))
    gen = GeneratorConfig(cls=cls, n=n, seed=cell_seed(cfg.base_seed, cls, n, index),
                          distance_mode=cfg.distance_mode if cls == generators.UNIFORM
                          else "euclidean-points")
    inst = generators.generate(gen)
    atomic_write(d / "instance.dat", generators.serialize_instance(inst))
    _, lon, report = analyze_instance(inst, eps=cfg.eps, max_n=cfg.max_n)
    if cfg.write_edges:
        atomic_write(d / "lon.csv", export_edges(lon))
    atomic_write(d / "strength_vs_indegree.csv", strength_table_csv(report))
    atomic_write(d / "disparity_vs_outdegree.csv", disparity_table_csv(report))
    atomic_write(d / "metrics.json", metrics_json(report))
    atomic_write(d / "done", "")
    return report


def _run_cell_safe(args):
    cfg, cls, n, index = args
    try:
        return args[1:], run_cell(cfg, cls, n, index), None
    except ResourceLimitError as e:
        return args[1:], None, ("skipped", str(e))
    except Exception as e:  # a failed cell must not take the batch down
        return args[1:], None, ("failed", f"{type(e).__name__}: {e}")


def aggregate_reports(reports: dict, cfg: BatchConfig) -> list[AggregateRow]:
    rows = []
    for cls in cfg.classes:
        for n in cfg.dimensions:
            cell = [reports[k] for k in sorted(reports) if k[0] == cls and k[1] == n]
            if not cell:
                continue
            for metric in AGGREGATE_METRICS:
                vals = [getattr(r, metric) for r in cell]
                defined = [v for v in vals if v is not None]
                ci = wald_ci(defined)
                mean, lo, hi = ci if ci is not None else (None, None, None)
                rows.append(AggregateRow(cls, n, metric, mean, lo, hi,
                                         len(defined), len(vals) - len(defined)))
    return rows


def _pooled_tables(reports, cfg):
    """Degree tables pooled over all instances of a cell, weighted by node counts."""
    out = {}
    for cls in cfg.classes:
        for n in cfg.dimensions:
            cell = [reports[k] for k in sorted(reports) if k[0] == cls and k[1] == n]
            if not cell:
                continue
            s_acc, y_acc = {}, {}
            for r in cell:
                for k, mean, cnt in r.strength_vs_indegree:
                    a = s_acc.setdefault(k, [0.0, 0])
                    a[0] += mean * cnt
                    a[1] += cnt
                for k, mean, _, cnt in r.disparity_vs_outdegree:
                    a = y_acc.setdefault(k, [0.0, 0])
                    a[0] += mean * cnt
                    a[1] += cnt
            out[cls, n] = (
                [(k, s / c, c) for k, (s, c) in sorted(s_acc.items())],
                [(k, s / c, 1.0 / k, c) for k, (s, c) in sorted(y_acc.items())],
            )
    return out


def run_batch(cfg: BatchConfig) -> BatchResult:
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    handler = logging.FileHandler(out / "batch.log")
    handler.setFormatter(logging.Formatter("%(asctime)s %(levelname)s %(message)s"))
    level = log.level
    log.setLevel(logging.INFO)
    log.addHandler(handler)
    try:
        return _run_batch(cfg, out)
    finally:
        log.removeHandler(handler)
        log.setLevel(level)
        handler.close()


def _run_batch(cfg: BatchConfig, out: Path) -> BatchResult:
    jobs = [(cfg, cls, n, i) for cls in cfg.classes for n in cfg.dimensions
            for i in range(cfg.instances_per_cell)]
    log.info("batch start: %d cells", len(jobs))
    if cfg.workers > 1:
        with ProcessPoolExecutor(cfg.workers) as ex:
            results = list(ex.map(_run_cell_safe, jobs))
    else:
        results = [_run_cell_safe(j) for j in jobs]

    res = BatchResult()
    for key, report, problem in results:
        if report is not None:
            res.reports[key] = report
        elif problem[0] == "skipped":
            log.warning("skipped %s: %s", key, problem[1])
            res.skipped.append((*key, problem[1]))
        else:
            log.error("failed %s: %s", key, problem[1])
            res.failed.append((*key, problem[1]))

    res.aggregates = aggregate_reports(res.reports, cfg)
    atomic_write(out / "metrics.csv", metrics_csv(res.reports[k] for k in sorted(res.reports)))
    atomic_write(out / "aggregate.csv", aggregate_csv(res.aggregates))
    for (cls, n), (s_tab, y_tab) in _pooled_tables(res.reports, cfg).items():
        d = out / cls / f"n{n:02d}"
        atomic_write(d / "strength_vs_indegree.csv",
                     _csv_text(("in_degree", "mean_in_strength", "node_count"), s_tab))
        atomic_write(d / "disparity_vs_outdegree.csv",
                     _csv_text(("out_degree", "mean_disparity", "inverse_degree", "node_count"), y_tab))
    problems = [("skipped", *s) for s in res.skipped] + [("failed", *f) for f in res.failed]
    atomic_write(out / "problems.csv",
                 _csv_text(("status", "cls", "n", "index", "reason"), problems))
    log.info("batch done: %d ok, %d skipped, %d failed",
             len(res.reports), len(res.skipped), len(res.failed))
    return res


# -- config files -----------------------------------------------------------

_LIST_KEYS = {"dimensions", "classes"}


def parse_config_text(text: str) -> BatchConfig:
    """Read ``key = value`` lines into a BatchConfig.

    Lists are comma separated, optionally in brackets; strings may be quoted;
    ``#`` starts a comment.
    """
    kw = {}
    types = {f.name: f.type for f in fields(BatchConfig)}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"config line {lineno}: expected key = value")
        key, val = (s.strip() for s in line.split("=", 1))
        if key not in types:
            raise ValueError(f"config line {lineno}: unknown key {key!r}")
        if key in _LIST_KEYS:
            items = [v.strip().strip("'\"") for v in val.strip("[]").split(",") if v.strip()]
            kw[key] = tuple(int(v) for v in items) if key == "dimensions" else tuple(items)
        elif key == "write_edges":
            if val.lower() not in ("true", "false", "1", "0"):
                raise ValueError(f"config line {lineno}: write_edges must be true or false")
            kw[key] = val.lower() in ("true", "1")
        elif key in ("output_dir", "distance_mode"):
            kw[key] = val.strip("'\"")
        elif key == "eps":
            kw[key] = float(val)
        else:
            kw[key] = int(val)
    return BatchConfig(**kw)


def write_single(inst, out_metrics=None, edges=None, graphml=None, owner_dump=None,
                 eps: float = 0.05, workers: int = 1) -> MetricsReport:
    """Run the whole pipeline on one instance and write the requested artifacts."""
    bm, lon, report = analyze_instance(inst, eps=eps, workers=workers)
    if edges:
        atomic_write(edges, export_edges(lon))
    if graphml:
        atomic_write(graphml, export_graphml(lon))
    if owner_dump:
        save_owner(bm, owner_dump)
    if out_metrics:
        atomic_write(out_metrics, metrics_json(report))
    return report
