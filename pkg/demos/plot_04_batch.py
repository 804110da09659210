"""
A small batch
=============

Run a few instances per class and dimension and print the cell means with
their 95% intervals. The full grid is the same call with more instances.
"""

import tempfile

from qaplon.experiment import BatchConfig, run_batch

with tempfile.TemporaryDirectory() as out:
    cfg = BatchConfig(dimensions=(5, 6, 7), instances_per_cell=8, base_seed=1, output_dir=out)
    res = run_batch(cfg)
    for metric in ("n_nodes", "rel_global_basin", "avg_dist_to_global_opt"):
        print(metric)
        for cls in cfg.classes:
            cells = [res.aggregate(cls, n, metric) for n in cfg.dimensions]
            print(f"  {cls:>9}: " + "  ".join(
                f"n={r.n} {r.mean:.3f} [{r.ci_low:.3f}, {r.ci_high:.3f}]" for r in cells))
