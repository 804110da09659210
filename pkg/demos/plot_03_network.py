"""
The local optima network
========================

Build the weighted network between basins and read off its main statistics.
Self-loops dominate: a random swap usually stays in the same basin.
"""

from qaplon import GeneratorConfig, build_lon, compute_metrics, generate, map_basins
from qaplon.lon import export_edges

inst = generate(GeneratorConfig("real-like", 8, seed=5))
bm = map_basins(inst)
lon = build_lon(inst, bm)
report = compute_metrics(bm, lon, meta=inst.meta)

print(f"{report.n_nodes} nodes, {report.n_edges_excl_self} edges without self-loops")
print(f"mean w_ii {report.avg_w_ii:.3f} vs mean w_ij {report.avg_w_ij_offdiag:.4f}")
print(f"transitivity {report.transitivity:.3f}")
print(f"disparity {report.mean_disparity:.3f}, homogeneous baseline {1 / report.avg_out_degree:.3f}")
print(f"mean path length {report.avg_path_length:.2f}, to the global optimum {report.avg_dist_to_global_opt:.2f}")

for k, y2, inv_k, count in report.disparity_vs_outdegree:
    print(f"  out-degree {k:>2}: Y2 {y2:.3f}  (1/k = {inv_k:.3f}, {count} nodes)")

print(export_edges(lon).splitlines()[:4])
