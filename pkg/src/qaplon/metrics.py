"""Basin and network statistics of a local optima network.

Statistics that are undefined for a given network (a correlation with zero
variance, a mean over an empty set) are returned as ``None`` rather than 0.
Self-loops are ignored by every degree, strength, transitivity, disparity
and path statistic.
"""
from __future__ import annotations

import logging
from dataclasses import asdict, dataclass, field, fields

import numpy as np
from scipy.sparse.csgraph import csgraph_from_dense, shortest_path

from .landscape import BasinMap
from .lon import LocalOptimaNetwork, in_degrees, in_strengths, out_degrees

log = logging.getLogger(__name__)

SCHEMA_VERSION = 1


def pearson(x, y) -> float | None:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if len(x) < 2 or np.ptp(x) == 0 or np.ptp(y) == 0:
        return None
    r = float(np.corrcoef(x, y)[0, 1])
    return float(np.clip(r, -1.0, 1.0))


def count_nodes_edges(lon: LocalOptimaNetwork) -> tuple[int, int, int]:
    nz = lon.weights > 0
    loops = int(np.trace(nz))
    total = int(nz.sum())
    return lon.n_nodes, total - loops, total


def basin_stats(bm: BasinMap, lon: LocalOptimaNetwork) -> tuple[float, float, float]:
    """Relative sizes of the global-optimum basin, the largest basin and the (lower) median basin."""
    total = bm.search_space_size
    sizes = np.sort(lon.basin_sizes)
    median = sizes[(len(sizes) - 1) // 2]
    return (float(lon.basin_sizes[lon.global_node] / total),
            float(sizes[-1] / total),
            float(median / total))


def fitness_basin_correlation(bm: BasinMap, lon: LocalOptimaNetwork) -> float | None:
    return pearson(lon.fitness, np.log(lon.basin_sizes))


def near_optimal_mass(bm: BasinMap, lon: LocalOptimaNetwork, eps: float = 0.05) -> float:
    """Fraction of all configurations whose climb ends within ``eps`` (relative) of the best cost."""
    best = lon.costs.min()
    if best == 0:
        log.warning("global optimum has cost 0; the near-optimal band reduces to exact optimality")
    ok = lon.costs <= (1.0 + eps) * best
    return float(lon.basin_sizes[ok].sum() / bm.search_space_size)


def weight_averages(lon: LocalOptimaNetwork) -> tuple[float, float | None]:
    """Mean self-loop weight over all nodes and mean weight over existing off-diagonal edges."""
    w = lon.offdiag()
    edges = w[w > 0]
    return float(lon.self_loops.mean()), (float(edges.mean()) if edges.size else None)


def strength_stats(lon: LocalOptimaNetwork):
    """Mean in-strength, the topology-blind baseline and the in-strength by in-degree table.

    Table rows are ``(k, mean in-strength of nodes with in-degree k, node count)``.
    """
    s = in_strengths(lon)
    k = in_degrees(lon)
    _, w_ij = weight_averages(lon)
    expected = float(k.mean() * w_ij) if w_ij is not None else 0.0
    table = [(int(d), float(s[k == d].mean()), int((k == d).sum()))
             for d in np.unique(k) if d > 0]
    return float(s.mean()), expected, table


def fitness_strength_correlation(lon: LocalOptimaNetwork) -> float | None:
    return pearson(lon.fitness, in_strengths(lon))


def transitivity(lon: LocalOptimaNetwork) -> float | None:
    """Global clustering coefficient of the undirected, unweighted projection."""
    adj = lon.offdiag() > 0
    adj = (adj | adj.T).astype(float)
    deg = adj.sum(axis=1)
    triples = float((deg * (deg - 1)).sum())  # ordered connected triples
    if lon.n_nodes < 3 or triples == 0:
        return None
    closed = float(((adj @ adj) * adj).sum())  # 6 x triangles
    return closed / triples


def disparity(lon: LocalOptimaNetwork):
    """Per-node ``Y2 = sum_j (w_ij / s_i)**2`` averaged overall and by out-degree.

    Returns ``(mean_Y2, table)`` where table rows are
    ``(k, mean Y2, 1/k, node count)``.
    Nodes without outgoing edges are left out.
    """
    w = lon.offdiag()
    s = w.sum(axis=1)
    k = (w > 0).sum(axis=1)
    keep = k > 0
    if (~keep).any():
        log.info("%d node(s) without outgoing edges excluded from disparity", int((~keep).sum()))
    if not keep.any():
        return None, []
    y2 = ((w[keep] / s[keep, None]) ** 2).sum(axis=1)
    kk = k[keep]
    table = [(int(d), float(y2[kk == d].mean()), 1.0 / d, int((kk == d).sum()))
             for d in np.unique(kk)]
    return float(y2.mean()), table


def path_lengths(lon: LocalOptimaNetwork) -> np.ndarray:
    """All-pairs shortest directed path lengths with edge length ``1/w_ij``."""
    w = lon.offdiag()
    length = np.full(w.shape, np.inf)
    nz = w > 0
    length[nz] = 1.0 / w[nz]
    graph = csgraph_from_dense(length, null_value=np.inf)
    return shortest_path(graph, method="D", directed=True)


def path_stats(lon: LocalOptimaNetwork):
    """``(avg_path_length, avg_dist_to_global_opt, unreachable_pair_count)``."""
    k = lon.n_nodes
    if k < 2:
        return None, None, 0
    dist = path_lengths(lon)
    off = ~np.eye(k, dtype=bool)
    d = dist[off]
    finite = np.isfinite(d)
    avg = float(d[finite].mean()) if finite.any() else None
    g = lon.global_node
    to_g = np.delete(dist[:, g], g)
    to_g = to_g[np.isfinite(to_g)]
    return avg, (float(to_g.mean()) if to_g.size else None), int((~finite).sum())


@dataclass
class MetricsReport:
    n: int
    search_space_size: int
    global_cost: int
    neutrality_count: int | None
    n_nodes: int
    n_edges_excl_self: int
    n_edges_incl_self: int
    rel_global_basin: float
    rel_max_basin: float
    rel_median_basin: float
    corr_fitness_logbasin: float | None
    near_opt_mass: float
    near_opt_eps: float
    avg_w_ii: float
    avg_w_ij_offdiag: float | None
    avg_in_strength: float
    expected_in_strength: float
    corr_fitness_instrength: float | None
    transitivity: float | None
    mean_disparity: float | None
    avg_out_degree: float
    avg_path_length: float | None
    avg_dist_to_global_opt: float | None
    unreachable_pair_count: int
    instance_class: str | None = None
    seed: int | None = None
    schema_version: int = SCHEMA_VERSION
    strength_vs_indegree: list = field(default_factory=list)
    disparity_vs_outdegree: list = field(default_factory=list)

    TABLES = ("strength_vs_indegree", "disparity_vs_outdegree")

    def scalars(self) -> dict:
        """Every field except the degree tables, in column order."""
        return {f.name: getattr(self, f.name) for f in fields(self) if f.name not in self.TABLES}

    def to_dict(self) -> dict:
        d = asdict(self)
        d["strength_vs_indegree"] = [list(r) for r in self.strength_vs_indegree]
        d["disparity_vs_outdegree"] = [list(r) for r in self.disparity_vs_outdegree]
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "MetricsReport":
        d = dict(d)
        for t in cls.TABLES:
            d[t] = [tuple(r) for r in d.get(t, [])]
        return cls(**d)


METRIC_COLUMNS = tuple(f.name for f in fields(MetricsReport) if f.name not in MetricsReport.TABLES)


def compute_metrics(bm: BasinMap, lon: LocalOptimaNetwork, eps: float = 0.05,
                    meta: dict | None = None) -> MetricsReport:
    meta = meta or {}
    nodes, e_excl, e_incl = count_nodes_edges(lon)
    rel_g, rel_max, rel_med = basin_stats(bm, lon)
    avg_wii, avg_wij = weight_averages(lon)
    avg_in, expected_in, s_table = strength_stats(lon)
    mean_y2, y_table = disparity(lon)
    apl, to_g, unreachable = path_stats(lon)
    return MetricsReport(
        n=bm.n,
        search_space_size=bm.search_space_size,
        global_cost=int(lon.costs[lon.global_node]),
        neutrality_count=bm.neutrality_count,
        n_nodes=nodes,
        n_edges_excl_self=e_excl,
        n_edges_incl_self=e_incl,
        rel_global_basin=rel_g,
        rel_max_basin=rel_max,
        rel_median_basin=rel_med,
        corr_fitness_logbasin=fitness_basin_correlation(bm, lon),
        near_opt_mass=near_optimal_mass(bm, lon, eps),
        near_opt_eps=eps,
        avg_w_ii=avg_wii,
        avg_w_ij_offdiag=avg_wij,
        avg_in_strength=avg_in,
        expected_in_strength=expected_in,
        corr_fitness_instrength=fitness_strength_correlation(lon),
        transitivity=transitivity(lon),
        mean_disparity=mean_y2,
        avg_out_degree=float(out_degrees(lon).mean()),
        avg_path_length=apl,
        avg_dist_to_global_opt=to_g,
        unreachable_pair_count=unreachable,
        instance_class=meta.get("class"),
        seed=meta.get("seed"),
        strength_vs_indegree=s_table,
        disparity_vs_outdegree=y_table,
    )
