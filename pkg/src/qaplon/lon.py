"""Local optima networks: weighted directed graphs between basins.

The weight ``w_ij`` is the probability that one random pairwise exchange
applied to a uniformly chosen configuration of basin ``i`` lands in basin
``j``. Weights are obtained from exact integer counts of neighbor pairs,
``w_ij = count_ij / (|b_i| * n(n-1)/2)``, so each row sums to one.
"""
from __future__ import annotations

import io
import xml.etree.ElementTree as ET
from dataclasses import dataclass

import numpy as np

from .landscape import (BasinMap, _chunks, _map, global_optima,
                        iter_neighbor_ranks)
from .qap import QapInstance, all_permutations

DENSE_COUNT_LIMIT = 1 << 24


@dataclass(eq=False)
class LocalOptimaNetwork:
    n: int
    optima: np.ndarray       # rank of each node's optimum
    costs: np.ndarray
    basin_sizes: np.ndarray
    counts: np.ndarray       # (k, k) neighbor-pair counts, self-loops on the diagonal
    weights: np.ndarray      # (k, k) transition probabilities
    global_node: int         # index of the canonical global optimum

    @property
    def n_nodes(self) -> int:
        return len(self.optima)

    @property
    def fitness(self) -> np.ndarray:
        return -self.costs

    @property
    def search_space_size(self) -> int:
        return int(self.basin_sizes.sum())

    @property
    def self_loops(self) -> np.ndarray:
        return np.diagonal(self.weights).copy()

    def offdiag(self) -> np.ndarray:
        """Weight matrix with the self-loops zeroed."""
        w = self.weights.copy()
        np.fill_diagonal(w, 0.0)
        return w

    def node_index(self, opt: int) -> int:
        i = int(np.searchsorted(self.optima, opt))
        if i == len(self.optima) or self.optima[i] != opt:
            raise KeyError(opt)
        return i


def _count_edges(node_of: np.ndarray, perms: np.ndarray, k: int, workers: int) -> np.ndarray:
    total = perms.shape[0]
    dense = k * k <= DENSE_COUNT_LIMIT

    def work(bounds):
        lo, hi = bounds
        src = node_of[lo:hi] * k
        codes = np.concatenate([src + node_of[nbr] for nbr in iter_neighbor_ranks(perms, lo, hi)])
        if dense:
            return np.bincount(codes, minlength=k * k)
        return np.unique(codes, return_counts=True)

    counts = np.zeros(k * k, dtype=np.int64)
    for part in _map(work, _chunks(total), workers):
        if dense:
            counts += part
        else:
            keys, cnt = part
            counts[keys] += cnt
    return counts.reshape(k, k)


def build_lon(inst: QapInstance, bm: BasinMap, workers: int = 1) -> LocalOptimaNetwork:
    if inst.n != bm.n:
        raise ValueError(f"instance has n={inst.n} but basin map has n={bm.n}")
    n = bm.n
    k = len(bm.optima)
    node_of = np.searchsorted(bm.optima, bm.owner)
    if n < 2:
        counts = np.zeros((k, k), dtype=np.int64)
        weights = np.eye(k)
    else:
        counts = _count_edges(node_of, all_permutations(n), k, workers)
        moves = n * (n - 1) // 2
        weights = counts / (bm.sizes[:, None] * float(moves))
    _, _, canon = global_optima(bm)
    return LocalOptimaNetwork(
        n=n, optima=bm.optima.copy(), costs=bm.optimum_costs.copy(),
        basin_sizes=bm.sizes.copy(), counts=counts, weights=weights,
        global_node=int(np.searchsorted(bm.optima, canon)))


# -- strengths and degrees (self-loops excluded) ----------------------------

def out_strengths(lon: LocalOptimaNetwork) -> np.ndarray:
    return lon.offdiag().sum(axis=1)


def in_strengths(lon: LocalOptimaNetwork) -> np.ndarray:
    return lon.offdiag().sum(axis=0)


def out_degrees(lon: LocalOptimaNetwork) -> np.ndarray:
    return (lon.offdiag() > 0).sum(axis=1)


def in_degrees(lon: LocalOptimaNetwork) -> np.ndarray:
    return (lon.offdiag() > 0).sum(axis=0)


def out_strength(lon: LocalOptimaNetwork, i: int) -> float:
    w = lon.weights[i]
    return float(w.sum() - w[i])


def in_strength(lon: LocalOptimaNetwork, i: int) -> float:
    w = lon.weights[:, i]
    return float(w.sum() - w[i])


def degrees(lon: LocalOptimaNetwork, i: int) -> tuple[int, int]:
    """``(in_degree, out_degree)`` of node ``i``."""
    mask = np.ones(lon.n_nodes, dtype=bool)
    mask[i] = False
    return int((lon.weights[mask, i] > 0).sum()), int((lon.weights[i, mask] > 0).sum())


# -- exports ----------------------------------------------------------------

EDGE_HEADER = "src_rank,dst_rank,weight"


def export_edges(lon: LocalOptimaNetwork) -> str:
    """CSV edge list sorted by (src, dst), self-loops included, 17 significant digits."""
    out = io.StringIO()
    out.write(EDGE_HEADER + "\n")
    src, dst = np.nonzero(lon.weights > 0)
    for i, j in zip(src, dst):
        out.write(f"{lon.optima[i]},{lon.optima[j]},{lon.weights[i, j]:.16e}\n")
    return out.getvalue()


def parse_edges(text: str) -> dict[tuple[int, int], float]:
    edges = {}
    lines = text.splitlines()
    if not lines or lines[0].strip() != EDGE_HEADER:
        raise ValueError("missing edge list header")
    for lineno, line in enumerate(lines[1:], 2):
        if not line.strip():
            continue
        try:
            a, b, w = line.split(",")
            edges[int(a), int(b)] = float(w)
        except ValueError:
            raise ValueError(f"line {lineno}: malformed edge row {line!r}") from None
    return edges


def export_graphml(lon: LocalOptimaNetwork) -> str:
    ns = "http://graphml.graphdrawing.org/xmlns"
    root = ET.Element("graphml", xmlns=ns)
    for key, target, name, typ in (("d0", "node", "cost", "long"),
                                   ("d1", "node", "basin_size", "long"),
                                   ("d2", "edge", "weight", "double")):
        ET.SubElement(root, "key", {"id": key, "for": target,
                                    "attr.name": name, "attr.type": typ})
    graph = ET.SubElement(root, "graph", id="LON", edgedefault="directed")
    for i, opt in enumerate(lon.optima):
        node = ET.SubElement(graph, "node", id=str(opt))
        ET.SubElement(node, "data", key="d0").text = str(int(lon.costs[i]))
        ET.SubElement(node, "data", key="d1").text = str(int(lon.basin_sizes[i]))
    src, dst = np.nonzero(lon.weights > 0)
    for i, j in zip(src, dst):
        edge = ET.SubElement(graph, "edge", source=str(lon.optima[i]), target=str(lon.optima[j]))
        ET.SubElement(edge, "data", key="d2").text = repr(float(lon.weights[i, j]))
    ET.indent(root)
    return '<?xml version="1.0" encoding="UTF-8"?>\n' + ET.tostring(root, encoding="unicode") + "\n"
