"""Local optima networks of the quadratic assignment problem.

Generate uniform and real-like QAP instances, map every configuration to
its local optimum under best-improvement pairwise exchange, build the
weighted network between basins and measure it.
"""
from .generators import (GeneratorConfig, gen_real_like, gen_uniform, generate,
                         parse_instance, serialize_instance)
from .landscape import BasinMap, global_optima, hill_climb, map_basins
from .lon import LocalOptimaNetwork, build_lon, export_edges, export_graphml
from .metrics import MetricsReport, compute_metrics
from .qap import QapInstance, cost, fitness, neighbors, rank, swap_delta, unrank

__all__ = [
    "BasinMap", "GeneratorConfig", "LocalOptimaNetwork", "MetricsReport", "QapInstance",
    "build_lon", "compute_metrics", "cost", "export_edges", "export_graphml", "fitness",
    "gen_real_like", "gen_uniform", "generate", "global_optima", "hill_climb", "map_basins",
    "neighbors", "parse_instance", "rank", "serialize_instance", "swap_delta", "unrank",
]
__version__ = "0.1.0"
