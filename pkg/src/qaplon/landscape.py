"""Best-improvement hill climbing and exhaustive basin mapping.

Configurations are identified by their lexicographic rank in ``[0, n!)``.
A hill climb moves to the cheapest neighbor as long as it is strictly
cheaper; ties between equally cheap improving neighbors go to the
lexicographically smallest swap ``(r, s)``.
"""
from __future__ import annotations

import struct
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from math import factorial

import numpy as np

from .qap import (QapInstance, all_costs, all_permutations, rank,
                  swap, swap_delta, swap_pairs, swap_rank_delta, unrank)

MAX_N = 12
CHUNK = 1 << 18


class ResourceLimitError(RuntimeError):
    pass


@dataclass(eq=False)
class BasinMap:
    """Partition of the configuration space into basins of attraction.

    ``owner[s]`` is the rank of the local optimum reached from ``s``.
    ``optima`` is sorted; ``optimum_costs`` and ``sizes`` are aligned with it.
    """

    n: int
    owner: np.ndarray
    costs: np.ndarray
    optima: np.ndarray
    optimum_costs: np.ndarray
    sizes: np.ndarray
    neutrality_count: int | None

    @property
    def search_space_size(self) -> int:
        return self.owner.shape[0]

    def size_of(self, opt: int) -> int:
        i = np.searchsorted(self.optima, opt)
        if i == len(self.optima) or self.optima[i] != opt:
            raise KeyError(opt)
        return int(self.sizes[i])


def hill_climb(inst: QapInstance, start: int) -> int:
    """Climb from configuration ``start`` and return the rank of the optimum reached."""
    p = unrank(start, inst.n)
    pairs = swap_pairs(inst.n)
    while True:
        best, best_d = None, 0
        for r, s in pairs:
            d = swap_delta(inst, p, r, s)
            if d < best_d:
                best, best_d = (r, s), d
        if best is None:
            return rank(p)
        p = swap(p, *best)


def _check_size(n: int, max_n: int) -> None:
    if n > min(max_n, MAX_N):
        raise ResourceLimitError(f"n={n} exceeds the exhaustive enumeration limit ({min(max_n, MAX_N)})")


def _chunks(total: int, size: int = CHUNK):
    return [(lo, min(lo + size, total)) for lo in range(0, total, size)]


def _map(fn, chunks, workers: int):
    if workers > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(workers) as ex:
            return list(ex.map(fn, chunks))
    return [fn(c) for c in chunks]


def iter_neighbor_ranks(perms: np.ndarray, lo: int, hi: int):
    """Yield neighbor ranks of configurations ``lo..hi-1``, one array per swap, in swap order."""
    n = perms.shape[1]
    block = perms[lo:hi]
    ids = np.arange(lo, hi, dtype=np.int64)
    for r, s in swap_pairs(n):
        yield ids + swap_rank_delta(block, r, s)


def successors(costs: np.ndarray, perms: np.ndarray, workers: int = 1):
    """Best-improving successor of every configuration (itself at a local optimum).

    Returns ``(succ, neutral)`` where ``neutral`` counts configurations whose
    cheapest neighbor costs exactly as much as they do.
    """
    total = perms.shape[0]

    def work(bounds):
        lo, hi = bounds
        best_cost = np.full(hi - lo, np.iinfo(np.int64).max)
        best = np.arange(lo, hi, dtype=np.int64)
        for nbr in iter_neighbor_ranks(perms, lo, hi):
            nc = costs[nbr]
            better = nc < best_cost  # strict, so the earliest swap wins a tie
            best_cost[better] = nc[better]
            best[better] = nbr[better]
        own = costs[lo:hi]
        improving = best_cost < own
        succ = np.where(improving, best, np.arange(lo, hi, dtype=np.int64))
        return succ, int((best_cost == own).sum())

    parts = _map(work, _chunks(total), workers)
    succ = np.concatenate([p[0] for p in parts])
    return succ, sum(p[1] for p in parts)


def resolve_owners(succ: np.ndarray) -> np.ndarray:
    """Follow successor pointers to their fixed points by repeated pointer jumping."""
    owner = succ.copy()
    while True:
        nxt = owner[owner]
        if np.array_equal(nxt, owner):
            return owner
        owner = nxt


def map_basins(inst: QapInstance, workers: int = 1, max_n: int = MAX_N) -> BasinMap:
    """Run the hill climb from every configuration and collect the basins."""
    n = inst.n
    _check_size(n, max_n)
    perms = all_permutations(n)
    costs = all_costs(inst, perms)
    succ, neutral = successors(costs, perms, workers)
    owner = resolve_owners(succ)
    optima = np.flatnonzero(succ == np.arange(len(succ)))
    sizes = np.bincount(np.searchsorted(optima, owner), minlength=len(optima))
    return BasinMap(n=n, owner=owner, costs=costs, optima=optima,
                    optimum_costs=costs[optima], sizes=sizes.astype(np.int64),
                    neutrality_count=neutral)


def global_optima(bm: BasinMap, inst: QapInstance | None = None):
    """All optima of minimum cost, that cost, and the canonical one.

    The canonical global optimum has the largest basin among the tied optima,
    with the smaller rank breaking remaining ties. Returns
    ``(ids, cost, canonical)``.
    """
    if inst is not None and inst.n != bm.n:
        raise ValueError("basin map was built for a different dimension")
    c = bm.optimum_costs.min()
    idx = np.flatnonzero(bm.optimum_costs == c)
    # lexsort: last key is primary -> largest size first, then smallest rank
    canon = idx[np.lexsort((bm.optima[idx], -bm.sizes[idx]))[0]]
    return bm.optima[idx].copy(), int(c), int(bm.optima[canon])


# -- owner array cache ------------------------------------------------------

_HEADER = struct.Struct("<QQ")


def save_owner(bm: BasinMap, path) -> None:
    """Binary dump: little-endian u64 n, u64 n!, then n! little-endian int64 ranks."""
    with open(path, "wb") as f:
        f.write(_HEADER.pack(bm.n, bm.search_space_size))
        f.write(bm.owner.astype("<i8").tobytes())


def load_owner(path) -> tuple[int, np.ndarray]:
    with open(path, "rb") as f:
        head = f.read(_HEADER.size)
        if len(head) != _HEADER.size:
            raise ValueError(f"{path}: truncated header")
        n, total = _HEADER.unpack(head)
        if total != factorial(n):
            raise ValueError(f"{path}: header says n={n} but {total} entries")
        owner = np.frombuffer(f.read(), dtype="<i8")
    if owner.shape[0] != total:
        raise ValueError(f"{path}: expected {total} entries, found {owner.shape[0]}")
    return int(n), owner.astype(np.int64)


def basins_from_owner(inst: QapInstance, owner: np.ndarray) -> BasinMap:
    """Rebuild a BasinMap from a cached owner array (costs are recomputed)."""
    n = inst.n
    if owner.shape[0] != factorial(n):
        raise ValueError("owner array does not match the instance dimension")
    perms = all_permutations(n)
    costs = all_costs(inst, perms)
    optima = np.unique(owner)
    if not np.array_equal(owner[optima], optima):
        raise ValueError("owner array is not idempotent on its optima")
    sizes = np.bincount(np.searchsorted(optima, owner), minlength=len(optima))
    # the dump does not carry the neutrality diagnostic
    return BasinMap(n=n, owner=owner, costs=costs, optima=optima,
                    optimum_costs=costs[optima], sizes=sizes.astype(np.int64),
                    neutrality_count=None)
