"""QAP instances, cost evaluation and the pairwise-exchange neighborhood.

Permutations are 0-based: ``p[i]`` is the location assigned to facility
``i``. The cost of ``p`` is ``sum_ij dist[i, j] * flow[p[i], p[j]]``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from math import factorial

import numpy as np


class InvalidArgumentError(ValueError):
    """Raised when an argument does not fit the instance or permutation."""


@dataclass(frozen=True, eq=False)
class QapInstance:
    """An ``n x n`` distance matrix and an ``n x n`` flow matrix.

    Both matrices are stored as read-only ``int64`` arrays with a zero
    diagonal. ``meta`` carries generator information (class, seed, params).
    """

    dist: np.ndarray
    flow: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        dist = _as_int_matrix(self.dist, "dist")
        flow = _as_int_matrix(self.flow, "flow")
        if dist.shape != flow.shape:
            raise InvalidArgumentError(
                f"dist is {dist.shape} but flow is {flow.shape}")
        if dist.shape[0] < 1:
            raise InvalidArgumentError("empty instance")
        for name, m in (("dist", dist), ("flow", flow)):
            if (m < 0).any():
                raise InvalidArgumentError(f"{name} has negative entries")
            if np.diagonal(m).any():
                raise InvalidArgumentError(f"{name} has a nonzero diagonal")
            m.setflags(write=False)
        object.__setattr__(self, "dist", dist)
        object.__setattr__(self, "flow", flow)
        object.__setattr__(self, "meta", dict(self.meta))

    @property
    def n(self) -> int:
        return self.dist.shape[0]

    def __eq__(self, other):
        if not isinstance(other, QapInstance):
            return NotImplemented
        return (np.array_equal(self.dist, other.dist)
                and np.array_equal(self.flow, other.flow)
                and self.meta == other.meta)

    def __repr__(self):
        cls = self.meta.get("class", "?")
        return f"QapInstance(n={self.n}, class={cls!r})"


def _as_int_matrix(m, name):
    arr = np.asarray(m)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise InvalidArgumentError(f"{name} must be a square matrix, got shape {arr.shape}")
    if arr.dtype.kind == "f":
        if not np.array_equal(arr, np.round(arr)):
            raise InvalidArgumentError(f"{name} must hold integers")
    elif arr.dtype.kind not in "iub":
        raise InvalidArgumentError(f"{name} must hold integers, got dtype {arr.dtype}")
    return np.array(arr, dtype=np.int64)


def check_permutation(p, n: int) -> np.ndarray:
    """Return ``p`` as an int array, raising if it is not a permutation of range(n)."""
    arr = np.asarray(p)
    if arr.ndim != 1 or arr.shape[0] != n:
        raise InvalidArgumentError(f"expected a permutation of length {n}, got shape {arr.shape}")
    if arr.dtype.kind not in "iu":
        raise InvalidArgumentError("permutation entries must be integers")
    arr = arr.astype(np.int64)
    if not np.array_equal(np.sort(arr), np.arange(n)):
        raise InvalidArgumentError(f"{p!r} is not a permutation of 0..{n - 1}")
    return arr


def cost(inst: QapInstance, p) -> int:
    p = check_permutation(p, inst.n)
    return int((inst.dist * inst.flow[np.ix_(p, p)]).sum())


def fitness(inst: QapInstance, p) -> int:
    """Fitness is the negated cost, so maximizing fitness minimizes cost."""
    return -cost(inst, p)


def swap_delta(inst: QapInstance, p, r: int, s: int) -> int:
    """Cost change caused by exchanging positions ``r`` and ``s`` of ``p``.

    Touches only rows and columns ``r`` and ``s``; valid for asymmetric
    matrices.
    """
    n = inst.n
    p = check_permutation(p, n)
    if not (0 <= r < n and 0 <= s < n) or r == s:
        raise InvalidArgumentError(f"invalid swap positions ({r}, {s}) for n={n}")
    a, b = inst.dist, inst.flow
    pr, ps = p[r], p[s]
    k = np.ones(n, dtype=bool)
    k[[r, s]] = False
    pk = p[k]
    d = np.dot(a[r, k] - a[s, k], b[ps, pk] - b[pr, pk])
    d += np.dot(a[k, r] - a[k, s], b[pk, ps] - b[pk, pr])
    d += (a[r, r] - a[s, s]) * (b[ps, ps] - b[pr, pr])
    d += (a[r, s] - a[s, r]) * (b[ps, pr] - b[pr, ps])
    return int(d)


def swap(p, r: int, s: int) -> np.ndarray:
    q = np.array(p, copy=True)
    q[r], q[s] = q[s], q[r]
    return q


def swap_pairs(n: int) -> list[tuple[int, int]]:
    """All position pairs ``r < s`` in lexicographic order."""
    return list(combinations(range(n), 2))


def neighbors(p) -> list[tuple[int, int]]:
    """The n(n-1)/2 pairwise exchanges available from ``p``."""
    return swap_pairs(len(p))


def rank(p) -> int:
    """Lexicographic (Lehmer code) rank of a permutation of range(n)."""
    p = check_permutation(p, len(p))
    n = len(p)
    r = 0
    for i in range(n):
        smaller_after = int((p[i + 1:] < p[i]).sum())
        r += smaller_after * factorial(n - 1 - i)
    return r


def unrank(r: int, n: int) -> np.ndarray:
    """Inverse of :func:`rank`."""
    if not 0 <= r < factorial(n):
        raise InvalidArgumentError(f"rank {r} outside [0, {n}!)")
    avail = list(range(n))
    out = []
    for i in range(n):
        d, r = divmod(r, factorial(n - 1 - i))
        out.append(avail.pop(d))
    return np.array(out, dtype=np.int64)


# -- vectorized helpers over the whole configuration space ------------------

def all_permutations(n: int) -> np.ndarray:
    """Every permutation of range(n) as rows of an ``(n!, n)`` int8 array, row i has rank i."""
    perms = np.zeros((1, 0), dtype=np.int8)
    for k in range(1, n + 1):
        m = perms.shape[0]
        out = np.empty((k * m, k), dtype=np.int8)
        for v in range(k):
            blk = out[v * m:(v + 1) * m]
            blk[:, 0] = v
            # the remaining values, relabelled around v, keep their lexicographic order
            blk[:, 1:] = perms + (perms >= v)
        perms = out
    return perms


def all_costs(inst: QapInstance, perms: np.ndarray) -> np.ndarray:
    """Cost of every row of ``perms``."""
    out = np.zeros(perms.shape[0], dtype=np.int64)
    a, b = inst.dist, inst.flow
    for i, j in zip(*np.nonzero(a)):
        out += a[i, j] * b[perms[:, i], perms[:, j]]
    return out


def swap_rank_delta(perms: np.ndarray, r: int, s: int) -> np.ndarray:
    """``rank(swap(p, r, s)) - rank(p)`` for every row ``p`` of ``perms``.

    Only the Lehmer digits at positions r..s change; each change is a count
    of later values lying strictly between ``p[r]`` and ``p[s]``.
    """
    n = perms.shape[1]
    u = perms[:, r]
    v = perms[:, s]
    lo = np.minimum(u, v)
    hi = np.maximum(u, v)
    fact = [factorial(n - 1 - i) for i in range(n)]
    digit_r = np.ones(perms.shape[0], dtype=np.int64)
    total = np.zeros(perms.shape[0], dtype=np.int64)
    tail = np.zeros(perms.shape[0], dtype=np.int64)
    for j in range(r + 1, n):
        if j == s:
            continue
        w = perms[:, j]
        btw = (w > lo) & (w < hi)
        digit_r += btw
        if j < s:
            total += fact[j] * btw
        else:
            tail += btw
    total += fact[r] * digit_r - fact[s] * tail
    return np.where(u < v, total, -total)
