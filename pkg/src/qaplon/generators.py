"""Random uniform and real-like QAP instance generators, plus the instance file format.

Uniform instances draw every off-diagonal flow from ``[1, f_max]``.
Real-like instances draw flows from ``round(10 ** ((B - A) * X + A))`` with
``X ~ U[0, 1)``, which is sparse when ``A < 0``, and place locations in
clusters. In both classes distances are rounded Euclidean distances between
points in the plane (or, for uniform instances, optionally plain uniform
integers).
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass

import numpy as np

from .qap import QapInstance

UNIFORM = "uniform"
REAL_LIKE = "real-like"
CLASSES = (UNIFORM, REAL_LIKE)


class ConfigurationError(ValueError):
    pass


class ParseError(ValueError):
    def __init__(self, msg, line=None):
        self.line = line
        super().__init__(f"line {line}: {msg}" if line is not None else msg)


@dataclass(frozen=True)
class GeneratorConfig:
    cls: str
    n: int
    seed: int = 0
    d_max: float = 100.0
    f_max: int = 100
    M: float = 0.0
    K: int = 1
    m: float = 100.0
    A: float = -10.0
    B: float = 5.0
    distance_mode: str = "euclidean-points"

    def __post_init__(self):
        if self.cls not in CLASSES:
            raise ConfigurationError(f"unknown instance class {self.cls!r}")
        if self.n < 2:
            raise ConfigurationError("n must be >= 2")
        if self.f_max < 1:
            raise ConfigurationError("f_max must be >= 1")
        if not self.A < self.B or self.B <= 0:
            raise ConfigurationError("need A < B and B > 0")
        if self.K < 1:
            raise ConfigurationError("K must be >= 1")
        if self.m <= 0 and self.M <= 0:
            raise ConfigurationError("need m > 0 or M > 0")
        if self.d_max <= 0:
            raise ConfigurationError("d_max must be > 0")
        if self.distance_mode not in ("euclidean-points", "uniform-integers"):
            raise ConfigurationError(f"unknown distance_mode {self.distance_mode!r}")
        if self.distance_mode == "uniform-integers" and self.cls != UNIFORM:
            raise ConfigurationError("uniform-integers distances only apply to the uniform class")

    def params(self) -> dict:
        """Generator parameters relevant to this class, for instance metadata."""
        if self.cls == UNIFORM:
            keys = ("d_max", "f_max", "distance_mode")
        else:
            keys = ("M", "K", "m", "A", "B")
        d = asdict(self)
        return {k: d[k] for k in keys}


def round_half_away(x):
    """Nearest integer, ties away from zero."""
    x = np.asarray(x, dtype=float)
    return (np.sign(x) * np.floor(np.abs(x) + 0.5)).astype(np.int64)


def points_in_disc(rng: np.random.Generator, k: int, radius: float, center=(0.0, 0.0)):
    """``k`` points uniform over the area of a disc."""
    r = radius * np.sqrt(rng.random(k))
    theta = 2 * np.pi * rng.random(k)
    return np.column_stack([center[0] + r * np.cos(theta), center[1] + r * np.sin(theta)])


def distance_matrix(points: np.ndarray) -> np.ndarray:
    diff = points[:, None, :] - points[None, :, :]
    d = round_half_away(np.sqrt((diff ** 2).sum(-1)))
    np.fill_diagonal(d, 0)
    return d


def clustered_points(rng: np.random.Generator, n: int, M: float, K: int, m: float):
    """Clusters of 1..K points in discs of radius m, centers uniform in a disc of radius M."""
    chunks = []
    remaining = n
    while remaining > 0:
        center = points_in_disc(rng, 1, M)[0]
        c = int(rng.integers(1, K + 1))
        c = min(c, remaining)
        chunks.append(points_in_disc(rng, c, m, center))
        remaining -= c
    return np.vstack(chunks)


def real_like_flow(x, A: float, B: float):
    """The flow law ``round(10 ** ((B - A) * x + A))`` for ``x`` in [0, 1]."""
    return round_half_away(10.0 ** ((B - A) * np.asarray(x, dtype=float) + A))


def _meta(cfg: GeneratorConfig) -> dict:
    return {"class": cfg.cls, "seed": cfg.seed, "params": cfg.params()}


def gen_uniform(cfg: GeneratorConfig) -> QapInstance:
    if cfg.cls != UNIFORM:
        raise ConfigurationError(f"gen_uniform called with class {cfg.cls!r}")
    rng = np.random.default_rng(cfg.seed)
    n = cfg.n
    if cfg.distance_mode == "euclidean-points":
        dist = distance_matrix(points_in_disc(rng, n, cfg.d_max))
    else:
        dist = np.zeros((n, n), dtype=np.int64)
        iu = np.triu_indices(n, 1)
        dist[iu] = rng.integers(1, int(cfg.d_max) + 1, size=len(iu[0]))
        dist = dist + dist.T
    flow = rng.integers(1, cfg.f_max + 1, size=(n, n), dtype=np.int64)
    np.fill_diagonal(flow, 0)
    return QapInstance(dist, flow, _meta(cfg))


def gen_real_like(cfg: GeneratorConfig) -> QapInstance:
    if cfg.cls != REAL_LIKE:
        raise ConfigurationError(f"gen_real_like called with class {cfg.cls!r}")
    rng = np.random.default_rng(cfg.seed)
    n = cfg.n
    dist = distance_matrix(clustered_points(rng, n, cfg.M, cfg.K, cfg.m))
    off = ~np.eye(n, dtype=bool)
    flow = np.zeros((n, n), dtype=np.int64)
    # an all-zero flow matrix makes every configuration equivalent: redraw from the same stream
    while not flow.any():
        flow[off] = real_like_flow(rng.random(n * (n - 1)), cfg.A, cfg.B)
    return QapInstance(dist, flow, _meta(cfg))


def generate(cfg: GeneratorConfig) -> QapInstance:
    return gen_uniform(cfg) if cfg.cls == UNIFORM else gen_real_like(cfg)


# -- instance file format ---------------------------------------------------

def serialize_instance(inst: QapInstance) -> str:
    """QAPLIB-style text: n, blank line, rows of dist, blank line, rows of flow.

    Metadata goes in leading ``# key=json`` comment lines.
    """
    lines = [f"# {k}={json.dumps(v, sort_keys=True)}" for k, v in inst.meta.items()]
    lines.append(str(inst.n))
    for m in (inst.dist, inst.flow):
        lines.append("")
        lines.extend(" ".join(str(int(x)) for x in row) for row in m)
    return "\n".join(lines) + "\n"


def parse_instance(text: str) -> QapInstance:
    meta = {}
    rows = []  # (line number, list of ints)
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            body = line[1:].strip()
            if "=" in body:
                key, val = body.split("=", 1)
                try:
                    meta[key.strip()] = json.loads(val)
                except json.JSONDecodeError:
                    meta[key.strip()] = val.strip()
            continue
        try:
            rows.append((lineno, [int(tok) for tok in line.split()]))
        except ValueError:
            raise ParseError(f"non-integer token in {line!r}", lineno) from None
    if not rows:
        raise ParseError("no dimension line found")
    lineno, first = rows[0]
    if len(first) != 1 or first[0] < 1:
        raise ParseError("first line must hold the dimension n", lineno)
    n = first[0]
    body = rows[1:]
    if len(body) != 2 * n:
        where = body[-1][0] if body else lineno
        raise ParseError(f"expected {2 * n} matrix rows, found {len(body)}", where)
    mats = []
    for part in (body[:n], body[n:]):
        for lineno, vals in part:
            if len(vals) != n:
                raise ParseError(f"row has {len(vals)} entries, expected {n}", lineno)
            if any(v < 0 for v in vals):
                raise ParseError("negative entry", lineno)
        mats.append(np.array([vals for _, vals in part], dtype=np.int64))
    for (lineno, _), name, m in ((body[0], "dist", mats[0]), (body[n], "flow", mats[1])):
        if np.diagonal(m).any():
            raise ParseError(f"{name} matrix has a nonzero diagonal", lineno)
    return QapInstance(mats[0], mats[1], meta)


def write_instance(inst: QapInstance, path) -> None:
    with open(path, "w") as f:
        f.write(serialize_instance(inst))


def read_instance(path) -> QapInstance:
    with open(path) as f:
        return parse_instance(f.read())
