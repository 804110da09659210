"""Acceptance gate: one PASS/FAIL line per criterion in the terminal summary.

The trend checks run the grid in ``tests/acceptance.cfg``. The n = 9, 10 run
is opt-in with ``QAPLON_EXTENDED=1``.
"""
import math
import os
from dataclasses import replace
from math import factorial
from pathlib import Path

import numpy as np
import pytest

import oracles
from qaplon.experiment import cell_dir, cell_seed, parse_config_text, run_batch
from qaplon.generators import (CLASSES, REAL_LIKE, UNIFORM, GeneratorConfig,
                               gen_real_like, gen_uniform, generate,
                               read_instance)
from qaplon.landscape import map_basins
from qaplon.lon import build_lon, out_strengths
from qaplon.metrics import compute_metrics

HERE = Path(__file__).parent
CFG = parse_config_text((HERE / "acceptance.cfg").read_text())
DIMS = CFG.dimensions


@pytest.fixture(scope="module")
def batch(tmp_path_factory):
    cfg = replace(CFG, output_dir=str(tmp_path_factory.mktemp("acceptance") / "run1"))
    res = run_batch(cfg)
    assert res.ok and not res.skipped
    return cfg, res


def mean(res, cls, n, metric):
    return res.aggregate(cls, n, metric).mean


def table(res, metric):
    return "; ".join(f"{cls} " + " ".join(f"{mean(res, cls, n, metric):.4g}" for n in DIMS)
                     for cls in CLASSES)


# -- 1. oracle equivalence ---------------------------------------------------

def test_1_oracle_equivalence(verdict):
    checked, bad = 0, []
    for n in (5, 6):
        for cls in CLASSES:
            for i in range(10):
                inst = generate(GeneratorConfig(cls, n, seed=cell_seed(7, cls, n, i)))
                perms, cost, owner = oracles.landscape(inst.dist.tolist(), inst.flow.tolist())
                want, extras = oracles.metrics(n, perms, cost, owner)
                bm = map_basins(inst)
                lon = build_lon(inst, bm)
                report = compute_metrics(bm, lon)
                tag = f"{cls} n={n} #{i}"
                climbs = [owner[p] for p in perms]
                if [tuple(perms[o]) for o in bm.owner] != climbs:
                    bad.append(f"{tag}: basins")
                if lon.counts.tolist() != extras["counts"] or lon.weights.tolist() != extras["w"]:
                    bad.append(f"{tag}: weights")
                for key, value in want.items():
                    got = getattr(report, key)
                    if value is None or isinstance(value, int):
                        ok = got == value
                    else:
                        ok = got is not None and math.isclose(got, value, rel_tol=1e-9, abs_tol=1e-12)
                    if not ok:
                        bad.append(f"{tag}: {key} {got} != {value}")
                checked += 1
    verdict("1 oracle equivalence (basins, exact weights, metrics <= 1e-9 rel)", not bad,
            f"{checked} instances" + (f"; {bad[:3]}" if bad else ""))


# -- 2. conservation and partition invariants --------------------------------

def test_2_conservation_invariants(batch, verdict):
    cfg, res = batch
    worst, bad = 0.0, []
    for (cls, n, i) in sorted(res.reports):
        inst = read_instance(cell_dir(cfg, cls, n, i) / "instance.dat")
        bm = map_basins(inst)
        lon = build_lon(inst, bm)
        if bm.sizes.sum() != factorial(n) or not np.array_equal(np.unique(bm.owner), bm.optima):
            bad.append((cls, n, i, "partition"))
        row = np.abs(lon.weights.sum(axis=1) - 1).max()
        out = np.abs(out_strengths(lon) + lon.self_loops - 1).max()
        worst = max(worst, row, out)
        if row > 1e-12 or out > 1e-12:
            bad.append((cls, n, i, "conservation"))
    verdict("2 conservation and partition invariants", not bad,
            f"{len(res.reports)} instances, max deviation {worst:.1e}" + (f"; {bad[:3]}" if bad else ""))


# -- 3. trends ---------------------------------------------------------------

def test_3a_network_size(batch, verdict):
    _, res = batch
    ok = all(mean(res, c, a, "n_nodes") < mean(res, c, b, "n_nodes")
             for c in CLASSES for a, b in zip(DIMS, DIMS[1:]))
    ok &= all(mean(res, REAL_LIKE, n, "n_nodes") < mean(res, UNIFORM, n, "n_nodes") for n in DIMS)
    verdict("3a n_nodes increases with n; real-like < uniform", ok, table(res, "n_nodes"))


def test_3b_global_basin(batch, verdict):
    _, res = batch
    m = "rel_global_basin"
    ok = all(mean(res, c, a, m) > mean(res, c, b, m) for c in CLASSES for a, b in zip(DIMS, DIMS[1:]))
    ok &= all(mean(res, REAL_LIKE, n, m) > mean(res, UNIFORM, n, m) for n in DIMS)
    verdict("3b rel_global_basin decreases with n; real-like > uniform", ok, table(res, m))


def test_3c_fitness_basin_correlation(batch, verdict):
    _, res = batch
    rows = [res.aggregate(c, n, "corr_fitness_logbasin") for c in CLASSES for n in DIMS]
    ok = all(r.mean is not None and r.mean > 0 and r.ci_low > 0 for r in rows)
    lowest = min(rows, key=lambda r: r.ci_low if r.ci_low is not None else -math.inf)
    verdict("3c corr_fitness_logbasin > 0 with CI excluding 0", ok,
            f"lowest CI bound {lowest.ci_low:.3f} ({lowest.cls} n={lowest.n}); " + table(res, "corr_fitness_logbasin"))


def test_3d_self_loops_dominate(batch, verdict):
    _, res = batch
    ratio = {(c, n): mean(res, c, n, "avg_w_ii") / mean(res, c, n, "avg_w_ij_offdiag")
             for c in CLASSES for n in DIMS}
    ok = all(r > 1 for r in ratio.values())
    ok &= ratio[UNIFORM, DIMS[-1]] > ratio[UNIFORM, DIMS[0]]
    detail = "; ".join(f"{c} " + " ".join(f"{ratio[c, n]:.3g}" for n in DIMS) for c in CLASSES)
    verdict("3d avg_w_ii > avg_w_ij; uniform ratio grows from n=5 to n=8", ok, "w_ii/w_ij " + detail)


def test_3e_transitivity(batch, verdict):
    _, res = batch
    m = "transitivity"
    ok = all(mean(res, c, n, m) >= 0.90 for c in CLASSES for n in DIMS)
    ok &= all(mean(res, REAL_LIKE, n, m) >= 0.99 for n in DIMS)
    verdict("3e transitivity >= 0.90, real-like >= 0.99", ok, table(res, m))


def test_3f_disparity(batch, verdict):
    _, res = batch
    ok = True
    for c in CLASSES:
        y = [mean(res, c, n, "mean_disparity") for n in DIMS]
        base = [1 / mean(res, c, n, "avg_out_degree") for n in DIMS]
        ok &= all(a > b for a, b in zip(y, base))
        slope = np.polyfit(DIMS, y, 1)[0]
        ok &= slope < 0 and y[-1] < y[0]
    detail = table(res, "mean_disparity") + " vs 1/k: " + "; ".join(
        f"{c} " + " ".join(f"{1 / mean(res, c, n, 'avg_out_degree'):.4g}" for n in DIMS) for c in CLASSES)
    verdict("3f disparity above 1/k and trending down", ok, detail)


def test_3g_distance_to_global(batch, verdict):
    _, res = batch
    m = "avg_dist_to_global_opt"
    ok = all(mean(res, c, a, m) < mean(res, c, b, m) for c in CLASSES for a, b in zip(DIMS, DIMS[1:]))
    ok &= mean(res, UNIFORM, DIMS[-1], m) > mean(res, REAL_LIKE, DIMS[-1], m)
    verdict("3g avg_dist_to_global_opt increases with n; uniform > real-like at n=8", ok, table(res, m))


# -- 4. extended run ---------------------------------------------------------

@pytest.mark.extended
@pytest.mark.skipif(os.environ.get("QAPLON_EXTENDED") != "1", reason="set QAPLON_EXTENDED=1")
def test_4_extended_near_optimal_mass(tmp_path, verdict):
    cfg = parse_config_text((HERE / "extended.cfg").read_text())
    cfg = replace(cfg, output_dir=str(tmp_path / "ext"), workers=os.cpu_count() or 1)
    res = run_batch(cfg)
    u = res.aggregate(UNIFORM, 10, "near_opt_mass").mean
    r = res.aggregate(REAL_LIKE, 10, "near_opt_mass").mean
    verdict("4 extended: near_opt_mass uniform > real-like at n=10", res.ok and u > r,
            f"uniform {u:.4g}, real-like {r:.4g}")


# -- 5. generator statistics -------------------------------------------------

def test_5_generator_statistics(verdict):
    off = lambda m: m[~np.eye(m.shape[0], dtype=bool)]  # noqa: E731
    zeros, total = 0, 0
    seed = 0
    while total < 10**5:
        f = off(gen_real_like(GeneratorConfig(REAL_LIKE, 100, seed=seed, A=-10, B=5)).flow)
        zeros += int((f == 0).sum())
        total += f.size
        seed += 1
    frac = zeros / total
    flows = np.concatenate([off(gen_uniform(GeneratorConfig(UNIFORM, 100, seed=s)).flow)
                            for s in range(11)]).astype(float)
    se = math.sqrt((100**2 - 1) / 12 / flows.size)
    z = (flows.mean() - 50.5) / se
    ok = abs(frac - 0.646) <= 0.03 and flows.min() >= 1 and flows.max() <= 100 and abs(z) < 3
    verdict("5 generator statistics", ok,
            f"zero fraction {frac:.4f} over {total} entries; uniform mean {flows.mean():.3f} "
            f"({z:+.2f} SE) over {flows.size}, range [{flows.min():.0f}, {flows.max():.0f}]")


# -- 6. determinism ----------------------------------------------------------

def test_6_determinism(batch, tmp_path, verdict):
    cfg, _ = batch
    again = replace(cfg, output_dir=str(tmp_path / "run2"))
    run_batch(again)
    a, b = Path(cfg.output_dir), Path(again.output_dir)
    names = ["metrics.csv", "aggregate.csv"] + sorted(
        str(p.relative_to(a)) for p in a.rglob("*") if p.suffix in (".json", ".csv", ".dat"))
    diff = [n for n in names if (a / n).read_bytes() != (b / n).read_bytes()]
    verdict("6 determinism: byte-identical metrics and aggregates", not diff,
            f"{len(names)} files compared" + (f"; differ: {diff[:3]}" if diff else ""))
