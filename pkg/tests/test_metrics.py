import math
from types import SimpleNamespace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from conftest import generated
from qaplon.landscape import map_basins
from qaplon.lon import LocalOptimaNetwork, build_lon
from qaplon.metrics import (METRIC_COLUMNS, MetricsReport, basin_stats,
                            compute_metrics, count_nodes_edges, disparity,
                            fitness_basin_correlation, near_optimal_mass,
                            path_lengths, path_stats, pearson, strength_stats,
                            transitivity, weight_averages)


def make_lon(w, costs=None, sizes=None, global_node=0):
    w = np.asarray(w, dtype=float)
    k = len(w)
    costs = np.arange(10, 10 + k) if costs is None else np.asarray(costs)
    sizes = np.ones(k, dtype=np.int64) if sizes is None else np.asarray(sizes)
    return LocalOptimaNetwork(n=0, optima=np.arange(k), costs=costs, basin_sizes=sizes,
                              counts=np.zeros((k, k), dtype=np.int64), weights=w,
                              global_node=global_node)


def space(total):
    return SimpleNamespace(search_space_size=total)


def complete(k):
    w = np.full((k, k), 1.0 / k)
    return make_lon(w)


def test_two_node_network():
    lon = make_lon([[0.8, 0.2], [0.4, 0.6]])
    assert weight_averages(lon) == pytest.approx((0.7, 0.3))
    avg, expected, table = strength_stats(lon)
    assert avg == pytest.approx(0.3) and expected == pytest.approx(0.3)
    assert table == [(1, pytest.approx(0.3), 2)]
    d = path_lengths(lon)
    assert d[0, 1] == pytest.approx(5.0) and d[1, 0] == pytest.approx(2.5)
    apl, to_g, unreachable = path_stats(lon)
    assert apl == pytest.approx(3.75)
    assert to_g == pytest.approx(2.5)
    assert unreachable == 0
    assert count_nodes_edges(lon) == (2, 2, 4)


def test_single_node_network():
    lon = make_lon([[1.0]], sizes=[24])
    report = compute_metrics(SimpleNamespace(n=4, search_space_size=24, neutrality_count=0), lon)
    assert (report.n_nodes, report.n_edges_excl_self, report.n_edges_incl_self) == (1, 0, 1)
    assert report.rel_global_basin == report.rel_max_basin == report.rel_median_basin == 1.0
    assert report.avg_w_ii == 1.0
    for name in ("avg_w_ij_offdiag", "corr_fitness_logbasin", "corr_fitness_instrength",
                 "transitivity", "mean_disparity", "avg_path_length", "avg_dist_to_global_opt"):
        assert getattr(report, name) is None, name
    assert report.unreachable_pair_count == 0
    assert report.near_opt_mass == 1.0


@pytest.mark.parametrize("k", [3, 4, 7])
def test_complete_network(k):
    lon = complete(k)
    assert count_nodes_edges(lon) == (k, k * (k - 1), k * k)
    assert transitivity(lon) == pytest.approx(1.0)
    mean_y2, table = disparity(lon)
    assert mean_y2 == pytest.approx(1 / (k - 1))
    assert table == [(k - 1, pytest.approx(1 / (k - 1)), pytest.approx(1 / (k - 1)), k)]


def test_path_has_no_triangles():
    w = [[0.5, 0.5, 0], [0.3, 0.4, 0.3], [0, 0.5, 0.5]]
    assert transitivity(make_lon(w)) == 0.0


def test_transitivity_undefined_without_triples():
    assert transitivity(make_lon([[0.5, 0.5, 0], [0.5, 0.5, 0], [0, 0, 1]])) is None


def test_basin_relative_sizes():
    lon = make_lon([[0.9, 0.1], [0.5, 0.5]], costs=[5, 7], sizes=[119, 1])
    assert basin_stats(space(120), lon) == pytest.approx((119 / 120, 119 / 120, 1 / 120))


def test_median_is_lower_median():
    lon = make_lon(np.eye(4), sizes=[1, 2, 3, 18])
    assert basin_stats(space(24), lon)[2] == 2 / 24


def test_correlation_cases():
    assert pearson([1, 2], [3, 8]) == pytest.approx(1.0)
    assert pearson([1, 2], [8, 3]) == pytest.approx(-1.0)
    assert pearson([1], [1]) is None
    lon = make_lon(np.eye(3), costs=[1, 2, 3], sizes=[4, 4, 4])
    assert fitness_basin_correlation(space(12), lon) is None


def test_near_optimal_mass_bounds():
    lon = make_lon(np.eye(3), costs=[100, 104, 200], sizes=[3, 5, 16])
    assert near_optimal_mass(space(24), lon, 0.0) == 3 / 24
    assert near_optimal_mass(space(24), lon, 0.05) == 8 / 24
    assert near_optimal_mass(space(24), lon, math.inf) == 1.0
    masses = [near_optimal_mass(space(24), lon, e) for e in np.linspace(0, 2, 41)]
    assert masses == sorted(masses)


def test_near_optimal_mass_zero_cost_warns(caplog):
    lon = make_lon(np.eye(2), costs=[0, 3], sizes=[1, 1])
    assert near_optimal_mass(space(2), lon) == 0.5
    assert "cost 0" in caplog.text


def test_disparity_extremes():
    one_edge = make_lon([[0.7, 0.3, 0], [0, 1, 0], [0, 0, 1]])
    mean_y2, table = disparity(one_edge)
    assert mean_y2 == pytest.approx(1.0)
    assert table == [(1, pytest.approx(1.0), 1.0, 1)]
    spread = make_lon([[0.4, 0.2, 0.2, 0.2], [0, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]])
    assert disparity(spread)[0] == pytest.approx(1 / 3)


def test_unreachable_pairs_counted():
    w = [[0.5, 0.5, 0], [0, 1, 0], [0, 0, 1]]
    apl, to_g, unreachable = path_stats(make_lon(w, global_node=1))
    assert unreachable == 5
    assert apl == pytest.approx(2.0)
    assert to_g == pytest.approx(2.0)


CASES = generated(6, 3, base=211) + generated(5, 2, base=5)


@pytest.mark.parametrize("inst", CASES, ids=repr)
def test_metrics_match_loop_oracle(inst):
    perms, cost, owner = oracles.landscape(inst.dist.tolist(), inst.flow.tolist())
    want, extras = oracles.metrics(inst.n, perms, cost, owner)
    bm = map_basins(inst)
    report = compute_metrics(bm, build_lon(inst, bm))
    for key, value in want.items():
        got = getattr(report, key)
        if value is None or isinstance(value, int):
            assert got == value, key
        else:
            assert got == pytest.approx(value, rel=1e-9, abs=1e-12), key


@pytest.mark.parametrize("inst", CASES, ids=repr)
def test_invariants_on_generated(inst):
    bm = map_basins(inst)
    lon = build_lon(inst, bm)
    w = lon.offdiag()
    _, table = disparity(lon)
    for k, y2, inv_k, _ in table:
        assert inv_k - 1e-12 <= y2 <= 1 + 1e-12
    if lon.n_nodes > 1 and (w > 0).any():
        d = path_lengths(lon)
        off = ~np.eye(lon.n_nodes, dtype=bool)
        assert d[off].min() >= 1 / w.max() - 1e-12


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 8), st.integers(0, 2**32 - 1), st.floats(0.0, 0.9))
def test_random_networks_property(k, seed, sparsity):
    rng = np.random.default_rng(seed)
    w = rng.random((k, k))
    w[rng.random((k, k)) < sparsity] = 0
    np.fill_diagonal(w, 0.1 + rng.random(k))
    w /= w.sum(axis=1, keepdims=True)
    lon = make_lon(w)
    mean_y2, table = disparity(lon)
    for d, y2, _, _ in table:
        assert 1 / d - 1e-12 <= y2 <= 1 + 1e-12
    t, want = transitivity(lon), oracles.transitivity_triples(w.tolist())
    assert (t is None) == (want is None)
    if t is not None:
        assert 0 <= t <= 1 + 1e-12 and t == pytest.approx(want)
    fw = oracles.floyd_warshall(w.tolist())
    assert np.allclose(path_lengths(lon), fw)


def test_report_round_trip_and_column_order():
    inst = generated(5, 1, base=3)[1]
    bm = map_basins(inst)
    report = compute_metrics(bm, build_lon(inst, bm), meta=inst.meta)
    assert list(report.scalars()) == list(METRIC_COLUMNS)
    assert METRIC_COLUMNS[:3] == ("n", "search_space_size", "global_cost")
    assert report.instance_class == "real-like" and report.seed == inst.meta["seed"]
    again = MetricsReport.from_dict(report.to_dict())
    assert again == report
