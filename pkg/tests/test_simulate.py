"""Scenario construction: scale-free graphs, parameters, simulated data."""

import numpy as np
import pytest
from numpy.testing import assert_allclose

from multising import (
    CanonicalParams,
    ConfigError,
    Scenario,
    barabasi_albert,
    build_scenario,
    graphs_to_params,
    pair_count,
    pair_list,
    replicate_study,
    simulate_dataset,
)
from multising.simulate import SCENARIO_KINDS


def adjacency(bits, p):
    adj = [[] for _ in range(p)]
    for k, (r, j) in enumerate(pair_list(p)):
        if bits[k]:
            adj[r].append(j)
            adj[j].append(r)
    return adj


def is_connected(bits, p):
    adj = adjacency(bits, p)
    seen = {0}
    stack = [0]
    while stack:
        for w in adj[stack.pop()]:
            if w not in seen:
                seen.add(w)
                stack.append(w)
    return len(seen) == p


def degrees(bits, p):
    deg = np.zeros(p, dtype=int)
    for k, (r, j) in enumerate(pair_list(p)):
        if bits[k]:
            deg[r] += 1
            deg[j] += 1
    return deg


class TestBarabasiAlbert:
    def test_tree_for_single_attachment(self):
        for p in (2, 5, 10, 25):
            bits = barabasi_albert(p, m=1, rng=p)
            assert bits.sum() == p - 1
            assert is_connected(bits, p)

    def test_edge_count_for_wider_attachment(self):
        for p, m in [(6, 2), (10, 3)]:
            bits = barabasi_albert(p, m=m, rng=0)
            expected = sum(min(m, v) for v in range(1, p))
            assert bits.sum() == expected
            assert is_connected(bits, p)

    def test_deterministic_given_seed(self):
        a = barabasi_albert(12, rng=99)
        b = barabasi_albert(12, rng=99)
        assert np.array_equal(a, b)

    def test_validation(self):
        with pytest.raises(ValueError, match="two nodes"):
            barabasi_albert(1)
        with pytest.raises(ValueError, match="at least 1"):
            barabasi_albert(5, m=0)

    def test_early_nodes_attract_more_edges(self):
        # Preferential attachment should load the seed node well beyond a
        # uniform-attachment baseline (built inline with the same smoothing
        # absent).
        p, reps = 60, 200
        rng = np.random.default_rng(5)
        ba_deg0 = np.mean(
            [degrees(barabasi_albert(p, rng=rng), p)[0] for _ in range(reps)]
        )
        uni = np.empty(reps)
        for i in range(reps):
            deg = np.zeros(p, dtype=int)
            for v in range(1, p):
                target = int(rng.integers(v))
                deg[target] += 1
                deg[v] += 1
            uni[i] = deg[0]
        assert ba_deg0 > uni.mean() + 0.5


class TestGraphsToParams:
    def test_constant_strengths(self):
        bits = np.array([[1, 0, 1], [0, 0, 0]], dtype=np.uint8)
        params = graphs_to_params(bits, main_effect=-1.0, interaction=1.5)
        assert len(params) == 2
        assert_allclose(params[0].main, [-1.0, -1.0, -1.0])
        assert_allclose(params[0].inter, [1.5, 0.0, 1.5])
        assert_allclose(params[1].inter, 0.0)

    def test_one_dimensional_input(self):
        params = graphs_to_params(np.array([1, 1, 0]))
        assert len(params) == 1

    def test_interactions_vanish_exactly_off_graph(self):
        rng = np.random.default_rng(2)
        bits = rng.integers(0, 2, size=(3, pair_count(6))).astype(np.uint8)
        for row, prm in zip(bits, graphs_to_params(bits)):
            assert np.array_equal(prm.inter != 0, row == 1)

    def test_bad_length_rejected(self):
        with pytest.raises(ValueError, match="fits no p"):
            graphs_to_params(np.array([1, 0, 1, 0]))


class TestBuildScenario:
    def test_kind_a_shares_one_graph(self):
        scen = build_scenario("A", p=8, q=3, rng=1)
        assert scen.graphs.shape == (3, pair_count(8))
        assert all(
            np.array_equal(scen.graphs[0], scen.graphs[x]) for x in range(3)
        )
        assert len(scen.params) == 3
        assert_allclose(scen.params[1].inter, 1.5 * scen.graphs[1])

    def test_kind_b_graphs_are_distinct(self):
        scen = build_scenario("B", p=10, q=4, rng=2)
        seen = {row.tobytes() for row in scen.graphs}
        assert len(seen) == 4

    def test_kind_c_pairs_the_groups(self):
        scen = build_scenario("C", p=8, q=4, rng=3)
        assert np.array_equal(scen.graphs[0], scen.graphs[1])
        assert np.array_equal(scen.graphs[2], scen.graphs[3])
        assert not np.array_equal(scen.graphs[0], scen.graphs[2])

    def test_kind_d_isolates_the_last_group(self):
        scen = build_scenario("D", p=8, q=4, rng=4)
        assert np.array_equal(scen.graphs[0], scen.graphs[1])
        assert np.array_equal(scen.graphs[0], scen.graphs[2])
        assert not np.array_equal(scen.graphs[0], scen.graphs[3])

    def test_lowercase_kind_accepted(self):
        scen = build_scenario("a", p=4, q=2, rng=0)
        assert scen.kind == "A"

    def test_kind_and_group_count_validation(self):
        with pytest.raises(ConfigError, match="unknown scenario"):
            build_scenario("E", p=4, q=2)
        with pytest.raises(ConfigError, match="requires q = 4"):
            build_scenario("C", p=4, q=3)
        with pytest.raises(ConfigError, match="at least two groups"):
            build_scenario("A", p=4, q=1)

    def test_custom_strengths_propagate(self):
        scen = build_scenario(
            "A", p=5, q=2, rng=7, main_effect=-0.4, interaction=0.9
        )
        assert_allclose(scen.params[0].main, -0.4)
        assert_allclose(scen.params[0].inter, 0.9 * scen.graphs[0])

    def test_deterministic_given_seed(self):
        a = build_scenario("B", p=8, q=3, rng=11)
        b = build_scenario("B", p=8, q=3, rng=11)
        assert np.array_equal(a.graphs, b.graphs)


class TestSimulateDataset:
    def test_shapes_and_labels(self):
        scen = build_scenario("A", p=5, q=3, rng=1, n_per_group=17)
        data = simulate_dataset(scen, burn_in=50, thin=2, rng=0)
        assert data.group_labels == ["g1", "g2", "g3"]
        assert all(ds.rows.shape == (17, 5) for ds in data.groups)

    def test_explicit_seeds_are_reproducible(self):
        scen = build_scenario("B", p=5, q=2, rng=2)
        kw = dict(n_x=12, burn_in=50, thin=2, group_seeds=[7, 8])
        a = simulate_dataset(scen, **kw)
        b = simulate_dataset(scen, **kw)
        assert np.array_equal(a.groups[0].rows, b.groups[0].rows)
        assert np.array_equal(a.groups[1].rows, b.groups[1].rows)

    def test_group_simulations_are_independent(self):
        # Swapping the group order together with the seeds swaps the
        # outputs; nothing leaks across groups.
        scen = build_scenario("B", p=5, q=2, rng=2)
        swapped = Scenario(
            kind=scen.kind,
            p=scen.p,
            q=scen.q,
            graphs=scen.graphs[::-1].copy(),
            params=list(reversed(scen.params)),
            n_per_group=scen.n_per_group,
        )
        a = simulate_dataset(scen, n_x=12, burn_in=50, thin=2, group_seeds=[7, 8])
        b = simulate_dataset(
            swapped, n_x=12, burn_in=50, thin=2, group_seeds=[8, 7]
        )
        assert np.array_equal(a.groups[0].rows, b.groups[1].rows)
        assert np.array_equal(a.groups[1].rows, b.groups[0].rows)

    def test_seed_count_checked(self):
        scen = build_scenario("A", p=4, q=2, rng=1)
        with pytest.raises(ValueError, match="one seed per group"):
            simulate_dataset(scen, group_seeds=[1])

    def test_empty_graph_matches_independent_logistic_margins(self):
        # With no interactions each variable is Bernoulli(logistic(-1)).
        graphs = np.zeros((2, pair_count(4)), dtype=np.uint8)
        scen = Scenario(
            kind="A",
            p=4,
            q=2,
            graphs=graphs,
            params=graphs_to_params(graphs),
            n_per_group=4000,
        )
        data = simulate_dataset(scen, burn_in=100, thin=1, rng=3)
        target = 1.0 / (1.0 + np.exp(1.0))
        for ds in data.groups:
            assert_allclose(ds.rows.mean(axis=0), target, atol=0.03)


class TestReplicateStudy:
    def test_seed_is_required(self):
        with pytest.raises(ConfigError, match="requires a seed"):
            replicate_study({"scenarios": ["A"]})

    def test_scenario_kinds_constant(self):
        assert SCENARIO_KINDS == ("A", "B", "C", "D")

    @pytest.mark.slow
    def test_small_study_runs_and_reproduces(self):
        cfg = {
            "seed": 42,
            "scenarios": ["A"],
            "engines": ["fb", "ab"],
            "replicates": 2,
            "p": 4,
            "q": 2,
            "n_x": 40,
            "iterations": 150,
            "burn_in": 50,
            "sim_burn_in": 100,
            "sim_thin": 2,
        }
        report = replicate_study(cfg)
        assert [r.engine for r in report.rows] == ["fb", "ab"]
        for row in report.rows:
            assert row.scenario == "A"
            assert row.replicates == 2
            assert -1.0 <= row.mean_mcc <= 1.0
            assert 0.0 <= row.mean_f1 <= 1.0
            assert np.isfinite(row.se_mcc)
            assert row.seconds_per_replicate > 0
        again = replicate_study(cfg)
        assert [r.mean_mcc for r in again.rows] == [
            r.mean_mcc for r in report.rows
        ]
