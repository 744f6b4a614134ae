import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import oracles
from netbandit import graph as gr


def small_graph(seed, n=None, k=None):
    rng = np.random.default_rng(seed)
    n = n or int(rng.integers(1, 7))
    k = k or int(rng.integers(1, 7))
    obs, rew = oracles.random_bipartite(rng, n, k)
    return gr.BipartiteGraph.from_sets(n, obs, rew), obs, rew


def test_identity_graph_shape():
    g = gr.gen_identity(4)
    assert g.num_actions == 4 and g.num_base_arms == 4
    assert np.array_equal(g.incidence, np.eye(4, dtype=bool))
    assert gr.validate(g) == []
    assert g.stats == gr.GraphStats(lam=1, delta=1)


def test_validate_reports_each_violation():
    g = gr.BipartiteGraph.from_sets(3, [{0}, {1}], [{0, 1}, {1}])
    problems = gr.validate(g)
    assert any("K_1 not a subset of V_1" in p for p in problems)
    assert any("base-arm 3 unused" in p for p in problems)
    assert any("base-arm 3 has empty support" in p for p in problems)


def test_supports_are_transpose_of_observe_sets():
    g, obs, _ = small_graph(3, 5, 6)
    assert [set(s) for s in g.supports] == oracles.supports(obs, 5)


def test_hub_hitting_number_is_one(data_dir):
    g = gr.load_graph((data_dir / "hub.graph").read_text())
    assert gr.brute_force_hitting_number(g) == 1
    assert gr.greedy_hitting_set(g) == [0]


@given(st.integers(0, 10_000))
@settings(max_examples=60, deadline=None)
def test_greedy_hits_and_is_no_smaller_than_optimum(seed):
    g, obs, _ = small_graph(seed)
    h = gr.greedy_hitting_set(g)
    assert gr.is_hitting_set(g, h)
    assert len(h) >= oracles.hitting_number(obs, g.num_base_arms)


@given(st.integers(0, 10_000))
@settings(max_examples=60, deadline=None)
def test_brute_force_hitting_number_matches_oracle(seed):
    g, obs, _ = small_graph(seed)
    assert gr.brute_force_hitting_number(g) == oracles.hitting_number(obs, g.num_base_arms)


@given(st.integers(0, 10_000))
@settings(max_examples=40, deadline=None)
def test_clique_partition_matches_set_partition_oracle(seed):
    g, obs, rew = small_graph(seed)
    assert gr.brute_force_clique_partition(g) == oracles.clique_partition_number(obs, rew)


@given(st.integers(0, 10_000))
@settings(max_examples=40, deadline=None)
def test_greedy_clique_cover_parts_are_cliques(seed):
    g, obs, rew = small_graph(seed)
    parts = gr.greedy_clique_cover(g, list(range(g.num_actions)))
    assert sorted(j for p in parts for j in p) == list(range(g.num_actions))
    assert all(oracles.is_clique(obs, rew, p) for p in parts)


def test_weighted_clique_partition_matches_oracle():
    rng = np.random.default_rng(11)
    for _ in range(20):
        n, k = 4, 6
        obs, rew = oracles.random_bipartite(rng, n, k, p=0.7)
        g = gr.BipartiteGraph.from_sets(n, obs, rew)
        w = rng.uniform(0.1, 1.0, size=k)
        cost = lambda part: float(w[list(part)].max() / w[list(part)].min() ** 2)
        val, parts = gr.min_cost_clique_partition(g, list(range(k)), cost)
        assert val == pytest.approx(oracles.min_clique_cost(obs, rew, list(range(k)), cost), rel=1e-12)
        assert all(oracles.is_clique(obs, rew, p) for p in parts)


def test_clique_partition_cap():
    with pytest.raises(gr.GraphError):
        gr.min_cost_clique_partition(gr.gen_identity(13), list(range(13)), lambda c: 1.0)


@given(st.integers(0, 10_000))
@settings(max_examples=50, deadline=None)
def test_text_round_trip(seed):
    g, _, _ = small_graph(seed)
    assert gr.load_graph(gr.save_graph(g)) == g


@pytest.mark.parametrize("text, line", [
    ("", 1),
    ("2 x\n", 1),
    ("2 2\n1 | V: 1 | R: 1\n", 2),
    ("1 2\n1 | V: 1 3 | R: 1\n", 2),
    ("1 1\n1 | V 1 | R: 1\n", 2),
    ("1 1\n1 | V: a | R: 1\n", 2),
    ("2 1\n1 | V: 1 | R: 1\n1 | V: 1 | R: 1\n", 3),
])
def test_parse_errors_carry_line_numbers(text, line):
    with pytest.raises(gr.GraphParseError) as err:
        gr.load_graph(text)
    assert err.value.lineno == line


def test_load_rejects_invalid_structure():
    with pytest.raises(gr.GraphError, match="not a subset"):
        gr.load_graph("1 2\n1 | V: 1 | R: 1 2\n")
    g = gr.load_graph("1 2\n1 | V: 1 | R: 1 2\n", check=False)
    assert g.reward_sets[0] == {0, 1}


def test_erdos_renyi_is_valid_and_seeded():
    a = gr.gen_erdos_renyi(6, 5, 0.3, seed=4)
    b = gr.gen_erdos_renyi(6, 5, 0.3, seed=4)
    assert a == b and gr.validate(a) == []
    with pytest.raises(gr.GraphError):
        gr.gen_erdos_renyi(3, 3, 1.0, seed=0)


def test_stopping_time_single_base_arm_is_geometric():
    taus = np.array([gr.er_stopping_time(1, 0.5, s) for s in range(1, 4001)])
    # E = 1/p = 2, sd = sqrt(1-p)/p
    assert abs(taus.mean() - 2.0) < 4 * np.sqrt(2.0) / np.sqrt(taus.size)


def test_stopping_graph_covers_every_base_arm():
    g = gr.er_stopping_graph(40, 0.5, seed=9)
    assert gr.validate(g) == []
    assert g.num_actions == gr.er_stopping_time(40, 0.5, seed=9)


def test_powerlaw_graph_structure():
    g = gr.gen_powerlaw(200, 1.5, seed=3, min_degree=3)
    assert gr.validate(g) == []
    assert all(j in v for j, v in enumerate(g.observe_sets))
    assert all(r == {j} for j, r in enumerate(g.reward_sets))
    # symmetric social links
    for j, v in enumerate(g.observe_sets):
        assert all(j in g.observe_sets[i] for i in v)


def test_routing_network_counts():
    inst = gr.six_node_routing()
    assert len(inst.paths) == 13
    assert len(inst.links) == 12
    for p in [(1, 2, 4, 6), (1, 2, 4, 5, 6), (1, 3, 5, 6)]:
        assert p in inst.paths
    g = inst.graph
    assert g.observe_sets == g.reward_sets
    # no two distinct paths observe each other's links, so every clique is a singleton
    adj = g.clique_adjacency
    assert not np.any(adj & adj.T & ~np.eye(13, dtype=bool))


def test_simple_paths_small_graph():
    paths = gr.simple_paths([(1, 2), (2, 3), (1, 3)], 1, 3)
    assert paths == [(1, 2, 3), (1, 3)]
    with pytest.raises(gr.GraphError):
        gr.simple_paths([(1, 2), (3, 4)], 1, 4)
