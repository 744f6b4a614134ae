import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import DATA, GOLDEN
from netbandit import env as E
from netbandit import graph as gr
from netbandit import sim

ID5 = E.identity_env([0.9, 0.8, 0.7, 0.6, 0.5])
ROUTING = gr.six_node_routing()


def spec(name, **params):
    return sim.PolicySpec(name, params)


def test_checkpoints_end_at_horizon():
    assert sim.checkpoints(10, 3).tolist() == [3, 6, 9, 10]
    assert sim.checkpoints(10, 5).tolist() == [5, 10]
    assert sim.checkpoints(2, 5).tolist() == [2]


def test_uniform_policy_expected_regret():
    # E[R(T)] = T * mean gap = 0.2 T
    agg = sim.replicate(sim.RunConfig(ID5, spec("uniform"), 2000, stride=500), reps=200)["uniform"]
    assert agg.mean[-1] == pytest.approx(0.2 * 2000, rel=0.05)


@pytest.mark.parametrize("name", ["ucb1", "ucb-n", "ucb-maxn", "eps-greedy-lp", "ucb-lp", "ucb-lp-doubling"])
def test_single_action_has_zero_regret(name):
    e = E.identity_env([0.4])
    tr = sim.run(sim.RunConfig(e, spec(name), 300, seed=1, stride=50))
    assert np.all(tr.regret == 0) and tr.plays.sum() == 300


@pytest.mark.parametrize("name", ["uniform", "ucb1", "ucb-n", "ucb-maxn", "eps-greedy-lp", "ucb-lp", "ucb-lp-doubling"])
def test_trace_invariants(name):
    e = E.routing_env(ROUTING, seed=2)
    tr = sim.simulate([e] * 3, [1, 2, 3], spec(name), 3000, stride=250, check_accounting=True)
    gaps = e.gap_info.gaps
    assert np.all(tr.plays.sum(axis=1) == 3000)
    assert np.all(np.diff(tr.regret, axis=1) >= -1e-9)
    assert np.all(tr.regret <= tr.times * gaps.max() + 1e-9)
    assert np.allclose(tr.final, tr.plays @ gaps)
    assert tr.accounting_ok


@given(st.integers(1, 10**6))
@settings(max_examples=15, deadline=None)
def test_paired_seeds_are_reproducible(seed):
    cfg = sim.RunConfig(ID5, spec("eps-greedy-lp", c=2.0, d=0.05), 400, seed=seed, stride=100)
    a, b = sim.run(cfg), sim.run(cfg)
    assert np.array_equal(a.regret, b.regret) and np.array_equal(a.plays, b.plays)


def test_lockstep_lanes_match_single_runs():
    e = E.routing_env(ROUTING, seed=4)
    many = sim.simulate([e] * 4, [5, 6, 7, 8], spec("ucb-n"), 1500, stride=300)
    for r, s in enumerate([5, 6, 7, 8]):
        one = sim.simulate([e], [s], spec("ucb-n"), 1500, stride=300)
        assert np.array_equal(many.regret[r], one.regret[0])


def test_chunking_does_not_change_results():
    cfg = sim.RunConfig(ID5, spec("ucb1"), 800, stride=200)
    a = sim.replicate(cfg, reps=12, chunk=5)["ucb1"]
    b = sim.replicate(cfg, reps=12, chunk=100)["ucb1"]
    assert np.array_equal(a.runs.regret, b.runs.regret)
    assert a.runs.seeds.tolist() == list(range(1, 13))


def test_single_rep_aggregate_is_the_trace():
    cfg = sim.RunConfig(ID5, spec("ucb1"), 500, seed=3, stride=100)
    agg = sim.replicate(cfg, reps=1)["ucb1"]
    tr = sim.simulate([ID5], [4], spec("ucb1"), 500, stride=100)
    assert np.array_equal(agg.mean, tr.regret[0]) and np.all(agg.std == 0)


def test_ucb_n_matches_ucb1_on_identity():
    a = sim.replicate(sim.RunConfig(ID5, spec("ucb1"), 1000, stride=100), reps=5)["ucb1"]
    b = sim.replicate(sim.RunConfig(ID5, spec("ucb-n"), 1000, stride=100), reps=5)["ucb-n"]
    assert np.array_equal(a.runs.regret, b.runs.regret)


def test_standard_error_shrinks_with_reps():
    cfg = sim.RunConfig(ID5, spec("uniform"), 500, stride=500)
    small = sim.replicate(cfg, reps=100)["uniform"]
    large = sim.replicate(cfg, reps=400)["uniform"]
    ratio = (large.std[-1] / np.sqrt(400)) / (small.std[-1] / np.sqrt(100))
    assert abs(ratio - 0.5) <= 0.3 * 0.5


def test_per_seed_environment_factory():
    cfg = sim.RunConfig(lambda s: E.routing_env(ROUTING, seed=s), spec("ucb-n"), 300, stride=100)
    agg = sim.replicate(cfg, reps=3)["ucb-n"]
    ref = sim.simulate([E.routing_env(ROUTING, seed=s) for s in (1, 2, 3)], [1, 2, 3], spec("ucb-n"), 300, 100)
    assert np.array_equal(agg.runs.regret, ref.regret)


def test_compare_ratios():
    cfg = sim.RunConfig(ID5, spec("ucb1"), 300, stride=100)
    a = sim.replicate(cfg, reps=3)["ucb1"]
    rows = sim.compare([a, a], baseline="ucb1")
    assert all(r["ratio"] == 1.0 for r in rows)
    text = sim.format_compare(rows)
    assert text.splitlines()[0].split()[:2] == ["t", "policy"]


def test_labels_key_results():
    s = sim.PolicySpec("eps-greedy-lp", {"c": 4.0}, label="eps-greedy-lp(c=4)")
    out = sim.replicate(sim.RunConfig(ID5, s, 200, stride=100), reps=2)
    assert list(out) == ["eps-greedy-lp(c=4)"]
    with pytest.raises(ValueError):
        sim.PolicySpec("thompson")
    with pytest.raises(ValueError):
        sim.RunConfig(ID5, spec("ucb1"), 0)


def test_golden_csv():
    e = E.load_env(DATA / "identity5.env")
    cfgs = [sim.RunConfig(e, spec(n), 2000, stride=500) for n in ("ucb1", "eps-greedy-lp", "ucb-lp")]
    out = sim.to_csv(list(sim.replicate(cfgs, reps=4).values()))
    assert out == (GOLDEN / "identity5_small.csv").read_text()
