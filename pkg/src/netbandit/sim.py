"""Simulation harness: seeded runs, paired replications and pseudo-regret traces.

Regret is the pseudo-regret sum_j Delta_j T_j(t) with the true gaps. All
randomness comes from counter streams keyed by the run seed, so any two
policies given the same seed face identical base-arm realisations.
"""
from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Union

import numpy as np

from . import lp as lpmod
from . import policy as pol
from . import streams
from .env import Environment, observe

CSV_HEADER = ("policy", "t", "mean_regret", "std_regret", "reps")

EnvSource = Union[Environment, Callable[[int], Environment]]


@dataclass(frozen=True)
class PolicySpec:
    name: str
    params: dict = field(default_factory=dict)
    label: Optional[str] = None

    def __post_init__(self):
        if self.name not in pol.ALL_POLICIES:
            raise ValueError(f"unknown policy {self.name!r}; choose from {', '.join(pol.ALL_POLICIES)}")

    @property
    def key(self) -> str:
        return self.label or self.name


@dataclass(frozen=True)
class RunConfig:
    env: EnvSource          # an Environment, or seed -> Environment for per-seed instances
    policy: PolicySpec
    horizon: int
    seed: int = 0
    stride: int = 100

    def __post_init__(self):
        if self.horizon < 1:
            raise ValueError("horizon must be >= 1")
        if self.stride < 1:
            raise ValueError("stride must be >= 1")


@dataclass
class RegretTrace:
    policy: str
    times: np.ndarray          # (C,)
    regret: np.ndarray         # (R, C) pseudo-regret per lane
    plays: np.ndarray          # (R, K) final play counts
    recommended: np.ndarray    # (R,) action each lane would exploit at the horizon
    seeds: np.ndarray          # (R,)
    accounting_ok: bool = True
    extras: dict = field(default_factory=dict)

    @property
    def final(self) -> np.ndarray:
        return self.regret[:, -1]


@dataclass
class AggregateTrace:
    policy: str
    times: np.ndarray
    mean: np.ndarray
    std: np.ndarray
    reps: int
    runs: RegretTrace


def checkpoints(horizon: int, stride: int) -> np.ndarray:
    pts = list(range(stride, horizon + 1, stride))
    if not pts or pts[-1] != horizon:
        pts.append(horizon)
    return np.array(pts, dtype=np.int64)


def allocation(env: Environment) -> np.ndarray:
    """z* for the environment's graph (P2, or P2' in sporadic mode)."""
    sol = lpmod.solve_p2(env.graph, env.obs_prob)
    if sol.status != lpmod.OPTIMAL:
        raise RuntimeError(f"allocation LP not solved: {sol.status}")
    return sol.x


def make_policy(spec: PolicySpec, env: Environment, lanes: int, keys: np.ndarray, horizon: int,
                z: Optional[np.ndarray] = None) -> pol.Policy:
    p = dict(spec.params)
    needs_z = spec.name in ("eps-greedy-lp", "ucb-lp", "ucb-lp-doubling")
    if needs_z and z is None:
        z = allocation(env)
    if spec.name == "ucb1":
        return pol.UCB1(env, lanes, keys)
    if spec.name == "ucb-n":
        return pol.UCBN(env, lanes, keys)
    if spec.name == "ucb-maxn":
        return pol.UCBMaxN(env, lanes, keys)
    if spec.name == "uniform":
        return pol.UniformRandom(env, lanes, keys)
    if spec.name == "eps-greedy-lp":
        return pol.EpsGreedyLP(env, lanes, keys, z, c=float(p.get("c", 5.0)), d=float(p.get("d", 0.2)))
    if spec.name == "ucb-lp":
        return pol.UCBLP(env, lanes, keys, z, int(p.get("horizon", horizon)))
    if spec.name == "ucb-lp-doubling":
        return pol.DoublingUCBLP(env, lanes, keys, z)
    raise ValueError(spec.name)


def _accounting_holds(policy: pol.Policy, env: Environment) -> bool:
    expected = policy.stats.plays @ env.graph.incidence.T.astype(np.int64)
    return bool(np.array_equal(policy.stats.counts, expected))


def simulate(envs: Sequence[Environment], seeds: Sequence[int], spec: PolicySpec, horizon: int,
             stride: int = 100, z: Optional[np.ndarray] = None, check_accounting: bool = False) -> RegretTrace:
    """Run ``spec`` on lanes (envs[r], seeds[r]); all envs must share one graph and reward map."""
    envs = list(envs)
    seeds = np.asarray(seeds, dtype=np.int64)
    if len(envs) != seeds.size:
        raise ValueError("one environment per seed required")
    base = envs[0]
    for e in envs[1:]:
        if e.graph is not base.graph and e.graph != base.graph:
            raise ValueError("all lanes must share the same graph")
    if z is None and spec.name in ("eps-greedy-lp", "ucb-lp", "ucb-lp-doubling"):
        z = allocation(base)
    keys = streams.seed_key(seeds)
    if spec.name in ("ucb-lp", "ucb-lp-doubling"):
        parts = [_simulate_lanes([e], keys[r:r + 1], spec, horizon, stride, z, check_accounting)
                 for r, e in enumerate(envs)]
        trace = RegretTrace(spec.key, parts[0].times, np.vstack([p.regret for p in parts]),
                            np.vstack([p.plays for p in parts]), np.concatenate([p.recommended for p in parts]),
                            seeds, all(p.accounting_ok for p in parts))
        for key in parts[0].extras:
            trace.extras[key] = [p.extras[key] for p in parts]
        return trace
    trace = _simulate_lanes(envs, keys, spec, horizon, stride, z, check_accounting)
    trace.seeds = seeds
    return trace


def _simulate_lanes(envs, keys, spec, horizon, stride, z, check_accounting) -> RegretTrace:
    base = envs[0]
    lanes = len(envs)
    theta = None if lanes == 1 else np.vstack([e.theta for e in envs])
    gaps = np.vstack([e.gap_info.gaps for e in envs])
    policy = make_policy(spec, base, lanes, keys, horizon, z)
    times = checkpoints(horizon, stride)
    regret = np.zeros((lanes, times.size))
    ok = True
    check = check_accounting and base.obs_prob is None
    t, ci = 1, 0
    while t <= horizon:
        nxt = int(times[ci])
        actions, length = policy.propose(t, nxt - t + 1)
        obs = observe(base, actions, keys, t, length, theta)
        policy.update(actions, obs)
        t += length
        if t - 1 == nxt:
            regret[:, ci] = (policy.stats.plays * gaps).sum(axis=1)
            if check:
                ok &= _accounting_holds(policy, base)
            ci += 1
    trace = RegretTrace(spec.key, times, regret, policy.stats.plays.copy(), policy.recommend(),
                        np.zeros(lanes, dtype=np.int64), ok)
    if isinstance(policy, pol.UCBLP):
        trace.extras["coverage"] = list(policy.coverage)
        trace.extras["history"] = list(policy.state.history)
    if isinstance(policy, pol.DoublingUCBLP):
        trace.extras["epochs"] = list(policy.epoch_horizons)
    if isinstance(policy, pol.EpsGreedyLP):
        trace.extras["explore_picks"] = policy.explore_picks.copy()
        trace.extras["explore_counts"] = policy.stats.explore_counts.copy()
    return trace


def _env_for(source: EnvSource, seed: int) -> Environment:
    return source if isinstance(source, Environment) else source(seed)


def run(config: RunConfig, check_accounting: bool = False) -> RegretTrace:
    env = _env_for(config.env, config.seed)
    return simulate([env], [config.seed], config.policy, config.horizon, config.stride,
                    check_accounting=check_accounting)


def _run_chunk(args):
    source, seeds, spec, horizon, stride, z, check = args
    envs = [_env_for(source, int(s)) for s in seeds]
    return simulate(envs, seeds, spec, horizon, stride, z, check)


def replicate(configs: Union[RunConfig, Sequence[RunConfig]], reps: int, parallelism: int = 1,
              check_accounting: bool = False, chunk: int = 100) -> dict[str, AggregateTrace]:
    """Run every config on seeds seed+1..seed+reps (paired across configs) and aggregate per policy."""
    if isinstance(configs, RunConfig):
        configs = [configs]
    if reps < 1:
        raise ValueError("reps must be >= 1")
    out: dict[str, AggregateTrace] = {}
    pool = ProcessPoolExecutor(parallelism) if parallelism > 1 else None
    try:
        for cfg in configs:
            seeds = np.arange(cfg.seed + 1, cfg.seed + reps + 1, dtype=np.int64)
            z = None
            if isinstance(cfg.env, Environment) and cfg.policy.name in ("eps-greedy-lp", "ucb-lp", "ucb-lp-doubling"):
                z = allocation(cfg.env)
            size = max(1, min(chunk, math.ceil(reps / max(parallelism, 1))))
            jobs = [(cfg.env, seeds[i:i + size], cfg.policy, cfg.horizon, cfg.stride, z, check_accounting)
                    for i in range(0, reps, size)]
            parts = list(pool.map(_run_chunk, jobs)) if pool else [_run_chunk(j) for j in jobs]
            out[cfg.policy.key] = aggregate(merge(parts))
    finally:
        if pool:
            pool.shutdown()
    return out


def merge(parts: Sequence[RegretTrace]) -> RegretTrace:
    first = parts[0]
    trace = RegretTrace(first.policy, first.times, np.vstack([p.regret for p in parts]),
                        np.vstack([p.plays for p in parts]), np.concatenate([p.recommended for p in parts]),
                        np.concatenate([p.seeds for p in parts]), all(p.accounting_ok for p in parts))
    for key in first.extras:
        vals = [p.extras[key] for p in parts]
        trace.extras[key] = (np.vstack(vals) if isinstance(vals[0], np.ndarray)
                             else [v for sub in vals for v in sub])
    return trace


def aggregate(trace: RegretTrace) -> AggregateTrace:
    reps = trace.regret.shape[0]
    mean = trace.regret.mean(axis=0)
    std = trace.regret.std(axis=0, ddof=1) if reps > 1 else np.zeros_like(mean)
    return AggregateTrace(trace.policy, trace.times, mean, std, reps, trace)


def compare(traces: Sequence[AggregateTrace], baseline: Optional[str] = None,
            at: Optional[Sequence[int]] = None) -> list[dict]:
    """Mean regret per policy at checkpoints, with std and ratio to the baseline policy."""
    traces = list(traces)
    if not traces:
        return []
    base = next((tr for tr in traces if tr.policy == baseline), traces[0])
    times = traces[0].times if at is None else np.asarray(at)
    rows = []
    for t in times:
        ref = float(np.interp(t, base.times, base.mean))
        for tr in traces:
            m = float(np.interp(t, tr.times, tr.mean))
            s = float(np.interp(t, tr.times, tr.std))
            ratio = m / ref if ref > 0 else (1.0 if m == ref else math.inf)
            rows.append({"policy": tr.policy, "t": int(t), "mean": m, "std": s, "ratio": ratio,
                         "baseline": base.policy})
    return rows


def format_compare(rows: list[dict]) -> str:
    lines = [f"{'t':>9}  {'policy':<18} {'mean':>12} {'std':>10} {'ratio':>7}"]
    for r in rows:
        lines.append(f"{r['t']:>9}  {r['policy']:<18} {r['mean']:>12.3f} {r['std']:>10.3f} {r['ratio']:>7.3f}")
    return "\n".join(lines)


def to_csv(traces: Sequence[AggregateTrace]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for tr in traces:
        for t, m, s in zip(tr.times, tr.mean, tr.std):
            w.writerow([tr.policy, int(t), repr(float(m)), repr(float(s)), tr.reps])
    return buf.getvalue()
