"""Bernoulli base-arm environments with affine per-action rewards."""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Optional

import numpy as np

from . import streams
from .graph import BipartiteGraph, RoutingInstance, load_graph

GAP_TOL = 1e-12
_CHUNK = 1 << 15

REWARD_KINDS = ("identity", "mean", "delay")


class EnvError(ValueError):
    pass


class FixtureParseError(EnvError):
    """Malformed environment fixture text."""


@dataclass(frozen=True)
class RewardSpec:
    kind: str = "identity"
    bound: float = 5.0  # B, used by "delay" only

    def __post_init__(self):
        if self.kind not in REWARD_KINDS:
            raise EnvError(f"unsupported reward {self.kind!r}; expected one of {REWARD_KINDS}")
        if self.kind == "delay" and not self.bound > 0:
            raise EnvError("delay bound B must be positive")

    def describe(self) -> str:
        return f"delay B={self.bound:g}" if self.kind == "delay" else self.kind


@dataclass(frozen=True)
class PullResult:
    reward: float
    observations: dict[int, int]  # delivered base-arm -> X_i(t)
    observed_flags: dict[int, bool]


class Layout:
    """Flattened per-action views of V_j and of the affine reward map.

    The reward of action j is ``offset[j] + sum_{i in K_j} weight_ij * X_i``.
    """

    def __init__(self, graph: BipartiteGraph, reward: RewardSpec):
        k = graph.num_actions
        self.num_actions = k
        self.num_base_arms = graph.num_base_arms
        obs = [sorted(v) for v in graph.observe_sets]
        self.vdeg = np.array([len(v) for v in obs], dtype=np.int64)
        self.indptr = np.concatenate([[0], np.cumsum(self.vdeg)]).astype(np.int64)
        self.vflat = np.array([i for v in obs for i in v], dtype=np.int64)
        self.offset = np.zeros(k)
        rsets = [sorted(r) for r in graph.reward_sets]
        rweight = []
        for j, r in enumerate(rsets):
            if reward.kind == "identity":
                if len(r) != 1:
                    raise EnvError(f"identity reward needs |K_j| = 1, action {j + 1} has {len(r)}")
                w = 1.0
            elif reward.kind == "mean":
                w = 1.0 / len(r)
            else:
                if len(r) > reward.bound:
                    raise EnvError(f"delay bound B={reward.bound:g} below |K_{j + 1}| = {len(r)}")
                self.offset[j] = 1.0
                w = -1.0 / reward.bound
            rweight.append(w)
        self.rweight = np.array(rweight)
        self.in_reward = np.array([i in graph.reward_sets[j] for j, v in enumerate(obs) for i in v], dtype=bool)
        self.wflat = np.where(self.in_reward, np.repeat(self.rweight, self.vdeg), 0.0)
        # reward sets as a flat index for min/mean reductions
        self.rdeg = np.array([len(r) for r in rsets], dtype=np.int64)
        self.rptr = np.concatenate([[0], np.cumsum(self.rdeg)[:-1]]).astype(np.int64)
        self.rflat = np.array([i for r in rsets for i in r], dtype=np.int64)
        self.singleton = bool(np.all(self.rdeg == 1))

    def action_values(self, base_values: np.ndarray) -> np.ndarray:
        """Apply the affine reward map to per-base-arm values (last axis N -> K)."""
        if self.singleton:
            return self.offset + self.rweight * base_values[..., self.rflat]
        sums = np.add.reduceat(base_values[..., self.rflat], self.rptr, axis=-1)
        return self.offset + self.rweight * sums

    def min_over_reward_sets(self, base_counts: np.ndarray) -> np.ndarray:
        if self.singleton:
            return base_counts[..., self.rflat]
        return np.minimum.reduceat(base_counts[..., self.rflat], self.rptr, axis=-1)

    def flat_positions(self, actions: np.ndarray):
        deg = self.vdeg[actions]
        lane = np.repeat(np.arange(actions.size), deg)
        first = np.cumsum(deg) - deg
        pos = np.arange(int(deg.sum())) - np.repeat(first - self.indptr[actions], deg)
        return lane, pos


@dataclass(frozen=True)
class Observation:
    """Outcome of ``length`` consecutive plays of ``actions[r]`` in every lane r."""
    lane: np.ndarray     # (F,) lane of each flat entry
    arms: np.ndarray     # (F,) base-arm index
    n_obs: np.ndarray    # (F,) delivered observations
    n_ones: np.ndarray   # (F,) delivered observations equal to 1
    reward: np.ndarray   # (R,) realised reward summed over the block
    length: int


@dataclass(frozen=True)
class Gaps:
    best: float
    gaps: np.ndarray
    optimal: tuple[int, ...]
    suboptimal: tuple[int, ...]


@dataclass(frozen=True, eq=False)
class Environment:
    graph: BipartiteGraph
    theta: np.ndarray
    reward: RewardSpec = RewardSpec()
    obs_prob: Optional[np.ndarray] = None  # sporadic mode: delivery prob. of side-observations per action

    def __post_init__(self):
        theta = np.asarray(self.theta, dtype=float).reshape(-1)
        if theta.size != self.graph.num_base_arms:
            raise EnvError(f"theta needs {self.graph.num_base_arms} entries, got {theta.size}")
        if np.any(theta < 0) or np.any(theta > 1):
            raise EnvError("Bernoulli means must lie in [0, 1]")
        object.__setattr__(self, "theta", theta)
        if self.obs_prob is not None:
            p = np.asarray(self.obs_prob, dtype=float).reshape(-1)
            if p.size != self.graph.num_actions or np.any(p <= 0) or np.any(p > 1):
                raise EnvError("sporadic probabilities: one value in (0, 1] per action")
            object.__setattr__(self, "obs_prob", p)
        _ = self.layout  # fail fast on reward/graph mismatch

    @cached_property
    def layout(self) -> Layout:
        return Layout(self.graph, self.reward)

    @property
    def num_actions(self) -> int:
        return self.graph.num_actions

    @cached_property
    def means(self) -> np.ndarray:
        return self.layout.action_values(self.theta)

    @cached_property
    def gap_info(self) -> Gaps:
        return gaps(self)

    def with_sporadic(self, obs_prob) -> "Environment":
        return Environment(self.graph, self.theta, self.reward, obs_prob)


def true_mean(env: Environment, action: int) -> float:
    return float(env.means[action])


def gaps(env: Environment) -> Gaps:
    mu = env.means
    best = float(mu.max())
    delta = best - mu
    optimal = tuple(int(j) for j in np.flatnonzero(delta <= GAP_TOL))
    delta = np.where(delta <= GAP_TOL, 0.0, delta)
    suboptimal = tuple(int(j) for j in np.flatnonzero(delta > 0))
    return Gaps(best, delta, optimal, suboptimal)


def pull(env: Environment, action: int, rng: streams.CounterRNG, t: int) -> PullResult:
    """Play ``action`` at time ``t``; X_i(t) comes from the run's counter stream."""
    if not 0 <= action < env.num_actions:
        raise IndexError(f"action {action} outside 0..{env.num_actions - 1}")
    lay = env.layout
    sl = slice(lay.indptr[action], lay.indptr[action + 1])
    arms = lay.vflat[sl]
    x = (rng.outcome(t, arms) < env.theta[arms]).astype(int)
    delivered = np.ones(arms.size, dtype=bool)
    if env.obs_prob is not None:
        delivered = lay.in_reward[sl] | (rng.delivery(t, arms) < env.obs_prob[action])
    reward = lay.offset[action] + float(np.dot(lay.wflat[sl], x))
    assert -1e-12 <= reward <= 1 + 1e-12
    obs = {int(i): int(v) for i, v, d in zip(arms, x, delivered) if d}
    flags = {int(i): bool(d) for i, d in zip(arms, delivered)}
    return PullResult(float(reward), obs, flags)


def observe(env: Environment, actions: np.ndarray, keys: np.ndarray, t0: int, length: int,
            theta: Optional[np.ndarray] = None) -> Observation:
    """Vectorised counterpart of :func:`pull` over lanes and a block of time steps.

    ``keys`` are per-lane seed keys; ``theta`` may be (R, N) when lanes use
    different parameter draws on the same graph.
    """
    lay = env.layout
    actions = np.asarray(actions, dtype=np.int64)
    r = actions.size
    lane, pos = lay.flat_positions(actions)
    arms = lay.vflat[pos]
    th = env.theta if theta is None else theta
    thr = th[arms] if th.ndim == 1 else th[lane, arms]
    stream = arms.astype(np.uint64) * np.uint64(4)
    lkeys = keys[lane]
    n_obs = np.zeros(arms.size, dtype=np.int64)
    n_ones = np.zeros(arms.size, dtype=np.int64)
    ones_all = np.zeros(arms.size, dtype=np.int64)
    sporadic = env.obs_prob is not None
    if sporadic:
        always = lay.in_reward[pos]
        p = env.obs_prob[actions][lane]
    for start in range(0, length, _CHUNK):
        n = min(_CHUNK, length - start)
        if n == 1:
            x = streams.uniforms(lkeys, stream, t0 + start) < thr
            if sporadic:
                d = always | (streams.uniforms(lkeys, stream + np.uint64(streams.DELIVERY), t0 + start) < p)
            else:
                d = True
            ones_all += x
            n_ones += x & d
            n_obs += d
        else:
            ts = np.arange(t0 + start, t0 + start + n, dtype=np.uint64)[None, :]
            x = streams.uniforms(lkeys[:, None], stream[:, None], ts) < thr[:, None]
            ones_all += x.sum(axis=1)
            if sporadic:
                d = always[:, None] | (streams.uniforms(lkeys[:, None], stream[:, None] + np.uint64(streams.DELIVERY), ts)
                                       < p[:, None])
                n_ones += (x & d).sum(axis=1)
                n_obs += d.sum(axis=1)
            else:
                n_ones += x.sum(axis=1)
                n_obs += n
    reward = lay.offset[actions] * length + np.bincount(lane, weights=lay.wflat[pos] * ones_all, minlength=r)
    return Observation(lane, arms, n_obs, n_ones, reward, length)


# ------------------------------------------------------------ constructors

def identity_env(theta) -> Environment:
    from .graph import gen_identity
    theta = np.asarray(theta, dtype=float)
    return Environment(gen_identity(theta.size), theta, RewardSpec("identity"))


def flixster_style_env(graph: BipartiteGraph, seed: int, n_optimal: Optional[int] = None,
                       low: float = 0.3, high: float = 0.8, best: float = 0.9) -> Environment:
    """Uniform means on [low, high] with ``n_optimal`` random users raised to ``best``."""
    k = graph.num_actions
    if any(r != {j} for j, r in enumerate(graph.reward_sets)):
        raise EnvError("flixster-style environments need K_j = {j}")
    if n_optimal is None:
        n_optimal = min(50, math.ceil(k / 20))
    rng = np.random.default_rng(seed)
    theta = rng.uniform(low, high, size=k)
    theta[rng.choice(k, size=n_optimal, replace=False)] = best
    return Environment(graph, theta, RewardSpec("identity"))


def routing_env(instance: RoutingInstance, seed: int, bound: float = 5.0) -> Environment:
    """Link delays ~ Bernoulli(u_i) with u_i ~ U(0, 1); path reward 1 - total delay / B."""
    longest = max(len(k) for k in instance.graph.reward_sets)
    if bound < longest:
        raise EnvError(f"B={bound:g} is below the longest path length {longest}")
    rng = np.random.default_rng(seed)
    theta = rng.uniform(0.0, 1.0, size=instance.graph.num_base_arms)
    return Environment(instance.graph, theta, RewardSpec("delay", bound))


def shortest_expected_path(instance: RoutingInstance, theta: np.ndarray) -> int:
    """Brute-force oracle: index of the path with the least expected total delay."""
    delays = [sum(theta[i] for i in instance.graph.reward_sets[j]) for j in range(len(instance.paths))]
    return int(np.argmin(delays))


# ---------------------------------------------------------------- fixtures

def save_env(env: Environment, graph_ref: str) -> str:
    lines = [f"graph: {graph_ref}",
             "theta: " + " ".join(repr(float(x)) for x in env.theta),
             f"reward: {env.reward.describe()}"]
    if env.obs_prob is not None:
        lines.append("sporadic: " + " ".join(repr(float(x)) for x in env.obs_prob))
    return "\n".join(lines) + "\n"


def parse_reward(text: str) -> RewardSpec:
    toks = text.split()
    if not toks:
        raise EnvError("empty reward descriptor")
    kind = toks[0]
    bound = 5.0
    for tok in toks[1:]:
        key, _, val = tok.partition("=")
        if key != "B" or not val:
            raise EnvError(f"unknown reward option {tok!r}")
        bound = float(val)
    return RewardSpec(kind, bound)


def _floats(text: str, where: str) -> np.ndarray:
    try:
        return np.array([float(x) for x in text.split()])
    except ValueError as exc:
        raise FixtureParseError(f"{where}: {exc}") from None


def load_env(path: str | Path) -> Environment:
    path = Path(path)
    fields: dict[str, str] = {}
    for lineno, raw in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, val = line.partition(":")
        if not sep:
            raise FixtureParseError(f"{path}:{lineno}: expected 'key: value'")
        fields[key.strip()] = val.strip()
    for key in ("graph", "theta"):
        if key not in fields:
            raise FixtureParseError(f"{path}: missing '{key}:' line")
    graph = load_graph((path.parent / fields["graph"]).read_text(encoding="utf-8"))
    theta = _floats(fields["theta"], f"{path}: theta")
    try:
        reward = parse_reward(fields.get("reward", "identity"))
    except ValueError as exc:
        raise FixtureParseError(f"{path}: reward: {exc}") from None
    obs_prob = None
    if "sporadic" in fields:
        obs_prob = _floats(fields["sporadic"], f"{path}: sporadic")
    return Environment(graph, theta, reward, obs_prob)
