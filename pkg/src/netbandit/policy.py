"""Bandit policies over bipartite side-observation graphs.

Step-by-step policies (UCB1, UCB-N, UCB-MaxN, epsilon_t-greedy-LP, uniform)
are vectorised over *lanes*: independent replications advanced in lockstep,
one row of state per lane. UCB-LP plays whole blocks of a round schedule and
runs one lane per instance.

``log`` is the natural logarithm throughout.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import streams
from .env import Environment, Layout, Observation
from .graph import BipartiteGraph, greedy_hitting_set

ALL_POLICIES = ("ucb1", "ucb-n", "ucb-maxn", "eps-greedy-lp", "ucb-lp", "ucb-lp-doubling", "uniform")


class PolicyError(ValueError):
    pass


class ObservationStats:
    """Per-lane counts: base-arm observations M_i, their sums, plays T_j and own-play rewards."""

    def __init__(self, lanes: int, layout: Layout):
        self.layout = layout
        n, k = layout.num_base_arms, layout.num_actions
        self.lanes = lanes
        self.counts = np.zeros((lanes, n), dtype=np.int64)    # M_i
        self.ones = np.zeros((lanes, n), dtype=np.int64)
        self.explore_counts = np.zeros((lanes, n), dtype=np.int64)  # O_i^R
        self.plays = np.zeros((lanes, k), dtype=np.int64)     # T_j
        self.own_reward = np.zeros((lanes, k))

    def update(self, actions: np.ndarray, obs: Observation, explore: Optional[np.ndarray] = None) -> None:
        self.counts[obs.lane, obs.arms] += obs.n_obs
        self.ones[obs.lane, obs.arms] += obs.n_ones
        if explore is not None and explore.any():
            self.explore_counts[obs.lane, obs.arms] += obs.n_obs * explore[obs.lane]
        lanes = np.arange(self.lanes)
        self.plays[lanes, actions] += obs.length
        self.own_reward[lanes, actions] += obs.reward

    def base_means(self) -> np.ndarray:
        return self.ones / np.maximum(self.counts, 1)

    def fbar(self) -> np.ndarray:
        """Empirical action values: base-arm means pushed through each f_j."""
        return self.layout.action_values(self.base_means())

    def obs_counts(self) -> np.ndarray:
        """T^obs_j = min over i in K_j of M_i."""
        return self.layout.min_over_reward_sets(self.counts)

    def own_means(self) -> np.ndarray:
        return self.own_reward / np.maximum(self.plays, 1)


def ucb_index(means: np.ndarray, counts: np.ndarray, t: int) -> np.ndarray:
    """mean + sqrt(2 log t / n); unobserved entries get +inf."""
    with np.errstate(divide="ignore", invalid="ignore"):
        idx = means + np.sqrt(2.0 * math.log(t) / counts)
    return np.where(counts > 0, idx, np.inf)


class Policy:
    name = "policy"
    batched = True

    def __init__(self, env: Environment, lanes: int, keys: np.ndarray):
        self.graph: BipartiteGraph = env.graph
        self.layout = env.layout
        self.lanes = lanes
        self.keys = np.asarray(keys, dtype=np.uint64).reshape(lanes)
        self.stats = ObservationStats(lanes, self.layout)
        self._explore: Optional[np.ndarray] = None

    def propose(self, t: int, remaining: int) -> tuple[np.ndarray, int]:
        raise NotImplementedError

    def update(self, actions: np.ndarray, obs: Observation) -> None:
        self.stats.update(actions, obs, self._explore)

    def recommend(self) -> np.ndarray:
        """Action each lane would exploit now."""
        return np.argmax(self.stats.fbar(), axis=1)


class UniformRandom(Policy):
    name = "uniform"

    def propose(self, t, remaining):
        u = streams.uniforms(self.keys, streams.PICK, t)
        k = self.layout.num_actions
        return np.minimum((u * k).astype(np.int64), k - 1), 1


class UCB1(Policy):
    """Classic UCB1 on own-play rewards only; side-observations are ignored."""
    name = "ucb1"

    def propose(self, t, remaining):
        s = self.stats
        return np.argmax(ucb_index(s.own_means(), s.plays, t), axis=1), 1

    def recommend(self):
        return np.argmax(self.stats.own_means(), axis=1)


class UCBN(Policy):
    """UCB1 index computed from all observations, side-observations included."""
    name = "ucb-n"

    def indices(self, t):
        s = self.stats
        return ucb_index(s.fbar(), s.obs_counts(), t)

    def propose(self, t, remaining):
        return np.argmax(self.indices(t), axis=1), 1


class UCBMaxN(UCBN):
    """Find the UCB-N leader, then play its neighbour with the best empirical mean.

    Neighbours of i are actions a with K_a inside V_i.
    """
    name = "ucb-maxn"

    def __init__(self, env, lanes, keys):
        super().__init__(env, lanes, keys)
        self.neighbours = self.graph.clique_adjacency

    def propose(self, t, remaining):
        s = self.stats
        fbar = s.fbar()
        cnt = s.obs_counts()
        leader = np.argmax(ucb_index(fbar, cnt, t), axis=1)
        masked = np.where(self.neighbours[leader] & (cnt > 0), fbar, -np.inf)
        choice = np.argmax(masked, axis=1)
        # an unobserved leader is played itself
        seen = cnt[np.arange(self.lanes), leader] > 0
        return np.where(seen, choice, leader), 1


def exploration_probability(c: float, d: float, zsum: float, t: int) -> float:
    return min(1.0, c * zsum / (d * d * t))


class EpsGreedyLP(Policy):
    """epsilon_t-greedy with exploration draws proportional to the LP allocation z*.

    Before the first decision a greedy hitting set is swept once so that every
    f_j has an estimate; those plays count as ordinary time steps.
    """
    name = "eps-greedy-lp"

    def __init__(self, env, lanes, keys, z: np.ndarray, c: float = 5.0, d: float = 0.2):
        super().__init__(env, lanes, keys)
        if not c > 0:
            raise PolicyError(f"c must be positive, got {c}")
        if not 0 < d < 1:
            raise PolicyError(f"d must lie in (0, 1), got {d}")
        z = np.asarray(z, dtype=float)
        if z.size != self.layout.num_actions or np.any(z < 0) or not z.sum() > 0:
            raise PolicyError("z* must be a non-negative vector with positive sum")
        self.c, self.d = c, d
        self.z = z
        self.zsum = float(z.sum())
        self.cdf = np.cumsum(z) / self.zsum
        self.sweep = greedy_hitting_set(self.graph)
        self.explore_picks = np.zeros((lanes, self.layout.num_actions), dtype=np.int64)

    def sample_allocation(self, u: np.ndarray) -> np.ndarray:
        """Inverse-CDF draw of actions with P(a=j) = z_j / sum(z)."""
        idx = np.searchsorted(self.cdf, u, side="right")
        return np.minimum(idx, self.layout.num_actions - 1)

    def propose(self, t, remaining):
        if t <= len(self.sweep):
            self._explore = None
            return np.full(self.lanes, self.sweep[t - 1], dtype=np.int64), 1
        eps = exploration_probability(self.c, self.d, self.zsum, t)
        explore = streams.uniforms(self.keys, streams.EXPLORE, t) < eps
        greedy = np.argmax(self.stats.fbar(), axis=1)
        if explore.any():
            drawn = self.sample_allocation(streams.uniforms(self.keys, streams.PICK, t))
            actions = np.where(explore, drawn, greedy)
            self.explore_picks[np.flatnonzero(explore), drawn[explore]] += 1
        else:
            actions = greedy
        self._explore = explore
        return actions, 1


# ------------------------------------------------------------------ UCB-LP

def round_quota(horizon: float, delta: float) -> int:
    """n(m) = ceil(2 log(T delta^2) / delta^2)."""
    return math.ceil(2.0 * math.log(horizon * delta * delta) / (delta * delta))


def last_round(horizon: float) -> int:
    """floor(log2(T / e) / 2); -1 when the horizon is too short for any round."""
    return math.floor(0.5 * math.log2(horizon / math.e))


@dataclass
class UcbLpState:
    horizon: int
    active: tuple[int, ...]             # B_m
    explore_set: tuple[int, ...]        # A_m
    m: int = 0
    delta: float = 1.0                  # 2^-m
    n_prev: int = 0                     # n(m-1), with n(-1) = 0
    n_cur: int = 0
    finished: bool = False              # all rounds done or a single survivor left
    history: list = field(default_factory=list)


def exploration_set(graph: BipartiteGraph, active: Sequence[int]) -> tuple[int, ...]:
    """A = union of S_i over i in D, D = union of K_j over active j."""
    sup = graph.supports
    d = set().union(*(graph.reward_sets[j] for j in active))
    return tuple(sorted(set().union(*(sup[i] for i in d))))


def ucb_lp_round(state: UcbLpState, z: np.ndarray) -> list[tuple[int, int]]:
    """Schedule of (action, plays) for round ``state.m``.

    Sets ``state.n_cur``. An empty list is never returned for an unfinished state.
    """
    if len(state.active) == 1 or state.m > last_round(state.horizon):
        state.finished = True
        return []
    state.n_cur = round_quota(state.horizon, state.delta)
    step = state.n_cur - state.n_prev
    if z.sum() <= 2 * len(state.active) * state.delta:
        sched = [(j, math.ceil(z[j] * step - 1e-9)) for j in state.explore_set]
    else:
        sched = [(j, step) for j in state.active]
    return [(j, q) for j, q in sched if q > 0]


def ucb_lp_eliminate(state: UcbLpState, fbar: np.ndarray, obs_counts: np.ndarray) -> tuple[int, ...]:
    """Drop active actions whose upper bound falls below the best lower bound, then advance the round."""
    act = np.array(state.active)
    logterm = math.log(state.horizon * state.delta * state.delta)
    used = obs_counts[act]
    with np.errstate(divide="ignore"):
        rad = np.sqrt(logterm / (2.0 * used))
    upper = fbar[act] + rad
    lower = np.where(used > 0, fbar[act] - rad, -np.inf)
    keep = act[~(upper < lower.max())]
    state.history.append((state.m, len(state.active), len(keep)))
    state.active = tuple(int(j) for j in keep)
    state.m += 1
    state.delta /= 2.0
    state.n_prev = state.n_cur
    return state.active


class UCBLP(Policy):
    """Round-based elimination with LP-weighted exploration (known horizon)."""
    name = "ucb-lp"
    batched = False

    def __init__(self, env, lanes, keys, z: np.ndarray, horizon: int):
        if lanes != 1:
            raise PolicyError("UCB-LP runs one lane per instance")
        super().__init__(env, lanes, keys)
        self.z = np.where(np.asarray(z, dtype=float) < 1e-12, 0.0, np.asarray(z, dtype=float))
        k = self.layout.num_actions
        self.state = UcbLpState(horizon=int(horizon), active=tuple(range(k)), explore_set=tuple(range(k)))
        self.schedule: list[list[int]] = []
        self.coverage: list[tuple[int, bool]] = []
        self._next_round()

    def _next_round(self):
        while not self.state.finished:
            sched = ucb_lp_round(self.state, self.z)
            if sched:
                self.schedule = [[j, q] for j, q in sched]
                return
            self._end_round()
        fbar = self.stats.fbar()[0]
        act = list(self.state.active)
        best = act[int(np.argmax(fbar[act]))]
        self.schedule = [[best, self.state.horizon + 1]]

    def _end_round(self):
        s = self.stats
        cnt = s.obs_counts()[0]
        act = np.array(self.state.active)
        self.coverage.append((self.state.m, bool(np.all(cnt[act] >= self.state.n_cur))))
        ucb_lp_eliminate(self.state, s.fbar()[0], cnt)
        self.state.explore_set = exploration_set(self.graph, self.state.active)

    def propose(self, t, remaining):
        j, q = self.schedule[0]
        return np.array([j], dtype=np.int64), min(q, remaining)

    def update(self, actions, obs):
        super().update(actions, obs)
        self.schedule[0][1] -= obs.length
        if self.schedule[0][1] <= 0:
            self.schedule.pop(0)
            if not self.schedule and not self.state.finished:
                self._end_round()
                self._next_round()

    def recommend(self):
        fbar = self.stats.fbar()[0]
        act = list(self.state.active)
        return np.array([act[int(np.argmax(fbar[act]))]])


def doubling_horizons(total: int) -> list[int]:
    """Epoch lengths 2, 4, 16, 256, ... (each the square of the last), truncated to sum to ``total``."""
    out = []
    h, used = 2, 0
    while used < total:
        out.append(min(h, total - used))
        used += out[-1]
        h *= h
    return out


class DoublingUCBLP(Policy):
    """Unknown-horizon UCB-LP: restart with horizon 2^(2^l) for epoch l, discarding statistics."""
    name = "ucb-lp-doubling"
    batched = False

    def __init__(self, env, lanes, keys, z: np.ndarray):
        if lanes != 1:
            raise PolicyError("UCB-LP runs one lane per instance")
        super().__init__(env, lanes, keys)
        self.env = env
        self.z = z
        self.epoch = -1
        self.epoch_end = 0   # last global time step of the current epoch
        self.epoch_horizons: list[int] = []
        self.inner: Optional[UCBLP] = None

    def _start_epoch(self, t):
        self.epoch += 1
        h = 2 ** (2 ** self.epoch)
        self.epoch_horizons.append(h)
        self.inner = UCBLP(self.env, 1, self.keys, self.z, h)
        self.epoch_end = t - 1 + h

    def propose(self, t, remaining):
        if self.inner is None or t > self.epoch_end:
            self._start_epoch(t)
        a, q = self.inner.propose(t, remaining)
        return a, min(q, self.epoch_end - t + 1)

    def update(self, actions, obs):
        super().update(actions, obs)
        self.inner.update(actions, obs)

    def recommend(self):
        return self.inner.recommend()
