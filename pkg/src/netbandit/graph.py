"""Bipartite side-observation graphs: model, generators and combinatorial oracles.

Indices are 0-based in memory. The text format (see :func:`save_graph`) is
1-based, and the conversion happens only in :func:`load_graph`/:func:`save_graph`.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

import networkx as nx
import numpy as np

MAX_RESAMPLE = 1000
HITTING_CAP = 24
CLIQUE_CAP = 12


class GraphError(ValueError):
    pass


class GraphParseError(GraphError):
    def __init__(self, lineno: int, msg: str):
        super().__init__(f"line {lineno}: {msg}")
        self.lineno = lineno


@dataclass(frozen=True)
class BipartiteGraph:
    """Actions observe base-arms (``observe_sets``) and are rewarded by a subset of them (``reward_sets``)."""

    num_base_arms: int
    observe_sets: tuple[frozenset[int], ...]
    reward_sets: tuple[frozenset[int], ...]

    def __post_init__(self):
        if len(self.observe_sets) != len(self.reward_sets):
            raise GraphError("observe_sets and reward_sets differ in length")
        if self.num_base_arms < 1 or not self.observe_sets:
            raise GraphError("need at least one action and one base-arm")
        for sets in (self.observe_sets, self.reward_sets):
            for s in sets:
                if any(i < 0 or i >= self.num_base_arms for i in s):
                    raise GraphError(f"base-arm index out of range in {sorted(s)}")

    @classmethod
    def from_sets(cls, num_base_arms: int, observe: Iterable[Iterable[int]],
                  reward: Iterable[Iterable[int]] | None = None) -> "BipartiteGraph":
        obs = tuple(frozenset(int(i) for i in v) for v in observe)
        rew = obs if reward is None else tuple(frozenset(int(i) for i in r) for r in reward)
        return cls(int(num_base_arms), obs, rew)

    @property
    def num_actions(self) -> int:
        return len(self.observe_sets)

    @cached_property
    def supports(self) -> tuple[frozenset[int], ...]:
        return supports(self)

    @cached_property
    def incidence(self) -> np.ndarray:
        """The N x K observation matrix E (bool)."""
        e = np.zeros((self.num_base_arms, self.num_actions), dtype=bool)
        for j, v in enumerate(self.observe_sets):
            e[sorted(v), j] = True
        return e

    @cached_property
    def stats(self) -> "GraphStats":
        return GraphStats(lam=max(len(k) for k in self.reward_sets),
                          delta=max(len(s) for s in self.supports))

    @cached_property
    def clique_adjacency(self) -> np.ndarray:
        """``adj[i, j]`` is True iff action i observes the whole reward set of action j."""
        k = self.num_actions
        adj = np.zeros((k, k), dtype=bool)
        for i in range(k):
            for j in range(k):
                adj[i, j] = self.reward_sets[j] <= self.observe_sets[i]
        return adj

    def __eq__(self, other):
        if not isinstance(other, BipartiteGraph):
            return NotImplemented
        return (self.num_base_arms == other.num_base_arms
                and self.observe_sets == other.observe_sets
                and self.reward_sets == other.reward_sets)

    def __hash__(self):
        return hash((self.num_base_arms, self.observe_sets, self.reward_sets))


@dataclass(frozen=True)
class GraphStats:
    lam: int    # max_j |K_j|
    delta: int  # max_i |S_i|


def validate(graph: BipartiteGraph) -> list[str]:
    """Return every violated structural invariant; an empty list means the graph is valid."""
    problems = []
    for j, (v, k) in enumerate(zip(graph.observe_sets, graph.reward_sets)):
        if not k <= v:
            problems.append(f"K_{j + 1} not a subset of V_{j + 1}: extra {sorted(i + 1 for i in k - v)}")
    used = set().union(*graph.reward_sets)
    for i in range(graph.num_base_arms):
        if i not in used:
            problems.append(f"base-arm {i + 1} unused (in no reward set)")
    observed = set().union(*graph.observe_sets)
    for i in range(graph.num_base_arms):
        if i not in observed:
            problems.append(f"base-arm {i + 1} has empty support")
    return problems


def supports(graph: BipartiteGraph) -> tuple[frozenset[int], ...]:
    out: list[set[int]] = [set() for _ in range(graph.num_base_arms)]
    for j, v in enumerate(graph.observe_sets):
        for i in v:
            out[i].add(j)
    return tuple(frozenset(s) for s in out)


def is_hitting_set(graph: BipartiteGraph, actions: Iterable[int]) -> bool:
    d = set(actions)
    return all(s & d for s in graph.supports)


def greedy_hitting_set(graph: BipartiteGraph) -> list[int]:
    """Repeatedly add the action covering most uncovered base-arms (ties: lowest index)."""
    uncovered = set(range(graph.num_base_arms))
    chosen: list[int] = []
    while uncovered:
        gains = [len(v & uncovered) for v in graph.observe_sets]
        best = int(np.argmax(gains))
        if gains[best] == 0:
            raise GraphError("some base-arm has an empty support; no hitting set exists")
        chosen.append(best)
        uncovered -= graph.observe_sets[best]
    return sorted(chosen)


def _support_masks(graph: BipartiteGraph) -> list[int]:
    return [sum(1 << j for j in s) for s in graph.supports]


def brute_force_hitting_number(graph: BipartiteGraph) -> int:
    """Exact minimum hitting set size by subset enumeration."""
    k = graph.num_actions
    if k > HITTING_CAP:
        raise GraphError(f"hitting-set enumeration capped at K={HITTING_CAP}, got K={k}")
    masks = _support_masks(graph)
    if any(m == 0 for m in masks):
        raise GraphError("some base-arm has an empty support; no hitting set exists")
    for size in range(1, k + 1):
        for combo in itertools.combinations(range(k), size):
            d = sum(1 << j for j in combo)
            if all(m & d for m in masks):
                return size
    raise AssertionError("unreachable: the full action set is a hitting set")


def _clique_table(graph: BipartiteGraph, members: Sequence[int]) -> list[bool]:
    """is_clique[mask] over subsets of ``members`` (bit b stands for members[b])."""
    adj = graph.clique_adjacency
    n = len(members)
    compat = [0] * n
    for a in range(n):
        for b in range(n):
            if adj[members[a], members[b]] and adj[members[b], members[a]]:
                compat[a] |= 1 << b
    table = [False] * (1 << n)
    table[0] = True
    for mask in range(1, 1 << n):
        low = (mask & -mask).bit_length() - 1
        rest = mask & ~(1 << low)
        table[mask] = table[rest] and (rest & ~compat[low]) == 0
    return table


def min_cost_clique_partition(graph: BipartiteGraph, members: Sequence[int], cost) -> tuple[float, list[list[int]]]:
    """Exact minimum of ``sum(cost(C))`` over partitions of ``members`` into cliques.

    Dynamic programming over subsets; ``cost`` receives a list of action indices.
    """
    n = len(members)
    if n > CLIQUE_CAP:
        raise GraphError(f"clique-partition enumeration capped at {CLIQUE_CAP} actions, got {n}")
    table = _clique_table(graph, members)
    full = (1 << n) - 1
    best = [float("inf")] * (1 << n)
    choice = [0] * (1 << n)
    best[0] = 0.0
    for mask in range(1, full + 1):
        low = mask & -mask
        rest = mask & ~low
        sub = rest
        while True:
            part = sub | low
            if table[part]:
                val = best[mask & ~part] + cost([members[b] for b in range(n) if part >> b & 1])
                if val < best[mask]:
                    best[mask] = val
                    choice[mask] = part
            if sub == 0:
                break
            sub = (sub - 1) & rest
    parts = []
    mask = full
    while mask:
        part = choice[mask]
        parts.append([members[b] for b in range(n) if part >> b & 1])
        mask &= ~part
    return best[full], parts


def brute_force_clique_partition(graph: BipartiteGraph) -> int:
    value, _ = min_cost_clique_partition(graph, list(range(graph.num_actions)), lambda c: 1.0)
    return int(round(value))


def greedy_clique_cover(graph: BipartiteGraph, members: Sequence[int]) -> list[list[int]]:
    """First-fit clique partition of ``members`` in index order."""
    adj = graph.clique_adjacency
    parts: list[list[int]] = []
    for j in members:
        for part in parts:
            if all(adj[j, a] and adj[a, j] for a in part):
                part.append(j)
                break
        else:
            parts.append([j])
    return parts


# ---------------------------------------------------------------- generators

def gen_identity(k: int) -> BipartiteGraph:
    if k < 1:
        raise GraphError("K must be >= 1")
    sets = [{j} for j in range(k)]
    return BipartiteGraph.from_sets(k, sets, sets)


def gen_erdos_renyi(n: int, k: int, p: float, seed: int) -> BipartiteGraph:
    """Each e_ij is 1 independently w.p. ``p``; K_j = V_j; resampled until valid."""
    if not 0 < p < 1:
        raise GraphError(f"p must lie in (0, 1), got {p}")
    rng = np.random.default_rng(seed)
    for _ in range(MAX_RESAMPLE):
        e = rng.random((n, k)) < p
        if e.any(axis=0).all() and e.any(axis=1).all():
            sets = [np.flatnonzero(e[:, j]).tolist() for j in range(k)]
            return BipartiteGraph.from_sets(n, sets, sets)
    raise GraphError(f"no valid Erdos-Renyi graph after {MAX_RESAMPLE} attempts (N={n}, K={k}, p={p})")


def er_stopping_sets(n: int, p: float, seed: int) -> list[np.ndarray]:
    """Draw random subsets (each base-arm kept w.p. p) until their union covers all N base-arms."""
    if not 0 < p < 1:
        raise GraphError(f"p must lie in (0, 1), got {p}")
    if n < 1:
        raise GraphError("N must be >= 1")
    rng = np.random.default_rng(seed)
    covered = np.zeros(n, dtype=bool)
    draws = []
    while not covered.all():
        chi = rng.random(n) < p
        draws.append(np.flatnonzero(chi))
        covered |= chi
    return draws


def er_stopping_time(n: int, p: float, seed: int) -> int:
    return len(er_stopping_sets(n, p, seed))


def er_stopping_graph(n: int, p: float, seed: int) -> BipartiteGraph:
    """The graph whose actions are the draws up to the stopping time (so K = tau)."""
    draws = er_stopping_sets(n, p, seed)
    sets = [d.tolist() for d in draws]
    return BipartiteGraph.from_sets(n, sets, sets)


def powerlaw_degrees(k: int, exponent: float, rng: np.random.Generator, min_degree: int = 1) -> np.ndarray:
    support = np.arange(min_degree, k)
    pmf = support.astype(float) ** -exponent
    pmf /= pmf.sum()
    deg = rng.choice(support, size=k, p=pmf)
    if deg.sum() % 2:
        deg[int(np.argmax(deg))] -= 1 if deg.max() > min_degree else -1
    return deg


def gen_powerlaw(k: int, exponent: float, seed: int, min_degree: int = 1) -> BipartiteGraph:
    """Social-network stand-in: configuration-model graph with power-law degrees.

    Actions and base-arms are the users; V_j is the closed one-hop
    neighbourhood of j and K_j = {j}.
    """
    if k < 2:
        raise GraphError("K must be >= 2")
    if exponent <= 1:
        raise GraphError(f"power-law exponent must exceed 1, got {exponent}")
    rng = np.random.default_rng(seed)
    social = powerlaw_social_graph(k, exponent, rng, min_degree)
    observe = [{j, *social.neighbors(j)} for j in range(k)]
    return BipartiteGraph.from_sets(k, observe, [{j} for j in range(k)])


def powerlaw_social_graph(k: int, exponent: float, rng: np.random.Generator, min_degree: int = 1) -> nx.Graph:
    deg = powerlaw_degrees(k, exponent, rng, min_degree)
    multi = nx.configuration_model(deg.tolist(), seed=int(rng.integers(2**31)))
    g = nx.Graph(multi)
    g.remove_edges_from(list(nx.selfloop_edges(g)))
    return g


@dataclass(frozen=True)
class RoutingInstance:
    graph: BipartiteGraph
    paths: tuple[tuple[int, ...], ...]   # node sequences, in the link graph's labels
    links: tuple[tuple[int, int], ...]   # directed links; links[i] is base-arm i


def simple_paths(edges: Iterable[tuple[int, int]], source: int, dest: int, cap: int = 10_000) -> list[tuple[int, ...]]:
    """All simple source->dest paths, depth-first with neighbours visited in ascending order."""
    adj: dict[int, set[int]] = {}
    for a, b in edges:
        adj.setdefault(a, set()).add(b)
        adj.setdefault(b, set()).add(a)
    if source not in adj or dest not in adj:
        raise GraphError(f"source {source} or destination {dest} not in the link graph")
    out: list[tuple[int, ...]] = []

    def dfs(path: list[int], seen: set[int]):
        node = path[-1]
        if node == dest:
            out.append(tuple(path))
            if len(out) > cap:
                raise GraphError(f"more than {cap} simple paths")
            return
        for nb in sorted(adj[node]):
            if nb not in seen:
                seen.add(nb)
                path.append(nb)
                dfs(path, seen)
                path.pop()
                seen.discard(nb)

    dfs([source], {source})
    if not out:
        raise GraphError(f"no path from {source} to {dest}")
    return out


def gen_routing(edges: Iterable[tuple[int, int]], source: int, dest: int, cap: int = 10_000) -> RoutingInstance:
    """Paths become actions, directed links used by some path become base-arms; K_j = V_j."""
    paths = simple_paths(edges, source, dest, cap)
    links = sorted({(p[s], p[s + 1]) for p in paths for s in range(len(p) - 1)})
    index = {link: i for i, link in enumerate(links)}
    sets = [{index[(p[s], p[s + 1])] for s in range(len(p) - 1)} for p in paths]
    graph = BipartiteGraph.from_sets(len(links), sets, sets)
    return RoutingInstance(graph, tuple(paths), tuple(links))


# Six-node network with 13 source(1)->destination(6) simple paths using 12 directed links.
SIX_NODE_EDGES = ((1, 2), (1, 3), (2, 3), (2, 4), (2, 5), (3, 5), (4, 5), (4, 6), (5, 6))


def six_node_routing() -> RoutingInstance:
    return gen_routing(SIX_NODE_EDGES, 1, 6)


# ----------------------------------------------------------------- text I/O

def save_graph(graph: BipartiteGraph) -> str:
    lines = [f"{graph.num_actions} {graph.num_base_arms}"]
    for j, (v, k) in enumerate(zip(graph.observe_sets, graph.reward_sets)):
        vs = " ".join(str(i + 1) for i in sorted(v))
        ks = " ".join(str(i + 1) for i in sorted(k))
        lines.append(f"{j + 1} | V: {vs} | R: {ks}")
    return "\n".join(lines) + "\n"


def _parse_ids(field: str, tag: str, lineno: int, n: int) -> list[int]:
    field = field.strip()
    if not field.startswith(tag + ":"):
        raise GraphParseError(lineno, f"expected '{tag}:' field, got {field!r}")
    try:
        ids = [int(tok) for tok in field[len(tag) + 1:].split()]
    except ValueError as exc:
        raise GraphParseError(lineno, f"non-integer base-arm id ({exc})") from None
    for i in ids:
        if not 1 <= i <= n:
            raise GraphParseError(lineno, f"base-arm id {i} outside 1..{n}")
    return [i - 1 for i in ids]


def load_graph(text: str, check: bool = True) -> BipartiteGraph:
    """Parse the ``K N`` / ``j | V: ... | R: ...`` format; raises GraphParseError or GraphError."""
    rows = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if line:
            rows.append((lineno, line))
    if not rows:
        raise GraphParseError(1, "empty graph file")
    lineno, header = rows[0]
    try:
        k, n = (int(tok) for tok in header.split())
    except ValueError:
        raise GraphParseError(lineno, f"header must be 'K N', got {header!r}") from None
    if k < 1 or n < 1:
        raise GraphParseError(lineno, "K and N must be positive")
    if len(rows) - 1 != k:
        raise GraphParseError(rows[-1][0], f"expected {k} action lines, found {len(rows) - 1}")
    observe: list[list[int]] = [[] for _ in range(k)]
    reward: list[list[int]] = [[] for _ in range(k)]
    seen = set()
    for lineno, line in rows[1:]:
        parts = line.split("|")
        if len(parts) != 3:
            raise GraphParseError(lineno, "action line must be 'j | V: ... | R: ...'")
        try:
            j = int(parts[0])
        except ValueError:
            raise GraphParseError(lineno, f"bad action id {parts[0].strip()!r}") from None
        if not 1 <= j <= k or j in seen:
            raise GraphParseError(lineno, f"action id {j} out of range or repeated")
        seen.add(j)
        observe[j - 1] = _parse_ids(parts[1], "V", lineno, n)
        reward[j - 1] = _parse_ids(parts[2], "R", lineno, n)
    graph = BipartiteGraph.from_sets(n, observe, reward)
    if check:
        problems = validate(graph)
        if problems:
            raise GraphError("; ".join(problems))
    return graph
