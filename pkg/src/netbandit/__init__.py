"""Bandits with side observations on bipartite graphs: LP-guided exploration policies and a seeded simulator."""
from .graph import BipartiteGraph, load_graph, save_graph
from .env import Environment, RewardSpec, identity_env, load_env
from .lp import AllocationLP, solve_generic, solve_p2
from .sim import PolicySpec, RunConfig, replicate, run, simulate

__version__ = "0.1.0"
