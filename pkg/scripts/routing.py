"""Shortest-path routing on the six-node network: regret and best-path identification."""
import argparse
import functools

import numpy as np

from netbandit import env as E
from netbandit import graph as gr
from netbandit import sim
from netbandit.cli import parse_policies

ap = argparse.ArgumentParser(description=__doc__)
ap.add_argument("--bound", type=float, default=5.0, help="delay normaliser B")
ap.add_argument("--policies", default="ucb1, ucb-n, eps-greedy-lp(c=5, d=0.2), eps-greedy-lp(c=4, d=0.05), ucb-lp")
ap.add_argument("--horizon", type=int, default=100_000)
ap.add_argument("--reps", type=int, default=200)
ap.add_argument("--stride", type=int, default=1000)
ap.add_argument("--parallel", type=int, default=1)
ap.add_argument("--out")
args = ap.parse_args()

inst = gr.six_node_routing()
source = functools.partial(E.routing_env, inst, bound=args.bound)
cfgs = [sim.RunConfig(source, s, args.horizon, 0, args.stride) for s in parse_policies(args.policies)]
res = sim.replicate(cfgs, args.reps, args.parallel)
seeds = next(iter(res.values())).runs.seeds
best = np.array([E.shortest_expected_path(inst, source(int(s)).theta) for s in seeds])
print(sim.format_compare(sim.compare(list(res.values()), baseline="ucb1", at=[args.horizon])))
for key, agg in res.items():
    print(f"{key:<28} best path found in {np.mean(agg.runs.recommended == best):.1%} of seeds")
if args.out:
    with open(args.out, "w") as fh:
        fh.write(sim.to_csv(list(res.values())))
