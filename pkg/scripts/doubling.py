"""Known-horizon UCB-LP against its doubling-trick variant on paired seeds."""
import argparse

from netbandit import env as E
from netbandit import sim

ap = argparse.ArgumentParser(description=__doc__)
ap.add_argument("--env", default=None, help="environment fixture (default: five-arm identity)")
ap.add_argument("--horizon", type=int, default=100_000)
ap.add_argument("--reps", type=int, default=100)
ap.add_argument("--stride", type=int, default=10_000)
args = ap.parse_args()

env = E.load_env(args.env) if args.env else E.identity_env([0.9, 0.8, 0.7, 0.6, 0.5])
cfgs = [sim.RunConfig(env, sim.PolicySpec(n), args.horizon, stride=args.stride) for n in ("ucb-lp", "ucb-lp-doubling")]
res = sim.replicate(cfgs, args.reps)
print(sim.format_compare(sim.compare(list(res.values()), baseline="ucb-lp")))
print("epochs:", res["ucb-lp-doubling"].runs.extras["epochs"][0])
