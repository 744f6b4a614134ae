"""UCB-LP regret growth in T on a two-arm instance, against the evaluated upper bound."""
import argparse
import math

from netbandit import bounds as B
from netbandit import env as E
from netbandit import sim

ap = argparse.ArgumentParser(description=__doc__)
ap.add_argument("--means", default="0.9,0.5")
ap.add_argument("--horizons", default="1000,3000,10000,30000,100000")
ap.add_argument("--reps", type=int, default=100)
args = ap.parse_args()

env = E.identity_env([float(x) for x in args.means.split(",")])
z = sim.allocation(env)
print(f"{'T':>8} {'R(T)':>9} {'R/lnT':>7} {'bound':>9}")
for T in [int(x) for x in args.horizons.split(",")]:
    agg = sim.replicate(sim.RunConfig(env, sim.PolicySpec("ucb-lp"), T, stride=T), args.reps)["ucb-lp"]
    r = float(agg.mean[-1])
    print(f"{T:>8} {r:9.2f} {r / math.log(T):7.3f} {B.ucb_lp_bound(env, z, T):9.2f}")
