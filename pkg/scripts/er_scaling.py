"""Stopping time of random observation graphs against log2 N."""
import argparse
import math

from netbandit.cli import er_tau_csv, er_tau_rows

ap = argparse.ArgumentParser(description=__doc__)
ap.add_argument("--n", default="1,4,16,64,256,1024")
ap.add_argument("--p", type=float, default=0.5)
ap.add_argument("--reps", type=int, default=1000)
ap.add_argument("--seed", type=int, default=0)
ap.add_argument("--out")
args = ap.parse_args()

rows = er_tau_rows([int(x) for x in args.n.split(",")], args.p, args.reps, args.seed)
for r in rows:
    lb = math.log2(r["N"]) if r["N"] > 1 else 0.0
    print(f"N={r['N']:>5}  tau={r['mean_tau']:7.3f}  log2N={lb:5.1f}  tau-log2N={r['mean_tau'] - lb:+.3f}  "
          f"sum z*={r['mean_zsum']:6.2f}  greedy={r['mean_greedy']:6.2f}")
if args.out:
    with open(args.out, "w") as fh:
        fh.write(er_tau_csv(rows))
