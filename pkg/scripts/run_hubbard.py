"""Diagonal and covariance parts of Var(H) for 2xn spinless Hubbard on random product states."""

import argparse

from overlapgroup import experiments as exp

parser = argparse.ArgumentParser(description=__doc__)
parser.add_argument("--ncols", type=int, nargs="+", default=[2, 3, 4, 5])
parser.add_argument("--states", type=int, default=200)
parser.add_argument("--seed", type=int, default=0)
parser.add_argument("--out", default="hubbard.csv")
args = parser.parse_args()

rows = exp.hubbard(args.ncols, args.states, args.seed)
exp.write_csv(rows, args.out)
for r in rows:
    print(f"2x{r['ncols']}  D={r['mean_D']:.3f}+-{r['se_D']:.3f}  "
          f"cov={r['mean_cov']:+.3f}+-{r['se_cov']:.3f}")
_, slope, r2 = exp.linear_fit([r["sites"] for r in rows], [r["mean_D"] for r in rows])
print(f"D per site {slope:.3f}, R^2 {r2:.3f}")
