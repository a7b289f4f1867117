"""Variance ratios of repacked groupings over sorted insertion on random Hamiltonians."""

import argparse

from overlapgroup import experiments as exp

parser = argparse.ArgumentParser(description=__doc__)
parser.add_argument("--n", type=int, nargs="+", default=[4, 5, 6, 7, 8])
parser.add_argument("--density", type=float, default=0.1)
parser.add_argument("--seed", type=int, default=0)
parser.add_argument("--out", default="random_scaling.csv")
args = parser.parse_args()

rows = exp.random_scaling(args.n, args.density, args.seed)
exp.write_csv(rows, args.out)
for r in rows:
    print(f"n={r['n']}  terms={r['terms']:4d}  posthoc {r['ratio_posthoc_inherit']:.3f}  "
          f"adhoc {r['ratio_adhoc_inherit']:.3f}  adhoc+opt {r['ratio_adhoc_opt']:.3f}")
