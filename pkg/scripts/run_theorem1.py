"""Adversarial family sweep: optimal-allocation variances of G, G' and the repacking R."""

import argparse

from overlapgroup import experiments as exp

parser = argparse.ArgumentParser(description=__doc__)
parser.add_argument("--L", type=int, nargs="+", default=[4, 8, 16, 32])
parser.add_argument("--out", default="theorem1.csv")
args = parser.parse_args()

rows = exp.theorem1(args.L)
exp.write_csv(rows, args.out)
slope, r2 = exp.fit_through_origin([r["m"] for r in rows], [r["ratio_G_R"] for r in rows])
for r in rows:
    print(f"L={r['L']:3d}  groups={r['m']:3d}  Var(G)/Var(R)={r['ratio_G_R']:.4f}  "
          f"Var(G)/Var(G')={r['ratio_G_Gp']:.4f}")
print(f"slope through origin {slope:.4f}, R^2 {r2:.4f}")
