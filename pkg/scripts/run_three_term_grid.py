"""Sign of the variance change when one term is repacked in the three-term model,
scanned over coefficient ratio and shot split."""

import argparse

from overlapgroup import experiments as exp

parser = argparse.ArgumentParser(description=__doc__)
parser.add_argument("--size", type=int, default=20)
parser.add_argument("--out", default="three_term_grid.csv")
args = parser.parse_args()

rows = exp.appendix_b_grid(args.size)
exp.write_csv(rows, args.out)
bad = sum(not r["agree"] for r in rows)
print(f"{len(rows)} points, {sum(r['increase'] for r in rows)} increases, {bad} disagreements")
