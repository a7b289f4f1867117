"""Command-line entry point.

Exit codes: 0 success, 2 invalid input, 3 numerical non-convergence.
"""

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import experiments as exp
from .allocation import (
    alloc_inherit,
    alloc_l1,
    alloc_l2,
    alloc_optimize,
    alloc_uniform,
    allocation_report,
)
from .errors import NumericalError, ValidationError
from .estimator import Moments, heuristic_weights, variance_parts
from .grouping import Grouping, group_norms, sorted_insertion
from .hamiltonian import load_hamiltonian
from .repacking import RepackedGrouping, adhoc_repack, posthoc_repack
from .simulator import (
    StateVector,
    exact_moments,
    group_pairs,
    ising_witness_state,
    load_state,
    product_state,
)


def _int_list(text):
    """``4,8,16`` or an inclusive range ``2..5``."""
    if ".." in text:
        lo, hi = text.split("..")
        return list(range(int(lo), int(hi) + 1))
    return [int(v) for v in text.split(",") if v]


def _dump(obj, path):
    text = json.dumps(obj, indent=2)
    if path:
        Path(path).write_text(text + "\n")
    else:
        print(text)


def load_grouping(path):
    data = json.loads(Path(path).read_text())
    if data.get("disjoint", True):
        return Grouping.from_dict(data)
    return RepackedGrouping.from_dict(data)


def _base(grouping):
    return grouping.base if isinstance(grouping, RepackedGrouping) else grouping


def parse_state(spec, n):
    """``zero``, ``product:SEED``, ``witness`` or a path to a ``.npy`` vector."""
    if spec == "zero":
        return StateVector.basis(n, 0)
    if spec == "witness":
        return ising_witness_state(n)
    if spec.startswith("product:"):
        return product_state(n, seed=int(spec.split(":", 1)[1]))
    return load_state(spec, n)


def _moments(spec, ham, grouping):
    if spec == "zerocov":
        return Moments.state_independent(len(ham))
    if spec == "worstcase":
        return Moments.worst_case(ham.coeffs)
    if spec.startswith("state:"):
        state = load_state(spec.split(":", 1)[1], ham.n)
        return exact_moments(state, ham, group_pairs(grouping))
    raise ValidationError(f"unknown moments spec {spec!r}")


def _allocation(kind, ham, grouping, moments, shots):
    base = _base(grouping)
    if kind == "opt":
        return alloc_optimize(ham, grouping, moments, shots, init=alloc_l2(ham, base, shots))
    if kind == "uniform":
        return alloc_uniform(grouping, shots)
    if kind in ("l1", "l2"):
        if isinstance(grouping, RepackedGrouping):
            raise ValidationError(f"--alloc {kind} needs a disjoint grouping; use inherit")
        return (alloc_l1 if kind == "l1" else alloc_l2)(ham, grouping, shots)
    if kind == "inherit":
        return alloc_inherit(alloc_l2(ham, base, shots), grouping)
    raise ValidationError(f"unknown allocation {kind!r}")


def cmd_group(args):
    ham = load_hamiltonian(args.ham_file)
    g = sorted_insertion(ham)
    S, L1 = group_norms(ham, g)
    _dump(g.to_dict(), args.out)
    print(json.dumps({"m": len(g), "S": S.tolist(), "L1": L1.tolist()}), file=sys.stderr)


def cmd_repack(args):
    ham = load_hamiltonian(args.ham_file)
    g = load_grouping(args.grouping)
    if isinstance(g, RepackedGrouping):
        raise ValidationError("repacking expects a disjoint grouping")
    r = posthoc_repack(ham, g) if args.mode == "posthoc" else adhoc_repack(ham, g)
    mu = r.multiplicities(len(ham))
    _dump(r.to_dict(), args.out)
    stats = {"groups": len(r), "added": len(r.added()), "mu_mean": float(mu.mean()),
             "mu_max": int(mu.max())}
    print(json.dumps(stats), file=sys.stderr)


def cmd_variance(args):
    ham = load_hamiltonian(args.ham_file)
    g = load_grouping(args.grouping)
    moments = _moments(args.moments, ham, g)
    alloc = _allocation(args.alloc, ham, g, moments, args.shots)
    weights = heuristic_weights(g, alloc, len(ham))
    total, diag, cov = variance_parts(ham, g, weights, alloc, moments)
    _dump({
        "grouping_id": str(args.grouping),
        "allocation": allocation_report(alloc),
        "flavor": moments.flavor,
        "variance": total,
        "diagonal_part": diag,
        "covariance_part": cov,
    }, args.out)


def cmd_simulate(args):
    ham = load_hamiltonian(args.ham_file)
    g = load_grouping(args.grouping)
    state = parse_state(args.state, ham.n)
    energies, summary = exp.simulate(ham, g, state, args.shots, args.reps, args.seed)
    summary["seed"] = args.seed
    rows = [{"rep": k, "energy": float(e)} for k, e in enumerate(energies)]
    exp.write_csv(rows, args.out)
    print(json.dumps(summary), file=sys.stderr)


def cmd_theorem1(args):
    rows = exp.theorem1(_int_list(args.L_list))
    exp.write_csv(rows, args.out)
    k, r2 = exp.fit_through_origin([r["m"] for r in rows], [r["ratio_G_R"] for r in rows])
    print(json.dumps({"slope": k, "r2": r2}), file=sys.stderr)


def cmd_appendix_a(args):
    exp.write_csv(exp.appendix_a(_int_list(args.n_list)), args.out)


def cmd_appendix_b(args):
    row = exp.appendix_b_point(args.cA, args.cB, args.M1, args.M2)
    _dump({k: (bool(v) if isinstance(v, (bool, np.bool_)) else v) for k, v in row.items()}, None)


def cmd_hubbard(args):
    exp.write_csv(exp.hubbard(_int_list(args.n_list), args.states, args.seed), args.out)


def cmd_random_scaling(args):
    rows = exp.random_scaling(_int_list(args.n_list), args.density, args.seed)
    exp.write_csv(rows, args.out)


def build_parser():
    p = argparse.ArgumentParser(prog="overlapgroup", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("group", help="sorted-insertion grouping of a .ham file")
    s.add_argument("ham_file")
    s.add_argument("--out")
    s.set_defaults(func=cmd_group)

    s = sub.add_parser("repack", help="post-hoc or ad-hoc repacking")
    s.add_argument("ham_file")
    s.add_argument("grouping")
    s.add_argument("--mode", choices=["posthoc", "adhoc"], default="adhoc")
    s.add_argument("--out")
    s.set_defaults(func=cmd_repack)

    s = sub.add_parser("variance", help="estimator variance report")
    s.add_argument("ham_file")
    s.add_argument("grouping")
    s.add_argument("--alloc", choices=["l1", "l2", "opt", "uniform", "inherit"], default="l2")
    s.add_argument("--moments", default="zerocov", help="zerocov | worstcase | state:FILE.npy")
    s.add_argument("--shots", type=float, default=1.0)
    s.add_argument("--out")
    s.set_defaults(func=cmd_variance)

    s = sub.add_parser("simulate", help="repeated sampled energy estimates")
    s.add_argument("ham_file")
    s.add_argument("grouping")
    s.add_argument("--state", default="zero", help="zero | witness | product:SEED | FILE.npy")
    s.add_argument("--shots", type=int, default=1000)
    s.add_argument("--reps", type=int, default=1000)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out")
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("theorem1", help="adversarial family sweep")
    s.add_argument("--L-list", default="4,8,16,32")
    s.add_argument("--out")
    s.set_defaults(func=cmd_theorem1)

    s = sub.add_parser("appendixA", help="covariance-dominated Ising witness")
    s.add_argument("--n-list", default="4,6,8")
    s.add_argument("--out")
    s.set_defaults(func=cmd_appendix_a)

    s = sub.add_parser("appendixB", help="three-term repacking variance change")
    s.add_argument("--cA", type=float, required=True)
    s.add_argument("--cB", type=float, required=True)
    s.add_argument("--M1", type=float, required=True)
    s.add_argument("--M2", type=float, required=True)
    s.set_defaults(func=cmd_appendix_b)

    s = sub.add_parser("hubbard", help="diagonal vs covariance split on random product states")
    s.add_argument("--n-list", default="2..5")
    s.add_argument("--states", type=int, default=200)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out")
    s.set_defaults(func=cmd_hubbard)

    s = sub.add_parser("random-scaling", help="repacking gains on random Hamiltonians")
    s.add_argument("--n-list", default="4..8")
    s.add_argument("--density", type=float, default=0.1)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out")
    s.set_defaults(func=cmd_random_scaling)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except NumericalError as e:
        print(f"error: {e}", file=sys.stderr)
        return 3
    except (ValidationError, OSError, json.JSONDecodeError, KeyError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
