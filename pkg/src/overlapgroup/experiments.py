"""Desk-scale experiment drivers.  Each returns a list of row dicts; the CLI
writes them as CSV."""

import csv
import sys
from math import comb

import numpy as np

from .allocation import alloc_inherit, alloc_l2, alloc_optimize, round_allocation
from .constructions import build_theorem1, theorem1_variances
from .errors import ValidationError
from .estimator import (
    Moments,
    ShotAllocation,
    estimator_variance,
    heuristic_weights,
    shot_weighted_variance,
)
from .grouping import Grouping, sorted_insertion
from .hamiltonian import (
    AbstractHamiltonian,
    gen_hubbard_spinless_2xn,
    gen_ising_all_to_all,
    gen_random,
)
from .repacking import RepackedGrouping, adhoc_repack, group_diagonalizers, posthoc_repack
from .simulator import (
    MAX_QUBITS,
    exact_moments,
    expectation_of,
    group_pairs,
    ising_witness_state,
    product_state,
    simulate_estimates,
    variance_covariance_split,
)

SCHEMA_VERSION = 1
RANDOM_SCALING_MAX_N = 10


def write_csv(rows, path=None, invocation=None):
    """CSV with a ``# schema=... invocation=...`` comment line before the header."""
    out = open(path, "w", newline="") if path else sys.stdout
    try:
        inv = invocation if invocation is not None else " ".join(sys.argv)
        out.write(f"# schema={SCHEMA_VERSION} invocation={inv}\n")
        if rows:
            w = csv.DictWriter(out, fieldnames=list(rows[0]))
            w.writeheader()
            w.writerows(rows)
    finally:
        if path:
            out.close()


def fit_through_origin(x, y):
    """Least-squares slope of ``y = k x`` and the R^2 of that fit (against the
    mean of ``y``)."""
    x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    k = float(x @ y / (x @ x))
    ss_res = float(np.sum((y - k * x) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    return k, 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0


def linear_fit(x, y):
    """Ordinary least squares ``y = a + b x``; returns ``(a, b, R^2)``."""
    x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    b, a = np.polyfit(x, y, 1)
    ss_res = float(np.sum((y - a - b * x) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    return float(a), float(b), 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0


def theorem1(L_list=(4, 8, 16, 32), M_tot=1.0):
    return [theorem1_variances(build_theorem1(L), M_tot) for L in L_list]


def appendix_a(n_list=(4, 6, 8)):
    rows = []
    for n in n_list:
        ham = gen_ising_all_to_all(n)
        D, cov, total = variance_covariance_split(ising_witness_state(n), ham)
        rows.append({
            "n": n,
            "total": total,
            "expected_total": n**4 / 16,
            "D": D,
            "covariance": cov,
            "D_max": comb(n, 2),
            "ratio": D / total,
            "bound": 8 * (n - 1) / n**3,
        })
    return rows


def appendix_b_model(cA, cB, M1, M2, cC=1.0, var_A=1.0, cov_AB=1.0, cov_AC=0.0):
    """Three-term model ``cA A + cB B + cC C`` with ``[A,B] = [A,C] = 0``.

    Returns ``(ham, G, R, moments, alloc)`` with ``G = {{A,C},{B}}`` and
    ``R = {{A,C},{A,B}}``.  ``var_B`` and ``var_C`` are set to 1; Cauchy-Schwarz
    then needs ``cov_AB^2 <= var_A``.
    """
    if M1 <= 0 or M2 <= 0:
        raise ValidationError("shot counts must be positive")
    cov = np.array([[var_A, cov_AB, cov_AC], [cov_AB, 1.0, 0.0], [cov_AC, 0.0, 1.0]])
    if np.linalg.eigvalsh(cov)[0] < -1e-12:
        raise ValidationError("covariance model is not positive semidefinite")
    adj = np.ones((3, 3), dtype=bool)
    adj[1, 2] = adj[2, 1] = False
    ham = AbstractHamiltonian(np.array([cA, cB, cC], dtype=float), adj, ("A", "B", "C"))
    G = Grouping(((0, 2), (1,)))
    R = RepackedGrouping(G, ((0, 2), (0, 1)))
    return ham, G, R, Moments.from_matrix(cov), ShotAllocation(np.array([M1, M2], float))


def appendix_b_point(cA, cB, M1, M2, cC=1.0, tol=1e-10):
    """Direct variance change from repacking A into B's group, against the
    closed-form prediction ``2 M1 / M2 > cA / cB`` (stated for cA, cB > 0)."""
    ham, G, R, moments, alloc = appendix_b_model(cA, cB, M1, M2, cC)
    var_G = shot_weighted_variance(ham, G, alloc, moments)
    var_R = shot_weighted_variance(ham, R, alloc, moments)
    delta = var_R - var_G
    closed = 2 * cA * cB / (M1 + M2) - M2 * cA**2 / (M1 * (M1 + M2))
    margin = 2 * M1 / M2 - cA / cB
    predicted = margin > 0 if cB > 0 else False
    increase = delta > 0
    boundary = abs(delta) <= tol * max(1.0, abs(var_G)) or abs(margin) <= tol
    return {
        "cA": cA, "cB": cB, "M1": M1, "M2": M2,
        "var_G": var_G, "var_R": var_R, "delta": delta, "closed_form_delta": closed,
        "increase": increase, "predicted_increase": predicted,
        "agree": boundary or increase == predicted,
    }


def appendix_b_grid(size=20, cB=1.0, M2=10.0):
    """``size x size`` grid over ``cA`` and ``M1`` (positive coefficients)."""
    cA_vals = np.linspace(0.1, 5.0, size)
    M1_vals = np.linspace(1.0, 40.0, size)
    return [appendix_b_point(float(a), cB, float(m), M2) for a in cA_vals for m in M1_vals]


def _streams(seed, count):
    return [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(count)]


def hubbard(n_list=(2, 3, 4, 5), states=200, seed=0):
    rows = []
    for ncols, rng in zip(n_list, _streams(seed, len(n_list))):
        if 2 * ncols > MAX_QUBITS:
            raise ValidationError(f"2 x {ncols} exceeds the {MAX_QUBITS}-qubit cap")
        ham = gen_hubbard_spinless_2xn(ncols)
        D, cov = np.empty(states), np.empty(states)
        for s in range(states):
            psi = product_state(ham.n, seed=rng)
            D[s], cov[s], _ = variance_covariance_split(psi, ham)
        rows.append({
            "ncols": ncols,
            "sites": 2 * ncols,
            "terms": len(ham),
            "states": states,
            "mean_D": float(D.mean()),
            "se_D": float(D.std(ddof=1) / np.sqrt(states)),
            "mean_cov": float(cov.mean()),
            "se_cov": float(cov.std(ddof=1) / np.sqrt(states)),
        })
    return rows


def random_scaling(n_list=(4, 5, 6, 7, 8), density=0.1, seed=0, M_tot=1.0):
    """Sorted insertion with l2 budgets against post-hoc and ad-hoc repackings
    that inherit those budgets, and ad-hoc with re-optimised budgets.

    Variances use the exact single-shot variances of a random product state
    with covariances set to zero.
    """
    rows = []
    for n, ss in zip(n_list, np.random.SeedSequence(seed).spawn(len(n_list))):
        if n > RANDOM_SCALING_MAX_N:
            raise ValidationError(f"random scaling is capped at n = {RANDOM_SCALING_MAX_N}")
        ham_seed, state_seed = ss.spawn(2)
        ham = gen_random(n, density, seed=np.random.default_rng(ham_seed))
        psi = product_state(n, seed=np.random.default_rng(state_seed))
        moments = Moments.zero_covariance(exact_moments(psi, ham).variances)

        G = sorted_insertion(ham)
        base = alloc_l2(ham, G, M_tot)
        var_si = shot_weighted_variance(ham, G, base, moments)
        post = posthoc_repack(ham, G, group_diagonalizers(ham, G))
        var_post = shot_weighted_variance(ham, post, alloc_inherit(base, post), moments)
        adhoc = adhoc_repack(ham, G)
        var_adhoc = shot_weighted_variance(ham, adhoc, alloc_inherit(base, adhoc), moments)
        opt = alloc_optimize(ham, adhoc, moments, M_tot, init=base)
        var_opt = shot_weighted_variance(ham, adhoc, opt, moments)
        rows.append({
            "n": n,
            "terms": len(ham),
            "groups": len(G),
            "var_sorted_insertion": var_si,
            "var_posthoc_inherit": var_post,
            "var_adhoc_inherit": var_adhoc,
            "var_adhoc_opt": var_opt,
            "ratio_posthoc_inherit": var_si / var_post,
            "ratio_adhoc_inherit": var_si / var_adhoc,
            "ratio_adhoc_opt": var_si / var_opt,
        })
    return rows


def simulate(ham, grouping, state, shots, reps, seed, weights=None, base_alloc=None):
    """Repeated energy estimates and their summary against the analytic variance.

    ``grouping`` may be disjoint or repacked; budgets default to l2 on the base
    grouping, rounded to ``shots`` integers.
    """
    base = grouping.base if isinstance(grouping, RepackedGrouping) else grouping
    base_alloc = base_alloc or alloc_l2(ham, base, 1.0)
    alloc = round_allocation(base_alloc, shots)
    weights = weights or heuristic_weights(grouping, alloc, len(ham))
    # synthesised from the final groups so ad-hoc additions are diagonal too
    circuits = [c for c, _ in group_diagonalizers(ham, grouping)]
    rng = np.random.default_rng(seed)
    energies = simulate_estimates(state, ham, grouping, circuits, alloc, weights, reps, rng)
    moments = exact_moments(state, ham, group_pairs(grouping))
    analytic = estimator_variance(ham, grouping, weights, alloc, moments)
    exact = expectation_of(ham, state)
    mean = float(energies.mean())
    sample_var = float(energies.var(ddof=1))
    centred = energies - mean
    # standard error of the sample variance from the fourth central moment
    m4 = float(np.mean(centred**4))
    se_var = float(np.sqrt(max(m4 - sample_var**2, 0.0) / reps))
    summary = {
        "reps": reps,
        "shots": int(shots),
        "exact_energy": exact,
        "mean": mean,
        "se_mean": float(np.sqrt(sample_var / reps)),
        "sample_variance": sample_var,
        "analytic_variance": analytic,
        "se_variance": se_var,
    }
    return energies, summary
