"""Shot allocation across measurement groups."""

import numpy as np
import scipy.sparse as sp

from .errors import NumericalError, ValidationError
from .estimator import Moments, ShotAllocation
from .grouping import group_norms


def _proportional(weights, M_tot, method):
    if M_tot <= 0:
        raise ValidationError("total budget must be positive")
    weights = np.asarray(weights, dtype=float)
    if np.any(weights <= 0):
        raise ValidationError("every group needs a positive weight (empty group?)")
    M = M_tot * weights / weights.sum()
    return ShotAllocation(M, M_tot, method=method)


def _check_nonempty(grouping):
    if any(len(g) == 0 for g in grouping.groups):
        raise ValidationError("empty group")


def alloc_l1(ham, grouping, M_tot):
    """``M_j`` proportional to ``sum_{i in G_j} |c_i|``."""
    _check_nonempty(grouping)
    return _proportional(group_norms(ham, grouping)[1], M_tot, "l1")


def alloc_l2(ham, grouping, M_tot):
    """``M_j`` proportional to ``sqrt(sum_{i in G_j} c_i^2)``."""
    _check_nonempty(grouping)
    return _proportional(np.sqrt(group_norms(ham, grouping)[0]), M_tot, "l2")


def alloc_uniform(grouping, M_tot):
    return _proportional(np.ones(len(grouping.groups)), M_tot, "uniform")


def alloc_inherit(alloc, grouping):
    """Reuse a base grouping's budgets unchanged on its repacking."""
    if len(alloc) != len(grouping.groups):
        raise ValidationError("inherited allocation has the wrong number of groups")
    return ShotAllocation(alloc.M.copy(), alloc.M_tot, alloc.integer, "inherit")


def min_variance_disjoint(ham, grouping, M_tot):
    """Closed-form ``(sum_j sqrt(S_j))^2 / M`` for a disjoint grouping with
    unit variances and no covariance."""
    S = group_norms(ham, grouping)[0]
    return float(np.sqrt(S).sum() ** 2 / M_tot)


class _Objective:
    """Shot-weighted variance as a function of the group budgets.

    ``f(M) = sum_i a_i / alpha_i + sum_{i<k} b_ik alpha_ik / (alpha_i alpha_k)``
    with ``alpha = B M``, ``alpha_ik = Bp M``.
    """

    def __init__(self, coeffs, grouping, moments):
        c = np.asarray(coeffs, dtype=float)
        N, m = c.size, len(grouping.groups)
        rows = [i for g in grouping.groups for i in g]
        cols = [j for j, g in enumerate(grouping.groups) for _ in g]
        self.B = sp.csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(N, m))
        if np.any(np.asarray(self.B.sum(axis=1)).ravel() == 0):
            raise ValidationError("grouping does not cover every term")
        self.a = c**2 * moments.variances
        self.pairs = None
        if moments.has_covariance:
            index = {}
            prow, pcol = [], []
            for j, g in enumerate(grouping.groups):
                for x in range(len(g)):
                    for y in range(x + 1, len(g)):
                        key = (g[x], g[y])
                        if key not in index:
                            index[key] = len(index)
                        prow.append(index[key])
                        pcol.append(j)
            if index:
                ik = np.array(list(index.keys()))
                self.I, self.K = ik[:, 0], ik[:, 1]
                self.b = np.array([2 * c[i] * c[k] * moments.cov(i, k) for i, k in index])
                self.Bp = sp.csr_matrix(
                    (np.ones(len(prow)), (prow, pcol)), shape=(len(index), m)
                )
                self.pairs = True

    def __call__(self, M):
        alpha = self.B @ M
        f = np.sum(self.a / alpha)
        if self.pairs:
            f += np.sum(self.b * (self.Bp @ M) / (alpha[self.I] * alpha[self.K]))
        return float(f)

    def grad(self, M):
        alpha = self.B @ M
        g = -(self.B.T @ (self.a / alpha**2))
        if self.pairs:
            ai, ak, aik = alpha[self.I], alpha[self.K], self.Bp @ M
            g = g + self.Bp.T @ (self.b / (ai * ak))
            wi = np.bincount(self.I, self.b * aik / (ai**2 * ak), minlength=alpha.size)
            wk = np.bincount(self.K, self.b * aik / (ai * ak**2), minlength=alpha.size)
            g = g - self.B.T @ (wi + wk)
        return np.asarray(g).ravel()


def _kkt_residual(M, g, floor):
    active = M > 10 * floor
    lam = np.dot(M[active], g[active]) / M[active].sum()
    if lam == 0:
        return float(np.max(np.abs(g[active])))
    resid = np.max(np.abs(g[active] - lam)) / abs(lam)
    # inactive coordinates only violate KKT if pushing mass there would help
    if np.any(~active):
        resid = max(resid, float(np.max(np.maximum(lam - g[~active], 0.0))) / abs(lam))
    return float(resid)


def alloc_optimize(ham, grouping, moments=None, M_tot=1.0, init=None, rtol=1e-8,
                   kkt_tol=1e-7, max_iter=100_000):
    """Minimise the shot-weighted estimator variance over ``sum_j M_j = M_tot``.

    Entropic mirror descent on the scaled simplex: ``M_j <- M_j exp(-eta g_j / s)``
    renormalised, with ``s`` the mean gradient magnitude.  Budgets stay
    positive automatically.  The step grows by 1.5 after every accepted step
    and halves until the objective does not increase.  Stops once the relative
    KKT residual is below ``kkt_tol`` or the objective has moved by less than
    ``rtol`` (relative) for 50 consecutive steps.
    """
    coeffs = np.asarray(ham.coeffs if hasattr(ham, "coeffs") else ham, dtype=float)
    if M_tot <= 0:
        raise ValidationError("total budget must be positive")
    moments = moments or Moments.state_independent(coeffs.size)
    m = len(grouping.groups)
    if m == 1:
        return ShotAllocation(np.array([float(M_tot)]), M_tot, method="opt", flavor=moments.flavor,
                              kkt_residual=0.0)
    f = _Objective(coeffs, grouping, moments)
    floor = 1e-12 * M_tot
    if init is None:
        M = np.full(m, M_tot / m)
    else:
        M = np.asarray(init.M if isinstance(init, ShotAllocation) else init, dtype=float)
        if M.shape != (m,) or np.any(M <= 0):
            raise ValidationError("initial allocation must be positive with one entry per group")
        M = M_tot * M / M.sum()
    fval = f(M)
    resid = np.inf
    eta = 1.0
    stall = 0
    for _ in range(max_iter):
        g = f.grad(M)
        resid = _kkt_residual(M, g, floor)
        if resid < kkt_tol or stall >= 50:
            break
        direction = -g / np.mean(np.abs(g))
        while True:
            trial = M * np.exp(eta * (direction - direction.max()))
            trial = np.maximum(M_tot * trial / trial.sum(), floor)
            trial = M_tot * trial / trial.sum()
            tval = f(trial)
            if tval <= fval or eta < 1e-12:
                break
            eta *= 0.5
        if tval > fval:
            break
        rel = (fval - tval) / max(abs(fval), 1e-300)
        stall = stall + 1 if rel < rtol else 0
        M, fval = trial, tval
        eta *= 1.5
    else:
        raise NumericalError("shot allocation did not converge", M, resid)
    if resid > max(kkt_tol, 1e-4):
        raise NumericalError(f"shot allocation stalled with KKT residual {resid:.3g}", M, resid)
    return ShotAllocation(M, M_tot, method="opt", flavor=moments.flavor, kkt_residual=resid)


def round_allocation(alloc, M_tot):
    """Integer budgets (each at least 1) summing to ``M_tot`` by largest
    remainder; equal remainders go to the lower group index."""
    M_tot = int(M_tot)
    m = len(alloc)
    if M_tot < m:
        raise ValidationError(f"{M_tot} shots cannot cover {m} groups")
    target = alloc.M.astype(float) * M_tot / float(alloc.M.sum())
    base = np.maximum(np.floor(target).astype(np.int64), 1)
    while base.sum() > M_tot:
        excess = np.where(base > 1, base - target, -np.inf)
        base[int(np.argmax(excess))] -= 1
    short = M_tot - int(base.sum())
    if short:
        frac = target - base
        order = np.lexsort((np.arange(m), -frac))
        base[order[:short]] += 1
    return ShotAllocation(base, M_tot, integer=True, method=f"{alloc.method}+rounded")


def allocation_report(alloc, integer=None):
    out = {
        "M_tot": alloc.M_tot,
        "continuous": alloc.M.astype(float).tolist(),
        "integer": None if integer is None else integer.M.tolist(),
        "method": alloc.method,
        "flavor": alloc.flavor,
        "kkt_residual": alloc.kkt_residual,
    }
    return out
