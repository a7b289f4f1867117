"""Shot-weighted and general-weight energy estimators for (overlapped) groupings.

Every variance here is the exact population variance of

    E_bar = sum_i c_i sum_{j in Gamma(i)} w_ij  mean_j(P_i)

when group ``j`` is measured ``M_j`` times and different groups use
independent shots.  Group ``j`` therefore contributes ``v_j^T C_j v_j / M_j``
with ``v_j = (c_i w_ij)_{i in G_j}`` and ``C_j`` the single-shot covariance
matrix of its members.
"""

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import NumericalError, ValidationError

FLAVORS = ("exact-state", "zero-covariance", "worst-case", "user-supplied")


class MissingCovarianceError(ValidationError):
    pass


@dataclass(frozen=True, eq=False)
class Moments:
    """Single-shot variances and covariances of the Hamiltonian's Pauli terms.

    Covariances come from exactly one of: a dense matrix, a dict of pairs
    ``{(i, k): value}`` with ``i < k``, or a sign vector (worst-case model,
    ``cov(i, k) = s_i s_k``).  With none of them every covariance is zero.
    """

    variances: np.ndarray
    flavor: str = "zero-covariance"
    matrix: np.ndarray = None
    pairs: dict = None
    signs: np.ndarray = None

    def __post_init__(self):
        var = np.asarray(self.variances, dtype=float)
        object.__setattr__(self, "variances", var)
        if self.flavor not in FLAVORS:
            raise ValidationError(f"unknown moments flavor {self.flavor!r}")
        if np.any(var < -1e-12) or np.any(var > 1 + 1e-12):
            raise ValidationError("single-shot Pauli variances must lie in [0, 1]")
        if self.matrix is not None:
            m = np.asarray(self.matrix, dtype=float)
            if m.shape != (var.size, var.size) or not np.allclose(m, m.T):
                raise ValidationError("covariance matrix must be symmetric N x N")
            m = m.copy()
            np.fill_diagonal(m, var)
            object.__setattr__(self, "matrix", m)

    def __len__(self):
        return self.variances.size

    @property
    def has_covariance(self):
        return self.matrix is not None or self.pairs is not None or self.signs is not None

    def var(self, i):
        return float(self.variances[i])

    def cov(self, i, k):
        if i == k:
            return self.var(i)
        if self.matrix is not None:
            return float(self.matrix[i, k])
        if self.signs is not None:
            return float(self.signs[i] * self.signs[k])
        if self.pairs is not None:
            key = (i, k) if i < k else (k, i)
            try:
                return float(self.pairs[key])
            except KeyError:
                raise MissingCovarianceError(f"no covariance supplied for terms {key}") from None
        return 0.0

    def block(self, idx):
        idx = np.asarray(idx, dtype=int)
        if self.matrix is not None:
            return self.matrix[np.ix_(idx, idx)]
        if self.signs is not None:
            s = self.signs[idx]
            out = np.outer(s, s)
            np.fill_diagonal(out, self.variances[idx])
            return out
        out = np.diag(self.variances[idx])
        if self.pairs is not None:
            for a in range(idx.size):
                for b in range(a + 1, idx.size):
                    out[a, b] = out[b, a] = self.cov(int(idx[a]), int(idx[b]))
        return out

    @classmethod
    def zero_covariance(cls, variances):
        return cls(np.asarray(variances, dtype=float), "zero-covariance")

    @classmethod
    def state_independent(cls, n_terms):
        """Every term has variance 1 and no covariance (maximally mixed model)."""
        return cls(np.ones(n_terms), "zero-covariance")

    @classmethod
    def worst_case(cls, coeffs):
        """Variance 1 and covariances aligned with the coefficient signs, so every
        pair adds constructively: ``c_i c_k cov(i, k) = |c_i c_k|``."""
        coeffs = np.asarray(coeffs, dtype=float)
        return cls(np.ones(coeffs.size), "worst-case", signs=np.sign(coeffs))

    @classmethod
    def from_matrix(cls, cov, flavor="user-supplied"):
        cov = np.asarray(cov, dtype=float)
        return cls(np.diag(cov).copy(), flavor, matrix=cov)

    def to_dict(self):
        out = {"flavor": self.flavor, "variances": self.variances.tolist()}
        if self.matrix is not None:
            out["covariance"] = self.matrix.tolist()
        if self.pairs is not None:
            out["pairs"] = [[i, k, v] for (i, k), v in sorted(self.pairs.items())]
        if self.signs is not None:
            out["signs"] = self.signs.tolist()
        return out

    @classmethod
    def from_dict(cls, data):
        pairs = None
        if "pairs" in data:
            pairs = {(min(i, k), max(i, k)): float(v) for i, k, v in data["pairs"]}
        return cls(
            np.asarray(data["variances"], dtype=float),
            data.get("flavor", "user-supplied"),
            matrix=None if "covariance" not in data else np.asarray(data["covariance"]),
            pairs=pairs,
            signs=None if "signs" not in data else np.asarray(data["signs"], dtype=float),
        )


@dataclass(frozen=True, eq=False)
class ShotAllocation:
    """Per-group shot budgets ``M_j`` (continuous or integer)."""

    M: np.ndarray
    M_tot: float = None
    integer: bool = False
    method: str = "given"
    flavor: str = None
    kkt_residual: float = None

    def __post_init__(self):
        M = np.asarray(self.M, dtype=np.int64 if self.integer else float)
        if M.ndim != 1 or M.size == 0:
            raise ValidationError("allocation needs one budget per group")
        if np.any(M <= 0):
            raise ValidationError("all group budgets must be positive")
        total = M.sum()
        if self.M_tot is None:
            object.__setattr__(self, "M_tot", total.item())
        elif not np.isclose(total, self.M_tot, rtol=1e-9, atol=0):
            raise ValidationError(f"budgets sum to {total}, expected M_tot={self.M_tot}")
        object.__setattr__(self, "M", M)

    def __len__(self):
        return self.M.size

    def to_dict(self):
        return {
            "M_tot": self.M_tot,
            "M": self.M.tolist(),
            "integer": self.integer,
            "method": self.method,
            "flavor": self.flavor,
            "kkt_residual": self.kkt_residual,
        }


@dataclass(frozen=True, eq=False)
class EstimatorWeights:
    """``w[j][a]`` is the weight of the ``a``-th member of group ``j``."""

    groups: tuple
    w: tuple = field(repr=False)

    def __getitem__(self, key):
        i, j = key
        try:
            return float(self.w[j][self.groups[j].index(i)])
        except ValueError:
            raise KeyError(f"term {i} is not in group {j}") from None

    def totals(self, n_terms):
        out = np.zeros(n_terms)
        for g, wj in zip(self.groups, self.w):
            np.add.at(out, list(g), wj)
        return out

    def is_unbiased(self, n_terms, atol=1e-12):
        return bool(np.allclose(self.totals(n_terms), 1.0, rtol=0, atol=atol))

    def embed(self, grouping):
        """Extend onto a refinement with zero weight on the new memberships."""
        w = []
        for j, g in enumerate(grouping.groups):
            old = dict(zip(self.groups[j], self.w[j]))
            w.append(np.array([old.get(i, 0.0) for i in g]))
        return EstimatorWeights(grouping.groups, tuple(w))


def _effective_shots(grouping, alloc, n_terms):
    """alpha_i = sum of M_j over the groups containing term i."""
    if len(alloc) != len(grouping.groups):
        raise ValidationError(f"{len(alloc)} budgets for {len(grouping.groups)} groups")
    alpha = np.zeros(n_terms)
    M = alloc.M.astype(float)
    for j, g in enumerate(grouping.groups):
        alpha[list(g)] += M[j]
    return alpha


def heuristic_weights(grouping, alloc, n_terms=None):
    """Shot-weighted averaging ``w_ij = M_j / sum_{k in Gamma(i)} M_k``."""
    if n_terms is None:
        n_terms = 1 + max(max(g) for g in grouping.groups if g)
    alpha = _effective_shots(grouping, alloc, n_terms)
    if np.any(alpha == 0):
        missing = np.flatnonzero(alpha == 0).tolist()
        raise ValidationError(f"terms {missing} belong to no group")
    M = alloc.M.astype(float)
    w = tuple(M[j] / alpha[list(g)] for j, g in enumerate(grouping.groups))
    return EstimatorWeights(grouping.groups, w)


def _coeffs(ham):
    return np.asarray(ham.coeffs if hasattr(ham, "coeffs") else ham, dtype=float)


def variance_parts(ham, grouping, weights, alloc, moments):
    """``(total, diagonal, covariance)`` of the estimator variance."""
    c = _coeffs(ham)
    if len(alloc) != len(grouping.groups):
        raise ValidationError(f"{len(alloc)} budgets for {len(grouping.groups)} groups")
    if not weights.is_unbiased(c.size, atol=1e-9):
        raise ValidationError("weights violate the unbiasedness constraint")
    M = alloc.M.astype(float)
    var = moments.variances
    diag = cov = 0.0
    for j, g in enumerate(grouping.groups):
        idx = np.asarray(g, dtype=int)
        v = c[idx] * weights.w[j]
        d = np.dot(v * v, var[idx])
        diag += d / M[j]
        if moments.has_covariance and idx.size > 1:
            cov += (v @ moments.block(idx) @ v - d) / M[j]
    return diag + cov, diag, cov


def estimator_variance(ham, grouping, weights, alloc, moments):
    return variance_parts(ham, grouping, weights, alloc, moments)[0]


def shot_weighted_variance(ham, grouping, alloc, moments):
    """Variance under the shot-weighted estimator, written through
    ``alpha_i = sum_{j in Gamma(i)} M_j`` and
    ``alpha_ik = sum_{j in Gamma(i) & Gamma(k)} M_j``."""
    c = _coeffs(ham)
    alpha = _effective_shots(grouping, alloc, c.size)
    total = float(np.sum(c**2 * moments.variances / alpha))
    if moments.has_covariance:
        M = alloc.M.astype(float)
        shared = {}
        for j, g in enumerate(grouping.groups):
            for a in range(len(g)):
                for b in range(a + 1, len(g)):
                    key = (g[a], g[b])
                    shared[key] = shared.get(key, 0.0) + M[j]
        for (i, k), a_ik in shared.items():
            total += 2 * c[i] * c[k] * moments.cov(i, k) * a_ik / (alpha[i] * alpha[k])
    return total


def empirical_energy(ham, grouping, weights, records):
    """Combine per-group sample means into an energy estimate.

    ``records`` maps group index to an object with a ``means`` dict (term
    index -> sign-corrected empirical mean), e.g. ``GroupSampleRecord``.
    """
    c = _coeffs(ham)
    if not isinstance(records, dict):
        records = dict(enumerate(records))
    energy = 0.0
    for j, g in enumerate(grouping.groups):
        wj = weights.w[j]
        rec = records.get(j)
        if rec is None:
            if np.any(wj != 0):
                raise ValidationError(f"group {j} has nonzero weight but no samples")
            continue
        for a, i in enumerate(g):
            if wj[a] == 0:
                continue
            try:
                mean = rec.means[i]
            except KeyError:
                raise ValidationError(f"group {j} record lacks term {i}") from None
            energy += c[i] * wj[a] * mean
    return energy


def _memberships(grouping):
    return [(i, j) for j, g in enumerate(grouping.groups) for i in g]


def optimal_weights(ham, grouping, alloc, moments, method="auto"):
    """Minimum-variance unbiased weights.

    Under zero covariance the minimiser is the shot-weighted rule itself and is
    returned directly (``method="auto"``).  Otherwise, or with
    ``method="numeric"``, the equality-constrained quadratic program is solved
    through its KKT system.
    """
    c = _coeffs(ham)
    if method not in ("auto", "numeric"):
        raise ValueError(f"unknown method {method!r}")
    if method == "auto" and not moments.has_covariance:
        return heuristic_weights(grouping, alloc, c.size)

    members = _memberships(grouping)
    K, N = len(members), c.size
    Q = np.zeros((K, K))
    M = alloc.M.astype(float)
    start = 0
    convex = True
    for j, g in enumerate(grouping.groups):
        idx = np.asarray(g, dtype=int)
        stop = start + idx.size
        blk = np.outer(c[idx], c[idx]) * moments.block(idx) / M[j]
        convex &= np.linalg.eigvalsh(blk)[0] >= -1e-10 * max(1.0, np.abs(blk).max())
        Q[start:stop, start:stop] = blk
        start = stop
    A = np.zeros((N, K))
    for col, (i, _) in enumerate(members):
        A[i, col] = 1.0
    if np.any(A.sum(axis=1) == 0):
        raise ValidationError("grouping does not cover every term")
    kkt = np.block([[2 * Q, A.T], [A, np.zeros((N, N))]])
    rhs = np.concatenate([np.zeros(K), np.ones(N)])
    sol, *_ = scipy.linalg.lstsq(kkt, rhs, lapack_driver="gelsd")
    resid = np.linalg.norm(kkt @ sol - rhs) / max(1.0, np.linalg.norm(rhs))
    w = sol[:K]
    if resid > 1e-8 or not convex:
        raise NumericalError("weight optimisation did not reach a constrained minimum", w, resid)
    out, start = [], 0
    for g in grouping.groups:
        out.append(w[start : start + len(g)].copy())
        start += len(g)
    return EstimatorWeights(grouping.groups, tuple(out))


def worst_case_bound(ham, grouping, alloc):
    """``sum_j (sum_{i in G_j} |c_i|)^2 / M_j`` for a disjoint grouping."""
    c = _coeffs(ham)
    L1 = np.array([np.abs(c[list(g)]).sum() for g in grouping.groups])
    return float(np.sum(L1**2 / alloc.M.astype(float)))


def measurement_complexity(group_variances, eps):
    """Shots needed for accuracy ``eps``: ``(sum_j sqrt(Var_j) / eps)^2``."""
    if eps <= 0:
        raise ValidationError("accuracy must be positive")
    v = np.asarray(group_variances, dtype=float)
    if np.any(v < 0):
        raise ValidationError("variances must be non-negative")
    return float((np.sqrt(v).sum() / eps) ** 2)
