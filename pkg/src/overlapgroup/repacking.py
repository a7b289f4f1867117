"""Repacking: growing the groups of a disjoint grouping into an overlapped one
without ever adding groups or removing members."""

import heapq
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .clifford import conjugate_table, diagonalize
from .errors import ValidationError
from .estimator import shot_weighted_variance
from .grouping import Grouping, oracle_for


@dataclass(frozen=True)
class RepackedGrouping:
    base: Grouping
    groups: tuple
    signs: dict = None  # (term, group) -> +-1 from post-hoc conjugation

    disjoint = False

    def __post_init__(self):
        groups = tuple(tuple(sorted(set(int(i) for i in g))) for g in self.groups)
        object.__setattr__(self, "groups", groups)
        if len(groups) != len(self.base.groups):
            raise ValidationError(
                f"repacking has {len(groups)} groups but its base has {len(self.base.groups)}"
            )
        for j, (old, new) in enumerate(zip(self.base.groups, groups)):
            if not set(old) <= set(new):
                raise ValidationError(f"group {j} lost base members {sorted(set(old) - set(new))}")

    def __len__(self):
        return len(self.groups)

    def multiplicities(self, n_terms):
        mu = np.zeros(n_terms, dtype=int)
        for g in self.groups:
            mu[list(g)] += 1
        return mu

    def added(self):
        """(term, group) memberships not present in the base grouping."""
        return [(i, j) for j, (old, new) in enumerate(zip(self.base.groups, self.groups))
                for i in new if i not in set(old)]

    def to_dict(self):
        out = {
            "disjoint": False,
            "base": self.base.to_dict(),
            "groups": [list(g) for g in self.groups],
        }
        if self.signs is not None:
            out["signs"] = [[i, j, s] for (i, j), s in sorted(self.signs.items())]
        return out

    @classmethod
    def from_dict(cls, data):
        signs = None
        if "signs" in data:
            signs = {(i, j): s for i, j, s in data["signs"]}
        return cls(Grouping.from_dict(data["base"]), tuple(data["groups"]), signs)

    @classmethod
    def trivial(cls, grouping):
        return cls(grouping, grouping.groups)


def as_repacked(grouping):
    if isinstance(grouping, RepackedGrouping):
        return grouping
    return RepackedGrouping.trivial(grouping)


def group_diagonalizers(ham, grouping):
    return [diagonalize([ham.paulis[i] for i in g]) for g in grouping.groups]


def posthoc_repack(ham, grouping, diagonalizers=None):
    """Add every term that each group's fixed circuit already maps to a Z/I
    string, recording the conjugation sign of every membership."""
    if diagonalizers is None:
        diagonalizers = group_diagonalizers(ham, grouping)
    if len(diagonalizers) != len(grouping.groups):
        raise ValidationError("need one diagonaliser per group")
    groups, signs = [], {}
    for j, (g, diag) in enumerate(zip(grouping.groups, diagonalizers)):
        circuit = diag[0] if isinstance(diag, tuple) else diag
        x, _, sign = conjugate_table(circuit, ham.table)
        diagonal = ~x.any(axis=1)
        off = [i for i in g if not diagonal[i]]
        if off:
            raise ValidationError(f"diagonaliser {j} leaves base members {off} off-diagonal")
        members = np.flatnonzero(diagonal)
        groups.append(members)
        for i in members:
            signs[int(i), j] = int(sign[i])
    return RepackedGrouping(grouping, tuple(groups), signs)


def _insertable(oracle, groups, n_terms):
    """Boolean N x m matrix: term i could join group j."""
    m = len(groups)
    blocked = np.zeros((n_terms, m), dtype=bool)
    for j, g in enumerate(groups):
        blocked[list(g), j] = True
        for k in g:
            blocked[oracle.anticommuting(k), j] = True
    return ~blocked


def adhoc_repack(ham, grouping, oracle=None):
    """Greedy repacking: repeatedly take the term with the largest
    ``c_i^2 / mu_i`` that still fits somewhere and put it in the first group
    that accepts it.  Ties go to the lower term index."""
    oracle = oracle or oracle_for(ham)
    coeffs = np.asarray(ham.coeffs, dtype=float)
    n_terms = coeffs.size
    groups = [set(g) for g in grouping.groups]
    compat = _insertable(oracle, groups, n_terms)
    mu = np.zeros(n_terms, dtype=int)
    for g in groups:
        mu[list(g)] += 1
    if np.any(mu == 0):
        raise ValidationError("grouping does not cover every term")

    heap = [(-(coeffs[i] ** 2) / mu[i], i, mu[i]) for i in range(n_terms) if compat[i].any()]
    heapq.heapify(heap)
    while heap:
        _, i, mu_seen = heapq.heappop(heap)
        if mu_seen != mu[i]:
            continue
        row = compat[i]
        if not row.any():
            # groups only gain members, so this term can never fit again
            continue
        j = int(np.argmax(row))
        groups[j].add(i)
        compat[i, j] = False
        compat[oracle.anticommuting(i), j] = False
        mu[i] += 1
        if compat[i].any():
            heapq.heappush(heap, (-(coeffs[i] ** 2) / mu[i], i, mu[i]))
    return RepackedGrouping(grouping, tuple(groups))


def _check_same_shape(a, b):
    if len(a.groups) != len(b.groups):
        raise ValidationError(f"group counts differ: {len(a.groups)} vs {len(b.groups)}")


def is_refinement(r, r2):
    """True when every group of ``r2`` contains the matching group of ``r``."""
    _check_same_shape(r, r2)
    return all(set(a) <= set(b) for a, b in zip(r.groups, r2.groups))


def is_proper_refinement(r, r2):
    return is_refinement(r, r2) and any(set(a) != set(b) for a, b in zip(r.groups, r2.groups))


def insertable_pairs(ham, grouping, oracle=None):
    oracle = oracle or oracle_for(ham)
    compat = _insertable(oracle, grouping.groups, len(oracle))
    return [(int(i), int(j)) for i, j in zip(*np.nonzero(compat))]


def is_maximal(ham, grouping, oracle=None):
    oracle = oracle or oracle_for(ham)
    return not _insertable(oracle, grouping.groups, len(oracle)).any()


def complete_to_maximal(ham, grouping, oracle=None):
    """Sweep the terms in index order, adding each to every group it fits."""
    oracle = oracle or oracle_for(ham)
    r = as_repacked(grouping)
    groups = [set(g) for g in r.groups]
    compat = _insertable(oracle, groups, len(oracle))
    for i in range(len(oracle)):
        anti = oracle.anticommuting(i)
        for j in np.flatnonzero(compat[i]):
            if compat[i, j]:
                groups[j].add(i)
                compat[anti, j] = False
                compat[i, j] = False
    return RepackedGrouping(r.base, tuple(groups), r.signs)


def insert(grouping, term, group):
    r = as_repacked(grouping)
    groups = [set(g) for g in r.groups]
    groups[group].add(term)
    return RepackedGrouping(r.base, tuple(groups), r.signs)


class OneStepDelta(NamedTuple):
    delta: float  # Var before - Var after
    decreases: bool
    lemma_margin: float  # lhs - rhs of the closed-form criterion
    agree: bool


def one_step_delta(ham, grouping, ell, s, moments, alloc, oracle=None, tol=1e-10):
    """Change in shot-weighted variance from inserting term ``s`` into group ``ell``.

    The direct difference of the two variances is authoritative; the
    closed-form criterion
        c_s^2 var_s / 2  >=  sum_{i in G_ell} c_i c_s cov_is (a_s - a_is) / a_i
                           - sum_{i not in G_ell, i != s} c_i c_s cov_is a_is / a_i
    is evaluated alongside and ``agree`` reports whether the two signs match
    (margins within ``tol`` of zero count as agreeing).
    """
    r = as_repacked(grouping)
    oracle = oracle or oracle_for(ham)
    members = r.groups[ell]
    if s in members:
        raise ValidationError(f"term {s} is already in group {ell}")
    clash = [k for k in members if not oracle.commutes(s, k)]
    if clash:
        raise ValidationError(f"term {s} does not commute with {clash} in group {ell}")
    after = insert(r, s, ell)

    c = np.asarray(ham.coeffs, dtype=float)
    M = alloc.M.astype(float)
    before_var = shot_weighted_variance(c, r, alloc, moments)
    after_var = shot_weighted_variance(c, after, alloc, moments)
    delta = before_var - after_var

    gamma = [set() for _ in range(c.size)]
    for j, g in enumerate(r.groups):
        for i in g:
            gamma[i].add(j)
    alpha = np.array([sum(M[j] for j in gs) for gs in gamma])
    q = set(members)
    lhs = 0.5 * c[s] ** 2 * moments.var(s)
    rhs = 0.0
    for i in range(c.size):
        if i == s:
            continue
        a_is = sum(M[j] for j in gamma[i] & gamma[s])
        if i in q:
            rhs += c[i] * c[s] * moments.cov(i, s) * (alpha[s] - a_is) / alpha[i]
        elif a_is:
            rhs -= c[i] * c[s] * moments.cov(i, s) * a_is / alpha[i]
    margin = lhs - rhs
    scale = max(1.0, abs(before_var))
    if abs(delta) <= tol * scale or abs(margin) <= tol * scale:
        agree = True
    else:
        agree = (delta > 0) == (margin > 0)
    return OneStepDelta(delta, bool(delta > 0), margin, agree)
