"""The adversarial family on which sorted insertion loses a factor Theta(m).

Terms are labelled by pairs (uppercase U, lowercase l) plus lowercase-only
terms l for every letter but the last.  All pair terms commute with each
other; a lowercase-only term commutes only with the pairs carrying its own
letter.  The instance exists only as a commutation graph.
"""

from dataclasses import dataclass

import numpy as np

from .allocation import alloc_l2, alloc_optimize, min_variance_disjoint
from .errors import ValidationError
from .estimator import Moments, ShotAllocation, shot_weighted_variance
from .grouping import Grouping
from .hamiltonian import AbstractHamiltonian
from .repacking import RepackedGrouping


def _letter(k, upper):
    base = chr((65 if upper else 97) + k % 26)
    return base if k < 26 else f"{base}{k // 26}"


@dataclass(frozen=True)
class Theorem1Instance:
    L: int
    abstract: AbstractHamiltonian
    # per term: (upper index or None, lower index)
    tags: tuple

    @property
    def labels(self):
        return self.abstract.labels

    def __len__(self):
        return len(self.tags)

    def to_dict(self):
        adj = self.abstract.adjacency
        return {
            "L": self.L,
            "labels": list(self.labels),
            "coefficients": np.asarray(self.abstract.coeffs).tolist(),
            "adjacency": np.packbits(adj, axis=1).tolist(),
        }

    @classmethod
    def from_dict(cls, data):
        inst = build_theorem1(data["L"])
        N = len(inst)
        adj = np.unpackbits(np.asarray(data["adjacency"], dtype=np.uint8), axis=1, count=N)
        abstract = AbstractHamiltonian(
            np.asarray(data["coefficients"], dtype=float), adj.astype(bool), tuple(data["labels"])
        )
        return cls(data["L"], abstract, inst.tags)


def build_theorem1(L, perturbed=True):
    """Instance with ``L**2 + L - 1`` terms.

    Terms are indexed in the order sorted insertion should visit them: for
    each letter in turn, its lowercase-only term (absent for the last letter)
    followed by its L pair terms.  With ``perturbed`` the magnitudes are
    ``1 + k * delta`` decreasing along that order, ``delta = 1 / (2N(2L+1))``;
    otherwise every coefficient is 1 and index tie-breaking gives the same order.
    """
    if L < 2:
        raise ValidationError("the construction needs L >= 2")
    tags = []
    for low in range(L):
        if low < L - 1:
            tags.append((None, low))
        tags.extend((up, low) for up in range(L))
    N = len(tags)
    up = np.array([-1 if u is None else u for u, _ in tags])
    low = np.array([l for _, l in tags])
    is_pair = up >= 0
    same_letter = low[:, None] == low[None, :]
    adj = (is_pair[:, None] & is_pair[None, :]) | same_letter
    np.fill_diagonal(adj, True)
    if perturbed:
        delta = 1.0 / (2 * N * (2 * L + 1))
        coeffs = 1.0 + delta * np.arange(N - 1, -1, -1)
    else:
        coeffs = np.ones(N)
    labels = tuple(
        (_letter(u, True) if u is not None else "") + _letter(l, False) for u, l in tags
    )
    return Theorem1Instance(L, AbstractHamiltonian(coeffs, adj, labels), tuple(tags))


def canonical_groupings(inst):
    """``(G, G_prime, R, R_prime)``.

    ``G`` is the sorted-insertion grouping (one block per letter), ``G_prime``
    puts every pair term together and each lowercase-only term alone, and
    ``R`` / ``R_prime`` are the same overlapped grouping written as a
    repacking of ``G`` and of ``G_prime`` respectively.
    """
    L = inst.L
    blocks = [[i for i, (_, l) in enumerate(inst.tags) if l == low] for low in range(L)]
    pairs = [i for i, (u, _) in enumerate(inst.tags) if u is not None]
    lowers = [i for i, (u, _) in enumerate(inst.tags) if u is None]
    G = Grouping(tuple(blocks), disjoint=True)
    G_prime = Grouping((pairs, *[[i] for i in lowers]), disjoint=True)
    R = RepackedGrouping(G, (*blocks[:-1], pairs))
    R_prime = RepackedGrouping(G_prime, (pairs, *blocks[:-1]))
    return G, G_prime, R, R_prime


def theorem1_variances(inst, M_tot=1.0):
    """Optimal-allocation variances under the unit-variance, zero-covariance model.

    Returns a dict with ``var_G``, ``var_Gp``, ``var_R`` and the ratios.
    """
    G, G_prime, R, R_prime = canonical_groupings(inst)
    ham = inst.abstract
    var_G = min_variance_disjoint(ham, G, M_tot)
    var_Gp = min_variance_disjoint(ham, G_prime, M_tot)

    moments = Moments.state_independent(len(inst))
    # start from whichever disjoint optimum is better on R, so the descent
    # can only improve on both
    a_G = alloc_l2(ham, G, M_tot)
    a_Gp = alloc_l2(ham, G_prime, M_tot)
    # R_prime lists the big group first; R lists it last
    a_Gp_on_R = np.concatenate([a_Gp.M[1:], a_Gp.M[:1]])
    starts = [a_G.M, a_Gp_on_R]
    vals = [shot_weighted_variance(ham, R, _as_alloc(s, M_tot), moments) for s in starts]
    init = starts[int(np.argmin(vals))]
    alloc_R = alloc_optimize(ham, R, moments, M_tot, init=init)
    var_R = shot_weighted_variance(ham, R, alloc_R, moments)
    return {
        "L": inst.L,
        "N": len(inst),
        "m": len(G),
        "var_G": var_G,
        "var_Gp": var_Gp,
        "var_R": var_R,
        "ratio_G_R": var_G / var_R,
        "ratio_G_Gp": var_G / var_Gp,
        "kkt_residual": alloc_R.kkt_residual,
    }


def _as_alloc(M, M_tot):
    return ShotAllocation(np.asarray(M, dtype=float), M_tot)
