"""Groupings of Hamiltonian terms and the sorted-insertion heuristic."""

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import ValidationError
from .hamiltonian import AbstractHamiltonian, Hamiltonian


class PauliOracle:
    """Commutation answered by the symplectic form of concrete Paulis."""

    def __init__(self, ham):
        self.ham = ham
        self._table = ham.table

    def __len__(self):
        return len(self.ham)

    def anticommuting(self, i):
        return self._table.anticommutes_with(i)

    def commutes(self, i, k):
        return not self._table.anticommutes_with(i)[k]


class GraphOracle:
    """Commutation read off an explicit adjacency matrix."""

    def __init__(self, abstract):
        self.adjacency = abstract.adjacency

    def __len__(self):
        return self.adjacency.shape[0]

    def anticommuting(self, i):
        return ~self.adjacency[i]

    def commutes(self, i, k):
        return bool(self.adjacency[i, k])


def oracle_for(ham):
    if isinstance(ham, Hamiltonian):
        return PauliOracle(ham)
    if isinstance(ham, AbstractHamiltonian):
        return GraphOracle(ham)
    raise TypeError(f"no commutation oracle for {type(ham).__name__}")


@dataclass(frozen=True)
class Grouping:
    groups: tuple
    disjoint: bool = True

    def __post_init__(self):
        object.__setattr__(self, "groups", tuple(tuple(sorted(set(int(i) for i in g))) for g in self.groups))

    def __len__(self):
        return len(self.groups)

    def membership(self, n_terms=None):
        return membership_map(self, n_terms)

    def to_dict(self):
        return {"disjoint": self.disjoint, "groups": [list(g) for g in self.groups]}

    @classmethod
    def from_dict(cls, data):
        return cls(tuple(data["groups"]), bool(data.get("disjoint", True)))


def membership_map(grouping, n_terms=None):
    """Gamma: for each term index, the sorted list of groups containing it."""
    if n_terms is None:
        n_terms = 1 + max((max(g) for g in grouping.groups if g), default=-1)
    gamma = [[] for _ in range(n_terms)]
    for j, g in enumerate(grouping.groups):
        for i in g:
            gamma[i].append(j)
    return gamma


def sorted_insertion(ham, oracle=None):
    """Greedy disjoint grouping: visit terms by decreasing ``|c_i|`` (ties by
    index) and put each into the earliest group it fully commutes with."""
    oracle = oracle or oracle_for(ham)
    coeffs = np.asarray(ham.coeffs)
    order = np.argsort(-np.abs(coeffs), kind="stable")
    group_of = np.full(len(coeffs), -1)
    groups = []
    for k in order:
        anti = oracle.anticommuting(k)
        hit = group_of[anti & (group_of >= 0)]
        blocked = np.zeros(len(groups) + 1, dtype=bool)
        blocked[hit] = True
        g = int(np.argmin(blocked))  # first False; len(groups) if all blocked
        if g == len(groups):
            groups.append([])
        groups[g].append(int(k))
        group_of[k] = g
    return Grouping(tuple(groups), disjoint=True)


class Violation(NamedTuple):
    kind: str  # "covering", "commuting" or "disjoint"
    indices: tuple
    group: int = -1

    def __str__(self):
        where = f" in group {self.group}" if self.group >= 0 else ""
        return f"{self.kind} violation{where}: {self.indices}"


def validate_grouping(ham, grouping, oracle=None):
    """List every violated clause of the grouping's claimed definition; an empty
    list means the grouping is valid."""
    oracle = oracle or oracle_for(ham)
    n_terms = len(oracle)
    out = []
    for j, g in enumerate(grouping.groups):
        bad = [i for i in g if not 0 <= i < n_terms]
        if bad:
            raise ValidationError(f"group {j} has out-of-range indices {bad}")
    seen = np.zeros(n_terms, dtype=int)
    for g in grouping.groups:
        seen[list(g)] += 1
    missing = tuple(int(i) for i in np.flatnonzero(seen == 0))
    if missing:
        out.append(Violation("covering", missing))
    for j, g in enumerate(grouping.groups):
        members = np.array(g, dtype=int)
        for a, i in enumerate(g):
            anti = oracle.anticommuting(i)[members[a + 1 :]]
            for k in members[a + 1 :][anti]:
                out.append(Violation("commuting", (i, int(k)), j))
    if grouping.disjoint:
        dup = tuple(int(i) for i in np.flatnonzero(seen > 1))
        if dup:
            out.append(Violation("disjoint", dup))
    return out


def group_norms(ham, grouping):
    """Per-group ``S_j = sum c_i^2`` and ``L1_j = sum |c_i|``."""
    c = np.asarray(ham.coeffs)
    S = np.array([np.sum(c[list(g)] ** 2) for g in grouping.groups])
    L1 = np.array([np.sum(np.abs(c[list(g)])) for g in grouping.groups])
    return S, L1
