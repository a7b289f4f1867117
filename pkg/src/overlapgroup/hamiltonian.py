"""Qubit Hamiltonians, their text/JSON formats, and the model generators."""

import json
import math
from dataclasses import dataclass, field
from functools import cached_property
from itertools import combinations

import numpy as np

from .errors import DimensionError, ValidationError
from .pauli import PauliString, PauliTable, parse_pauli, serialize_pauli


class DuplicateTermError(ValidationError):
    pass


@dataclass(frozen=True, eq=False)
class Hamiltonian:
    """``H = sum_i coeffs[i] * paulis[i]`` with distinct, non-identity Paulis."""

    n: int
    coeffs: np.ndarray
    paulis: tuple

    def __post_init__(self):
        coeffs = np.asarray(self.coeffs, dtype=float)
        object.__setattr__(self, "coeffs", coeffs)
        object.__setattr__(self, "paulis", tuple(self.paulis))
        if len(self.paulis) == 0:
            raise ValidationError("empty Hamiltonian")
        if coeffs.shape != (len(self.paulis),):
            raise ValidationError("one coefficient per Pauli term required")
        if not np.all(np.isfinite(coeffs)):
            raise ValidationError("non-finite coefficient")
        seen = {}
        for i, (c, p) in enumerate(zip(coeffs, self.paulis)):
            if p.n != self.n:
                raise DimensionError(f"term {i} acts on {p.n} qubits, expected {self.n}")
            if p.is_identity():
                raise ValidationError(f"term {i} is the identity")
            if c == 0:
                raise ValidationError(f"term {i} has zero coefficient")
            if p in seen:
                raise DuplicateTermError(f"terms {seen[p]} and {i} share Pauli {p}")
            seen[p] = i
        coeffs.setflags(write=False)

    def __len__(self):
        return len(self.paulis)

    @cached_property
    def table(self):
        return PauliTable(self.paulis)

    @classmethod
    def from_terms(cls, terms):
        """Build from ``(coefficient, label_or_PauliString)`` pairs."""
        terms = list(terms)
        if not terms:
            raise ValidationError("empty Hamiltonian")
        paulis = [parse_pauli(p) if isinstance(p, str) else p for _, p in terms]
        return cls(paulis[0].n, [float(c) for c, _ in terms], paulis)

    def labels(self):
        return [serialize_pauli(p) for p in self.paulis]

    def to_dict(self):
        return {
            "n": self.n,
            "terms": [{"c": float(c), "pauli": lab} for c, lab in zip(self.coeffs, self.labels())],
        }

    @classmethod
    def from_dict(cls, data):
        ham = cls.from_terms((t["c"], t["pauli"]) for t in data["terms"])
        if ham.n != data["n"]:
            raise DimensionError(f"declared n={data['n']} but terms act on {ham.n} qubits")
        return ham

    def matrix(self):
        """Dense matrix; only sensible for small n."""
        from .pauli import pauli_matrix

        return sum(c * pauli_matrix(p) for c, p in zip(self.coeffs, self.paulis))


@dataclass(frozen=True, eq=False)
class AbstractHamiltonian:
    """Coefficients plus a commutation graph, with no concrete Pauli strings."""

    coeffs: np.ndarray
    adjacency: np.ndarray
    labels: tuple = field(default=None)

    def __post_init__(self):
        coeffs = np.asarray(self.coeffs, dtype=float)
        adj = np.asarray(self.adjacency, dtype=bool)
        object.__setattr__(self, "coeffs", coeffs)
        object.__setattr__(self, "adjacency", adj)
        if coeffs.ndim != 1 or coeffs.size == 0:
            raise ValidationError("need a non-empty coefficient vector")
        if adj.shape != (coeffs.size, coeffs.size):
            raise DimensionError("adjacency must be N x N")
        if not np.array_equal(adj, adj.T):
            raise ValidationError("adjacency must be symmetric")
        if not adj.diagonal().all():
            raise ValidationError("adjacency diagonal must be true")
        if self.labels is not None:
            object.__setattr__(self, "labels", tuple(self.labels))

    def __len__(self):
        return self.coeffs.size


def to_abstract(ham):
    table = ham.table
    adj = np.array([~table.anticommutes_with(k) for k in range(len(ham))])
    return AbstractHamiltonian(ham.coeffs.copy(), adj, tuple(ham.labels()))


# ---------------------------------------------------------------- text format


def parse_hamiltonian(text):
    terms = []
    seen = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ValidationError(f"line {lineno}: expected 'coefficient label', got {raw!r}")
        try:
            c = float(parts[0])
        except ValueError:
            raise ValidationError(f"line {lineno}: bad coefficient {parts[0]!r}") from None
        try:
            p = parse_pauli(parts[1])
        except ValidationError as exc:
            raise ValidationError(f"line {lineno}: {exc}") from None
        if terms and p.n != terms[0][1].n:
            raise DimensionError(f"line {lineno}: label width {p.n}, expected {terms[0][1].n}")
        if c == 0:
            raise ValidationError(f"line {lineno}: zero coefficient")
        if p.is_identity():
            raise ValidationError(f"line {lineno}: identity term not allowed")
        if p in seen:
            raise DuplicateTermError(f"line {lineno}: duplicate of term on line {seen[p]}")
        seen[p] = lineno
        terms.append((c, p))
    if not terms:
        raise ValidationError("empty Hamiltonian")
    return Hamiltonian.from_terms(terms)


def write_hamiltonian(ham):
    return "".join(f"{c!r} {lab}\n" for c, lab in zip(ham.coeffs.tolist(), ham.labels()))


def load_hamiltonian(path):
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    if str(path).endswith(".json"):
        return Hamiltonian.from_dict(json.loads(text))
    return parse_hamiltonian(text)


# ---------------------------------------------------------------- generators


def _round_half_up(v):
    return int(math.floor(v + 0.5))


def gen_random(n, density=0.1, seed=None):
    """Random Hamiltonian: a ``density`` fraction of the non-identity Pauli
    strings on ``n`` qubits, each with a coefficient uniform on [-1, 1]."""
    if not 0 < density <= 1:
        raise ValidationError(f"density must lie in (0, 1], got {density}")
    if n < 1:
        raise ValidationError("n must be positive")
    pool = 4**n - 1
    count = _round_half_up(density * pool)
    if count < 1:
        raise ValidationError(f"density {density} selects no terms at n={n}")
    rng = np.random.default_rng(seed)
    picks = np.sort(rng.choice(pool, size=count, replace=False)) + 1
    coeffs = rng.uniform(-1.0, 1.0, size=count)
    while np.any(coeffs == 0):
        zero = coeffs == 0
        coeffs[zero] = rng.uniform(-1.0, 1.0, size=int(zero.sum()))
    mask = (1 << n) - 1
    paulis = [PauliString(n, int(k) >> n, int(k) & mask) for k in picks]
    return Hamiltonian(n, coeffs, paulis)


def _z_string(n, sites):
    z = 0
    for q in sites:
        z |= 1 << (n - 1 - q)
    return PauliString(n, 0, z)


def gen_ising_all_to_all(n):
    """``-sum_{i<j} Z_i Z_j``."""
    if n < 2:
        raise ValidationError("all-to-all Ising needs n >= 2")
    paulis = [_z_string(n, (i, j)) for i, j in combinations(range(n), 2)]
    return Hamiltonian(n, -np.ones(len(paulis)), paulis)


def hubbard_lattice_edges(ncols):
    """Distinct nearest-neighbour pairs of the periodic 2 x ncols lattice, as
    mode indices under a row-major snake ordering (row 0 left to right, row 1
    right to left).  Wrap-around bonds that duplicate a direct bond are kept once."""
    if ncols < 2:
        raise ValidationError("2 x n Hubbard lattice needs n >= 2")

    def mode(r, c):
        return c if r == 0 else 2 * ncols - 1 - c

    edges = set()
    for r in range(2):
        for c in range(ncols):
            edges.add(frozenset((mode(r, c), mode(r, (c + 1) % ncols))))
            edges.add(frozenset((mode(r, c), mode((r + 1) % 2, c))))
    return sorted(tuple(sorted(e)) for e in edges if len(e) == 2)


def gen_hubbard_spinless_2xn(ncols, t=1.0, V=1.0):
    """Periodic spinless Fermi-Hubbard model on a 2 x ncols lattice under
    Jordan-Wigner; the constant part is dropped."""
    nq = 2 * ncols
    acc = {}

    def add(p, c):
        acc[p] = acc.get(p, 0.0) + c

    for i, j in hubbard_lattice_edges(ncols):
        # c_i^dag c_j + h.c. = (X Z..Z X + Y Z..Z Y) / 2 for i < j
        between = 0
        for q in range(i + 1, j):
            between |= 1 << (nq - 1 - q)
        ends = (1 << (nq - 1 - i)) | (1 << (nq - 1 - j))
        add(PauliString(nq, ends, between), -t / 2)
        add(PauliString(nq, ends, between | ends), -t / 2)
        # n_i n_j = (1 - Z_i - Z_j + Z_i Z_j) / 4
        add(_z_string(nq, (i,)), -V / 4)
        add(_z_string(nq, (j,)), -V / 4)
        add(_z_string(nq, (i, j)), V / 4)
    terms = [(c, p) for p, c in acc.items() if abs(c) > 1e-14]
    terms.sort(key=lambda cp: (cp[1].x, cp[1].z))
    return Hamiltonian(nq, [c for c, _ in terms], [p for _, p in terms])
