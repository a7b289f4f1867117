"""Diagonalising Clifford circuits for commuting Pauli sets.

Conjugation follows the Aaronson-Gottesman update rules, giving the
Heisenberg image ``U P U^dagger`` of a Pauli under a circuit ``U`` whose
gates are applied left to right.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, ValidationError
from .pauli import PauliString, SignedPauli, commutes

GATE_ARITY = {"H": 1, "S": 1, "X": 1, "Z": 1, "CNOT": 2, "CZ": 2}


@dataclass(frozen=True)
class CliffordCircuit:
    n: int
    gates: tuple = ()

    def __post_init__(self):
        gates = tuple((name, tuple(int(q) for q in qubits)) for name, qubits in self.gates)
        for name, qubits in gates:
            if name not in GATE_ARITY:
                raise ValidationError(f"unknown gate {name!r}")
            if len(qubits) != GATE_ARITY[name]:
                raise ValidationError(f"{name} takes {GATE_ARITY[name]} qubit(s)")
            if any(not 0 <= q < self.n for q in qubits):
                raise ValidationError(f"{name}{qubits} out of range for {self.n} qubits")
            if len(qubits) == 2 and qubits[0] == qubits[1]:
                raise ValidationError(f"{name} needs distinct qubits")
        object.__setattr__(self, "gates", gates)

    def __len__(self):
        return len(self.gates)

    def then(self, other):
        if other.n != self.n:
            raise DimensionError("circuit widths differ")
        return CliffordCircuit(self.n, self.gates + other.gates)

    def inverse(self):
        out = []
        for name, qubits in reversed(self.gates):
            if name == "S":
                out += [("Z", qubits), ("S", qubits)]  # S^dagger = S Z
            else:
                out.append((name, qubits))
        return CliffordCircuit(self.n, tuple(out))

    def to_dict(self):
        return {"n": self.n, "gates": [{"gate": g, "qubits": list(q)} for g, q in self.gates]}

    @classmethod
    def from_dict(cls, data):
        return cls(data["n"], tuple((g["gate"], tuple(g["qubits"])) for g in data["gates"]))


def gate_bound(n):
    """Upper bound on the gate count produced by :func:`diagonalize`."""
    return n * n + 3 * n


def conjugate(circuit, p):
    """Exact image ``U p U^dagger`` with sign."""
    if isinstance(p, SignedPauli):
        img = conjugate(circuit, p.pauli)
        return SignedPauli(img.sign * p.sign, img.pauli)
    if p.n != circuit.n:
        raise DimensionError(f"{p.n}-qubit Pauli through a {circuit.n}-qubit circuit")
    n = circuit.n
    x, z, r = p.x, p.z, 0
    for name, qubits in circuit.gates:
        a = n - 1 - qubits[0]
        xa, za = (x >> a) & 1, (z >> a) & 1
        if name == "H":
            r ^= xa & za
            if xa != za:
                x ^= 1 << a
                z ^= 1 << a
        elif name == "S":
            r ^= xa & za
            z ^= xa << a
        elif name == "X":
            r ^= za
        elif name == "Z":
            r ^= xa
        else:
            b = n - 1 - qubits[1]
            xb, zb = (x >> b) & 1, (z >> b) & 1
            if name == "CNOT":
                r ^= xa & zb & (xb ^ za ^ 1)
                x ^= xa << b
                z ^= zb << a
            else:  # CZ
                r ^= xa & xb & (za ^ zb)
                z ^= (xb << a) | (xa << b)
    return SignedPauli(-1 if r else 1, PauliString(n, x, z))


def conjugate_table(circuit, table):
    """Vectorised :func:`conjugate` over every row of a ``PauliTable``.

    Returns ``(x, z, sign)`` with packed uint64 words and +-1 signs.
    """
    if table.n != circuit.n:
        raise DimensionError("table and circuit widths differ")
    n = circuit.n
    x, z = table.x.copy(), table.z.copy()
    r = np.zeros(len(table), dtype=np.uint64)
    one = np.uint64(1)

    def loc(q):
        b = n - 1 - q
        return b // 64, np.uint64(b % 64)

    for name, qubits in circuit.gates:
        wa, sa = loc(qubits[0])
        xa, za = (x[:, wa] >> sa) & one, (z[:, wa] >> sa) & one
        if name == "H":
            r ^= xa & za
            flip = (xa ^ za) << sa
            x[:, wa] ^= flip
            z[:, wa] ^= flip
        elif name == "S":
            r ^= xa & za
            z[:, wa] ^= xa << sa
        elif name == "X":
            r ^= za
        elif name == "Z":
            r ^= xa
        else:
            wb, sb = loc(qubits[1])
            xb, zb = (x[:, wb] >> sb) & one, (z[:, wb] >> sb) & one
            if name == "CNOT":
                r ^= xa & zb & (xb ^ za ^ one)
                x[:, wb] ^= xa << sb
                z[:, wa] ^= zb << sa
            else:
                r ^= xa & xb & (za ^ zb)
                z[:, wa] ^= xb << sa
                z[:, wb] ^= xa << sb
    return x, z, np.where(r.astype(bool), -1, 1)


def is_z_diagonal(p):
    if isinstance(p, SignedPauli):
        p = p.pauli
    return p.x == 0


def _bit_rows(paulis, n):
    xs = np.array([[(p.x >> (n - 1 - q)) & 1 for q in range(n)] for p in paulis], dtype=bool)
    zs = np.array([[(p.z >> (n - 1 - q)) & 1 for q in range(n)] for p in paulis], dtype=bool)
    return xs, zs


def _synthesize(xs, zs, n):
    gates = []
    x, z = xs.copy(), zs.copy()

    # row-reduce the X block; row operations keep the generated group
    pivots = []
    row = 0
    for col in range(n):
        hits = np.flatnonzero(x[row:, col]) + row if row < len(x) else []
        if len(hits) == 0:
            continue
        h = hits[0]
        if h != row:
            x[[row, h]] = x[[h, row]]
            z[[row, h]] = z[[h, row]]
        for other in np.flatnonzero(x[:, col]):
            if other != row:
                x[other] ^= x[row]
                z[other] ^= z[row]
        pivots.append(col)
        row += 1
        if row == len(x):
            break
    x, z = x[:row], z[:row]

    def cnot(a, b):
        gates.append(("CNOT", (a, b)))
        x[:, b] ^= x[:, a]
        z[:, a] ^= z[:, b]

    def cz(a, b):
        gates.append(("CZ", (a, b)))
        z[:, a] ^= x[:, b]
        z[:, b] ^= x[:, a]

    pivot_set = set(pivots)
    # clear X outside the pivot columns
    for b in range(n):
        if b in pivot_set:
            continue
        for i in np.flatnonzero(x[:, b]):
            cnot(pivots[i], b)
    # each X row is now X at its pivot times some Z string; strip the Z part
    for i, p in enumerate(pivots):
        if z[i, p]:
            gates.append(("S", (p,)))
            z[:, p] ^= x[:, p]
    for i, p in enumerate(pivots):
        for j in range(i + 1, len(pivots)):
            if z[i, pivots[j]]:
                cz(p, pivots[j])
        for c in range(n):
            if c not in pivot_set and z[i, c]:
                cz(p, c)
    for p in pivots:
        gates.append(("H", (p,)))
    return CliffordCircuit(n, tuple(gates))


def diagonalize(group):
    """Clifford circuit taking every member of a commuting group to a signed
    Z/I string.

    Returns ``(circuit, table)`` where ``table`` maps each input Pauli to its
    signed image.  The circuit also diagonalises every Pauli in the maximal
    abelian group it implicitly completes to (Z on the untouched qubits).
    """
    group = list(dict.fromkeys(group))
    if not group:
        raise ValidationError("cannot diagonalise an empty group")
    n = group[0].n
    if any(p.n != n for p in group):
        raise DimensionError("group members act on different qubit counts")
    for a in range(len(group)):
        for b in range(a + 1, len(group)):
            if not commutes(group[a], group[b]):
                raise ValidationError(f"{group[a]} and {group[b]} do not commute")
    circuit = _synthesize(*_bit_rows(group, n), n)
    table = {p: conjugate(circuit, p) for p in group}
    bad = [p for p, img in table.items() if not is_z_diagonal(img)]
    if bad:  # pragma: no cover - would mean the elimination is wrong
        raise AssertionError(f"synthesis left {bad} off-diagonal")
    return circuit, table
