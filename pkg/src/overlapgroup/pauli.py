"""Pauli strings in symplectic form.

A Pauli string on ``n`` qubits is stored as two Python ints ``x`` and ``z``
used as bit vectors.  Qubit ``q`` (the ``q``-th character of the label,
counting from the left) lives at bit ``n - 1 - q``, so the binary expansion
of ``x`` reads in the same order as the label and lines up with
computational-basis indices where the leftmost qubit is most significant.

Encoding per qubit: I=(0,0), X=(1,0), Z=(0,1), Y=(1,1) as (x, z).
"""

from dataclasses import dataclass
from functools import reduce

import numpy as np

from .errors import DimensionError, ValidationError

_CHAR_TO_XZ = {"I": (0, 0), "X": (1, 0), "Z": (0, 1), "Y": (1, 1)}
_XZ_TO_CHAR = {v: k for k, v in _CHAR_TO_XZ.items()}

# i**k for k mod 4
PHASES = (1, 1j, -1, -1j)


@dataclass(frozen=True, order=True)
class PauliString:
    n: int
    x: int
    z: int

    def __post_init__(self):
        if self.n < 1:
            raise ValidationError("a Pauli string needs at least one qubit")
        top = 1 << self.n
        if not (0 <= self.x < top and 0 <= self.z < top):
            raise ValidationError("bit vectors wider than n")

    @property
    def x_bits(self):
        return tuple((self.x >> (self.n - 1 - q)) & 1 for q in range(self.n))

    @property
    def z_bits(self):
        return tuple((self.z >> (self.n - 1 - q)) & 1 for q in range(self.n))

    @classmethod
    def from_bits(cls, x_bits, z_bits):
        if len(x_bits) != len(z_bits):
            raise DimensionError("x and z bit vectors differ in length")
        x = reduce(lambda acc, b: (acc << 1) | int(b), x_bits, 0)
        z = reduce(lambda acc, b: (acc << 1) | int(b), z_bits, 0)
        return cls(len(x_bits), x, z)

    @classmethod
    def identity(cls, n):
        return cls(n, 0, 0)

    def is_identity(self):
        return self.x == 0 and self.z == 0

    def __str__(self):
        return serialize_pauli(self)

    def __repr__(self):
        return f"PauliString({serialize_pauli(self)!r})"


@dataclass(frozen=True)
class SignedPauli:
    """A Hermitian Pauli string times a sign in {+1, -1}."""

    sign: int
    pauli: PauliString

    def __post_init__(self):
        if self.sign not in (1, -1):
            raise ValidationError(f"sign must be +1 or -1, got {self.sign}")

    def __str__(self):
        return ("+" if self.sign > 0 else "-") + serialize_pauli(self.pauli)


def parse_pauli(label):
    label = label.strip()
    if not label:
        raise ValidationError("empty Pauli label")
    x = z = 0
    for ch in label:
        try:
            bx, bz = _CHAR_TO_XZ[ch.upper()]
        except KeyError:
            raise ValidationError(f"illegal character {ch!r} in Pauli label {label!r}") from None
        x = (x << 1) | bx
        z = (z << 1) | bz
    return PauliString(len(label), x, z)


def serialize_pauli(p):
    return "".join(_XZ_TO_CHAR[bx, bz] for bx, bz in zip(p.x_bits, p.z_bits))


def _check_dims(p, q):
    if p.n != q.n:
        raise DimensionError(f"qubit counts differ: {p.n} vs {q.n}")


def symplectic_product(p, q):
    """Parity of the symplectic inner product (0 = commute, 1 = anticommute)."""
    _check_dims(p, q)
    return ((p.x & q.z) ^ (p.z & q.x)).bit_count() & 1


def commutes(p, q):
    return symplectic_product(p, q) == 0


def multiply(p, q):
    """Return ``(phase, r)`` with ``p @ q == phase * r``; phase in {1, 1j, -1, -1j}."""
    _check_dims(p, q)
    mask = (1 << p.n) - 1
    px_only, py, pz_only = p.x & ~p.z & mask, p.x & p.z, ~p.x & p.z & mask
    qx_only, qy, qz_only = q.x & ~q.z & mask, q.x & q.z, ~q.x & q.z & mask
    # XY = iZ, YZ = iX, ZX = iY and the reverse orders pick up -i
    plus = (px_only & qy) | (py & qz_only) | (pz_only & qx_only)
    minus = (px_only & qz_only) | (py & qx_only) | (pz_only & qy)
    k = (plus.bit_count() - minus.bit_count()) % 4
    return PHASES[k], PauliString(p.n, p.x ^ q.x, p.z ^ q.z)


def pauli_weight(p):
    return (p.x | p.z).bit_count()


def y_count(p):
    return (p.x & p.z).bit_count()


_SINGLE = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def pauli_matrix(p):
    """Dense 2^n x 2^n matrix; leftmost label character is the most significant factor."""
    label = serialize_pauli(p) if isinstance(p, PauliString) else p
    return reduce(np.kron, (_SINGLE[ch] for ch in label))


def all_paulis(n, include_identity=True):
    start = 0 if include_identity else 1
    for k in range(start, 4**n):
        # enumerate by (x, z) pairs; k -> x = high half, z = low half
        yield PauliString(n, k >> n, k & ((1 << n) - 1))


def _parity64(v):
    v = v ^ (v >> np.uint64(32))
    v = v ^ (v >> np.uint64(16))
    v = v ^ (v >> np.uint64(8))
    v = v ^ (v >> np.uint64(4))
    v = v ^ (v >> np.uint64(2))
    v = v ^ (v >> np.uint64(1))
    return (v & np.uint64(1)).astype(bool)


class PauliTable:
    """Packed uint64 words for a list of same-width Pauli strings.

    Used to answer "which of these N strings anticommute with string k" in
    one vectorised pass, which is what the grouping and repacking loops need.
    """

    def __init__(self, paulis):
        paulis = list(paulis)
        if not paulis:
            raise ValidationError("empty Pauli list")
        n = paulis[0].n
        if any(p.n != n for p in paulis):
            raise DimensionError("Pauli strings of different widths")
        self.n = n
        self.words = (n + 63) // 64
        self.x = np.zeros((len(paulis), self.words), dtype=np.uint64)
        self.z = np.zeros((len(paulis), self.words), dtype=np.uint64)
        word_mask = (1 << 64) - 1
        for i, p in enumerate(paulis):
            for w in range(self.words):
                self.x[i, w] = (p.x >> (64 * w)) & word_mask
                self.z[i, w] = (p.z >> (64 * w)) & word_mask

    def __len__(self):
        return self.x.shape[0]

    def anticommutes_with(self, k):
        acc = (self.x & self.z[k]) ^ (self.z & self.x[k])
        folded = np.bitwise_xor.reduce(acc, axis=1)
        return _parity64(folded)

    def z_only(self):
        return ~self.x.any(axis=1)
