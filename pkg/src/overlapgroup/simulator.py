"""Dense statevector engine: states, Pauli expectations, exact moments and
shot sampling of measurement groups."""

from dataclasses import dataclass, field

import numpy as np

from .clifford import conjugate_table
from .errors import DimensionError, ValidationError
from .estimator import Moments
from .pauli import PauliString, commutes, multiply, y_count

MAX_QUBITS = 14


def _check_n(n):
    if not 1 <= n <= MAX_QUBITS:
        raise ValidationError(f"dense simulation supports 1..{MAX_QUBITS} qubits, got {n}")


@dataclass(frozen=True, eq=False)
class StateVector:
    n: int
    amplitudes: np.ndarray = field(repr=False)

    def __post_init__(self):
        _check_n(self.n)
        amp = np.asarray(self.amplitudes, dtype=complex)
        if amp.shape != (2**self.n,):
            raise DimensionError(f"{self.n} qubits need {2**self.n} amplitudes, got {amp.shape}")
        if abs(np.vdot(amp, amp).real - 1) > 1e-12:
            raise ValidationError("state is not normalised")
        amp = amp.copy()
        amp.flags.writeable = False
        object.__setattr__(self, "amplitudes", amp)

    @classmethod
    def from_unnormalized(cls, n, amplitudes):
        amp = np.asarray(amplitudes, dtype=complex)
        return cls(n, amp / np.linalg.norm(amp))

    @classmethod
    def basis(cls, n, index):
        amp = np.zeros(2**n, dtype=complex)
        amp[index] = 1
        return cls(n, amp)

    def probabilities(self):
        p = np.abs(self.amplitudes) ** 2
        return p / p.sum()


def load_state(path, n=None):
    """Amplitudes from a ``.npy`` file (complex vector)."""
    amp = np.load(path)
    dim = amp.shape[0]
    n_file = dim.bit_length() - 1
    if 2**n_file != dim:
        raise DimensionError(f"state file has {dim} amplitudes, not a power of two")
    if n is not None and n != n_file:
        raise DimensionError(f"state has {n_file} qubits, Hamiltonian has {n}")
    return StateVector.from_unnormalized(n_file, amp)


def product_state(n, angles=None, seed=None):
    """Tensor product of single-qubit states ``cos(t/2)|0> + e^{i p} sin(t/2)|1>``.

    ``angles`` is a sequence of ``(theta, phi)`` per qubit (leftmost first);
    without it each qubit is drawn uniformly on the Bloch sphere from ``seed``.
    """
    _check_n(n)
    if angles is None:
        rng = np.random.default_rng(seed)
        u, v = rng.random(n), rng.random(n)
        angles = np.column_stack([np.arccos(1 - 2 * u), 2 * np.pi * v])
    angles = np.asarray(angles, dtype=float)
    if angles.shape != (n, 2):
        raise DimensionError(f"need {n} (theta, phi) pairs")
    amp = np.ones(1, dtype=complex)
    for theta, phi in angles:
        q = np.array([np.cos(theta / 2), np.exp(1j * phi) * np.sin(theta / 2)])
        amp = np.kron(amp, q)
    return StateVector.from_unnormalized(n, amp)


def _apply_pauli(amp, p):
    """Return ``P |psi>`` via ``P|b> = i^{#Y} (-1)^{|b & z|} |b ^ x>``."""
    idx = np.arange(amp.size, dtype=np.uint64)
    parity = np.bitwise_count(idx & np.uint64(p.z)) & 1
    phase = (1j) ** (y_count(p) % 4)
    out = np.empty_like(amp)
    out[idx ^ np.uint64(p.x)] = phase * np.where(parity, -1, 1) * amp
    return out


def expectation(state, p):
    if p.n != state.n:
        raise DimensionError(f"{p.n}-qubit Pauli on a {state.n}-qubit state")
    return float(np.vdot(state.amplitudes, _apply_pauli(state.amplitudes, p)).real)


def _product_expectation(state, p, q):
    """``Re <P Q>``; zero when the two anticommute."""
    phase, r = multiply(p, q)
    return float((phase * np.vdot(state.amplitudes, _apply_pauli(state.amplitudes, r))).real)


def exact_moments(state, ham, pairs=()):
    """Exact single-shot variances and the requested covariances.

    ``pairs`` holds term index pairs; each must commute.
    """
    if ham.n != state.n:
        raise DimensionError("state and Hamiltonian widths differ")
    means = np.array([expectation(state, p) for p in ham.paulis])
    variances = np.clip(1 - means**2, 0.0, 1.0)
    cov = {}
    for i, k in pairs:
        i, k = (int(i), int(k)) if i < k else (int(k), int(i))
        if i == k or (i, k) in cov:
            continue
        p, q = ham.paulis[i], ham.paulis[k]
        if not commutes(p, q):
            raise ValidationError(f"terms {i} and {k} do not commute")
        cov[i, k] = _product_expectation(state, p, q) - means[i] * means[k]
    return Moments(variances, "exact-state", pairs=cov)


def group_pairs(grouping):
    """Every within-group pair of term indices."""
    out = set()
    for g in grouping.groups:
        for a in range(len(g)):
            for b in range(a + 1, len(g)):
                out.add((g[a], g[b]))
    return sorted(out)


_H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
_ONE_QUBIT = {
    "H": _H,
    "S": np.diag([1, 1j]),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Z": np.diag([1, -1]).astype(complex),
}


def apply_circuit(state, circuit):
    if circuit.n != state.n:
        raise DimensionError("state and circuit widths differ")
    n = state.n
    psi = state.amplitudes.reshape((2,) * n).copy()
    for name, qubits in circuit.gates:
        if name in _ONE_QUBIT:
            q = qubits[0]
            psi = np.moveaxis(np.tensordot(_ONE_QUBIT[name], psi, axes=([1], [q])), 0, q)
            continue
        a, b = qubits
        sel = [slice(None)] * n
        sel[a] = 1
        if name == "CNOT":
            # flip target where the control is 1
            sub = psi[tuple(sel)]
            tb = b - 1 if b > a else b
            psi[tuple(sel)] = np.flip(sub, axis=tb)
        else:
            sel[b] = 1
            psi[tuple(sel)] *= -1
    return StateVector(n, psi.reshape(-1))


@dataclass
class GroupSampleRecord:
    group: int
    shots: int
    means: dict  # term index -> sign-corrected empirical mean
    bitstrings: np.ndarray = None


def _parity_matrix(z, n_states):
    """Rows: basis index; columns: members.  Entry is the +-1 eigenvalue of
    the Z string ``z`` on that basis state."""
    idx = np.arange(n_states, dtype=np.uint64)
    par = np.bitwise_count(idx[:, None] & z[None, :]) & 1
    return np.where(par.astype(bool), -1.0, 1.0)


def group_eigenvalues(ham, members, circuit):
    """``(2^n, len(members))`` table of each member's measured value per outcome,
    sign included.  Fails if the circuit leaves a member off-diagonal."""
    if ham.n > 63:
        raise ValidationError("too many qubits for dense sampling")
    x, z, sign = conjugate_table(circuit, ham.table)
    members = np.asarray(members, dtype=int)
    off = members[x[members].any(axis=1)]
    if off.size:
        raise ValidationError(f"circuit does not diagonalise terms {off.tolist()}")
    return _parity_matrix(z[members, 0], 2**ham.n) * sign[members][None, :]


def _draw_counts(probs, M, rng):
    if M >= 16 * probs.size:
        return rng.multinomial(M, probs)
    outcomes = rng.choice(probs.size, size=M, p=probs)
    return np.bincount(outcomes, minlength=probs.size)


def sample_group(state, ham, members, circuit, M, rng, group_index=0, keep_bitstrings=False):
    """Measure ``M`` shots of one group and average each member's eigenvalue."""
    if M < 1:
        raise ValidationError("need at least one shot")
    if state.n != ham.n:
        raise DimensionError("state and Hamiltonian widths differ")
    values = group_eigenvalues(ham, members, circuit)
    probs = apply_circuit(state, circuit).probabilities()
    bits = None
    if keep_bitstrings:
        bits = rng.choice(probs.size, size=M, p=probs)
        counts = np.bincount(bits, minlength=probs.size)
    else:
        counts = _draw_counts(probs, M, rng)
    means = counts @ values / M
    return GroupSampleRecord(group_index, int(M), dict(zip(map(int, members), means)), bits)


def simulate_estimates(state, ham, grouping, circuits, alloc, weights, reps, rng):
    """``reps`` independent energy estimates from integer budgets ``alloc``.

    Each group's contribution is ``counts @ v_j / M_j`` with ``v_j`` the
    weighted sum of its members' eigenvalue columns.
    """
    c = np.asarray(ham.coeffs, dtype=float)
    M = np.asarray(alloc.M)
    if not np.all(M == np.round(M)):
        raise ValidationError("simulation needs integer shot budgets")
    energies = np.zeros(reps)
    for j, g in enumerate(grouping.groups):
        values = group_eigenvalues(ham, g, circuits[j])
        v = values @ (c[list(g)] * weights.w[j])
        probs = apply_circuit(state, circuits[j]).probabilities()
        counts = rng.multinomial(int(M[j]), probs, size=reps)
        energies += counts @ v / M[j]
    return energies


def ising_witness_state(n):
    """``(|0...0> + |0^{n/2} 1^{n/2}>) / sqrt(2)``: an equal superposition of
    an extremal-energy pair of the all-to-all ZZ model."""
    if n % 2:
        raise ValidationError("the witness state needs an even qubit count")
    _check_n(n)
    amp = np.zeros(2**n, dtype=complex)
    amp[0] = amp[(1 << (n // 2)) - 1] = 1 / np.sqrt(2)
    return StateVector(n, amp)


def variance_covariance_split(state, ham):
    """``(D, covariance part, total)`` of ``Var(H)`` on ``state``.

    ``D = sum_i c_i^2 (1 - <P_i>^2)``; the covariance part sums
    ``c_i c_k (Re<P_i P_k> - <P_i><P_k>)`` over ordered pairs ``i != k``.
    """
    if ham.n != state.n:
        raise DimensionError("state and Hamiltonian widths differ")
    c = np.asarray(ham.coeffs, dtype=float)
    means = np.array([expectation(state, p) for p in ham.paulis])
    D = float(np.sum(c**2 * (1 - means**2)))
    cache = {}
    cov = 0.0
    N = len(ham.paulis)
    for i in range(N):
        for k in range(i + 1, N):
            phase, r = multiply(ham.paulis[i], ham.paulis[k])
            if phase.imag != 0:  # anticommuting: P_i P_k is anti-Hermitian
                prod = 0.0
            else:
                if r not in cache:
                    cache[r] = expectation(state, r)
                prod = phase.real * cache[r]
            cov += 2 * c[i] * c[k] * (prod - means[i] * means[k])
    return D, cov, D + cov


def dense_variance(state, ham):
    """``<H^2> - <H>^2`` from the dense matrix; reference only."""
    h = ham.matrix()
    psi = state.amplitudes
    hpsi = h @ psi
    return float(np.vdot(hpsi, hpsi).real - np.vdot(psi, hpsi).real ** 2)


def expectation_of(ham, state):
    c = np.asarray(ham.coeffs, dtype=float)
    return float(sum(ci * expectation(state, p) for ci, p in zip(c, ham.paulis)))


__all__ = [
    "StateVector", "GroupSampleRecord", "product_state", "expectation", "exact_moments",
    "apply_circuit", "sample_group", "simulate_estimates", "ising_witness_state",
    "variance_covariance_split", "dense_variance", "group_pairs", "load_state", "PauliString",
]
