import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from overlapgroup.clifford import GATE_ARITY, CliffordCircuit
from overlapgroup.estimator import ShotAllocation
from overlapgroup.hamiltonian import Hamiltonian
from overlapgroup.pauli import PauliString, commutes

settings.register_profile(
    "default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


def random_pauli(n, rng, allow_identity=False):
    while True:
        p = PauliString(n, int(rng.integers(2**n)), int(rng.integers(2**n)))
        if allow_identity or not p.is_identity():
            return p


def random_commuting_set(n, rng, size):
    """Greedy rejection sampling of distinct, mutually commuting non-identity Paulis."""
    chosen = []
    for _ in range(200 * size):
        if len(chosen) == size:
            break
        p = random_pauli(n, rng)
        if p not in chosen and all(commutes(p, q) for q in chosen):
            chosen.append(p)
    return chosen


def random_hamiltonian(n, rng, terms):
    pool = 4**n - 1
    picks = rng.choice(pool, size=min(terms, pool), replace=False) + 1
    mask = (1 << n) - 1
    paulis = [PauliString(n, int(k) >> n, int(k) & mask) for k in picks]
    coeffs = rng.uniform(0.1, 1.0, size=len(paulis)) * rng.choice([-1, 1], size=len(paulis))
    return Hamiltonian(n, coeffs, paulis)


def random_circuit(n, rng, length):
    gates = []
    names = sorted(GATE_ARITY)
    while len(gates) < length:
        g = names[int(rng.integers(len(names)))]
        if GATE_ARITY[g] == 2:
            if n < 2:
                continue
            a, b = rng.choice(n, 2, replace=False)
            gates.append((g, (int(a), int(b))))
        else:
            gates.append((g, (int(rng.integers(n)),)))
    return CliffordCircuit(n, tuple(gates))


def random_allocation(m, rng, M_tot=1.0):
    M = rng.uniform(0.05, 1.0, size=m)
    return ShotAllocation(M_tot * M / M.sum(), M_tot)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
