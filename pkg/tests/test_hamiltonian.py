import json
from itertools import product

import numpy as np
import pytest

from overlapgroup.errors import DimensionError, ValidationError
from overlapgroup.hamiltonian import (
    AbstractHamiltonian,
    DuplicateTermError,
    Hamiltonian,
    gen_hubbard_spinless_2xn,
    gen_ising_all_to_all,
    gen_random,
    hubbard_lattice_edges,
    load_hamiltonian,
    parse_hamiltonian,
    to_abstract,
    write_hamiltonian,
)
from overlapgroup.pauli import all_paulis, pauli_matrix, parse_pauli, serialize_pauli

EXAMPLE = "1.0 ZI\n0.9 ZZ\n0.8 XX\n"


def test_parse_example():
    h = parse_hamiltonian("# comment\n" + EXAMPLE)
    assert h.n == 2 and len(h) == 3
    assert h.labels() == ["ZI", "ZZ", "XX"]


@pytest.mark.parametrize(
    "text, err",
    [
        ("", ValidationError),
        ("0.5 ZZ\n0.5 ZZ\n", DuplicateTermError),
        ("0.5 ZZ\n0.5 Z\n", DimensionError),
        ("0 ZZ\n", ValidationError),
        ("1.0 II\n", ValidationError),
        ("abc ZZ\n", ValidationError),
        ("1.0\n", ValidationError),
    ],
)
def test_parse_errors(text, err):
    with pytest.raises(err):
        parse_hamiltonian(text)


def test_parse_error_reports_line():
    with pytest.raises(ValidationError, match="line 3"):
        parse_hamiltonian("1 X\n# skip\n1 Q\n")


def test_write_parse_roundtrip():
    h = gen_random(3, 0.3, seed=1)
    back = parse_hamiltonian(write_hamiltonian(h))
    assert back.labels() == h.labels()
    np.testing.assert_array_equal(back.coeffs, h.coeffs)


def test_json_roundtrip(tmp_path):
    h = parse_hamiltonian(EXAMPLE)
    path = tmp_path / "h.json"
    path.write_text(json.dumps(h.to_dict()))
    back = load_hamiltonian(path)
    assert back.labels() == h.labels()
    np.testing.assert_array_equal(back.coeffs, h.coeffs)


def test_coeffs_read_only():
    h = parse_hamiltonian(EXAMPLE)
    with pytest.raises(ValueError):
        h.coeffs[0] = 3.0


def test_abstract_adjacency_example():
    a = to_abstract(parse_hamiltonian(EXAMPLE))
    assert a.adjacency[0, 1] and a.adjacency[1, 2] and not a.adjacency[0, 2]
    one = to_abstract(parse_hamiltonian("1 X\n"))
    assert one.adjacency.tolist() == [[True]]


def test_abstract_validation():
    with pytest.raises(ValidationError):
        AbstractHamiltonian([1, 1], [[True, False], [True, True]])
    with pytest.raises(ValidationError):
        AbstractHamiltonian([1, 1], [[False, True], [True, True]])


def test_abstract_matches_dense_commutator(rng):
    for n in (1, 2, 3):
        h = gen_random(n, 0.5, seed=int(rng.integers(1000)))
        adj = to_abstract(h).adjacency
        mats = [pauli_matrix(p) for p in h.paulis]
        for i, k in product(range(len(h)), repeat=2):
            assert adj[i, k] == np.allclose(mats[i] @ mats[k], mats[k] @ mats[i])


def test_gen_random_counts_and_determinism():
    assert len(gen_random(2, 1.0, seed=0)) == 15
    for seed in range(5):
        assert len(gen_random(2, 0.1, seed=seed)) == 2  # 1.5 rounds up
    a, b = gen_random(4, 0.2, seed=9), gen_random(4, 0.2, seed=9)
    assert a.labels() == b.labels()
    np.testing.assert_array_equal(a.coeffs, b.coeffs)


def test_gen_random_coefficients_centred():
    c = np.concatenate([gen_random(5, 0.5, seed=s).coeffs for s in range(20)])
    assert c.size >= 10**4
    assert np.all((c != 0) & (np.abs(c) <= 1))
    assert abs(c.mean()) < 5 * c.std() / np.sqrt(c.size)


def test_ising():
    assert [serialize_pauli(p) for p in gen_ising_all_to_all(3).paulis] == ["ZZI", "ZIZ", "IZZ"]
    assert np.all(gen_ising_all_to_all(2).coeffs == -1)
    assert len(gen_ising_all_to_all(6)) == 15


def test_hubbard_hopping_only():
    h = gen_hubbard_spinless_2xn(2, V=0.0)
    assert np.allclose(np.abs(h.coeffs), 0.5)
    assert all(p.x != 0 for p in h.paulis)


def test_hubbard_interaction_only():
    h = gen_hubbard_spinless_2xn(3, t=0.0)
    assert all(p.x == 0 for p in h.paulis)


def _fock_hubbard(ncols, t, V):
    """Dense Fock-space Hamiltonian built from occupation numbers directly.

    Mode q is occupied when bit (nq - 1 - q) of the basis index is set, and
    fermionic signs count occupied modes with a smaller index.
    """
    nq = 2 * ncols
    dim = 2**nq

    def occ(b, q):
        return (b >> (nq - 1 - q)) & 1

    def hop(i, j):
        # a_i^dagger a_j
        out = np.zeros((dim, dim))
        for b in range(dim):
            if not occ(b, j):
                continue
            s1 = sum(occ(b, q) for q in range(j))
            b1 = b ^ (1 << (nq - 1 - j))
            if occ(b1, i):
                continue
            s2 = sum(occ(b1, q) for q in range(i))
            out[b1 ^ (1 << (nq - 1 - i)), b] = (-1) ** (s1 + s2)
        return out

    def num(i):
        return np.diag([float(occ(b, i)) for b in range(dim)])

    # lattice neighbours from coordinates, mapped to modes by a snake ordering
    def mode(r, c):
        return c if r == 0 else 2 * ncols - 1 - c

    bonds = set()
    for r, c in product(range(2), range(ncols)):
        for r2, c2 in ((r, (c + 1) % ncols), ((r + 1) % 2, c)):
            a, b = mode(r, c), mode(r2, c2)
            if a != b:
                bonds.add((min(a, b), max(a, b)))
    H = np.zeros((dim, dim))
    for i, j in bonds:
        H -= t * (hop(i, j) + hop(j, i))
        H += V * num(i) @ num(j)
    return H, nq


def test_hubbard_matches_fock_oracle():
    H, nq = _fock_hubbard(2, 1.0, 1.0)
    expect = {}
    for p in all_paulis(nq, include_identity=False):
        c = np.trace(pauli_matrix(p) @ H).real / 2**nq
        if abs(c) > 1e-12:
            expect[serialize_pauli(p)] = c
    h = gen_hubbard_spinless_2xn(2, 1.0, 1.0)
    got = dict(zip(h.labels(), h.coeffs))
    assert got.keys() == expect.keys()
    for k in got:
        assert got[k] == pytest.approx(expect[k], abs=1e-12)


def test_hubbard_edges_dedup():
    assert len(hubbard_lattice_edges(2)) == 4
    assert len(hubbard_lattice_edges(3)) == 9


def test_hamiltonian_rejects():
    with pytest.raises(ValidationError):
        Hamiltonian(1, [1.0], [parse_pauli("I")])
    with pytest.raises(DimensionError):
        Hamiltonian(2, [1.0], [parse_pauli("X")])
