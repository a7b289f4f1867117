import numpy as np
import pytest

from conftest import random_allocation, random_hamiltonian
from overlapgroup.errors import ValidationError
from overlapgroup.estimator import Moments, shot_weighted_variance
from overlapgroup.grouping import Grouping, sorted_insertion, validate_grouping
from overlapgroup.hamiltonian import parse_hamiltonian, to_abstract
from overlapgroup.pauli import commutes, pauli_matrix
from overlapgroup.repacking import (
    RepackedGrouping,
    adhoc_repack,
    complete_to_maximal,
    group_diagonalizers,
    insert,
    insertable_pairs,
    is_maximal,
    is_proper_refinement,
    is_refinement,
    one_step_delta,
    posthoc_repack,
)
from test_clifford import circuit_unitary


def brute_insertable(ham, grouping):
    return [
        (i, j)
        for j, g in enumerate(grouping.groups)
        for i in range(len(ham))
        if i not in g and all(commutes(ham.paulis[i], ham.paulis[k]) for k in g)
    ]


def test_posthoc_adds_compatible_z_term():
    ham = parse_hamiltonian("1.0 ZI\n0.9 XX\n0.5 ZZ\n")
    G = Grouping(((0,), (1,), (2,)))
    R = posthoc_repack(ham, G)
    assert 2 in R.groups[0]
    assert len(R) == len(G)
    assert validate_grouping(ham, R) == []


def test_posthoc_signs_match_dense(rng):
    for _ in range(30):
        ham = random_hamiltonian(int(rng.integers(2, 5)), rng, 12)
        G = sorted_insertion(ham)
        diags = group_diagonalizers(ham, G)
        R = posthoc_repack(ham, G, diags)
        for j, g in enumerate(R.groups):
            U = circuit_unitary(diags[j][0])
            for i in g:
                img = U @ pauli_matrix(ham.paulis[i]) @ U.conj().T
                assert np.allclose(img, np.diag(np.diag(img)))
                # sign is the eigenvalue on |0...0>
                assert img[0, 0].real == pytest.approx(R.signs[i, j])


def test_adhoc_is_maximal_valid_and_same_shape(rng):
    for _ in range(20):
        ham = random_hamiltonian(3, rng, int(rng.integers(4, 20)))
        G = sorted_insertion(ham)
        R = adhoc_repack(ham, G)
        assert len(R) == len(G)
        assert is_refinement(RepackedGrouping.trivial(G), R)
        assert validate_grouping(ham, R) == []
        assert is_maximal(ham, R)
        assert brute_insertable(ham, R) == []


def test_adhoc_prefers_large_terms():
    # XI and IX are each in their own group and could join the other one
    ham = parse_hamiltonian("2.0 XI\n1.0 IX\n")
    R = adhoc_repack(ham, Grouping(((0,), (1,))))
    assert R.groups == ((0, 1), (0, 1))


def test_adhoc_on_graph_matches_pauli_mode(rng):
    ham = random_hamiltonian(3, rng, 15)
    G = sorted_insertion(ham)
    assert adhoc_repack(ham, G).groups == adhoc_repack(to_abstract(ham), G).groups


def test_insertable_pairs_and_completion(rng):
    ham = random_hamiltonian(3, rng, 15)
    G = sorted_insertion(ham)
    assert sorted(insertable_pairs(ham, G)) == sorted(brute_insertable(ham, G))
    full = complete_to_maximal(ham, G)
    assert is_maximal(ham, full) and validate_grouping(ham, full) == []


def test_refinement_relations():
    base = Grouping(((0,), (1,)))
    a = RepackedGrouping(base, ((0,), (1,)))
    b = RepackedGrouping(base, ((0, 1), (1,)))
    assert is_refinement(a, b) and is_proper_refinement(a, b)
    assert not is_proper_refinement(a, a)
    with pytest.raises(ValidationError):
        is_refinement(a, RepackedGrouping(Grouping(((0, 1),)), ((0, 1),)))


def test_repacked_invariants():
    base = Grouping(((0,), (1,)))
    with pytest.raises(ValidationError):
        RepackedGrouping(base, ((1,), (1,)))
    with pytest.raises(ValidationError):
        RepackedGrouping(base, ((0,),))
    r = RepackedGrouping(base, ((0, 1), (1,)), {(0, 0): 1})
    back = RepackedGrouping.from_dict(r.to_dict())
    assert back.groups == r.groups and back.signs == r.signs
    assert r.added() == [(1, 0)]
    assert r.multiplicities(2).tolist() == [1, 2]


def test_monotone_under_zero_covariance(rng):
    for _ in range(30):
        ham = random_hamiltonian(3, rng, 12)
        G = sorted_insertion(ham)
        R = adhoc_repack(ham, G)
        moments = Moments.zero_covariance(rng.uniform(0.1, 1.0, len(ham)))
        alloc = random_allocation(len(G), rng)
        before = shot_weighted_variance(ham, G, alloc, moments)
        after = shot_weighted_variance(ham, R, alloc, moments)
        if R.added():
            assert after < before
        else:
            assert after == pytest.approx(before)


def test_one_step_delta_sign_agreement(rng):
    for _ in range(200):
        ham = random_hamiltonian(2, rng, 5)
        G = sorted_insertion(ham)
        pairs = insertable_pairs(ham, G)
        if not pairs:
            continue
        s, ell = pairs[int(rng.integers(len(pairs)))]
        cov = rng.normal(size=(len(ham), len(ham)))
        cov = cov @ cov.T
        d = np.sqrt(np.diag(cov))
        moments = Moments.from_matrix(cov / np.outer(d, d))
        res = one_step_delta(ham, G, ell, s, moments, random_allocation(len(G), rng))
        assert res.agree


def test_one_step_delta_rejects():
    ham = parse_hamiltonian("1 XI\n1 ZI\n")
    G = Grouping(((0,), (1,)))
    moments = Moments.state_independent(2)
    alloc = random_allocation(2, np.random.default_rng(0))
    with pytest.raises(ValidationError):
        one_step_delta(ham, G, 0, 1, moments, alloc)
    with pytest.raises(ValidationError):
        one_step_delta(ham, insert(G, 1, 0), 0, 1, moments, alloc)
