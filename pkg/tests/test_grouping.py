import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from overlapgroup.errors import ValidationError
from overlapgroup.grouping import (
    Grouping,
    group_norms,
    membership_map,
    sorted_insertion,
    validate_grouping,
)
from overlapgroup.hamiltonian import gen_random, parse_hamiltonian, to_abstract
from overlapgroup.pauli import commutes


def replay(ham):
    """Sorted insertion written out naively from pairwise commutation checks."""
    order = sorted(range(len(ham)), key=lambda i: (-abs(ham.coeffs[i]), i))
    groups = []
    for i in order:
        for g in groups:
            if all(commutes(ham.paulis[i], ham.paulis[k]) for k in g):
                g.append(i)
                break
        else:
            groups.append([i])
    return [sorted(g) for g in groups]


def test_example_two_groups():
    h = parse_hamiltonian("1.0 ZI\n0.9 ZZ\n0.8 XX\n")
    g = sorted_insertion(h)
    assert g.groups == ((0, 1), (2,))


def test_single_term():
    assert sorted_insertion(parse_hamiltonian("0.3 XYZ\n")).groups == ((0,),)


def test_all_commuting_one_group():
    h = parse_hamiltonian("1 ZZ\n0.5 ZI\n0.25 IZ\n")
    assert len(sorted_insertion(h)) == 1


@given(st.integers(2, 4), st.floats(0.05, 0.6), st.integers(0, 10**6))
def test_matches_replay_and_validates(n, density, seed):
    h = gen_random(n, density, seed=seed)
    g = sorted_insertion(h)
    assert [list(x) for x in g.groups] == replay(h)
    assert validate_grouping(h, g) == []


def test_graph_oracle_agrees(rng):
    h = gen_random(4, 0.2, seed=3)
    assert sorted_insertion(h).groups == sorted_insertion(to_abstract(h)).groups


def test_ties_break_by_index():
    h = parse_hamiltonian("1 XI\n1 ZI\n1 IZ\n")
    # XI first, ZI cannot join, IZ joins XI's group
    assert sorted_insertion(h).groups == ((0, 2), (1,))


def test_validate_reports_each_violation():
    h = parse_hamiltonian("1.0 ZI\n0.9 ZZ\n0.8 XX\n")
    kinds = {v.kind for v in validate_grouping(h, Grouping(((0, 2),)))}
    assert kinds == {"covering", "commuting"}
    dup = validate_grouping(h, Grouping(((0, 1), (1, 2))))
    assert [v.kind for v in dup] == ["disjoint"]
    assert validate_grouping(h, Grouping(((0, 1), (1, 2)), disjoint=False)) == []
    with pytest.raises(ValidationError):
        validate_grouping(h, Grouping(((0, 7),)))


def test_json_and_membership():
    g = Grouping(((2, 0), (1,)))
    assert json.loads(json.dumps(g.to_dict())) == {"disjoint": True, "groups": [[0, 2], [1]]}
    assert Grouping.from_dict(g.to_dict()) == g
    assert membership_map(Grouping(((0, 1), (1, 2)), disjoint=False)) == [[0], [0, 1], [1]]


def test_group_norms():
    h = parse_hamiltonian("1.0 ZI\n-2.0 ZZ\n0.5 XX\n")
    S, L1 = group_norms(h, Grouping(((0, 1), (2,))))
    np.testing.assert_allclose(S, [5.0, 0.25])
    np.testing.assert_allclose(L1, [3.0, 0.5])
