import json
import math

import numpy as np
import pytest

from overlapgroup.constructions import (
    Theorem1Instance,
    build_theorem1,
    canonical_groupings,
    theorem1_variances,
)
from overlapgroup.errors import ValidationError
from overlapgroup.grouping import sorted_insertion, validate_grouping
from overlapgroup.repacking import is_refinement, RepackedGrouping


def named(inst, grouping):
    return [sorted(inst.labels[i] for i in g) for g in grouping.groups]


def test_sizes():
    assert len(build_theorem1(2)) == 5
    inst = build_theorem1(3)
    assert len(inst) == 11
    assert sum(u is None for u, _ in inst.tags) == 2
    with pytest.raises(ValidationError):
        build_theorem1(1)


@pytest.mark.parametrize("L", [2, 3, 4])
def test_adjacency_invariants(L):
    inst = build_theorem1(L)
    adj = inst.abstract.adjacency
    for i, (ui, li) in enumerate(inst.tags):
        for k, (uk, lk) in enumerate(inst.tags):
            if i == k:
                continue
            expect = (ui is not None and uk is not None) or li == lk
            assert adj[i, k] == expect
    c = inst.abstract.coeffs
    assert np.all(np.abs(np.abs(c) - 1) <= 1 / len(inst))


def test_l2_groupings_by_name():
    inst = build_theorem1(2)
    G, Gp, R, _ = canonical_groupings(inst)
    assert named(inst, G) == [["Aa", "Ba", "a"], ["Ab", "Bb"]]
    assert named(inst, Gp) == [["Aa", "Ab", "Ba", "Bb"], ["a"]]
    assert named(inst, R) == [["Aa", "Ba", "a"], ["Aa", "Ab", "Ba", "Bb"]]


@pytest.mark.parametrize("L", range(2, 9))
def test_sorted_insertion_reproduces_G(L):
    inst = build_theorem1(L)
    G, Gp, R, Rp = canonical_groupings(inst)
    assert sorted_insertion(inst.abstract).groups == G.groups
    assert sorted_insertion(build_theorem1(L, perturbed=False).abstract).groups == G.groups
    for g in (G, Gp, R, Rp):
        assert validate_grouping(inst.abstract, g) == []
    assert is_refinement(RepackedGrouping.trivial(G), R)
    assert is_refinement(RepackedGrouping.trivial(Gp), Rp)
    assert sorted(R.groups) == sorted(Rp.groups)


def test_closed_form_l2():
    out = theorem1_variances(build_theorem1(2, perturbed=False), 1.0)
    assert out["var_G"] == pytest.approx((math.sqrt(3) + math.sqrt(2)) ** 2, abs=1e-9)
    assert out["var_Gp"] == pytest.approx(9, abs=1e-9)
    assert out["var_R"] <= 9


def test_ratios_grow_like_L():
    rows = [theorem1_variances(build_theorem1(L)) for L in (4, 8, 16, 32)]
    for r in rows:
        assert r["var_R"] <= min(r["var_G"], r["var_Gp"]) * (1 + 1e-12)
        assert 0.1 < r["ratio_G_Gp"] / r["L"] < 1
    ratios = [r["ratio_G_R"] for r in rows]
    assert ratios == sorted(ratios)


def test_instance_json_roundtrip():
    inst = build_theorem1(5)
    back = Theorem1Instance.from_dict(json.loads(json.dumps(inst.to_dict())))
    np.testing.assert_array_equal(back.abstract.adjacency, inst.abstract.adjacency)
    np.testing.assert_array_equal(back.abstract.coeffs, inst.abstract.coeffs)
    assert back.labels == inst.labels
