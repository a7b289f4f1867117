import numpy as np
import pytest

from conftest import random_hamiltonian
from overlapgroup import experiments as exp
from overlapgroup.errors import ValidationError
from overlapgroup.grouping import sorted_insertion
from overlapgroup.repacking import adhoc_repack
from overlapgroup.simulator import product_state


def test_fits():
    k, r2 = exp.fit_through_origin([1, 2, 3], [2, 4, 6])
    assert k == pytest.approx(2) and r2 == pytest.approx(1)
    a, b, r2 = exp.linear_fit([0, 1, 2], [1, 3, 5])
    assert (a, b, r2) == pytest.approx((1, 2, 1))


def test_write_csv(tmp_path):
    path = tmp_path / "x.csv"
    exp.write_csv([{"a": 1, "b": 2.5}], path, invocation="demo")
    assert path.read_text().splitlines() == ["# schema=1 invocation=demo", "a,b", "1,2.5"]


def test_three_term_closed_form_matches_direct():
    for cA, cB, M1, M2 in [(1, 1, 10, 10), (3, 0.5, 2, 7), (0.2, 2, 30, 1), (1, -1, 5, 5)]:
        row = exp.appendix_b_point(cA, cB, M1, M2)
        assert row["delta"] == pytest.approx(row["closed_form_delta"], abs=1e-12)
        assert row["agree"]


def test_negative_cross_coefficient_never_increases():
    for cA in (0.5, 2.0):
        assert not exp.appendix_b_point(cA, -1.0, 20, 10)["increase"]


def test_hubbard_reproducible_and_capped():
    a = exp.hubbard([2], 10, seed=5)
    assert a == exp.hubbard([2], 10, seed=5)
    with pytest.raises(ValidationError):
        exp.hubbard([8], 1)


def test_random_scaling_cap():
    with pytest.raises(ValidationError):
        exp.random_scaling([exp.RANDOM_SCALING_MAX_N + 1])


def test_simulate_adhoc_grouping_runs(rng):
    # ad-hoc additions need circuits synthesised from the repacked groups
    ham = random_hamiltonian(3, rng, 12)
    R = adhoc_repack(ham, sorted_insertion(ham))
    energies, s = exp.simulate(ham, R, product_state(3, seed=2), shots=100, reps=2000, seed=1)
    assert energies.shape == (2000,)
    assert abs(s["mean"] - s["exact_energy"]) <= 5 * s["se_mean"]
    assert np.isfinite(s["analytic_variance"])
