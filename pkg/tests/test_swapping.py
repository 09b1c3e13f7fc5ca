import numpy as np
import pytest

from netbell.measurements import MeasurementAssignment, computational_basis, x_basis
from netbell.network import global_state, observer_state, tripartite_inflation
from netbell.states import make_epr, make_ghz
from netbell.swapping import (
    collapsed_density,
    collapsed_state,
    count_epr_outcomes,
    default_projections,
    swap_counts,
)
from netbell.tensor import fidelity, is_maximally_entangled_pair
from netbell.born import condition_on, joint_distribution

NET = tripartite_inflation()


def test_default_projections():
    t = NET.test("W_AB")
    povms = default_projections(t, (2,) * 6)
    assert [p.outcomes for p in povms] == [2, 2, 4]


def test_pi_over_4_all_outcomes_maximally_entangled():
    psi = global_state(NET, make_ghz(3))
    for t in NET.tests:
        count, detail = count_epr_outcomes(psi, t)
        assert count == 16
        assert sum(d.probability for d in detail) == pytest.approx(1.0)


@pytest.mark.parametrize("theta", [np.pi / 8, 3 * np.pi / 8, np.pi / 3])
def test_asymmetric_ghz_counts_eight(theta):
    counts = swap_counts(NET, make_ghz(3, theta))
    assert all(c == (8, 16) for c in counts.values())


def test_psi_outcomes_are_maximally_entangled_for_pi_over_3():
    # Bell outcomes Psi+/Psi- pair cos*sin amplitudes, leaving an EPR-type state
    psi = global_state(NET, make_ghz(3, np.pi / 3))
    t = NET.test("W_AB")
    povms = default_projections(t, psi.shape.dims)
    for k in (2, 3):
        c = collapsed_state(psi, t, povms, (0, 0, k))
        assert is_maximally_entangled_pair(c.state)
    c = collapsed_state(psi, t, povms, (0, 0, 0))
    assert not is_maximally_entangled_pair(c.state)


def test_product_source_never_counts():
    counts = swap_counts(NET, make_ghz(3, 0.0))
    assert all(c == (0, 8) for c in counts.values())


def test_collapse_matches_conditioned_born_statistics():
    psi = global_state(NET, make_ghz(3, 0.7))
    t = NET.test("W_CA")
    povms = default_projections(t, psi.shape.dims)
    z = computational_basis(2)
    m = MeasurementAssignment([(z, x_basis()), (z, x_basis())] + [(p,) for p in povms])
    P = joint_distribution(observer_state(NET, psi, t), m)
    outcome = (1, 0, 3)
    c = collapsed_state(psi, t, povms, outcome)
    cond = condition_on(P, {2: (0, 1), 3: (0, 0), 4: (0, 3)})
    assert cond.probability == pytest.approx(c.probability, abs=1e-12)
    direct = joint_distribution(c.state, MeasurementAssignment([m.settings[0], m.settings[1]]))
    np.testing.assert_allclose(cond.distribution.table, direct.table, atol=1e-10)


def test_density_collapse_agrees_with_pure(rng):
    psi = global_state(NET, make_ghz(3, 0.4))
    t = NET.test("W_BA")
    povms = default_projections(t, psi.shape.dims)
    for outcome in [(0, 1, 2), (1, 1, 0)]:
        a = collapsed_state(psi, t, povms, outcome)
        b = collapsed_density(psi.density(), t, povms, outcome)
        assert a.probability == pytest.approx(b.probability, abs=1e-12)
        np.testing.assert_allclose(b.state.matrix, a.state.density().matrix, atol=1e-12)


def test_swapping_two_epr_pairs_gives_unit_fidelity():
    # Source EPR(A,B) x |0>_C; W_AB conditions A-pair on X and Bell-measures B with B^2.
    src = make_ghz(3, np.pi / 4)
    psi = global_state(NET, src)
    t = NET.test("W_AB")
    povms = default_projections(t, psi.shape.dims)
    c = collapsed_state(psi, t, povms, (0, 0, 0))
    assert fidelity(c.state, make_epr()) == pytest.approx(1.0, abs=1e-12)


def test_zero_probability_outcome_undefined():
    psi = global_state(NET, make_ghz(3, 0.0))
    t = NET.test("W_AB")
    povms = default_projections(t, psi.shape.dims)
    c = collapsed_state(psi, t, povms, (0, 0, 3))  # Psi- on |00>
    assert not c.defined
