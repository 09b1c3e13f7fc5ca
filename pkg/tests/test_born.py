import json

import numpy as np
import pytest

from netbell.born import (
    ConditionalDistribution,
    condition_on,
    joint_distribution,
    marginal,
    validate_no_signalling,
)
from netbell.measurements import MeasurementAssignment, computational_basis, projective_from_bloch
from netbell.nsmodel import make_pr_box
from netbell.states import make_epr, make_ghz
from netbell.tensor import partial_trace, random_density, random_state_vector


def _z_assignment(n, d=2):
    return MeasurementAssignment([(computational_basis(d),)] * n)


def test_epr_z_statistics():
    P = joint_distribution(make_epr(), _z_assignment(2))
    np.testing.assert_allclose(P.table[:, :, 0, 0], [[0.5, 0], [0, 0.5]], atol=1e-15)


def test_pure_and_mixed_routes_agree(rng):
    psi = random_state_vector((2, 3, 2), rng)
    m = MeasurementAssignment([
        (projective_from_bloch(0.3, 0.1), projective_from_bloch(1.2, -0.7)),
        (computational_basis(3),),
        (projective_from_bloch(2.0, 0.4), computational_basis(2)),
    ])
    a = joint_distribution(psi, m).table
    b = joint_distribution(psi.density(), m).table
    np.testing.assert_allclose(a, b, atol=1e-13)


def test_dimension_mismatch():
    with pytest.raises(ValueError):
        joint_distribution(make_epr(), _z_assignment(3))


def test_distribution_validation():
    with pytest.raises(ValueError):
        ConditionalDistribution(np.full((2, 2), 0.4))
    with pytest.raises(ValueError):
        ConditionalDistribution(np.array([[1.2], [-0.2]]))
    with pytest.raises(ValueError):
        ConditionalDistribution(np.ones(3))


def test_ghz_conditioning_gives_collapse():
    # Z outcome 0 on party 0 leaves parties 1, 2 in |00>
    P = joint_distribution(make_ghz(3, np.pi / 3), _z_assignment(3))
    c = condition_on(P, {0: (0, 0)})
    assert c.probability == pytest.approx(np.cos(np.pi / 3) ** 2)
    np.testing.assert_allclose(c.distribution.table[:, :, 0, 0], [[1, 0], [0, 0]], atol=1e-12)


def test_conditioning_on_impossible_outcome_is_undefined():
    P = joint_distribution(make_ghz(3, 0.0), _z_assignment(3))
    c = condition_on(P, {0: (0, 1)})
    assert not c.defined
    assert c.probability == pytest.approx(0.0)


def test_condition_on_validates_parties():
    P = joint_distribution(make_epr(), _z_assignment(2))
    with pytest.raises(ValueError):
        condition_on(P, {})
    with pytest.raises(ValueError):
        condition_on(P, {0: (0, 0), 1: (0, 0)})
    with pytest.raises(ValueError):
        condition_on(P, {5: (0, 0)})


def test_marginal_matches_partial_trace(rng):
    for _ in range(20):
        rho = random_density((2, 2, 2), rng)
        m = MeasurementAssignment([(projective_from_bloch(*rng.uniform(0, 3, 2)),) for _ in range(3)])
        P = joint_distribution(rho, m)
        red = partial_trace(rho, [0, 2])
        m_red = MeasurementAssignment([m.settings[0], m.settings[2]])
        np.testing.assert_allclose(marginal(P, [0, 2]).table, joint_distribution(red, m_red).table, atol=1e-10)


def test_marginal_reorders_parties():
    P = joint_distribution(make_ghz(3, 0.4), _z_assignment(3))
    m = marginal(P, [2, 0])
    assert m.table.shape == (2, 2, 1, 1)


def test_no_signalling_residuals():
    assert validate_no_signalling(make_pr_box().dist) < 1e-15
    signalling = np.zeros((2, 2, 2, 2))
    for a, b, x, y in np.ndindex(2, 2, 2, 2):
        signalling[a, b, x, y] = 1.0 if (a == y and b == 0) else 0.0  # Alice outputs Bob's input
    assert validate_no_signalling(ConditionalDistribution(signalling)) == pytest.approx(1.0)


def test_csv_and_json_roundtrip():
    P = make_pr_box().dist
    assert np.array_equal(ConditionalDistribution.from_csv(P.to_csv()).table, P.table)
    assert np.array_equal(ConditionalDistribution.from_json(P.to_json()).table, P.table)
    data = json.loads(P.to_json())
    assert data["columns"] == ["x1", "x2", "a1", "a2", "p"]
    assert data["rows"][0] == [0, 0, 0, 0, 0.5]
    assert P.to_csv().splitlines()[0] == "x1,x2,a1,a2,p"
