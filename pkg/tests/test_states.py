import numpy as np
import pytest

from netbell.states import (
    bipartitions,
    genuine_entanglement_check,
    make_epr,
    make_ghz,
    make_triangle_state,
    make_werner,
)
from netbell.tensor import StateVector, partial_trace, schmidt_rank


def test_ghz_amplitudes():
    psi = make_ghz(3, np.pi / 3)
    expected = np.zeros(8)
    expected[0], expected[7] = np.cos(np.pi / 3), np.sin(np.pi / 3)
    np.testing.assert_allclose(psi.amplitudes, expected, atol=1e-15)


def test_ghz_qudit_and_validation():
    psi = make_ghz(3, d=3)
    assert psi.shape.dims == (3, 3, 3)
    assert genuine_entanglement_check(psi)
    with pytest.raises(ValueError):
        make_ghz(1)


def test_epr_amplitudes():
    np.testing.assert_allclose(make_epr().amplitudes, np.array([1, 0, 0, 1]) / np.sqrt(2))
    assert make_epr(3).shape.dims == (3, 3)


def test_werner_spectrum():
    rho = make_werner(make_epr(), 0.5)
    np.testing.assert_allclose(np.sort(np.linalg.eigvalsh(rho.matrix)), [0.125, 0.125, 0.125, 0.625], atol=1e-12)
    with pytest.raises(ValueError):
        make_werner(make_epr(), 1.2)


def test_bipartitions_count():
    assert len(list(bipartitions(3))) == 3
    assert len(list(bipartitions(4))) == 7
    assert all(0 in part for part in bipartitions(5))


def test_genuine_entanglement():
    assert genuine_entanglement_check(make_ghz(4, 0.4))
    assert not genuine_entanglement_check(make_ghz(3, 0.0))
    # EPR on parties 0,1 times |0> on party 2 is biseparable
    amps = np.kron(make_epr().amplitudes, [1, 0])
    assert not genuine_entanglement_check(StateVector.normalized(amps, (2, 2, 2)))


def test_triangle_state_structure():
    psi = make_triangle_state()
    assert psi.shape.dims == (4, 4, 4)
    for part in ([0], [1], [2]):
        assert schmidt_rank(psi, part) == 4
        red = partial_trace(psi.density(), part)
        np.testing.assert_allclose(red.matrix, np.eye(4) / 4, atol=1e-12)
    flat = make_triangle_state(grouped=False)
    assert flat.shape.dims == (2,) * 6
    # A1 and B2 share an EPR pair
    red = partial_trace(flat.density(), [0, 3])
    np.testing.assert_allclose(red.matrix, make_epr().density().matrix, atol=1e-12)


def test_triangle_state_edge_coefficients():
    psi = make_triangle_state([(1, 0), None, None])
    # edge AB is a product, so A|BC has rank 2 only from edge CA
    assert schmidt_rank(psi, [0]) == 2
    with pytest.raises(ValueError):
        make_triangle_state([None, None])
