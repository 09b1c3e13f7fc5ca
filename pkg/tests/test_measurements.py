import numpy as np
import pytest

from netbell.born import joint_distribution, marginal
from netbell.measurements import (
    MeasurementAssignment,
    Povm,
    bell_basis,
    bloch_angles,
    bloch_vector,
    chsh_observables_pure,
    computational_basis,
    correlation_matrix,
    generalized_bell_basis,
    horodecki_chsh_max,
    horodecki_settings,
    paired_bell_basis,
    product_povm,
    projective_from_bloch,
    x_basis,
)
from netbell.states import make_epr, make_ghz, make_werner
from netbell.tensor import StateVector, random_density, random_unitary, tensor_product

TSIRELSON = 2 * np.sqrt(2)


def test_bloch_z_and_x_measurements():
    z = projective_from_bloch(0.0, 0.0)
    np.testing.assert_allclose(z.effects, computational_basis(2).effects, atol=1e-15)
    x = projective_from_bloch(np.pi / 2, 0.0)
    np.testing.assert_allclose(x.effects[0], np.full((2, 2), 0.5), atol=1e-15)


def test_bloch_povm_completeness_and_angles():
    p = projective_from_bloch(1.234, 2.345)
    np.testing.assert_allclose(p.effects.sum(axis=0), np.eye(2), atol=1e-14)
    assert bloch_angles(bloch_vector(1.234, 2.345)) == pytest.approx((1.234, 2.345))


def test_povm_validation():
    with pytest.raises(ValueError):
        Povm(np.array([np.eye(2)]) * 0.5)
    with pytest.raises(ValueError):
        Povm(np.array([np.diag([1.5, 0]), np.diag([-0.5, 1])]))
    with pytest.raises(ValueError):
        Povm(np.array([[[0.5, 0.5], [0, 0.5]], [[0.5, -0.5], [0, 0.5]]]))


def test_bell_basis_orthonormal_complete():
    b = bell_basis()
    assert b.outcomes == 4
    vecs = b.rank_one_vectors()
    np.testing.assert_allclose(vecs @ vecs.conj().T, np.eye(4), atol=1e-14)
    np.testing.assert_allclose(b.effects.sum(axis=0), np.eye(4), atol=1e-14)
    for e in b.effects:
        assert np.linalg.matrix_rank(e, tol=1e-12) == 1


def test_bell_outcome_order():
    vecs = bell_basis().rank_one_vectors()
    np.testing.assert_allclose(abs(np.vdot(vecs[0], make_epr().amplitudes)), 1.0)
    psi_minus = np.array([0, 1, -1, 0]) / np.sqrt(2)
    np.testing.assert_allclose(abs(np.vdot(vecs[3], psi_minus)), 1.0)


def test_bell_measurement_on_two_epr_halves_is_uniform():
    psi = tensor_product(make_epr(), make_epr())  # qubits 0,1 and 2,3
    grouped = StateVector.normalized(
        psi.as_tensor().reshape(2, 4, 2).ravel(), (2, 4, 2))
    m = MeasurementAssignment([(computational_basis(2),), (bell_basis(),), (computational_basis(2),)])
    P = joint_distribution(grouped, m)
    np.testing.assert_allclose(marginal(P, [1]).table[:, 0], [0.25] * 4, atol=1e-14)


@pytest.mark.parametrize("d", [3, 4])
def test_generalized_bell_basis(d):
    b = generalized_bell_basis(d)
    assert b.outcomes == d * d
    vecs = b.rank_one_vectors()
    np.testing.assert_allclose(vecs @ vecs.conj().T, np.eye(d * d), atol=1e-12)


def test_paired_bell_basis_is_product_of_matched_bell_measurements():
    b = paired_bell_basis()
    assert b.outcomes == 16 and b.local_dim == 16
    np.testing.assert_allclose(b.effects.sum(axis=0), np.eye(16), atol=1e-12)
    # EPR(q1, q1') x EPR(q2, q2') gives outcome (0, 0) with certainty
    v = np.kron(make_epr().amplitudes, make_epr().amplitudes).reshape(2, 2, 2, 2).transpose(0, 2, 1, 3).ravel()
    probs = np.einsum("i,kij,j->k", v.conj(), b.effects, v).real
    assert probs[0] == pytest.approx(1.0)


def test_x_basis_products():
    assert x_basis(4).outcomes == 4
    np.testing.assert_allclose(x_basis(4).effects, product_povm(x_basis(), x_basis()).effects)
    f3 = x_basis(3)
    np.testing.assert_allclose(f3.effects.sum(axis=0), np.eye(3), atol=1e-12)


def test_assignment_validation():
    with pytest.raises(ValueError):
        MeasurementAssignment([()])
    with pytest.raises(ValueError):
        MeasurementAssignment([(computational_basis(2), computational_basis(3))])


def test_horodecki_examples():
    assert horodecki_chsh_max(make_epr().density()) == pytest.approx(TSIRELSON, abs=1e-12)
    prod = StateVector.basis([0, 1], [2, 2]).density()
    assert horodecki_chsh_max(prod) == pytest.approx(2.0, abs=1e-12)
    for v in (0.3, 0.8, 1 / np.sqrt(2)):
        assert horodecki_chsh_max(make_werner(make_epr(), v)) == pytest.approx(TSIRELSON * v, abs=1e-12)


def test_werner_correlation_matrix():
    T = correlation_matrix(make_werner(make_epr(), 0.6))
    np.testing.assert_allclose(T, 0.6 * np.diag([1, -1, 1]), atol=1e-14)


def test_horodecki_rejects_non_qubits(rng):
    with pytest.raises(ValueError):
        horodecki_chsh_max(random_density((2, 3), rng))


def test_horodecki_local_unitary_invariance(rng):
    for _ in range(20):
        rho = random_density((2, 2), rng)
        U = np.kron(random_unitary(2, rng), random_unitary(2, rng))
        moved = type(rho)(rho.shape, U @ rho.matrix @ U.conj().T)
        assert horodecki_chsh_max(moved) == pytest.approx(horodecki_chsh_max(rho), abs=1e-9)


def test_horodecki_settings_reach_maximum(rng):
    from netbell.audit import chsh_value
    from netbell.measurements import povm_from_observable, qubit_observable

    for _ in range(5):
        rho = random_density((2, 2), rng)
        a0, a1, b0, b1 = horodecki_settings(rho)
        povm = lambda v: povm_from_observable(qubit_observable(v))  # noqa: E731
        m = MeasurementAssignment([(povm(a0), povm(a1)), (povm(b0), povm(b1))])
        value = chsh_value(joint_distribution(rho, m)).value
        assert value == pytest.approx(horodecki_chsh_max(rho), abs=1e-9)


@pytest.mark.parametrize("theta", [np.pi / 8, np.pi / 4, 0.1])
def test_schmidt_block_observables_qubits(theta):
    psi = make_ghz(2, theta)
    (A0, A1), (B0, B1) = chsh_observables_pure(psi)
    rho = psi.density().matrix
    value = sum(s * np.trace(rho @ np.kron(A, B)).real
                for s, A, B in [(1, A0, B0), (1, A0, B1), (1, A1, B0), (-1, A1, B1)])
    assert value == pytest.approx(2 * np.sqrt(1 + np.sin(2 * theta) ** 2), abs=1e-12)


def test_schmidt_block_observables_ququarts():
    psi = make_epr(4)
    (A0, A1), (B0, B1) = chsh_observables_pure(psi)
    for O in (A0, A1, B0, B1):
        np.testing.assert_allclose(O @ O, np.eye(4), atol=1e-12)
    rho = psi.density().matrix
    value = sum(s * np.trace(rho @ np.kron(A, B)).real
                for s, A, B in [(1, A0, B0), (1, A0, B1), (1, A1, B0), (-1, A1, B1)])
    assert value == pytest.approx(TSIRELSON, abs=1e-12)
