"""POVMs, Bell-basis joint measurements and two-qubit CHSH settings."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .tensor import PSD_TOL, DensityOperator, StateVector, SystemShape, permute_subsystems

PAULI = (
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)


@dataclass(frozen=True)
class Povm:
    """Measurement on a ``local_dim``-dimensional system; outcome ``k`` has effect ``effects[k]``."""

    effects: np.ndarray

    def __post_init__(self):
        eff = np.array(self.effects, dtype=complex)
        if eff.ndim != 3 or eff.shape[1] != eff.shape[2]:
            raise ValueError(f"effects must have shape (k, d, d), got {eff.shape}")
        if np.max(np.abs(eff - eff.conj().transpose(0, 2, 1))) > PSD_TOL:
            raise ValueError("effects must be Hermitian")
        if np.linalg.eigvalsh(eff).min() < -PSD_TOL:
            raise ValueError("effects must be positive semi-definite")
        d = eff.shape[1]
        if np.max(np.abs(eff.sum(axis=0) - np.eye(d))) > PSD_TOL:
            raise ValueError("effects do not sum to the identity")
        eff.setflags(write=False)
        object.__setattr__(self, "effects", eff)

    @property
    def local_dim(self) -> int:
        return self.effects.shape[1]

    @property
    def outcomes(self) -> int:
        return self.effects.shape[0]

    @classmethod
    def from_vectors(cls, vectors) -> "Povm":
        """Rank-one projective measurement from the rows of an orthonormal basis."""
        vecs = np.asarray(vectors, dtype=complex)
        return cls(np.einsum("ki,kj->kij", vecs, vecs.conj()))

    def kraus(self) -> list[np.ndarray]:
        """Per outcome, a matrix ``K`` with ``K^dag K`` equal to the effect."""
        out = []
        for e in self.effects:
            w, v = np.linalg.eigh(e)
            keep = w > 1e-14
            out.append((np.sqrt(w[keep])[:, None] * v[:, keep].conj().T))
        return out

    def rank_one_vectors(self) -> np.ndarray:
        """Vectors ``e_k`` with effect ``|e_k><e_k|``; raises if an effect has rank above one."""
        rows = []
        for k, K in enumerate(self.kraus()):
            if K.shape[0] > 1:
                raise ValueError(f"effect {k} is not rank one")
            rows.append(K[0].conj() if K.shape[0] else np.zeros(self.local_dim, dtype=complex))
        return np.array(rows)


def product_povm(p: Povm, q: Povm) -> Povm:
    """Tensor product measurement; outcome ``(a, b)`` maps to ``a * q.outcomes + b``."""
    return Povm(np.einsum("aij,bkl->abikjl", p.effects, q.effects).reshape(
        p.outcomes * q.outcomes, p.local_dim * q.local_dim, p.local_dim * q.local_dim))


def computational_basis(d: int) -> Povm:
    return Povm.from_vectors(np.eye(d))


def bloch_vector(theta: float, phi: float) -> np.ndarray:
    return np.array([np.sin(theta) * np.cos(phi), np.sin(theta) * np.sin(phi), np.cos(theta)])


def bloch_angles(vec) -> tuple[float, float]:
    x, y, z = np.asarray(vec, dtype=float) / np.linalg.norm(vec)
    return float(np.arccos(np.clip(z, -1.0, 1.0))), float(np.arctan2(y, x))


def qubit_observable(vec) -> np.ndarray:
    n = np.asarray(vec, dtype=float)
    return sum(c * s for c, s in zip(n / np.linalg.norm(n), PAULI))


def povm_from_observable(obs: np.ndarray) -> Povm:
    """Two-outcome measurement of a dichotomic observable; outcome 0 is eigenvalue +1."""
    obs = np.asarray(obs, dtype=complex)
    eye = np.eye(obs.shape[0])
    return Povm(np.array([(eye + obs) / 2, (eye - obs) / 2]))


def projective_from_bloch(theta: float, phi: float) -> Povm:
    """Qubit projective measurement along the Bloch direction (theta, phi).

    Outcome 0 projects onto the +1 eigenvector of ``n . sigma``.
    """
    return povm_from_observable(qubit_observable(bloch_vector(theta, phi)))


def x_basis(d: int = 2) -> Povm:
    """X-basis projections; on ``2**k`` dimensions the k-fold product of qubit X measurements."""
    qubit = projective_from_bloch(np.pi / 2, 0.0)
    if d == 2:
        return qubit
    k = int(round(np.log2(d)))
    if 2**k == d:
        out = qubit
        for _ in range(k - 1):
            out = product_povm(out, qubit)
        return out
    # Fourier basis for other dimensions
    w = np.exp(2j * np.pi / d)
    return Povm.from_vectors(np.array([[w ** (j * k) for j in range(d)] for k in range(d)]) / np.sqrt(d))


def bell_basis() -> Povm:
    """Two-qubit Bell measurement with outcome order (Phi+, Phi-, Psi+, Psi-)."""
    s = 1 / np.sqrt(2)
    vecs = np.array([
        [s, 0, 0, s],
        [s, 0, 0, -s],
        [0, s, s, 0],
        [0, s, -s, 0],
    ])
    return Povm.from_vectors(vecs)


def generalized_bell_basis(d: int) -> Povm:
    """Maximally entangled basis ``(I x X^m Z^k)|Phi_d>``; outcome index ``k * d + m``."""
    if d == 2:
        return bell_basis()
    w = np.exp(2j * np.pi / d)
    vecs = []
    for k in range(d):
        for m in range(d):
            v = np.zeros((d, d), dtype=complex)
            for j in range(d):
                v[j, (j + m) % d] = w ** (j * k)
            vecs.append(v.ravel() / np.sqrt(d))
    return Povm.from_vectors(np.array(vecs))


def paired_bell_basis() -> Povm:
    """Joint measurement on two ququarts, each a qubit pair (q1, q2).

    Bell measurements pair q1 with q1' and q2 with q2' across the two
    ququarts; outcome ``4 * k1 + k2`` for Bell outcomes k1, k2. The operator
    acts on the space ordered (q1, q2, q1', q2').
    """
    vecs = []
    bell = bell_basis().rank_one_vectors()
    for k1 in range(4):
        for k2 in range(4):
            v = StateVector(SystemShape((2, 2, 2, 2)), np.kron(bell[k1], bell[k2]))
            # built as (q1, q1', q2, q2'); reorder to (q1, q2, q1', q2')
            vecs.append(permute_subsystems(v, [0, 2, 1, 3]).amplitudes)
    return Povm.from_vectors(np.array(vecs))


@dataclass(frozen=True)
class MeasurementAssignment:
    """Per party, one POVM per measurement setting."""

    settings: tuple[tuple[Povm, ...], ...]

    def __post_init__(self):
        settings = tuple(tuple(p) for p in self.settings)
        for i, povms in enumerate(settings):
            if not povms:
                raise ValueError(f"party {i} has no measurement setting")
            if len({p.local_dim for p in povms}) != 1:
                raise ValueError(f"party {i} mixes POVMs of different dimension")
            if len({p.outcomes for p in povms}) != 1:
                raise ValueError(f"party {i} mixes POVMs with different outcome counts")
        object.__setattr__(self, "settings", settings)

    @property
    def parties(self) -> int:
        return len(self.settings)

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(p[0].local_dim for p in self.settings)

    @property
    def settings_cardinality(self) -> tuple[int, ...]:
        return tuple(len(p) for p in self.settings)

    @property
    def outcomes_cardinality(self) -> tuple[int, ...]:
        return tuple(p[0].outcomes for p in self.settings)


def correlation_matrix(rho: DensityOperator) -> np.ndarray:
    """Two-qubit correlation tensor ``T_ij = tr[rho sigma_i x sigma_j]``."""
    if rho.shape.dims != (2, 2):
        raise ValueError(f"expected a two-qubit state, got dims {rho.shape.dims}")
    return np.array([[np.trace(rho.matrix @ np.kron(si, sj)).real for sj in PAULI] for si in PAULI])


def horodecki_chsh_max(rho: DensityOperator) -> float:
    """Maximum CHSH value of a two-qubit state over projective measurements.

    Twice the square root of the sum of the two largest eigenvalues of T^T T.
    """
    T = correlation_matrix(rho)
    ev = np.sort(np.linalg.eigvalsh(T.T @ T))[::-1]
    return float(2.0 * np.sqrt(max(ev[0] + ev[1], 0.0)))


def horodecki_settings(rho: DensityOperator) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Bloch vectors (a0, a1, b0, b1) reaching :func:`horodecki_chsh_max`.

    With T = U S V^T, Bob measures along ``cos t v1 +- sin t v2`` and Alice
    along the normalized images ``T v1`` and ``T v2`` with ``tan t = s2/s1``.
    """
    T = correlation_matrix(rho)
    U, s, Vt = np.linalg.svd(T)
    v1, v2 = Vt[0], Vt[1]
    t = np.arctan2(s[1], s[0])
    b0 = np.cos(t) * v1 + np.sin(t) * v2
    b1 = np.cos(t) * v1 - np.sin(t) * v2
    a0 = U[:, 0]
    a1 = U[:, 1]
    return a0, a1, b0, b1


def chsh_observables_pure(psi: StateVector) -> tuple[tuple[np.ndarray, np.ndarray], tuple[np.ndarray, np.ndarray]]:
    """Dichotomic observables reaching a large CHSH value on a two-party pure state.

    The Schmidt basis is split into consecutive two-dimensional blocks; in
    each block the optimal qubit settings for ``cos a|00> + sin a|11>`` are
    used (Z and X for Alice, ``cos m Z +- sin m X`` for Bob with
    ``tan m = sin 2a``). Left-over directions get the observable +1. A
    maximally entangled state of even Schmidt rank reaches 2 sqrt 2.
    """
    if psi.shape.n != 2:
        raise ValueError("expected a two-party state")
    dA, dB = psi.shape.dims
    U, s, Vh = np.linalg.svd(psi.as_tensor(), full_matrices=True)
    r = min(dA, dB)
    A = [np.zeros((dA, dA), dtype=complex) for _ in range(2)]
    B = [np.zeros((dB, dB), dtype=complex) for _ in range(2)]
    Z = PAULI[2].real
    X = PAULI[0].real
    covered = 0
    for k in range(r // 2):
        i, j = 2 * k, 2 * k + 1
        if s[i] < 1e-14:
            break
        alpha = np.arctan2(s[j], s[i])
        mu = np.arctan(np.sin(2 * alpha))
        blocks_a = (Z, X)
        blocks_b = (np.cos(mu) * Z + np.sin(mu) * X, np.cos(mu) * Z - np.sin(mu) * X)
        ua = U[:, [i, j]]
        vb = Vh[[i, j], :].T
        for x in range(2):
            A[x] += ua @ blocks_a[x] @ ua.conj().T
            B[x] += vb @ blocks_b[x] @ vb.conj().T
        covered = j + 1
    ra = U[:, covered:]
    rb = Vh[covered:, :].T
    for x in range(2):
        A[x] += ra @ ra.conj().T
        B[x] += rb @ rb.conj().T
    return (A[0], A[1]), (B[0], B[1])
