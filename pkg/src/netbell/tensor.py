"""Dense multipartite states and operators.

All flat indices follow the Kronecker convention with the left factor as the
slow index: subsystem 0 is the most significant digit of a basis index.
Every other module relies on this layout.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce
from typing import Sequence, Union

import numpy as np

NORM_TOL = 1e-12
HERMITIAN_TOL = 1e-12
PSD_TOL = 1e-10
SCHMIDT_TOL = 1e-9


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr, dtype=complex)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class SystemShape:
    """Local dimensions of an ordered list of subsystems."""

    dims: tuple[int, ...]

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        if not dims:
            raise ValueError("a system needs at least one subsystem")
        if any(d < 1 for d in dims):
            raise ValueError(f"local dimensions must be positive, got {dims}")
        object.__setattr__(self, "dims", dims)

    @property
    def total_dim(self) -> int:
        return int(np.prod(self.dims))

    @property
    def n(self) -> int:
        return len(self.dims)

    def __add__(self, other: "SystemShape") -> "SystemShape":
        return SystemShape(self.dims + other.dims)

    def restrict(self, keep: Sequence[int]) -> "SystemShape":
        return SystemShape(tuple(self.dims[k] for k in keep))


def _as_shape(shape) -> SystemShape:
    if isinstance(shape, SystemShape):
        return shape
    if isinstance(shape, (int, np.integer)):
        return SystemShape((int(shape),))
    return SystemShape(tuple(shape))


@dataclass(frozen=True)
class StateVector:
    """Normalized pure state on a multipartite system."""

    shape: SystemShape
    amplitudes: np.ndarray

    def __post_init__(self):
        shape = _as_shape(self.shape)
        amps = _frozen(np.ravel(self.amplitudes))
        if amps.size != shape.total_dim:
            raise ValueError(f"{amps.size} amplitudes for total dimension {shape.total_dim}")
        norm = np.linalg.norm(amps)
        if abs(norm - 1.0) > NORM_TOL:
            raise ValueError(f"state is not normalized (norm {norm!r})")
        object.__setattr__(self, "shape", shape)
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def normalized(cls, amplitudes, dims) -> "StateVector":
        amps = np.asarray(amplitudes, dtype=complex).ravel()
        norm = np.linalg.norm(amps)
        if norm == 0:
            raise ValueError("cannot normalize the zero vector")
        return cls(_as_shape(dims), amps / norm)

    @classmethod
    def basis(cls, index: Sequence[int], dims: Sequence[int]) -> "StateVector":
        shape = _as_shape(dims)
        amps = np.zeros(shape.total_dim, dtype=complex)
        amps[np.ravel_multi_index(tuple(index), shape.dims)] = 1.0
        return cls(shape, amps)

    @property
    def dims(self) -> tuple[int, ...]:
        return self.shape.dims

    def as_tensor(self) -> np.ndarray:
        return self.amplitudes.reshape(self.shape.dims)

    def density(self) -> "DensityOperator":
        return DensityOperator(self.shape, np.outer(self.amplitudes, self.amplitudes.conj()))


@dataclass(frozen=True)
class LinearOperator:
    """Operator acting on a multipartite system."""

    shape: SystemShape
    matrix: np.ndarray

    def __post_init__(self):
        shape = _as_shape(self.shape)
        mat = _frozen(self.matrix)
        D = shape.total_dim
        if mat.shape != (D, D):
            raise ValueError(f"matrix shape {mat.shape} does not match total dimension {D}")
        object.__setattr__(self, "shape", shape)
        object.__setattr__(self, "matrix", mat)

    @property
    def dims(self) -> tuple[int, ...]:
        return self.shape.dims


@dataclass(frozen=True)
class DensityOperator:
    """Hermitian, positive semi-definite, unit-trace operator."""

    shape: SystemShape
    matrix: np.ndarray

    def __post_init__(self):
        shape = _as_shape(self.shape)
        mat = _frozen(self.matrix)
        D = shape.total_dim
        if mat.shape != (D, D):
            raise ValueError(f"matrix shape {mat.shape} does not match total dimension {D}")
        if np.max(np.abs(mat - mat.conj().T), initial=0.0) > HERMITIAN_TOL:
            raise ValueError("density matrix is not Hermitian")
        tr = np.trace(mat).real
        if abs(tr - 1.0) > NORM_TOL:
            raise ValueError(f"density matrix has trace {tr!r}")
        if np.linalg.eigvalsh(mat).min() < -PSD_TOL:
            raise ValueError("density matrix has a negative eigenvalue")
        object.__setattr__(self, "shape", shape)
        object.__setattr__(self, "matrix", mat)

    @property
    def dims(self) -> tuple[int, ...]:
        return self.shape.dims

    @classmethod
    def maximally_mixed(cls, dims) -> "DensityOperator":
        shape = _as_shape(dims)
        return cls(shape, np.eye(shape.total_dim) / shape.total_dim)


State = Union[StateVector, DensityOperator]


def tensor_product(a, b):
    """Kronecker product of two states or operators of the same kind."""
    if type(a) is not type(b):
        raise TypeError(f"cannot tensor {type(a).__name__} with {type(b).__name__}")
    shape = a.shape + b.shape
    if isinstance(a, StateVector):
        return StateVector(shape, np.kron(a.amplitudes, b.amplitudes))
    return type(a)(shape, np.kron(a.matrix, b.matrix))


def tensor_power(a, k: int):
    if k < 1:
        raise ValueError("tensor power needs k >= 1")
    return reduce(tensor_product, [a] * k)


def _check_subsystems(idx: Sequence[int], n: int) -> list[int]:
    idx = [int(i) for i in idx]
    if not idx:
        raise ValueError("subsystem index set is empty")
    if len(set(idx)) != len(idx) or min(idx) < 0 or max(idx) >= n:
        raise ValueError(f"invalid subsystem indices {idx} for {n} subsystems")
    return idx


def permute_subsystems(state, order: Sequence[int]):
    """Reorder subsystems so that new subsystem ``k`` is old subsystem ``order[k]``."""
    order = list(order)
    n = state.shape.n
    if sorted(order) != list(range(n)):
        raise ValueError(f"{order} is not a permutation of {n} subsystems")
    dims = state.shape.dims
    new_shape = SystemShape(tuple(dims[k] for k in order))
    if isinstance(state, StateVector):
        amps = state.as_tensor().transpose(order).ravel()
        return StateVector(new_shape, amps)
    t = state.matrix.reshape(dims + dims).transpose(order + [n + k for k in order])
    D = new_shape.total_dim
    return type(state)(new_shape, t.reshape(D, D))


def partial_trace_array(matrix: np.ndarray, dims: Sequence[int], keep: Sequence[int]) -> np.ndarray:
    """Partial trace of a raw (not necessarily normalized) matrix."""
    dims = list(dims)
    n = len(dims)
    keep = sorted(_check_subsystems(keep, n))
    rest = [k for k in range(n) if k not in keep]
    dk = int(np.prod([dims[k] for k in keep]))
    dr = int(np.prod([dims[k] for k in rest])) if rest else 1
    t = np.asarray(matrix).reshape(dims + dims)
    t = t.transpose(keep + rest + [n + k for k in keep] + [n + k for k in rest])
    return np.einsum("ijkj->ik", t.reshape(dk, dr, dk, dr))


def partial_trace(rho: DensityOperator, keep: Sequence[int]) -> DensityOperator:
    """Trace out every subsystem not in ``keep``; kept subsystems retain their order."""
    keep = sorted(_check_subsystems(keep, rho.shape.n))
    out = partial_trace_array(rho.matrix, rho.shape.dims, keep)
    return DensityOperator(rho.shape.restrict(keep), out)


def fidelity(psi: StateVector, phi: StateVector) -> float:
    """Overlap |<psi|phi>|^2 of two pure states."""
    if psi.shape.total_dim != phi.shape.total_dim:
        raise ValueError("states live on spaces of different dimension")
    return float(min(1.0, abs(np.vdot(psi.amplitudes, phi.amplitudes)) ** 2))


def schmidt_coefficients(psi: StateVector, part: Sequence[int]) -> np.ndarray:
    """Singular values of the amplitudes reshaped across ``part`` versus the rest."""
    n = psi.shape.n
    part = sorted(_check_subsystems(part, n))
    rest = [k for k in range(n) if k not in part]
    if not rest:
        raise ValueError("bipartition must leave a non-empty complement")
    dims = psi.shape.dims
    dp = int(np.prod([dims[k] for k in part]))
    mat = psi.as_tensor().transpose(part + rest).reshape(dp, -1)
    return np.linalg.svd(mat, compute_uv=False)


def schmidt_rank(psi: StateVector, part: Sequence[int]) -> int:
    return int(np.sum(schmidt_coefficients(psi, part) > SCHMIDT_TOL))


def is_maximally_entangled_pair(psi: StateVector, tol: float = 1e-9) -> bool:
    """True when a two-party pure state has a flat Schmidt spectrum of even rank.

    For qubits this is the EPR state up to local unitaries; in higher
    dimensions a flat even-rank spectrum splits into EPR-equivalent blocks.
    """
    if psi.shape.n != 2:
        raise ValueError("expected a two-party state")
    s = np.sort(schmidt_coefficients(psi, [0]))[::-1]
    rank = int(round(1.0 / np.sum(s**4)))
    if rank < 2 or rank % 2 or rank > s.size:
        return False
    flat = np.abs(s[:rank] - 1.0 / np.sqrt(rank)).max() <= tol
    return bool(flat and (s[rank:].max(initial=0.0) <= tol))


def random_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    z = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_density(dims: Sequence[int], rng: np.random.Generator, rank: int | None = None) -> DensityOperator:
    """Random mixed state from a Ginibre matrix (Hilbert-Schmidt measure for full rank)."""
    shape = _as_shape(dims)
    D = shape.total_dim
    k = D if rank is None else rank
    g = rng.standard_normal((D, k)) + 1j * rng.standard_normal((D, k))
    rho = g @ g.conj().T
    rho = (rho + rho.conj().T) / 2
    return DensityOperator(shape, rho / np.trace(rho).real)


def random_state_vector(dims: Sequence[int], rng: np.random.Generator) -> StateVector:
    shape = _as_shape(dims)
    z = rng.standard_normal(shape.total_dim) + 1j * rng.standard_normal(shape.total_dim)
    return StateVector.normalized(z, shape)
