"""Constructors for the state families used in the inflation experiments."""

from __future__ import annotations

from itertools import combinations
from typing import Iterator, Sequence

import numpy as np

from .tensor import DensityOperator, StateVector, SystemShape, permute_subsystems, schmidt_rank, tensor_product


def make_ghz(n: int, theta: float = np.pi / 4, d: int = 2) -> StateVector:
    """Generalized GHZ state ``cos(theta)|0...0> + sin(theta)|1...1>``.

    For ``d > 2`` the uniform superposition of the ``d`` diagonal basis
    states is returned and ``theta`` is ignored.
    """
    if n < 2:
        raise ValueError("GHZ states need at least two parties")
    if d < 2:
        raise ValueError("local dimension must be at least 2")
    shape = SystemShape((d,) * n)
    amps = np.zeros(shape.total_dim, dtype=complex)
    diag = [sum(i * d**k for k in range(n)) for i in range(d)]
    if d == 2:
        amps[diag[0]] = np.cos(theta)
        amps[diag[1]] = np.sin(theta)
    else:
        amps[diag] = 1.0 / np.sqrt(d)
    return StateVector(shape, amps)


def make_epr(d: int = 2) -> StateVector:
    """Maximally entangled state (1/sqrt d) sum_i |ii>."""
    if d < 2:
        raise ValueError("local dimension must be at least 2")
    amps = np.eye(d, dtype=complex).ravel() / np.sqrt(d)
    return StateVector(SystemShape((d, d)), amps)


def make_werner(phi: StateVector, v: float) -> DensityOperator:
    """Mixture ``v |phi><phi| + (1 - v) I / D`` of a pure state with white noise."""
    if not 0.0 <= v <= 1.0:
        raise ValueError(f"visibility must lie in [0, 1], got {v}")
    D = phi.shape.total_dim
    mat = v * np.outer(phi.amplitudes, phi.amplitudes.conj()) + (1.0 - v) * np.eye(D) / D
    return DensityOperator(phi.shape, mat)


def _edge_state(coeffs) -> StateVector:
    if coeffs is None:
        return make_epr(2)
    c0, c1 = coeffs
    return StateVector.normalized([c0, 0, 0, c1], (2, 2))


# qubit order after building EPR(A1,B2) x EPR(B1,C2) x EPR(C1,A2) is
# (A1, B2, B1, C2, C1, A2); regroup to (A1, A2, B1, B2, C1, C2)
_TRIANGLE_ORDER = [0, 5, 2, 1, 4, 3]


def make_triangle_state(edge_coefficients: Sequence | None = None, grouped: bool = True) -> StateVector:
    """Triangle network of three two-qubit sources.

    Sources are A1-B2, B1-C2 and C1-A2, so each party holds one qubit from
    two different sources. Party A owns (A1, A2), B owns (B1, B2) and C owns
    (C1, C2), first-named qubit slow. With ``grouped`` the result has shape
    (4, 4, 4); otherwise six qubit subsystems in the order A1 A2 B1 B2 C1 C2.

    ``edge_coefficients`` optionally gives (c0, c1) Schmidt coefficients for
    the edges AB, BC, CA in that order; default is EPR on every edge.
    """
    edges = [None, None, None] if edge_coefficients is None else list(edge_coefficients)
    if len(edges) != 3:
        raise ValueError("need coefficients for exactly three edges")
    psi = tensor_product(tensor_product(_edge_state(edges[0]), _edge_state(edges[1])), _edge_state(edges[2]))
    psi = permute_subsystems(psi, _TRIANGLE_ORDER)
    if grouped:
        psi = StateVector(SystemShape((4, 4, 4)), psi.amplitudes)
    return psi


def bipartitions(n: int) -> Iterator[tuple[int, ...]]:
    """All 2**(n-1) - 1 bipartitions, each given by the side that contains party 0."""
    rest = range(1, n)
    for k in range(0, n - 1):
        for extra in combinations(rest, k):
            yield (0,) + extra


def genuine_entanglement_check(psi: StateVector) -> bool:
    """Pure-state genuine multipartite entanglement: no bipartition is a product cut."""
    n = psi.shape.n
    if n < 2:
        raise ValueError("need at least two parties")
    return all(schmidt_rank(psi, part) >= 2 for part in bipartitions(n))
