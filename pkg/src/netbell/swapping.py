"""Post-selected collapse of the activated pair in an inflated network."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .born import UNDEFINED_PROB
from .measurements import Povm, bell_basis, generalized_bell_basis, paired_bell_basis, x_basis
from .network import InflatedNetwork, TestSpec, conditioning_tuples, global_state
from .tensor import DensityOperator, StateVector, SystemShape, is_maximally_entangled_pair


@dataclass(frozen=True)
class Collapse:
    probability: float
    state: StateVector | DensityOperator | None

    @property
    def defined(self) -> bool:
        return self.state is not None


def default_projections(test: TestSpec, dims: Sequence[int], single: Povm | None = None,
                        joint: Povm | None = None) -> list[Povm]:
    """Measurements for the conditioning observers of ``test``.

    Conditioned single shares default to X-basis projections (products of
    qubit X for 2**k dimensions); joint pairs default to the Bell basis for
    qubits, the paired Bell basis for ququarts and the generalized Bell basis
    otherwise.
    """
    out = []
    for obs_idx in test.conditioning_observers:
        obs = test.observers[obs_idx]
        if len(obs) == 1:
            out.append(single if single is not None else x_basis(dims[obs[0]]))
        else:
            d = dims[obs[0]]
            if joint is not None:
                out.append(joint)
            elif d == 2:
                out.append(bell_basis())
            elif d == 4:
                out.append(paired_bell_basis())
            else:
                out.append(generalized_bell_basis(d))
    return out


def _conditioning_vectors(test: TestSpec, dims: Sequence[int], povms: Sequence[Povm], outcome: Sequence[int]):
    for obs_idx, povm, k in zip(test.conditioning_observers, povms, outcome):
        shares = test.observers[obs_idx]
        vec = povm.rank_one_vectors()[k]
        yield shares, vec.reshape([dims[s] for s in shares])


def collapsed_state(global_psi: StateVector, test: TestSpec, povms: Sequence[Povm],
                    outcome: Sequence[int]) -> Collapse:
    """Project every conditioning observer onto its outcome vector; return the activated pair.

    ``povms`` and ``outcome`` follow the test's conditioning observer order.
    The probability is the squared norm of the projected vector; below
    1e-12 the collapsed state is undefined.
    """
    dims = list(global_psi.shape.dims)
    t = global_psi.as_tensor()
    axes = list(range(len(dims)))  # share index of each remaining axis
    for shares, vec in _conditioning_vectors(test, dims, povms, outcome):
        pos = [axes.index(s) for s in shares]
        t = np.tensordot(vec.conj(), t, axes=(list(range(len(shares))), pos))
        axes = [a for a in axes if a not in shares]
    w, w_hat = test.activated
    if axes != sorted([w, w_hat]):
        raise ValueError("activated shares must be the only ones left")
    if axes[0] != w:
        t = t.T
    vec = t.ravel()
    prob = float(np.vdot(vec, vec).real)
    if prob < UNDEFINED_PROB:
        return Collapse(prob, None)
    shape = SystemShape((dims[w], dims[w_hat]))
    return Collapse(prob, StateVector(shape, vec / np.sqrt(prob)))


def collapsed_density(global_rho: DensityOperator, test: TestSpec, povms: Sequence[Povm],
                      outcome: Sequence[int]) -> Collapse:
    """Mixed-state version of :func:`collapsed_state`."""
    dims = list(global_rho.shape.dims)
    n = len(dims)
    t = global_rho.matrix.reshape(dims + dims)
    kets = list(range(n))
    bras = list(range(n))
    for shares, vec in _conditioning_vectors(test, dims, povms, outcome):
        k = len(shares)
        # ket axes come first in t, followed by bra axes
        pos = [kets.index(s) for s in shares]
        t = np.tensordot(vec.conj(), t, axes=(list(range(k)), pos))
        kets = [a for a in kets if a not in shares]
        pos = [len(kets) + bras.index(s) for s in shares]
        t = np.tensordot(t, vec, axes=(pos, list(range(k))))
        bras = [a for a in bras if a not in shares]
    w, w_hat = test.activated
    if kets != sorted([w, w_hat]):
        raise ValueError("activated shares must be the only ones left")
    if kets[0] != w:
        t = t.transpose(1, 0, 3, 2)
    D = dims[w] * dims[w_hat]
    mat = t.reshape(D, D)
    prob = float(np.trace(mat).real)
    if prob < UNDEFINED_PROB:
        return Collapse(prob, None)
    mat = mat / prob
    mat = (mat + mat.conj().T) / 2
    return Collapse(prob, DensityOperator(SystemShape((dims[w], dims[w_hat])), mat))


@dataclass(frozen=True)
class SwapOutcome:
    outcome: tuple[int, ...]
    probability: float
    schmidt: tuple[float, ...]
    maximally_entangled: bool


def count_epr_outcomes(global_psi: StateVector, test: TestSpec, projections: Sequence[Povm] | None = None,
                       epr_tolerance: float = 1e-9) -> tuple[int, list[SwapOutcome]]:
    """Count conditioning outcomes that leave the activated pair maximally entangled.

    Zero-probability outcomes are listed with an empty Schmidt spectrum and
    never counted.
    """
    dims = global_psi.shape.dims
    povms = list(projections) if projections is not None else default_projections(test, dims)
    count = 0
    detail = []
    for outcome in conditioning_tuples([p.outcomes for p in povms]):
        c = collapsed_state(global_psi, test, povms, outcome)
        if not c.defined:
            detail.append(SwapOutcome(tuple(outcome), c.probability, (), False))
            continue
        s = np.linalg.svd(c.state.as_tensor(), compute_uv=False)
        flag = is_maximally_entangled_pair(c.state, epr_tolerance)
        count += flag
        detail.append(SwapOutcome(tuple(outcome), c.probability, tuple(float(v) for v in s), flag))
    return count, detail


def swap_counts(net: InflatedNetwork, source: StateVector, tests: Sequence[str] | None = None,
                epr_tolerance: float = 1e-9, single: Povm | None = None,
                joint: Povm | None = None) -> dict[str, tuple[int, int]]:
    """Per test, ``(maximally entangled outcomes, realized outcomes)``."""
    psi = global_state(net, source)
    out = {}
    for test in net.tests:
        if tests is not None and test.name not in tests:
            continue
        povms = default_projections(test, psi.shape.dims, single, joint)
        count, detail = count_epr_outcomes(psi, test, povms, epr_tolerance)
        out[test.name] = (count, sum(1 for d in detail if d.schmidt))
    return out
