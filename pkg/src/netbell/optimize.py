"""Numerical CHSH maximization and noise-visibility thresholds.

The two-qubit optimizer alternates closed-form updates: with Bob's
observables fixed, Alice's best observable for each setting is the sign of
the reduced operator ``tr_B[rho (I x (B0 +- B1))]`` (for qubits: the unit
Bloch vector of that operator), and vice versa. Random restarts guard
against poor local optima.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product
from typing import Callable, Sequence

import numpy as np

from .measurements import PAULI, bloch_angles, horodecki_chsh_max, qubit_observable
from .network import chain_inflation, conditioning_tuples, global_state, tripartite_inflation
from .states import make_epr, make_ghz, make_werner
from .swapping import collapsed_density, collapsed_state, default_projections
from .tensor import DensityOperator, StateVector, SystemShape

_IDENTITY2 = np.eye(2, dtype=complex)


@dataclass(frozen=True)
class ChshOptimum:
    """Best CHSH value found and the settings reaching it.

    ``settings`` holds the Bloch angles ``(theta, phi)`` of Alice's two
    observables followed by Bob's two.
    """

    value: float
    settings: tuple[tuple[float, float], ...]
    restarts: int


def _reduced_on_a(rho_t: np.ndarray, B: np.ndarray) -> np.ndarray:
    # tr_B[rho (I x B)] with rho_t[i, j, k, l] = <ij|rho|kl>
    return np.einsum("ijkl,lj->ik", rho_t, B)


def _reduced_on_b(rho_t: np.ndarray, A: np.ndarray) -> np.ndarray:
    # tr_A[rho (A x I)]
    return np.einsum("ijkl,ki->jl", rho_t, A)


def _bloch(op: np.ndarray) -> np.ndarray:
    return np.array([np.trace(op @ s).real for s in PAULI])


def _unit(v: np.ndarray, fallback: np.ndarray) -> np.ndarray:
    n = np.linalg.norm(v)
    return v / n if n > 1e-14 else fallback


def _chsh_of(rho_t: np.ndarray, A: Sequence[np.ndarray], B: Sequence[np.ndarray]) -> float:
    val = 0.0
    for (x, y), sign in zip(product(range(2), range(2)), (1, 1, 1, -1)):
        val += sign * np.einsum("ijkl,ki,lj->", rho_t, A[x], B[y]).real
    return float(val)


def _random_unit(rng: np.random.Generator) -> np.ndarray:
    v = rng.normal(size=3)
    return v / np.linalg.norm(v)


def maximize_chsh(rho: DensityOperator, restarts: int = 16, seed: int = 0, max_iter: int = 5000,
                  tol: float = 1e-13) -> ChshOptimum:
    """Maximize CHSH over projective qubit measurements by alternating optimization.

    Parameters
    ----------
    rho : DensityOperator
        Two-qubit state.
    restarts : int
        Number of random starting points for Bob's settings (at least 8).
    seed : int
        Seed of the generator drawing the starting points.

    Returns
    -------
    ChshOptimum
        Largest value found over all restarts and its four Bloch angle pairs.
    """
    if rho.shape.dims != (2, 2):
        raise ValueError(f"expected a two-qubit state, got dims {rho.shape.dims}")
    if restarts < 8:
        raise ValueError("use at least 8 restarts")
    rho_t = rho.matrix.reshape(2, 2, 2, 2)
    rng = np.random.default_rng(seed)
    best_val, best_vecs = -np.inf, None
    for _ in range(restarts):
        b = [_random_unit(rng), _random_unit(rng)]
        a = [_random_unit(rng), _random_unit(rng)]
        prev = -np.inf
        for _ in range(max_iter):
            B = [qubit_observable(v) for v in b]
            a = [_unit(_bloch(_reduced_on_a(rho_t, B[0] + B[1])), a[0]),
                 _unit(_bloch(_reduced_on_a(rho_t, B[0] - B[1])), a[1])]
            A = [qubit_observable(v) for v in a]
            b = [_unit(_bloch(_reduced_on_b(rho_t, A[0] + A[1])), b[0]),
                 _unit(_bloch(_reduced_on_b(rho_t, A[0] - A[1])), b[1])]
            B = [qubit_observable(v) for v in b]
            val = _chsh_of(rho_t, A, B)
            if val - prev < tol:
                break
            prev = val
        if val > best_val:
            best_val, best_vecs = val, a + b
    settings = tuple(bloch_angles(v) for v in best_vecs)
    return ChshOptimum(float(best_val), settings, restarts)


def _sign_observable(op: np.ndarray) -> np.ndarray:
    """Dichotomic observable maximizing ``tr[op O]``: the sign of ``op`` (zero maps to +1)."""
    op = (op + op.conj().T) / 2
    w, V = np.linalg.eigh(op)
    s = np.where(w >= 0, 1.0, -1.0)
    return (V * s) @ V.conj().T


def _random_dichotomic(d: int, rng: np.random.Generator) -> np.ndarray:
    H = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return _sign_observable(H + H.conj().T)


def maximize_chsh_dichotomic(rho: DensityOperator, restarts: int = 16, seed: int = 0,
                             max_iter: int = 2000, tol: float = 1e-13) -> float:
    """Best CHSH value over +-1-valued observables of a bipartite state of any local dimensions.

    Best-effort search (no global guarantee beyond qubits): alternating
    sign-of-operator updates from random dichotomic starting observables.
    """
    if rho.shape.n != 2:
        raise ValueError("expected a two-party state")
    dA, dB = rho.shape.dims
    rho_t = rho.matrix.reshape(dA, dB, dA, dB)
    rng = np.random.default_rng(seed)
    best = -np.inf
    for _ in range(restarts):
        B = [_random_dichotomic(dB, rng), _random_dichotomic(dB, rng)]
        prev = -np.inf
        val = prev
        for _ in range(max_iter):
            A = [_sign_observable(_reduced_on_a(rho_t, B[0] + B[1])),
                 _sign_observable(_reduced_on_a(rho_t, B[0] - B[1]))]
            B = [_sign_observable(_reduced_on_b(rho_t, A[0] + A[1])),
                 _sign_observable(_reduced_on_b(rho_t, A[0] - A[1]))]
            val = _chsh_of(rho_t, A, B)
            if val - prev < tol:
                break
            prev = val
        best = max(best, val)
    return float(best)


# ---------------------------------------------------------------------------
# visibility thresholds


@dataclass
class VisibilityResult:
    """Outcome of a threshold search.

    ``threshold`` is ``None`` when the criterion is never exceeded inside the
    bracket. ``grid`` holds the monotonicity spot checks ``(v, value)``.
    """

    criterion: float
    threshold: float | None
    bracket: tuple[float, float]
    tolerance: float
    evaluations: int
    grid: list[tuple[float, float]] = field(default_factory=list)

    @property
    def found(self) -> bool:
        return self.threshold is not None

    def to_dict(self) -> dict:
        return {
            "criterion": self.criterion,
            "threshold": self.threshold,
            "found": self.found,
            "bracket": list(self.bracket),
            "tolerance": self.tolerance,
            "evaluations": self.evaluations,
            "grid": [list(p) for p in self.grid],
        }


def visibility_threshold(family: Callable[[float], float], criterion: float,
                         bracket: tuple[float, float] = (0.0, 1.0), tol: float = 1e-4,
                         grid_points: int = 5, monotone_tol: float = 1e-9) -> VisibilityResult:
    """Smallest visibility ``v`` in ``bracket`` whose best CHSH exceeds ``criterion``.

    Parameters
    ----------
    family : callable
        Maps a visibility to the largest CHSH value of the experiment; must be
        nondecreasing (checked on ``grid_points`` evenly spaced points).
    criterion : float
        Value to exceed strictly.
    tol : float
        Bisection stops once the bracketing interval is shorter than ``tol``;
        the upper end is returned.

    Raises
    ------
    ValueError
        If the spot check finds the family decreasing.
    """
    lo, hi = float(bracket[0]), float(bracket[1])
    if not lo < hi:
        raise ValueError(f"empty bracket {bracket}")
    grid_v = np.linspace(lo, hi, grid_points)
    grid = [(float(v), float(family(v))) for v in grid_v]
    evals = len(grid)
    for (v0, f0), (v1, f1) in zip(grid, grid[1:]):
        if f1 < f0 - monotone_tol:
            raise ValueError(f"family is not monotone: f({v0:.4g})={f0:.6g} > f({v1:.4g})={f1:.6g}")
    f_lo, f_hi = grid[0][1], grid[-1][1]
    if f_hi <= criterion:
        return VisibilityResult(criterion, None, (lo, hi), tol, evals, grid)
    if f_lo > criterion:
        return VisibilityResult(criterion, lo, (lo, hi), tol, evals, grid)
    # shrink the bracket with the grid before bisecting
    for (v0, f0), (v1, f1) in zip(grid, grid[1:]):
        if f0 <= criterion < f1:
            lo, hi = v0, v1
            break
    while hi - lo >= tol:
        mid = 0.5 * (lo + hi)
        evals += 1
        if family(mid) > criterion:
            hi = mid
        else:
            lo = mid
    return VisibilityResult(criterion, hi, bracket, tol, evals, grid)


def pair_family(phi: StateVector | None = None) -> Callable[[float], float]:
    """``v`` -> Horodecki maximum of the Werner state ``v|phi><phi| + (1-v) I/4``."""
    phi = phi if phi is not None else make_epr()
    return lambda v: horodecki_chsh_max(make_werner(phi, v))


_PAULI_BRANCHES = (_IDENTITY2,) + PAULI


def _depolarizing_branches(n_noisy: int):
    """Pauli branches of single-qubit depolarizing noise on ``n_noisy`` qubits.

    ``D_v(rho) = (1+3v)/4 rho + (1-v)/4 (X rho X + Y rho Y + Z rho Z)``;
    yields (Pauli index tuple, function v -> weight).
    """
    for idx in product(range(4), repeat=n_noisy):
        k = sum(1 for i in idx if i)
        yield idx, (lambda v, k=k: ((1 + 3 * v) / 4) ** (n_noisy - k) * ((1 - v) / 4) ** k)


def _apply_local(psi: StateVector, ops: dict[int, np.ndarray]) -> StateVector:
    t = psi.as_tensor()
    for s, op in ops.items():
        t = np.moveaxis(np.tensordot(op, t, axes=([1], [s])), 0, s)
    return StateVector(psi.shape, t.ravel())


@dataclass
class _NoisyCollapse:
    """Per conditioning tuple, unnormalized collapsed densities of each noise branch."""

    weights: list[Callable[[float], float]]
    densities: list[list[np.ndarray]]  # [tuple][branch] unnormalized 4x4

    def max_chsh(self, v: float) -> float:
        w = np.array([f(v) for f in self.weights])
        best = -np.inf
        for branch_rhos in self.densities:
            mat = sum(wi * r for wi, r in zip(w, branch_rhos))
            p = float(np.trace(mat).real)
            if p < 1e-12:
                continue
            best = max(best, horodecki_chsh_max(DensityOperator(SystemShape((2, 2)), _herm(mat / p))))
        return float(best)


def _herm(m: np.ndarray) -> np.ndarray:
    return (m + m.conj().T) / 2


def _noisy_collapse(psi: StateVector, tests, noisy_shares_of) -> _NoisyCollapse:
    weights = None
    per_tuple = []
    for test in tests:
        shares = noisy_shares_of(test)
        branches = list(_depolarizing_branches(len(shares)))
        weights = [w for _, w in branches]
        povms = default_projections(test, psi.shape.dims)
        branch_states = [_apply_local(psi, {s: _PAULI_BRANCHES[i] for s, i in zip(shares, idx)})
                         for idx, _ in branches]
        for outcome in conditioning_tuples([p.outcomes for p in povms]):
            rhos = []
            for st in branch_states:
                c = collapsed_state(st, test, povms, outcome)
                if c.defined:
                    a = c.state.amplitudes
                    rhos.append(c.probability * np.outer(a, a.conj()))
                else:
                    rhos.append(np.zeros((4, 4), dtype=complex))
            per_tuple.append(rhos)
    return _NoisyCollapse(weights, per_tuple)


def ghz_inflation_family(theta: float, noise: str = "activated") -> Callable[[float], float]:
    """``v`` -> largest post-selected CHSH over the six tripartite tests and all tuples.

    ``noise="activated"`` sends each copy's activated particle through a
    depolarizing channel of visibility ``v`` (the activated correlations then
    scale with ``v**2``, whatever ``theta``). ``noise="werner"`` mixes each
    whole source copy with white noise, ``v|GHZ><GHZ| + (1-v) I/8``.
    """
    net = tripartite_inflation()
    ghz = make_ghz(3, theta)
    if noise == "activated":
        psi = global_state(net, ghz)
        data = _noisy_collapse(psi, net.tests, lambda t: list(t.activated))
        return data.max_chsh
    if noise == "werner":
        def family(v: float) -> float:
            rho = global_state(net, make_werner(ghz, v))
            best = -np.inf
            for test in net.tests:
                povms = default_projections(test, rho.shape.dims)
                for outcome in conditioning_tuples([p.outcomes for p in povms]):
                    c = collapsed_density(rho, test, povms, outcome)
                    if c.defined:
                        best = max(best, horodecki_chsh_max(c.state))
            return float(best)
        return family
    raise ValueError(f"unknown noise model {noise!r}")


def chain_family(n: int = 3) -> Callable[[float], float]:
    """``V`` -> largest post-selected CHSH of the GHZ_n chain test under path noise.

    Copy ``c`` of the source sends its particle ``c`` (the one entering the
    chain from the left, or the left activated particle for the first copy)
    through a depolarizing channel of visibility ``V**(1/(n-1))``, so the
    ``n - 1`` copies together carry the overall visibility ``V``.
    """
    net = chain_inflation(n)
    psi = global_state(net, make_ghz(n, np.pi / 4))
    shares = [net.share(c, c) for c in range(net.copies)]
    data = _noisy_collapse(psi, net.tests, lambda t: shares)
    return lambda V: data.max_chsh(V ** (1.0 / net.copies) if V > 0 else 0.0)
