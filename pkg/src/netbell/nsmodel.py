"""Biseparable no-signalling box model.

Boxes have binary inputs and outputs. A biseparable source is a mixture,
over bipartitions I|J of the n parties, of two independent boxes (one on I,
one on J). In an inflated test every share's owner feeds an input into its
box and reads an output; jointly measured pairs may wire one share's output
into the other share's input and combine both outputs into one of four
outcomes.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from itertools import product
from typing import Sequence

import numpy as np
from scipy.optimize import linprog

from .born import ConditionalDistribution, validate_no_signalling
from .network import TestSpec
from .states import bipartitions

NS_TOL = 1e-10
JOINT_OUTCOMES = 4


@dataclass(frozen=True)
class NsBox:
    """A no-signalling conditional distribution."""

    dist: ConditionalDistribution

    def __post_init__(self):
        res = validate_no_signalling(self.dist)
        if res >= NS_TOL:
            raise ValueError(f"box is signalling (residual {res:.3g})")

    @classmethod
    def from_table(cls, table) -> "NsBox":
        return cls(ConditionalDistribution(table))

    @property
    def parties(self) -> int:
        return self.dist.parties

    @property
    def table(self) -> np.ndarray:
        return self.dist.table


def pr_type_box(alpha: int = 0, beta: int = 0, gamma: int = 0) -> NsBox:
    """Box with a xor b = xy xor alpha x xor beta y xor gamma, uniform marginals."""
    t = np.zeros((2, 2, 2, 2))
    for a, b, x, y in product(range(2), repeat=4):
        if (a ^ b) == ((x & y) ^ (alpha & x) ^ (beta & y) ^ gamma):
            t[a, b, x, y] = 0.5
    return NsBox.from_table(t)


def make_pr_box() -> NsBox:
    """Popescu-Rohrlich box: P(a, b | x, y) = 1/2 iff a xor b = x y."""
    return pr_type_box()


def make_deterministic_box(assignment: Sequence) -> NsBox:
    """Deterministic product box from per-party output rules.

    Each entry is either a callable ``input -> output`` or a sequence giving
    the output for input 0 and input 1.
    """
    rules = [r if callable(r) else (lambda x, r=tuple(r): r[x]) for r in assignment]
    k = len(rules)
    t = np.zeros((2,) * (2 * k))
    for xs in product(range(2), repeat=k):
        a = tuple(int(rules[i](xs[i])) for i in range(k))
        t[a + xs] = 1.0
    return NsBox.from_table(t)


def isotropic_box(chsh: float) -> NsBox:
    """Mixture of the PR box with white noise having the given CHSH value (0 to 4)."""
    if not 0.0 <= chsh <= 4.0:
        raise ValueError("isotropic CHSH value must lie in [0, 4]")
    v = chsh / 4.0
    return NsBox.from_table(v * make_pr_box().table + (1 - v) * np.full((2, 2, 2, 2), 0.25))


def local_vertices() -> list[NsBox]:
    """The 16 deterministic two-party boxes."""
    return [make_deterministic_box([(a0, a1), (b0, b1)]) for a0, a1, b0, b1 in product(range(2), repeat=4)]


def extremal_boxes() -> list[NsBox]:
    """The 24 vertices of the two-party binary no-signalling polytope."""
    return local_vertices() + [pr_type_box(a, b, g) for a, b, g in product(range(2), repeat=3)]


def _one_party_box(rng: np.random.Generator) -> np.ndarray:
    p = rng.uniform(size=2)
    if rng.uniform() < 0.5:
        p = np.round(p)
    return np.array([[1 - p[0], 1 - p[1]], [p[0], p[1]]])


def _two_party_box(rng: np.random.Generator) -> np.ndarray:
    verts = np.array([b.table for b in extremal_boxes()])
    k = int(rng.integers(1, 4))
    idx = rng.choice(len(verts), size=k, replace=False)
    # bias toward PR-type vertices so that strongly nonlocal boxes are common
    if rng.uniform() < 0.5:
        idx[0] = 16 + int(rng.integers(8))
    w = rng.dirichlet(np.ones(k))
    return np.tensordot(w, verts[idx], axes=1)


def _wired_chain_box(k: int, rng: np.random.Generator) -> np.ndarray:
    """k-party box from PR boxes between neighbours, with random local wirings.

    Middle party j feeds its input into the box shared with j-1, feeds a
    function of (input, that output) into the box shared with j+1, and
    outputs a function of both box outputs.
    """
    wire = rng.integers(0, 2, size=(k, 2, 2))
    comb = rng.integers(0, 2, size=(k, 2, 2))
    t = np.zeros((2,) * (2 * k))
    # box j joins party j (left share) and party j + 1 (right share)
    for xs in product(range(2), repeat=k):
        for outs in product(product(range(2), repeat=2), repeat=k - 1):
            in_left = [0] * (k - 1)
            in_right = [0] * (k - 1)
            a = [0] * k
            in_left[0] = xs[0]
            a[0] = outs[0][0]
            for j in range(1, k):
                in_right[j - 1] = xs[j]
                r = outs[j - 1][1]
                if j < k - 1:
                    in_left[j] = int(wire[j, xs[j], r])
                    a[j] = int(comb[j, r, outs[j][0]])
                else:
                    a[j] = r
            p = 1.0
            for j, (l, r) in enumerate(outs):
                p *= 0.5 if (l ^ r) == (in_left[j] & in_right[j]) else 0.0
            if p:
                t[tuple(a) + xs] += p
    return t


def _random_box_table(k: int, rng: np.random.Generator) -> np.ndarray:
    if k == 1:
        return _one_party_box(rng)
    if k == 2:
        return _two_party_box(rng)
    # mixture of a wired PR chain, a product split, and a deterministic box
    parts = []
    parts.append(_wired_chain_box(k, rng))
    cut = int(rng.integers(1, k))
    perm = rng.permutation(k)
    prod_t = _outer_tables(_random_box_table(cut, rng), _random_box_table(k - cut, rng), list(perm[:cut]), list(perm[cut:]))
    parts.append(prod_t)
    det = make_deterministic_box([tuple(rng.integers(0, 2, size=2)) for _ in range(k)]).table
    parts.append(det)
    w = rng.dirichlet(np.ones(3))
    return sum(wi * p for wi, p in zip(w, parts))


def random_ns_box(k: int, rng: np.random.Generator) -> NsBox:
    """Seeded random k-party box (k = 1, 2 exact polytope mixtures; k >= 3 wirings)."""
    return NsBox.from_table(_random_box_table(k, rng))


def _outer_tables(t1: np.ndarray, t2: np.ndarray, part: Sequence[int], rest: Sequence[int]) -> np.ndarray:
    """Independent product of boxes on ``part`` and ``rest``, returned in party order."""
    k1, k2 = t1.ndim // 2, t2.ndim // 2
    n = k1 + k2
    outer = np.multiply.outer(t1, t2)  # (a_part, x_part, a_rest, x_rest)
    owner = list(part) + list(rest)
    a_axes = list(range(k1)) + list(range(2 * k1, 2 * k1 + k2))
    x_axes = list(range(k1, 2 * k1)) + list(range(2 * k1 + k2, 2 * n))
    order = [owner.index(i) for i in range(n)]
    return outer.transpose([a_axes[o] for o in order] + [x_axes[o] for o in order])


@dataclass(frozen=True)
class Term:
    weight: float
    part: tuple[int, ...]
    box_part: NsBox
    box_rest: NsBox


@dataclass(frozen=True)
class BiseparableNsSource:
    """Mixture over bipartitions of two independent no-signalling boxes."""

    n: int
    terms: tuple[Term, ...]

    def __post_init__(self):
        total = sum(t.weight for t in self.terms)
        if abs(total - 1.0) > 1e-12 or any(t.weight < 0 for t in self.terms):
            raise ValueError("term weights must be a probability distribution")
        for t in self.terms:
            rest = self.rest(t.part)
            if not t.part or not rest:
                raise ValueError(f"{t.part} is not a proper bipartition")
            if t.box_part.parties != len(t.part) or t.box_rest.parties != len(rest):
                raise ValueError("box sizes do not match the bipartition")

    def rest(self, part: Sequence[int]) -> tuple[int, ...]:
        return tuple(i for i in range(self.n) if i not in part)

    @property
    def table(self) -> np.ndarray:
        """n-party distribution ``P(a|x)`` of one copy of the source."""
        out = np.zeros((2,) * (2 * self.n))
        for t in self.terms:
            out += t.weight * _outer_tables(t.box_part.table, t.box_rest.table, t.part, self.rest(t.part))
        return out

    def distribution(self) -> ConditionalDistribution:
        return ConditionalDistribution(self.table)

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "terms": [
                {
                    "weight": t.weight,
                    "part": list(t.part),
                    "box_part": t.box_part.table.tolist(),
                    "box_rest": t.box_rest.table.tolist(),
                }
                for t in self.terms
            ],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "BiseparableNsSource":
        terms = tuple(
            Term(float(t["weight"]), tuple(t["part"]), NsBox.from_table(t["box_part"]), NsBox.from_table(t["box_rest"]))
            for t in data["terms"]
        )
        return cls(int(data["n"]), terms)


def single_term_source(n: int, part: Sequence[int], box_part: NsBox, box_rest: NsBox) -> BiseparableNsSource:
    return BiseparableNsSource(n, (Term(1.0, tuple(part), box_part, box_rest),))


def random_biseparable_source(n: int, rng: np.random.Generator) -> BiseparableNsSource:
    cuts = list(bipartitions(n))
    k = int(rng.integers(1, len(cuts) + 1))
    chosen = rng.choice(len(cuts), size=k, replace=False)
    w = rng.dirichlet(np.ones(k))
    w = w / w.sum()
    terms = []
    for wi, ci in zip(w, chosen):
        part = cuts[ci]
        rest = tuple(i for i in range(n) if i not in part)
        terms.append(Term(float(wi), part, random_ns_box(len(part), rng), random_ns_box(len(rest), rng)))
    # absorb rounding so weights sum to one exactly enough
    drift = 1.0 - sum(t.weight for t in terms)
    t0 = terms[0]
    terms[0] = Term(t0.weight + drift, t0.part, t0.box_part, t0.box_rest)
    return BiseparableNsSource(n, tuple(terms))


def sources_to_json(sources: Sequence[BiseparableNsSource]) -> str:
    return json.dumps([s.to_dict() for s in sources])


def sources_from_json(text: str) -> list[BiseparableNsSource]:
    return [BiseparableNsSource.from_dict(d) for d in json.loads(text)]


@dataclass(frozen=True)
class ShareResponse:
    """Single-share observer: box input per setting and outcome per (setting, box output).

    With probability ``noise`` the observer ignores its box output and
    reports a uniformly random outcome (local randomness only).
    """

    inputs: tuple[int, ...]
    outputs: tuple[tuple[int, int], ...]
    noise: float = 0.0


@dataclass(frozen=True)
class JointResponse:
    """Jointly measured pair of shares from different copies.

    Share ``first`` (0 or 1, position within the pair) receives
    ``first_input``; the other share receives ``wiring[first output]``. The
    joint outcome is ``combine[o_0][o_1]`` with outputs in pair order, or a
    uniformly random one of the four outcomes with probability ``noise``.
    """

    first: int
    first_input: int
    wiring: tuple[int, int]
    combine: tuple[tuple[int, int], tuple[int, int]]
    noise: float = 0.0


@dataclass(frozen=True)
class Responses:
    singles: dict
    joints: tuple[JointResponse, ...]


def random_responses(test: TestSpec, rng: np.random.Generator, noise: tuple[float, float] = (0.02, 0.25)) -> Responses:
    """Random local responses for every observer of ``test``.

    Inputs, wirings and output maps are deterministic functions; each
    observer additionally gets an output noise level drawn uniformly from
    ``noise``, so every conditioning tuple has positive probability. Pass
    ``noise=(0, 0)`` for purely deterministic responses.
    """
    lo, hi = noise

    def level() -> float:
        return float(rng.uniform(lo, hi)) if hi > 0 else 0.0

    singles = {}
    for s in test.activated:
        singles[s] = ShareResponse(
            tuple(int(v) for v in rng.integers(0, 2, size=2)),
            tuple(tuple(int(v) for v in row) for row in rng.integers(0, 2, size=(2, 2))),
            level(),
        )
    for s in test.conditioned:
        singles[s] = ShareResponse((int(rng.integers(2)),), (tuple(int(v) for v in rng.integers(0, 2, size=2)),),
                                   level())
    joints = []
    for _ in test.joint:
        comb = rng.integers(0, JOINT_OUTCOMES, size=(2, 2))
        if rng.uniform() < 0.5:
            comb = np.array([[0, 1], [2, 3]])  # fine-grained outcome
        joints.append(JointResponse(
            int(rng.integers(2)),
            int(rng.integers(2)),
            tuple(int(v) for v in rng.integers(0, 2, size=2)),
            tuple(tuple(int(v) for v in row) for row in comb),
            level(),
        ))
    return Responses(singles, tuple(joints))


def identity_responses(test: TestSpec) -> Responses:
    """Input = setting, outcome = box output; joints query both shares with input 0."""
    singles = {s: ShareResponse((0, 1), ((0, 1), (0, 1))) for s in test.activated}
    singles.update({s: ShareResponse((0,), ((0, 1),)) for s in test.conditioned})
    joints = tuple(JointResponse(0, 0, (0, 0), ((0, 1), (2, 3))) for _ in test.joint)
    return Responses(singles, joints)


def _outcome_factor(det: np.ndarray, k: int, noise: float) -> np.ndarray:
    """Rows of outcome probabilities: the deterministic outcome mixed with uniform noise."""
    q = np.full((det.size, k), noise / k)
    q[np.arange(det.size), det] += 1.0 - noise
    return q


def _contract_rows(weights: np.ndarray, factors: list[np.ndarray]) -> np.ndarray:
    """``sum_r weights[r] * prod_i factors[i][r, a_i]`` as a dense tensor over ``a``."""
    half = len(factors) // 2

    def outer_rows(fs):
        out = np.ones((weights.size, 1))
        for f in fs:
            out = (out[:, :, None] * f[:, None, :]).reshape(weights.size, -1)
        return out

    left = outer_rows(factors[:half]) * weights[:, None]
    right = outer_rows(factors[half:])
    return (left.T @ right).reshape([f.shape[1] for f in factors])


def simulate_inflated_test(sources: Sequence[BiseparableNsSource], test: TestSpec,
                           responses: Responses) -> ConditionalDistribution:
    """Box-world statistics of one inflated test.

    ``sources`` gives one biseparable source per copy (repeat the same object
    for iid copies). Returns the distribution over the test's observers;
    condition it with :func:`netbell.born.condition_on` to obtain the
    activated pair's correlation for a conditioning tuple.
    """
    n = sources[0].n
    copies = len(sources)
    n_shares = n * copies
    tables = [s.table for s in sources]
    outs = np.array(list(product(range(2), repeat=n_shares)), dtype=int)
    out_card = (2, 2) + tuple(2 if len(o) == 1 else JOINT_OUTCOMES for o in test.observers[2:])
    table = np.zeros(out_card + test.settings_cardinality)
    for x0, x1 in product(range(2), repeat=2):
        inputs = np.zeros_like(outs)
        factors = []
        for s, x in zip(test.activated, (x0, x1)):
            r = responses.singles[s]
            inputs[:, s] = r.inputs[x]
            factors.append(_outcome_factor(np.asarray(r.outputs[x])[outs[:, s]], 2, r.noise))
        for s in test.conditioned:
            r = responses.singles[s]
            inputs[:, s] = r.inputs[0]
            factors.append(_outcome_factor(np.asarray(r.outputs[0])[outs[:, s]], 2, r.noise))
        for pair, r in zip(test.joint, responses.joints):
            f, g = pair[r.first], pair[1 - r.first]
            inputs[:, f] = r.first_input
            inputs[:, g] = np.asarray(r.wiring)[outs[:, f]]
            det = np.asarray(r.combine)[outs[:, pair[0]], outs[:, pair[1]]]
            factors.append(_outcome_factor(det, JOINT_OUTCOMES, r.noise))
        prob = np.ones(len(outs))
        for c, t in enumerate(tables):
            sl = slice(c * n, (c + 1) * n)
            prob *= t[tuple(outs[:, sl].T) + tuple(inputs[:, sl].T)]
        keep = prob > 0
        sub = [f[keep] for f in factors]
        setting = (x0, x1) + (0,) * (len(factors) - 2)
        table[(Ellipsis,) + setting] = _contract_rows(prob[keep], sub)
    return ConditionalDistribution(table)


def lp_min_p(P: ConditionalDistribution) -> float:
    """Smallest weight p with P = p Q + (1 - p) L, Q no-signalling and L local.

    Maximizes the total weight of the 16 deterministic vertices that fits
    under P entrywise; the remainder is automatically no-signalling.
    """
    if P.outcomes_cardinality != (2, 2) or P.settings_cardinality != (2, 2):
        raise ValueError("lp_min_p expects a two-party, two-setting, two-outcome table")
    if validate_no_signalling(P) > 1e-9:
        raise ValueError("lp_min_p requires a no-signalling table")
    D = np.array([v.table.ravel() for v in local_vertices()]).T  # (16 entries, 16 vertices)
    res = linprog(-np.ones(16), A_ub=D, b_ub=P.table.ravel(), bounds=(0, None), method="highs")
    if res.status != 0:
        raise RuntimeError(f"local-content LP failed: {res.message}")
    return float(np.clip(1.0 - res.x.sum(), 0.0, 1.0))
