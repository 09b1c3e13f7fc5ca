"""Inflated Bell-test networks.

Shares (one subsystem per party per source copy) are numbered copy-major:
share ``c * n + i`` is party ``i`` of copy ``c``. For a given test the
observers are ordered as: the two activated shares, then the conditioned
single shares, then the jointly measured pairs. That observer order is the
party order of every distribution produced for the test.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from itertools import product
from typing import Sequence

from .born import ConditionalDistribution, joint_distribution
from .measurements import MeasurementAssignment
from .tensor import DensityOperator, StateVector, SystemShape, permute_subsystems, tensor_power


@dataclass(frozen=True)
class TestSpec:
    """One Bell-type test on an inflated network.

    ``activated`` shares get two settings; ``conditioned`` shares and the
    ``joint`` pairs get one setting and only serve for post-selection.
    """

    __test__ = False  # not a pytest class

    name: str
    activated: tuple[int, int]
    conditioned: tuple[int, ...]
    joint: tuple[tuple[int, int], ...]

    def __post_init__(self):
        shares = list(self.activated) + list(self.conditioned) + [s for pair in self.joint for s in pair]
        if len(set(shares)) != len(shares):
            raise ValueError(f"test {self.name}: a share appears in more than one role")

    @property
    def observers(self) -> tuple[tuple[int, ...], ...]:
        return (
            (self.activated[0],),
            (self.activated[1],),
            *((s,) for s in self.conditioned),
            *(tuple(p) for p in self.joint),
        )

    @property
    def settings_cardinality(self) -> tuple[int, ...]:
        return (2, 2) + (1,) * (len(self.observers) - 2)

    @property
    def conditioning_observers(self) -> tuple[int, ...]:
        """Observer indices whose outcomes form a conditioning tuple."""
        return tuple(range(2, len(self.observers)))

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "activated": list(self.activated),
            "conditioned": list(self.conditioned),
            "joint": [list(p) for p in self.joint],
        }


@dataclass(frozen=True)
class InflatedNetwork:
    """Copies of one n-party source, with the Bell-type tests run on them."""

    party_names: tuple[str, ...]
    copies: int
    tests: tuple[TestSpec, ...] = field(default_factory=tuple)

    def __post_init__(self):
        n_shares = self.n_parties * self.copies
        for t in self.tests:
            used = set(t.activated) | set(t.conditioned) | {s for p in t.joint for s in p}
            if used != set(range(n_shares)):
                raise ValueError(f"test {t.name} does not assign every share exactly once")
            for a, b in t.joint:
                if self.copy_of(a) == self.copy_of(b):
                    raise ValueError(f"joint pair {(a, b)} lies inside one copy")

    @property
    def n_parties(self) -> int:
        return len(self.party_names)

    @property
    def n_shares(self) -> int:
        return self.n_parties * self.copies

    def share(self, copy: int, party: int) -> int:
        return copy * self.n_parties + party

    def copy_of(self, share: int) -> int:
        return share // self.n_parties

    def party_of(self, share: int) -> int:
        return share % self.n_parties

    def label(self, share: int) -> str:
        return f"{self.party_names[self.party_of(share)]}^{self.copy_of(share) + 1}"

    @property
    def sources(self) -> tuple[tuple[int, ...], ...]:
        return tuple(tuple(self.share(c, i) for i in range(self.n_parties)) for c in range(self.copies))

    @property
    def joint_groups(self) -> tuple[tuple[int, int], ...]:
        seen = []
        for t in self.tests:
            for p in t.joint:
                if tuple(p) not in seen:
                    seen.append(tuple(p))
        return tuple(seen)

    def test(self, name: str) -> TestSpec:
        for t in self.tests:
            if t.name == name:
                return t
        raise KeyError(f"no test named {name!r}; have {[t.name for t in self.tests]}")

    def dag(self, test: TestSpec | None = None) -> dict[str, list[str]]:
        """Causal graph: source copies feed shares, shares feed observers."""
        test = test or self.tests[0]
        graph: dict[str, list[str]] = {}
        for c, shares in enumerate(self.sources):
            graph[f"S^{c + 1}"] = [self.label(s) for s in shares]
        for obs in test.observers:
            name = "".join(self.label(s) for s in obs)
            for s in obs:
                graph.setdefault(self.label(s), []).append(f"out:{name}")
        return graph

    def to_dict(self) -> dict:
        return {
            "parties": [self.label(s) for s in range(self.n_shares)],
            "sources": [list(s) for s in self.sources],
            "joint_groups": [list(p) for p in self.joint_groups],
            "copies": self.copies,
            "tests": [t.to_dict() for t in self.tests],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def _tripartite_test(u: int, v: int) -> TestSpec:
    names = "ABC"
    (w,) = {0, 1, 2} - {u, v}
    return TestSpec(
        name=f"W_{names[u]}{names[v]}",
        activated=(w, w + 3),
        conditioned=(u, u + 3),
        joint=((v, v + 3),),
    )


TRIPARTITE_TESTS = ("W_AB", "W_BA", "W_AC", "W_CA", "W_BC", "W_CB")


def tripartite_inflation() -> InflatedNetwork:
    """Source S for A, B, C and one copy for A^2, B^2, C^2, with the six tests W_{U;V}.

    In ``W_UV`` the pair (U, U^2) is conditioned, (V, V^2) is measured
    jointly and the remaining pair is activated.
    """
    tests = tuple(_tripartite_test("ABC".index(t[2]), "ABC".index(t[3])) for t in TRIPARTITE_TESTS)
    return InflatedNetwork(("A", "B", "C"), 2, tests)


def chain_inflation(n: int) -> InflatedNetwork:
    """n - 1 copies of an n-party source arranged in a chain.

    Party i+1 of copy i is measured jointly with party i+1 of copy i+1
    (1-based, i = 1..n-2). Party 1 of copy 1 and party n of copy n-1 are
    activated; every other share is conditioned.
    """
    if n < 3:
        raise ValueError("chain inflation needs n >= 3")
    copies = n - 1
    share = lambda c, i: c * n + i  # noqa: E731  (0-based copy and party)
    joint = tuple((share(c, c + 1), share(c + 1, c + 1)) for c in range(n - 2))
    activated = (share(0, 0), share(copies - 1, n - 1))
    used = set(activated) | {s for p in joint for s in p}
    conditioned = tuple(s for s in range(n * copies) if s not in used)
    test = TestSpec(name=f"chain_{n}", activated=activated, conditioned=conditioned, joint=joint)
    return InflatedNetwork(tuple(f"A{i + 1}" for i in range(n)), copies, (test,))


def global_state(net: InflatedNetwork, source) -> StateVector | DensityOperator:
    """Independent copies of the source in share order (copy-major)."""
    if source.shape.n != net.n_parties:
        raise ValueError(f"source has {source.shape.n} parties, network expects {net.n_parties}")
    return tensor_power(source, net.copies)


def observer_state(net: InflatedNetwork, state, test: TestSpec):
    """Regroup a global state so that each observer of ``test`` is one subsystem."""
    order = [s for obs in test.observers for s in obs]
    perm = permute_subsystems(state, order)
    dims = state.shape.dims
    grouped = SystemShape(tuple(int(_prod(dims[s] for s in obs)) for obs in test.observers))
    if isinstance(perm, StateVector):
        return StateVector(grouped, perm.amplitudes)
    return DensityOperator(grouped, perm.matrix)


def _prod(it) -> int:
    out = 1
    for v in it:
        out *= v
    return out


def realize_quantum(
    net: InflatedNetwork,
    source_state,
    m: MeasurementAssignment,
    test: TestSpec | None = None,
) -> ConditionalDistribution:
    """Born-rule distribution of the inflated network for one test.

    ``m`` lists POVMs per observer in the test's observer order; a joint
    observer's POVM acts on its two shares ordered by share index.
    """
    test = test or net.tests[0]
    state = observer_state(net, global_state(net, source_state), test)
    if tuple(state.shape.dims) != m.dims:
        raise ValueError(f"observer dims {state.shape.dims} do not match measurement dims {m.dims}")
    return joint_distribution(state, m)


def conditioning_tuples(outcomes: Sequence[int]):
    """All conditioning outcome tuples for the given outcome cardinalities."""
    return product(*(range(o) for o in outcomes))
