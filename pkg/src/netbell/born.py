"""Born-rule correlations, post-selection and no-signalling checks.

Tables are dense arrays ``table[a_1, ..., a_n, x_1, ..., x_n]`` holding
P(a|x). Exports list rows lexicographically over settings, then outcomes.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from itertools import product
from typing import Mapping, Sequence

import numpy as np

from .measurements import MeasurementAssignment
from .tensor import DensityOperator, StateVector

UNDEFINED_PROB = 1e-12


@dataclass(frozen=True)
class ConditionalDistribution:
    """Joint outcome distribution conditioned on the parties' settings."""

    table: np.ndarray
    tolerance: float = 1e-10

    def __post_init__(self):
        table = np.array(self.table, dtype=float)
        if table.ndim % 2 or table.ndim == 0:
            raise ValueError("table needs one outcome and one setting axis per party")
        if table.min() < -1e-12:
            raise ValueError(f"negative probability {table.min()!r}")
        n = table.ndim // 2
        sums = table.sum(axis=tuple(range(n)))
        if np.max(np.abs(sums - 1.0)) > self.tolerance:
            raise ValueError("distribution is not normalized for every setting")
        table.setflags(write=False)
        object.__setattr__(self, "table", table)

    @property
    def parties(self) -> int:
        return self.table.ndim // 2

    @property
    def outcomes_cardinality(self) -> tuple[int, ...]:
        return self.table.shape[: self.parties]

    @property
    def settings_cardinality(self) -> tuple[int, ...]:
        return self.table.shape[self.parties :]

    def prob(self, outcomes: Sequence[int], settings: Sequence[int]) -> float:
        return float(self.table[tuple(outcomes) + tuple(settings)])

    # export / import

    def rows(self):
        for x in product(*(range(s) for s in self.settings_cardinality)):
            for a in product(*(range(o) for o in self.outcomes_cardinality)):
                yield x, a, float(self.table[a + x])

    def to_csv(self) -> str:
        n = self.parties
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow([f"x{i + 1}" for i in range(n)] + [f"a{i + 1}" for i in range(n)] + ["p"])
        for x, a, p in self.rows():
            w.writerow(list(x) + list(a) + [repr(p)])
        return buf.getvalue()

    def to_dict(self) -> dict:
        return {
            "parties": self.parties,
            "settings": list(self.settings_cardinality),
            "outcomes": list(self.outcomes_cardinality),
            "columns": [f"x{i + 1}" for i in range(self.parties)]
            + [f"a{i + 1}" for i in range(self.parties)]
            + ["p"],
            "rows": [list(x) + list(a) + [p] for x, a, p in self.rows()],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_rows(cls, settings, outcomes, rows) -> "ConditionalDistribution":
        n = len(settings)
        table = np.zeros(tuple(outcomes) + tuple(settings))
        for row in rows:
            x = tuple(int(v) for v in row[:n])
            a = tuple(int(v) for v in row[n : 2 * n])
            table[a + x] = float(row[2 * n])
        return cls(table)

    @classmethod
    def from_dict(cls, data: Mapping) -> "ConditionalDistribution":
        return cls.from_rows(data["settings"], data["outcomes"], data["rows"])

    @classmethod
    def from_json(cls, text: str) -> "ConditionalDistribution":
        return cls.from_dict(json.loads(text))

    @classmethod
    def from_csv(cls, text: str) -> "ConditionalDistribution":
        reader = csv.reader(io.StringIO(text))
        header = next(reader)
        n = (len(header) - 1) // 2
        rows = [r for r in reader if r]
        settings = [1 + max(int(r[i]) for r in rows) for i in range(n)]
        outcomes = [1 + max(int(r[n + i]) for r in rows) for i in range(n)]
        return cls.from_rows(settings, outcomes, rows)


def _apply_kraus(psi_t: np.ndarray, stacked: np.ndarray, axis: int) -> np.ndarray:
    out = np.tensordot(stacked, psi_t, axes=([1], [axis]))
    return np.moveaxis(out, 0, axis)


def _pure_distribution(psi: StateVector, m: MeasurementAssignment) -> np.ndarray:
    n = m.parties
    outs = m.outcomes_cardinality
    table = np.zeros(outs + m.settings_cardinality)
    base = psi.as_tensor()
    # stacked Kraus rows per party/setting, with the outcome label of each row
    stacks = []
    for povms in m.settings:
        per_setting = []
        for povm in povms:
            ks = povm.kraus()
            labels = np.concatenate([np.full(k.shape[0], a) for a, k in enumerate(ks)]).astype(int)
            per_setting.append((np.vstack(ks), labels))
        stacks.append(per_setting)
    for x in product(*(range(s) for s in m.settings_cardinality)):
        t = base
        for i in range(n):
            t = _apply_kraus(t, stacks[i][x[i]][0], i)
        probs = np.abs(t) ** 2
        for i in range(n):
            labels = stacks[i][x[i]][1]
            reduced = np.zeros(probs.shape[:i] + (outs[i],) + probs.shape[i + 1 :])
            np.add.at(reduced, (slice(None),) * i + (labels,), probs)
            probs = reduced
        table[(Ellipsis,) + x] = probs
    return table


def _mixed_distribution(rho: DensityOperator, m: MeasurementAssignment) -> np.ndarray:
    n = m.parties
    dims = list(rho.shape.dims)
    t = rho.matrix.reshape(dims + dims)
    # contract party i's ket and bra axes with its effects; new axes (x_i, a_i) go last
    for i, povms in enumerate(m.settings):
        eff = np.array([p.effects for p in povms])  # (s, o, d, d)
        # tr[E rho] over party i: sum_{jk} E[k, j] rho[j, k]
        t = np.tensordot(t, eff, axes=([0, n - i], [3, 2]))
    # remaining axes: x1, a1, x2, a2, ...
    t = t.real
    order = [2 * i + 1 for i in range(n)] + [2 * i for i in range(n)]
    return np.ascontiguousarray(t.transpose(order))


def joint_distribution(state, m: MeasurementAssignment) -> ConditionalDistribution:
    """Born-rule table ``P(a|x) = tr[(M^{a_1}_{x_1} x ... x M^{a_n}_{x_n}) rho]``.

    Accepts a :class:`DensityOperator` or a :class:`StateVector`; pure states
    are propagated through Kraus factors of the effects without forming the
    density matrix.
    """
    if tuple(state.shape.dims) != m.dims:
        raise ValueError(f"state dims {state.shape.dims} do not match measurement dims {m.dims}")
    if isinstance(state, StateVector):
        table = _pure_distribution(state, m)
    else:
        table = _mixed_distribution(state, m)
    return ConditionalDistribution(np.clip(table, 0.0, None))


@dataclass(frozen=True)
class Conditioned:
    """Result of post-selection: outcome weight and the conditional, or ``None`` when undefined."""

    probability: float
    distribution: ConditionalDistribution | None

    @property
    def defined(self) -> bool:
        return self.distribution is not None


def condition_on(P: ConditionalDistribution, fixed: Mapping[int, tuple[int, int]]) -> Conditioned:
    """Post-select on fixed parties' ``(setting, outcome)`` pairs.

    The returned probability is the weight of the fixed outcomes at the
    remaining parties' first setting tuple (constant for no-signalling
    tables). Each remaining setting tuple is renormalized separately; if any
    weight falls below 1e-12 the conditional is undefined.
    """
    n = P.parties
    fixed = {int(k): (int(v[0]), int(v[1])) for k, v in fixed.items()}
    if not fixed or any(k < 0 or k >= n for k in fixed):
        raise ValueError(f"invalid fixed parties {sorted(fixed)}")
    rest = [i for i in range(n) if i not in fixed]
    if not rest:
        raise ValueError("cannot fix every party")
    idx = []
    for i in range(n):
        idx.append(fixed[i][1] if i in fixed else slice(None))
    for i in range(n):
        idx.append(fixed[i][0] if i in fixed else slice(None))
    sub = P.table[tuple(idx)]
    k = len(rest)
    weights = sub.sum(axis=tuple(range(k)))
    probability = float(weights.flat[0])
    if weights.min() < UNDEFINED_PROB:
        return Conditioned(max(probability, 0.0), None)
    return Conditioned(probability, ConditionalDistribution(sub / weights))


def marginal(P: ConditionalDistribution, keep: Sequence[int]) -> ConditionalDistribution:
    """Marginal over ``keep`` (in the given order), evaluated at setting 0 of dropped parties."""
    n = P.parties
    keep = list(keep)
    drop = [i for i in range(n) if i not in keep]
    t = P.table.sum(axis=tuple(drop))
    idx = [slice(None)] * len(keep) + [0 if i in drop else slice(None) for i in range(n)]
    t = t[tuple(idx)]
    k = len(keep)
    kept_sorted = sorted(keep)
    perm = [kept_sorted.index(i) for i in keep]
    return ConditionalDistribution(t.transpose(perm + [k + p for p in perm]))


def validate_no_signalling(P: ConditionalDistribution) -> float:
    """Largest change of any (n-1)-party marginal under the left-out party's setting.

    Zero exactly when every marginal is independent of the other parties'
    settings, since lower marginals are sums of these.
    """
    n = P.parties
    if n == 1:
        return 0.0
    worst = 0.0
    for j in range(n):
        m = P.table.sum(axis=j)
        # setting axis of party j is now at position n - 1 + j
        ax = n - 1 + j
        ref = np.take(m, [0], axis=ax)
        worst = max(worst, float(np.max(np.abs(m - ref))))
    return worst
