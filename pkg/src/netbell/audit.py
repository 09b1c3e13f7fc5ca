"""CHSH evaluation and the Upsilon-set audits on inflated networks.

The CHSH expression is fixed as E00 + E01 + E10 - E11 with
E(x, y) = sum_{a,b} (-1)^(a+b) P(a, b | x, y).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .born import ConditionalDistribution, Conditioned, UNDEFINED_PROB, condition_on, joint_distribution
from .measurements import (
    MeasurementAssignment,
    Povm,
    chsh_observables_pure,
    horodecki_settings,
    povm_from_observable,
    qubit_observable,
)
from .network import (
    InflatedNetwork,
    TestSpec,
    chain_inflation,
    conditioning_tuples,
    global_state,
    observer_state,
    tripartite_inflation,
)
from .nsmodel import (
    BiseparableNsSource,
    Responses,
    lp_min_p,
    random_biseparable_source,
    random_responses,
    simulate_inflated_test,
)
from .states import make_ghz, make_triangle_state
from .swapping import collapsed_state, default_projections
from .tensor import StateVector, is_maximally_entangled_pair

TSIRELSON = 2.0 * np.sqrt(2.0)
CFACT_THRESHOLD = 2.5
# Chain-test bound 2.7357...; its usual closed form "2 + 1/e" evaluates to 2.3679,
# while every derived figure (2.73576, 0.9674) matches 2 + 2/e, which is used here.
CHAIN_THRESHOLD = 2.0 + 2.0 / np.e
CHSH_SIGNS = np.array([[1.0, 1.0], [1.0, -1.0]])

REPORT_SCHEMA = {
    "type": "object",
    "required": ["experiment", "params", "threshold", "total", "above", "at_or_below",
                 "skipped", "max_chsh", "values", "pass"],
    "properties": {
        "experiment": {"type": "string"},
        "params": {"type": "object"},
        "threshold": {"type": "number"},
        "total": {"type": "integer", "minimum": 0},
        "above": {"type": "integer", "minimum": 0},
        "at_or_below": {"type": "integer", "minimum": 0},
        "skipped": {"type": "integer", "minimum": 0},
        "max_chsh": {"type": ["number", "null"]},
        "values": {"type": "array"},
        "pass": {"type": "boolean"},
    },
}


@dataclass(frozen=True)
class ChshReport:
    value: float
    settings: tuple
    correlators: np.ndarray


def _check_chsh_shape(P: ConditionalDistribution) -> None:
    if P.outcomes_cardinality != (2, 2) or P.settings_cardinality != (2, 2):
        raise ValueError(
            f"CHSH needs two parties with two settings and two outcomes, got outcomes "
            f"{P.outcomes_cardinality} settings {P.settings_cardinality}"
        )


def correlator(P: ConditionalDistribution, x: int, y: int) -> float:
    """E(x, y) = sum_{a,b} (-1)^(a+b) P(a, b | x, y)."""
    _check_chsh_shape(P)
    t = P.table[:, :, x, y]
    return float(t[0, 0] - t[0, 1] - t[1, 0] + t[1, 1])


def chsh_value(P: ConditionalDistribution, settings: tuple = ()) -> ChshReport:
    _check_chsh_shape(P)
    E = np.array([[correlator(P, x, y) for y in range(2)] for x in range(2)])
    return ChshReport(float(np.sum(CHSH_SIGNS * E)), settings, E)


def adapted_settings(state) -> tuple[tuple[Povm, Povm], tuple[Povm, Povm]]:
    """CHSH measurements tailored to a collapsed two-party state.

    Two-qubit states use the Horodecki-optimal directions; larger pure
    states use Schmidt-block qubit settings.
    """
    if state.shape.dims == (2, 2):
        rho = state.density() if isinstance(state, StateVector) else state
        a0, a1, b0, b1 = horodecki_settings(rho)
        obs = [qubit_observable(v) for v in (a0, a1, b0, b1)]
        return (povm_from_observable(obs[0]), povm_from_observable(obs[1])), (
            povm_from_observable(obs[2]), povm_from_observable(obs[3]))
    if not isinstance(state, StateVector):
        raise ValueError("adapted settings beyond two qubits need a pure state")
    (A0, A1), (B0, B1) = chsh_observables_pure(state)
    return (povm_from_observable(A0), povm_from_observable(A1)), (povm_from_observable(B0), povm_from_observable(B1))


@dataclass
class UpsilonEntry:
    test: str
    outcome: tuple[int, ...]
    probability: float
    chsh: float | None
    flagged: bool = False
    lp_p: float | None = None

    def to_dict(self) -> dict:
        d = {
            "test": self.test,
            "outcome": list(self.outcome),
            "probability": self.probability,
            "chsh": self.chsh,
            "flagged": self.flagged,
        }
        if self.lp_p is not None:
            d["lp_p"] = self.lp_p
        return d


@dataclass
class UpsilonReport:
    """Per-outcome CHSH values with the counts above / at-or-below a threshold.

    Large sampled audits may add outcomes through :meth:`add_bulk` instead
    of storing one entry each; ``summary`` rows then stand in for them in
    the exported ``values``.
    """

    experiment: str
    threshold: float
    params: dict = field(default_factory=dict)
    entries: list = field(default_factory=list)
    passed: bool = False
    summary: list = field(default_factory=list)
    _bulk: dict = field(default_factory=lambda: {"total": 0, "above": 0, "below": 0, "max": None})

    def add_bulk(self, chsh: np.ndarray) -> None:
        """Count an array of CHSH values (``nan`` marks a skipped outcome)."""
        vals = np.asarray(chsh, dtype=float).ravel()
        real = vals[~np.isnan(vals)]
        self._bulk["total"] += vals.size
        self._bulk["above"] += int(np.sum(real > self.threshold))
        self._bulk["below"] += int(np.sum(real <= self.threshold))
        if real.size:
            m = float(real.max())
            self._bulk["max"] = m if self._bulk["max"] is None else max(m, self._bulk["max"])

    @property
    def realized(self) -> list:
        return [e for e in self.entries if e.chsh is not None]

    @property
    def total(self) -> int:
        return len(self.entries) + self._bulk["total"]

    @property
    def above(self) -> int:
        return sum(1 for e in self.realized if e.chsh > self.threshold) + self._bulk["above"]

    @property
    def at_or_below(self) -> int:
        return sum(1 for e in self.realized if e.chsh <= self.threshold) + self._bulk["below"]

    @property
    def skipped(self) -> int:
        return self.total - self.above - self.at_or_below

    @property
    def max_chsh(self) -> float | None:
        vals = [e.chsh for e in self.realized]
        if self._bulk["max"] is not None:
            vals.append(self._bulk["max"])
        return max(vals) if vals else None

    def above_by_test(self) -> dict[str, int]:
        out: dict[str, int] = {}
        for e in self.entries:
            out.setdefault(e.test, 0)
            if e.chsh is not None and e.chsh > self.threshold:
                out[e.test] += 1
        return out

    def to_dict(self) -> dict:
        return {
            "experiment": self.experiment,
            "params": self.params,
            "threshold": self.threshold,
            "total": self.total,
            "above": self.above,
            "at_or_below": self.at_or_below,
            "skipped": self.skipped,
            "max_chsh": self.max_chsh,
            "values": self.summary or [e.to_dict() for e in self.entries],
            "pass": bool(self.passed),
        }


def _quantum_entries(net: InflatedNetwork, source: StateVector, tests: Iterable[TestSpec],
                     projections: dict | None = None, chsh_settings=None) -> list[UpsilonEntry]:
    """Born-rule CHSH of the activated pair for every conditioning tuple.

    The collapsed activated state only chooses the CHSH settings; the value
    itself comes from conditioning the full network distribution.
    """
    psi = global_state(net, source)
    entries = []
    for test in tests:
        povms = (projections or {}).get(test.name) or default_projections(test, psi.shape.dims)
        obs_state = observer_state(net, psi, test)
        for outcome in conditioning_tuples([p.outcomes for p in povms]):
            c = collapsed_state(psi, test, povms, outcome)
            if not c.defined:
                entries.append(UpsilonEntry(test.name, tuple(outcome), c.probability, None))
                continue
            flagged = is_maximally_entangled_pair(c.state)
            sa, sb = chsh_settings if chsh_settings is not None else adapted_settings(c.state)
            m = MeasurementAssignment([sa, sb] + [(p,) for p in povms])
            P = joint_distribution(obs_state, m)
            cond = condition_on(P, {2 + i: (0, k) for i, k in enumerate(outcome)})
            if not cond.defined:
                entries.append(UpsilonEntry(test.name, tuple(outcome), cond.probability, None))
                continue
            value = chsh_value(cond.distribution).value
            entries.append(UpsilonEntry(test.name, tuple(outcome), cond.probability, value, flagged))
    return entries


def flagged_at_tsirelson(report: UpsilonReport, tol: float = 1e-6) -> bool:
    return all(abs(e.chsh - TSIRELSON) <= tol for e in report.realized if e.flagged)


def within_tsirelson(report: UpsilonReport, tol: float = 1e-9) -> bool:
    return all(abs(e.chsh) <= TSIRELSON + tol for e in report.realized)


def qfact_audit(source: StateVector, projections: dict | None = None, chsh_settings=None,
                threshold: float = CFACT_THRESHOLD, claimed_above: int = 48) -> UpsilonReport:
    """Six tests x 16 conditioning outcomes on two copies of a tripartite qubit source.

    Passes when at least ``claimed_above`` activated correlations exceed the
    threshold, every maximally entangled collapse reaches 2 sqrt 2, and no
    value breaks the Tsirelson bound.
    """
    if source.shape.dims != (2, 2, 2):
        raise ValueError("qfact audit expects a three-qubit source")
    net = tripartite_inflation()
    report = UpsilonReport("qfact", threshold, {"claimed_above_min": claimed_above})
    report.entries = _quantum_entries(net, source, net.tests, projections, chsh_settings)
    report.passed = report.above >= claimed_above and flagged_at_tsirelson(report) and within_tsirelson(report)
    return report


def triangle_audit(threshold: float = CFACT_THRESHOLD, claimed_above: int = 720,
                   box_ceiling: int = 512) -> UpsilonReport:
    """Tripartite inflation of the EPR triangle network (ququart parties, 1536 tuples)."""
    net = tripartite_inflation()
    report = UpsilonReport("triangle", threshold,
                           {"claimed_above_min": claimed_above, "box_model_ceiling": box_ceiling})
    report.entries = _quantum_entries(net, make_triangle_state(), net.tests)
    report.passed = (report.above >= claimed_above and report.above > box_ceiling
                     and flagged_at_tsirelson(report) and within_tsirelson(report))
    return report


def activated_chsh_values(P: ConditionalDistribution) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized activated-pair CHSH for every conditioning tuple of a test table.

    ``P`` is laid out with the activated pair as observers 0 and 1 (two
    settings each) and every other observer with a single setting. Returns
    ``(chsh, probability)`` arrays indexed by the conditioning outcomes;
    undefined tuples get CHSH ``nan``.
    """
    n = P.parties
    t = P.table[(slice(None),) * n + (slice(None), slice(None)) + (0,) * (n - 2)]
    # t axes: a_w, a_w2, c_1..c_k, x_w, x_w2
    k = n - 2
    t = np.moveaxis(t, [0, 1], [k, k + 1])  # c..., a, a2, x, x2
    weights = t.sum(axis=(k, k + 1))  # c..., x, x2
    signs = np.array([[1.0, -1.0], [-1.0, 1.0]])
    corr = np.einsum("...abxy,ab->...xy", t, signs)
    ok = weights.min(axis=(-2, -1)) >= UNDEFINED_PROB
    with np.errstate(invalid="ignore", divide="ignore"):
        E = corr / weights
        chsh = np.einsum("...xy,xy->...", E, CHSH_SIGNS)
    chsh = np.where(ok, chsh, np.nan)
    return chsh, weights[..., 0, 0]


def activated_conditionals(P: ConditionalDistribution) -> Iterable[tuple[tuple[int, ...], Conditioned]]:
    """Condition a test table on each conditioning tuple in turn."""
    cond_outs = P.outcomes_cardinality[2:]
    for outcome in conditioning_tuples(cond_outs):
        yield tuple(outcome), condition_on(P, {2 + i: (0, k) for i, k in enumerate(outcome)})


def box_test_entries(sources: Sequence[BiseparableNsSource], test: TestSpec, responses: Responses,
                     lemma1: bool = False, lp_cache: dict | None = None) -> list[UpsilonEntry]:
    P = simulate_inflated_test(sources, test, responses)
    entries = []
    for outcome, cond in activated_conditionals(P):
        if not cond.defined:
            entries.append(UpsilonEntry(test.name, outcome, cond.probability, None))
            continue
        value = chsh_value(cond.distribution).value
        p = None
        if lemma1:
            key = np.round(cond.distribution.table, 12).tobytes()
            if lp_cache is not None and key in lp_cache:
                p = lp_cache[key]
            else:
                p = lp_min_p(cond.distribution)
                if lp_cache is not None:
                    lp_cache[key] = p
        entries.append(UpsilonEntry(test.name, outcome, cond.probability, value, lp_p=p))
    return entries


@dataclass
class CfactSample:
    index: int
    source: BiseparableNsSource
    entries: list

    @property
    def max_chsh(self) -> float | None:
        vals = [e.chsh for e in self.entries if e.chsh is not None]
        return max(vals) if vals else None

    def above(self, threshold: float = CFACT_THRESHOLD) -> int:
        return sum(1 for e in self.entries if e.chsh is not None and e.chsh > threshold)

    def lemma1_count(self, bound: float = 0.25, tol: float = 1e-9) -> int:
        """Realized tuples whose conditional splits with nonlocal weight at most ``bound``.

        Zero-probability tuples (undefined conditionals) never count.
        """
        return sum(1 for e in self.entries if e.lp_p is not None and e.lp_p <= bound + tol)

    @property
    def realized(self) -> int:
        return sum(1 for e in self.entries if e.chsh is not None)


def sample_sources(samples: int, seed: int, n: int = 3) -> list[BiseparableNsSource]:
    return [random_biseparable_source(n, np.random.default_rng([seed, i])) for i in range(samples)]


def cfact_samples(samples: int, seed: int, lemma1: bool = False,
                  sources: Sequence[BiseparableNsSource] | None = None) -> list[CfactSample]:
    """Run all six tripartite tests on seeded biseparable sources (iid copies).

    Each sample uses its own random substream for the source and the local
    responses, so results do not depend on evaluation order.
    """
    net = tripartite_inflation()
    cache: dict = {}
    out = []
    count = samples if sources is None else len(sources)
    for i in range(count):
        rng = np.random.default_rng([seed, i])
        src = random_biseparable_source(3, rng) if sources is None else sources[i]
        entries = []
        for test in net.tests:
            entries += box_test_entries([src, src], test, random_responses(test, rng), lemma1, cache)
        out.append(CfactSample(i, src, entries))
    return out


def cfact_audit(samples: int = 1000, seed: int = 0, lemma1: bool = False,
                sources: Sequence[BiseparableNsSource] | None = None, tol: float = 1e-9) -> UpsilonReport:
    """Falsification audit of the biseparable bounds on sampled box sources.

    Fails if any activated CHSH exceeds 2.5 + tol, if any source has more
    than 32 tuples above 2.5, or (with ``lemma1``) if any source has fewer
    than 64 tuples decomposable with nonlocal weight at most 1/4.
    """
    runs = cfact_samples(samples, seed, lemma1, sources)
    report = UpsilonReport("cfact", CFACT_THRESHOLD,
                           {"samples": len(runs), "seed": seed, "lemma1": lemma1,
                            "claimed_above_max": 32, "claimed_lemma1_min": 64 if lemma1 else None})
    values = []
    ok = True
    for run in runs:
        report.entries.extend(run.entries)
        row = {"source": run.index, "max_chsh": run.max_chsh, "above": run.above(), "realized": run.realized}
        ok &= (run.max_chsh is None or run.max_chsh <= CFACT_THRESHOLD + tol) and run.above() <= 32
        if lemma1:
            row["lemma1_count"] = run.lemma1_count()
            ok &= run.lemma1_count() >= 64
        values.append(row)
    report.passed = bool(ok)
    report.summary = values
    return report


def chain_audit(n: int, source: StateVector | None = None, mode: str = "quantum", samples: int = 500,
                seed: int = 0, tol: float = 1e-9) -> UpsilonReport:
    """End-to-end CHSH on the (n-2)-order chain inflation against ``CHAIN_THRESHOLD``.

    Quantum mode passes when the largest post-selected CHSH exceeds the
    threshold (and respects Tsirelson). Box mode passes when no sampled
    biseparable strategy exceeds ``CHAIN_THRESHOLD + tol``.
    """
    if n < 3:
        raise ValueError("chain audit needs n >= 3")
    net = chain_inflation(n)
    test = net.tests[0]
    if mode == "quantum":
        source = source if source is not None else make_ghz(n, np.pi / 4)
        report = UpsilonReport("chain", CHAIN_THRESHOLD, {"n": n, "mode": mode})
        report.entries = _quantum_entries(net, source, [test])
        report.passed = (report.max_chsh is not None and report.max_chsh > CHAIN_THRESHOLD
                         and within_tsirelson(report))
        return report
    if mode not in ("box", "biseparable-sample"):
        raise ValueError(f"unknown mode {mode!r}")
    report = UpsilonReport("chain", CHAIN_THRESHOLD, {"n": n, "mode": "box", "samples": samples, "seed": seed})
    maxima = []
    for i in range(samples):
        rng = np.random.default_rng([seed, i])
        src = random_biseparable_source(n, rng)
        P = simulate_inflated_test([src] * net.copies, test, random_responses(test, rng))
        chsh, _ = activated_chsh_values(P)
        report.add_bulk(chsh)
        realized = chsh[~np.isnan(chsh)]
        maxima.append({"sample": i, "max_chsh": float(realized.max()) if realized.size else None,
                       "realized": int(realized.size)})
    report.summary = maxima
    report.passed = report.max_chsh is None or report.max_chsh <= CHAIN_THRESHOLD + tol
    return report
