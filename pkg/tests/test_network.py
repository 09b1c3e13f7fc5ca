import json

import pytest

from netbell.born import condition_on, validate_no_signalling
from netbell.measurements import MeasurementAssignment, bell_basis, computational_basis, x_basis
from netbell.network import (
    TRIPARTITE_TESTS,
    InflatedNetwork,
    TestSpec,
    chain_inflation,
    conditioning_tuples,
    global_state,
    observer_state,
    realize_quantum,
    tripartite_inflation,
)
from netbell.states import make_epr, make_ghz


def test_tripartite_inflation_layout():
    net = tripartite_inflation()
    assert net.n_shares == 6 and net.copies == 2
    assert [t.name for t in net.tests] == list(TRIPARTITE_TESTS)
    assert [net.label(s) for s in range(6)] == ["A^1", "B^1", "C^1", "A^2", "B^2", "C^2"]
    t = net.test("W_AB")
    assert t.activated == (2, 5)  # C and C^2
    assert t.conditioned == (0, 3)
    assert t.joint == ((1, 4),)
    assert t.observers == ((2,), (5,), (0,), (3,), (1, 4))
    assert t.settings_cardinality == (2, 2, 1, 1, 1)


def test_tripartite_json_export():
    d = json.loads(tripartite_inflation().to_json())
    assert d["sources"] == [[0, 1, 2], [3, 4, 5]]
    assert sorted(map(tuple, d["joint_groups"])) == [(0, 3), (1, 4), (2, 5)]
    assert len(d["tests"]) == 6


def test_dag_links_sources_to_observers():
    net = tripartite_inflation()
    g = net.dag(net.test("W_BC"))
    assert g["S^1"] == ["A^1", "B^1", "C^1"]
    assert "out:C^1C^2" in g["C^1"]


def test_chain_inflation_layout():
    net = chain_inflation(4)
    assert net.copies == 3 and net.n_shares == 12
    t = net.tests[0]
    assert t.activated == (0, 11)
    assert t.joint == ((1, 5), (6, 10))
    assert len(t.conditioned) == 6
    with pytest.raises(ValueError):
        chain_inflation(2)


def test_network_validation():
    with pytest.raises(ValueError):
        TestSpec("bad", (0, 1), (1,), ())
    with pytest.raises(ValueError):
        InflatedNetwork(("A", "B"), 2, (TestSpec("t", (0, 2), (1,), ()),))
    with pytest.raises(ValueError):  # joint pair inside one copy
        InflatedNetwork(("A", "B"), 2, (TestSpec("t", (2, 3), (), ((0, 1),)),))
    with pytest.raises(KeyError):
        tripartite_inflation().test("W_XY")


def test_global_state_party_check():
    with pytest.raises(ValueError):
        global_state(tripartite_inflation(), make_epr())


def test_observer_state_groups_joint_pairs():
    net = tripartite_inflation()
    psi = global_state(net, make_ghz(3))
    st = observer_state(net, psi, net.test("W_AB"))
    assert st.shape.dims == (2, 2, 2, 2, 4)


def test_realized_distribution_is_no_signalling():
    net = tripartite_inflation()
    t = net.test("W_BC")
    z = computational_basis(2)
    m = MeasurementAssignment([(z, x_basis()), (z, x_basis()), (x_basis(),), (x_basis(),), (bell_basis(),)])
    P = realize_quantum(net, make_ghz(3, 0.5), m, t)
    assert P.parties == 5
    assert validate_no_signalling(P) < 1e-10
    assert condition_on(P, {2: (0, 0), 3: (0, 1), 4: (0, 2)}).defined


def test_realize_quantum_dimension_check():
    net = tripartite_inflation()
    z = computational_basis(2)
    with pytest.raises(ValueError):
        realize_quantum(net, make_ghz(3), MeasurementAssignment([(z,)] * 5))


def test_conditioning_tuples_enumeration():
    tuples = list(conditioning_tuples([2, 2, 4]))
    assert len(tuples) == 16
    assert tuples[0] == (0, 0, 0) and tuples[-1] == (1, 1, 3)
