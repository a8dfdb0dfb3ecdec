import math

import pytest

import oracles
from qmetro.catalog import SignalClass
from qmetro.loss import (
    Budget, entangled_link_loss, one_way_loss, required_links, violations, worst_case_analysis,
)
from qmetro.topology import User, build_reference_network, enumerate_route

CLASSES = [("conv", SignalClass.CONVENTIONAL), ("quant", SignalClass.QUANTUM_ONEWAY)]


@pytest.fixture(scope="module")
def ring():
    return build_reference_network("ring", 3)


@pytest.fixture(scope="module")
def mesh():
    return build_reference_network("mesh", 4)


def test_ring_table_matches_oracle(ring):
    table = worst_case_analysis(ring)
    for x in range(4):
        for key, cls in CLASSES:
            assert table.value(x, cls) == pytest.approx(float(oracles.ring_one_way(key, x)), abs=0.01)
        arm = oracles.ring_entangled_arm(x)
        assert table.value(x, SignalClass.ENTANGLED) == (None if arm is None else pytest.approx(float(arm), abs=0.01))


def test_mesh_table_matches_oracle(mesh):
    table = worst_case_analysis(mesh)
    for x in range(4):
        for key, cls in CLASSES:
            assert table.value(x, cls) == pytest.approx(float(oracles.mesh_one_way(key, x)), abs=0.01)
        assert table.value(x, SignalClass.ENTANGLED) == pytest.approx(float(oracles.mesh_entangled_arm(x)), abs=0.01)


def test_ring_one_way_examples(ring):
    r = enumerate_route(ring, User(1, 0), User(2, 0), signal_class=SignalClass.QUANTUM_ONEWAY)
    assert one_way_loss(ring, r).total_db == 18.5
    r0 = enumerate_route(ring, User(1, 0), User(1, 1), signal_class=SignalClass.CONVENTIONAL)
    assert one_way_loss(ring, r0).total_db == 2.64


def test_ring_worst_entangled_design_case(ring):
    b = worst_case_analysis(ring).boundaries[SignalClass.ENTANGLED]
    assert b.worst_feasible_db == pytest.approx(
        float(oracles.ring_entangled_arm(1) + oracles.ring_entangled_arm(2)))
    assert b.worst_feasible_db == 27.6 and sorted(b.worst_feasible_rows) == [1, 2]


def test_mesh_entangled_link(mesh):
    rep = entangled_link_loss(mesh, "src1", User(2, 0), User(3, 0), paths=([1, 2], [1, 2, 3]))
    assert rep.arms_db == (12.2, 17.0) and rep.total_db == 29.2 and rep.feasible


def test_entanglement_only_arms():
    net = build_reference_network("ring", 8, "cwdm_oadm_simple")
    rep = entangled_link_loss(net, "src0", User(7, 0), User(8, 0))
    assert rep.arms_db == (float(oracles.ent_only_arm(7)), float(oracles.ent_only_arm(8)))
    assert rep.total_db == 29.3


def test_zero_budget_fails_every_lossy_cell(ring):
    table = worst_case_analysis(ring, Budget(0, 0, 0))
    for rep in table.cells.values():
        if rep is not None:
            assert not rep.feasible


def test_infinite_budget_accepts_everything(ring):
    assert not violations(required_links(ring, Budget(math.inf, math.inf, math.inf)))


def test_report_itemises_segments(ring):
    r = enumerate_route(ring, User(1, 0), User(3, 0), signal_class=SignalClass.QUANTUM_ONEWAY)
    rep = one_way_loss(ring, r)
    assert sum(c for _, c in rep.segments) == rep.total_cdb
    assert "exceeds" not in rep.describe()
