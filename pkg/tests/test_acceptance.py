"""Acceptance suite: one test per numbered criterion.

Run with ``pytest tests/test_acceptance.py -v``; a PASS/FAIL line per
criterion is printed in the terminal summary.
"""
import time
from collections import Counter

import pytest

import oracles
import test_properties
from qmetro.capacity import feasibility_of_extension, max_access_networks
from qmetro.catalog import DEFAULT_CATALOG, Action, NodeKind, SignalClass, node_loss
from qmetro.loss import worst_case_analysis
from qmetro.scheduler import mesh_reference_demands, schedule, validate_configuration
from qmetro.source import plan_sources_for_pairs
from qmetro.topology import build_reference_network
from qmetro.wdm_grid import Band, CwdmChannel

C, O = Band.C_QUANTUM, Band.O_CONVENTIONAL
CLASSES = (SignalClass.CONVENTIONAL, SignalClass.QUANTUM_ONEWAY, SignalClass.ENTANGLED)
ORACLE_KEYS = {SignalClass.CONVENTIONAL: "conv", SignalClass.QUANTUM_ONEWAY: "quant"}


def within(seconds):
    class _Timer:
        def __enter__(self):
            self.start = time.perf_counter()
            return self

        def __exit__(self, *exc):
            self.elapsed = time.perf_counter() - self.start
            if exc[0] is None:
                assert self.elapsed < seconds, f"took {self.elapsed:.2f} s, limit {seconds} s"
    return _Timer()


# name -> (per-band loss in dB, wavelength ranges, (low, high) range or None)
INSERTION_LOSSES = {
    "fiber": ({C: 0.2, O: 0.32}, None, None),
    "splitter_1x2": (3.6, ((1260, 1610),), None),
    "splitter_1x32": (16.5, ((1260, 1610),), None),
    "cwdm_oadm_1ch": (0.5, ((1270, 1610),), (0.4, 0.6)),
    "dwdm_oadm_1ch": (0.5, ((1525, 1610),), (0.4, 0.6)),
    "cwdm_mux4": (1.0, ((1270, 1610),), None),
    "wdm_mux_1310_1550": (0.5, ((1260, 1360), (1500, 1600)), None),
    "bandpass_filter": (0.5, None, (0.4, 0.6)),
    "circulator": (0.8, None, None),
    "awg32": (3.0, ((1533, 1558),), None),
    "switch": (1.0, ((1270, 1675),), None),
}


@pytest.mark.criterion(1, "component catalog defaults match every insertion-loss row")
def test_criterion_01_insertion_losses():
    with within(1):
        assert set(DEFAULT_CATALOG.components) == set(INSERTION_LOSSES)
        for name, (loss, ranges, span) in INSERTION_LOSSES.items():
            spec = DEFAULT_CATALOG[name]
            per_band = loss if isinstance(loss, dict) else {C: loss, O: loss}
            for band, db in per_band.items():
                assert spec.loss(band) == db, name
            assert spec.wavelength_ranges == ranges, name
            assert spec.loss_range == span, name
        assert DEFAULT_CATALOG["fiber"].per_km


NODE_LOSSES = [
    (NodeKind.PASSIVE_OADM, Action.ADD, (6.2, 6.2, 3.6)),
    (NodeKind.PASSIVE_OADM, Action.PASS, (4.8, 4.8, 4.8)),
    (NodeKind.PASSIVE_OADM, Action.DROP, (2.3, 1.7, 1.7)),
    (NodeKind.ACTIVE_PXC, Action.CROSS, (4.0, 4.0, 2.5)),
]


@pytest.mark.criterion(2, "passive OADM and PXC node losses")
def test_criterion_02_node_losses():
    with within(1):
        seen = 0
        for kind, action, values in NODE_LOSSES:
            for cls, expected in zip(CLASSES, values):
                assert round(node_loss(kind, action, cls), 1) == expected, (kind, action, cls)
                seen += 1
        assert seen == 12


def _check_table(table, expected, oracle_one_way, oracle_ent):
    for x, row in enumerate(expected):
        for cls, want in zip(CLASSES, row):
            got = table.value(x, cls)
            if want is None:
                assert got is None, (x, cls)
                continue
            assert got == pytest.approx(want, abs=0.01), (x, cls)
            ref = oracle_ent(x) if cls is SignalClass.ENTANGLED else oracle_one_way(ORACLE_KEYS[cls], x)
            assert float(ref) == pytest.approx(want, abs=0.01), (x, cls, "oracle")


@pytest.mark.criterion(3, "passive ring path-loss table, 12 cells")
def test_criterion_03_ring_table():
    expected = [(2.64, 2.4, None), (20.66, 18.5, 11), (26.74, 24.1, 16.6), (32.82, 29.7, 22.2)]
    with within(1):
        table = worst_case_analysis(build_reference_network("ring", 3))
        _check_table(table, expected, oracles.ring_one_way, oracles.ring_entangled_arm)


@pytest.mark.criterion(4, "mesh path-loss table, 12 cells")
def test_criterion_04_mesh_table():
    expected = [(2.64, 2.4, 7.4), (20.16, 18.6, 12.2), (25.44, 23.4, 17), (30.72, 28.2, 21.8)]
    with within(1):
        table = worst_case_analysis(build_reference_network("mesh", 4))
        _check_table(table, expected, oracles.mesh_one_way, oracles.mesh_entangled_arm)


@pytest.mark.criterion(5, "entanglement-only ring: N=8, arms 15.3 + 14, 128 users")
def test_criterion_05_entanglement_only_capacity():
    with within(1):
        rep = max_access_networks("cwdm_oadm_simple", 30, 160)
        assert rep.max_access_networks == 8 == oracles.ent_only_capacity(30)
        assert rep.users_per_an == 16 == oracles.dwdm_count(1550, 100)
        assert rep.total_users == 128
        worst = max(rep.witnesses, key=lambda r: r.total_cdb)
        assert sorted(worst.arms_db) == [pytest.approx(14.0, abs=0.01), pytest.approx(15.3, abs=0.01)]
        assert worst.total_db == pytest.approx(29.3, abs=0.01)
        assert float(oracles.ent_only_arm(7) + oracles.ent_only_arm(8)) == pytest.approx(29.3, abs=0.01)


@pytest.mark.criterion(6, "passive ring: N=3, 48 users, fourth network blocked at 33.2")
def test_criterion_06_passive_ring_capacity():
    with within(1):
        rep = max_access_networks("passive_oadm", 30, 70)
        assert (rep.max_access_networks, rep.total_users) == (3, 48)
        v = feasibility_of_extension(build_reference_network("ring", 3))
        assert not v.feasible
        worst = max(v.violations, key=lambda r: r.total_cdb)
        assert worst.signal_class is SignalClass.ENTANGLED
        assert sorted(worst.arms_db) == [pytest.approx(11.0, abs=0.01), pytest.approx(22.2, abs=0.01)]
        hand = oracles.ring_entangled_arm(1) + oracles.ring_entangled_arm(3)
        assert worst.total_db == pytest.approx(33.2, abs=0.01) == float(hand)


@pytest.mark.criterion(7, "mesh budget boundary: one-way 28.2, entangled 29.2")
def test_criterion_07_mesh_boundary():
    with within(1):
        table = worst_case_analysis(build_reference_network("mesh", 4))
        quant = table.boundaries[SignalClass.QUANTUM_ONEWAY]
        ent = table.boundaries[SignalClass.ENTANGLED]
        assert quant.worst_feasible_db == 28.2
        assert ent.worst_feasible_db == 29.2
        assert ent.worst_feasible_db == float(oracles.mesh_entangled_arm(1) + oracles.mesh_entangled_arm(2))
        assert quant.worst_feasible_db <= 30 and ent.worst_feasible_db <= 30


@pytest.mark.criterion(8, "six sources for three access networks")
def test_criterion_08_source_plan():
    a1, a2, a3 = (CwdmChannel.parse(s) for s in ("C1510", "C1530", "C1550"))
    listed = Counter({
        (1520, frozenset({a1, a2})): 1,
        (1510, frozenset({a1})): 1,
        (1530, frozenset({a1, a3})): 1,
        (1530, frozenset({a2})): 1,
        (1550, frozenset({a3})): 1,
        (1540, frozenset({a2, a3})): 1,
    })
    with within(1):
        plan = plan_sources_for_pairs([a1, a2, a3])
        assert plan.feasible and len(plan) == 6
        got = Counter((s.nominal_center_nm, frozenset(s.targets)) for s in plan.sources)
        assert got == listed
        assert all(plan.served_by[p] for p in plan.served_by)


@pytest.mark.criterion(9, "mesh schedule in three valid configurations, certified minimal")
def test_criterion_09_schedule():
    net = build_reference_network("mesh", 4)
    demands = mesh_reference_demands()
    listed = {
        frozenset({"E(A1,A2)", "E(A2,A3)", "D(A1,A4)", "D(A3,A4)"}),
        frozenset({"E(A1,A3)", "E(A1,A4)", "D(A2,A3)", "D(A2,A4)"}),
        frozenset({"E(A2,A4)", "E(A3,A4)", "D(A1,A2)", "D(A1,A3)"}),
    }
    with within(30):
        sched = schedule(net, demands, ["C1530", "C1550"], ["C1290", "C1310"])
        assert len(sched) <= 3
        assert set(sched.coverage) == set(demands.demands())
        assert sum(d.kind.value == "direct" for d in demands.demands()) == 6
        assert sum(d.kind.value == "entangled" for d in demands.demands()) == 6
        assert {frozenset(d.ident for d in g) for g in sched.served} == listed
        for conf in sched.configurations:
            assert validate_configuration(net, conf).valid
        # counting certificate: no split of the twelve demands into two configurations fits
        brute = [(d.kind.value, d.a, d.b) for d in demands.demands()]
        assert oracles.two_config_partitions_feasible(brute, 4, 2) == []
        assert len(sched) == 3 and sched.minimal


PROPERTY_SUITES = [
    test_properties.test_pairing_is_an_involution_conserving_frequency,
    test_properties.test_chain_loss_is_additive_and_monotone,
    test_properties.test_pxc_loss_does_not_depend_on_degree_or_ports,
    test_properties.test_plans_cover_every_pair,
    test_properties.test_schedules_cover_demands_without_channel_reuse,
]


@pytest.mark.criterion(10, "randomized property suites, at least 1000 cases each")
def test_criterion_10_property_suites():
    assert test_properties.CASES.max_examples >= 1000
    with within(60):
        for suite in PROPERTY_SUITES:
            suite()
