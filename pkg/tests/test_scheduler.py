from collections import defaultdict

import pytest

import oracles
from qmetro.scheduler import (
    Demand, DemandKind, DemandSet, Lightpath, NodeConfiguration, Realization, ScheduleError,
    assign_configuration, mesh_reference_demands, rotate_channel_assignment, rotation_problems, schedule,
    validate_configuration,
)
from qmetro.topology import build_reference_network
from qmetro.wdm_grid import Band, CwdmChannel

Q = ["C1530", "C1550"]
CONV = ["C1290", "C1310"]
E, D = DemandKind.ENTANGLED, DemandKind.DIRECT


@pytest.fixture(scope="module")
def mesh():
    return build_reference_network("mesh", 4)


@pytest.fixture(scope="module")
def reference_schedule(mesh):
    return schedule(mesh, mesh_reference_demands(), Q, CONV)


def channel_clashes(conf):
    """Independent check: (link or access port, band, channel) used by more than one demand."""
    users = defaultdict(set)
    for d, r in conf.realizations.items():
        for lp in r.lightpaths:
            key = (lp.band, lp.channel)
            users[("in", lp.start_port, *key)].add(d)
            users[("out", lp.end_port, *key)].add(d)
            for u, v in zip(lp.nodes, lp.nodes[1:]):
                users[("link", u, v, *key)].add(d)
    return {k: v for k, v in users.items() if len(v) > 1}


def test_demand_set_sizes():
    ds = mesh_reference_demands(include_self_pairs=True)
    assert len(ds.direct) == 6 and len(ds.entangled) == 10 and len(ds) == 16
    inter = mesh_reference_demands()
    assert len(inter) == 12
    with pytest.raises(ScheduleError):
        DemandSet(frozenset({(2, 2)}))


def test_reference_schedule_has_three_balanced_configurations(reference_schedule):
    s = reference_schedule
    assert len(s) == 3 and s.lower_bound == 3 and s.minimal
    for group in s.served:
        kinds = [d.kind for d in group]
        assert kinds.count(E) == 2 and kinds.count(D) == 2
    assert set(s.coverage) == set(mesh_reference_demands().demands())


def test_reference_schedule_reproduces_listed_configurations(reference_schedule):
    got = {frozenset(d.ident for d in g) for g in reference_schedule.served}
    listed = {
        frozenset({"E(A1,A2)", "E(A2,A3)", "D(A1,A4)", "D(A3,A4)"}),
        frozenset({"E(A1,A3)", "E(A1,A4)", "D(A2,A4)", "D(A2,A3)"}),
        frozenset({"E(A2,A4)", "E(A3,A4)", "D(A1,A2)", "D(A1,A3)"}),
    }
    assert got == listed


def test_every_emitted_configuration_validates(mesh, reference_schedule):
    for conf in reference_schedule.configurations:
        assert validate_configuration(mesh, conf).valid
        assert not channel_clashes(conf)


def test_no_two_configuration_schedule_exists():
    demands = [(d.kind.value, d.a, d.b) for d in mesh_reference_demands().demands()]
    assert oracles.two_config_partitions_feasible(demands, 4, 2) == []


def test_listed_configuration_two_is_valid(mesh):
    group = [Demand(E, 1, 3), Demand(E, 1, 4), Demand(D, 2, 4), Demand(D, 2, 3)]
    conf = assign_configuration(mesh, group, Q, CONV)
    v = validate_configuration(mesh, conf)
    assert v.valid and set(conf.realizations) == set(group)


def test_single_demand_needs_one_configuration(mesh):
    s = schedule(mesh, DemandSet(frozenset({(1, 3)})), Q, CONV)
    assert len(s) == 1


def test_self_pairs_stay_local(mesh):
    s = schedule(mesh, mesh_reference_demands(include_self_pairs=True), Q, CONV)
    assert set(s.coverage) == set(mesh_reference_demands(True).demands())
    for conf in s.configurations:
        assert validate_configuration(mesh, conf).valid
        for d, r in conf.realizations.items():
            if d.is_self_pair:
                (lp,) = r.lightpaths
                assert lp.nodes == (d.a,)


def test_duplicate_channel_on_link_is_named(mesh):
    q = CwdmChannel(1530)
    a = Realization(Demand(D, 1, 2), (Lightpath(Band.C_QUANTUM, q, "A1", (1, 2), "A2"),))
    b = Realization(Demand(E, 2, 4), (Lightpath(Band.C_QUANTUM, q, "src1", (1, 2), "A2"),
                                       Lightpath(Band.C_QUANTUM, CwdmChannel(1550), "src1", (1, 4), "A4")), "src1")
    conf = NodeConfiguration.from_realizations([a, b], [q, CwdmChannel(1550)])
    v = validate_configuration(mesh, conf)
    assert not v.valid
    assert any("N1->N2" in p and "C1530" in p for p in v.problems)


def test_two_inputs_to_one_output_break_injectivity(mesh):
    q = CwdmChannel(1530)
    a = Realization(Demand(D, 1, 2), (Lightpath(Band.C_QUANTUM, q, "A1", (1, 2), "A2"),))
    b = Realization(Demand(E, 2, 2), (Lightpath(Band.C_QUANTUM, q, "src2", (2,), "A2"),), "src2")
    v = validate_configuration(mesh, NodeConfiguration.from_realizations([a, b], [q]))
    assert any(p.startswith("N2:") and "N1" in p and "src2" in p and "switched to A2" in p for p in v.problems)


def test_detour_beyond_budget_is_reported_with_loss(mesh):
    q = CwdmChannel(1530)
    detour = (1, 2, 3, 4, 1, 3)
    r = Realization(Demand(D, 1, 3), (Lightpath(Band.C_QUANTUM, q, "A1", detour, "A3"),))
    v = validate_configuration(mesh, NodeConfiguration.from_realizations([r], [q]))
    assert not v.valid
    (rep,) = v.reports
    assert rep.total_db == pytest.approx(float(oracles.mesh_one_way("quant", 5)))
    assert rep.total_db == 37.8 and not rep.feasible


def test_missing_route_is_reported(mesh):
    conf = NodeConfiguration(quantum_channels=(CwdmChannel(1530),))
    v = validate_configuration(mesh, conf, [Demand(D, 1, 2)])
    assert not v.valid and "no route" in v.problems[0]


def test_configuration_built_from_ports_only(mesh):
    q = CwdmChannel(1550)
    conf = NodeConfiguration(quantum_channels=(q,))
    conf.set_port(1, Band.C_QUANTUM, "A1", q, "N2")
    conf.set_port(2, Band.C_QUANTUM, "N1", q, "A2")
    conf.set_port(2, Band.C_QUANTUM, "A2", q, "N1")
    conf.set_port(1, Band.C_QUANTUM, "N2", q, "A1")
    assert validate_configuration(mesh, conf, [Demand(D, 1, 2)]).valid


def test_unservable_demand_names_minimum_loss(mesh):
    with pytest.raises(ScheduleError, match=r"D\(A1,A3\).*minimum achievable loss 18.6 dB"):
        schedule(mesh, DemandSet(frozenset({(1, 3)})), Q, CONV, budget=15)


def test_preconditions(mesh):
    ring = build_reference_network("ring", 3)
    with pytest.raises(ScheduleError):
        schedule(ring, mesh_reference_demands(), Q)
    with pytest.raises(ScheduleError):
        schedule(mesh, mesh_reference_demands(), [])
    with pytest.raises(ScheduleError):
        schedule(mesh, mesh_reference_demands(), ["C1290"])


def test_schedule_is_deterministic(mesh, reference_schedule):
    again = schedule(mesh, mesh_reference_demands(), Q, CONV)
    assert again.served == reference_schedule.served
    assert [c.port_rows() for c in again.configurations] == [c.port_rows() for c in reference_schedule.configurations]


def test_rotation_four_networks_two_channels():
    steps = rotate_channel_assignment(Q, 4, 2)
    assert len(steps) == 2
    for an in range(1, 5):
        assert {s[an] for s in steps} == set(Q)
    assert rotation_problems(steps, 2) == []


def test_rotation_one_step_when_channels_suffice():
    steps = rotate_channel_assignment(["C1510", "C1530", "C1550"], 3, 3)
    assert len(steps) == 1 and len(set(steps[0].values())) == 3


def test_rotation_reuses_channels_across_regions():
    steps = rotate_channel_assignment(Q, 4, 2, regions=[{1, 2}, {3, 4}])
    assert len(steps) == 1
    assert steps[0][1] == steps[0][3]
    assert rotation_problems(steps, 2, regions=[{1, 2}, {3, 4}]) == []
