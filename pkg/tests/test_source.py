import itertools

import pytest

from oracles import required_width_nm
from qmetro.source import (
    ConnectionScheme, EntangledSourceSpec, MultiPairWarning, SourceConnection, SourceError,
    pair_rate_per_channel, plan_sources_for_pairs, required_width, serves,
)
from qmetro.wdm_grid import CwdmChannel, DwdmChannel, dwdm_channels_in

C = CwdmChannel


def test_coverage_window():
    s = EntangledSourceSpec.centered_at("s", 1550)
    lo, hi = s.coverage()
    assert hi - lo == pytest.approx(70)
    # 1550 nm itself is off the half-step grid; the snapped centre is within 25 GHz (0.2 nm)
    assert lo == pytest.approx(1515, abs=0.2) and hi == pytest.approx(1585, abs=0.2)


def test_source_at_1520_covers_c1510_and_c1530():
    s = EntangledSourceSpec.centered_at("s", 1520)
    assert s.covers(C(1510)) and s.covers(C(1530))
    assert serves(s, C(1510), C(1530))


def test_160nm_spans_the_eight_channel_pool():
    pool = [C(w) for w in range(1470, 1611, 20)]
    need = required_width(pool[0], pool[-1], 1540)
    assert need == pytest.approx(153, abs=0.01)
    assert need <= 160


@pytest.mark.parametrize("power, spacing, expected", [(1, 100, 4.5e7), (0, 100, 0.0), (0.5, 50, 1.125e7)])
def test_pair_rate(power, spacing, expected):
    s = EntangledSourceSpec.centered_at("s", 1550, spacing, pump_power=power)
    ch = DwdmChannel(0, spacing)
    assert pair_rate_per_channel(s, ch) == pytest.approx(expected)


def test_high_pump_warns():
    with pytest.warns(MultiPairWarning):
        EntangledSourceSpec.centered_at("s", 1550, pump_power=2)


def test_connected_set_must_be_closed():
    with pytest.raises(SourceError):
        EntangledSourceSpec("s", 0, connected_channels=frozenset({DwdmChannel(3)}))
    ok = EntangledSourceSpec("s", 0, connected_channels=frozenset({DwdmChannel(3), DwdmChannel(-3)}))
    assert ok.partner(DwdmChannel(3)) == DwdmChannel(-3)


def test_three_network_plan():
    chans = [C(1510), C(1530), C(1550)]
    plan = plan_sources_for_pairs(chans)
    assert [s.nominal_center_nm for s in plan.sources] == [1510, 1520, 1530, 1530, 1540, 1550]
    assert plan.feasible
    for (a, b), names in plan.served_by.items():
        assert names, (a, b)


def test_single_network_plan():
    plan = plan_sources_for_pairs([C(1550)])
    assert len(plan.sources) == 1 and plan.sources[0].nominal_center_nm == 1550


def test_overlap_plan_is_smaller_and_complete():
    chans = [C(1510), C(1530), C(1550)]
    plan = plan_sources_for_pairs(chans, overlap=True)
    assert len(plan.sources) < 6
    for a, b in itertools.combinations_with_replacement(chans, 2):
        assert any(serves(s, a, b) for s in plan.sources), (a, b)


def test_width_limit_reports_the_pair():
    pool = [C(w) for w in (1470, 1490, 1510, 1530)]
    plan = plan_sources_for_pairs(pool, 70)
    bad = {tuple(c.nominal_wavelength for c in i.pair) for i in plan.infeasible}
    assert bad == {(1470, 1530)}
    assert plan.infeasible[0].required_width == pytest.approx(required_width_nm(1470, 1530), abs=0.2)


def test_duplicate_channels_rejected():
    with pytest.raises(SourceError):
        plan_sources_for_pairs([C(1550), C(1550)])


def test_connection_scheme_checks():
    block = dwdm_channels_in(C(1550))
    fixed = SourceConnection(ConnectionScheme.FIXED_SPLIT, {"a": {block[0]}, "b": {block[0], block[1]}})
    assert fixed.violations()
    switched = SourceConnection(ConnectionScheme.SWITCHED_CWDM, {"a": {block[0]}, "b": {block[1]}})
    assert switched.violations(cwdm_of=lambda ch: "C1550")
    with pytest.raises(SourceError):
        switched.violations()
