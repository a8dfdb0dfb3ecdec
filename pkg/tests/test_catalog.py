import pytest

from qmetro.catalog import (
    DEFAULT_CATALOG, Action, CatalogError, ComponentChain, NodeKind, SignalClass, chain_loss,
    derive_pxc_cross_loss, node_loss, pxc_port_chain,
)
from qmetro.wdm_grid import Band

C, O = Band.C_QUANTUM, Band.O_CONVENTIONAL


def test_chain_hand_sum():
    chain = ComponentChain.of(("fiber", 1), "switch", "awg32")
    assert chain_loss(chain, C) == pytest.approx(4.2)


def test_empty_chain_is_lossless():
    assert chain_loss(ComponentChain(), C) == 0


def test_fiber_in_conventional_band():
    assert chain_loss(ComponentChain.of(("fiber", 1)), O) == pytest.approx(0.32)


def test_chain_concatenation_adds():
    a = ComponentChain.of(("fiber", 3.5), "awg32")
    b = ComponentChain.of("switch", ("fiber", 1))
    assert chain_loss(a + b, C) == pytest.approx(chain_loss(a, C) + chain_loss(b, C))


@pytest.mark.parametrize("kind, action, cls, expected", [
    ("passive_oadm", "pass", "quantum_oneway", 4.8),
    ("passive_oadm", "add", "entangled", 3.6),
    ("active_pxc", "cross", "conventional", 4.0),
    ("cwdm_oadm_simple", "drop", "entangled", 0.5),
])
def test_node_losses(kind, action, cls, expected):
    assert node_loss(kind, action, cls) == expected


def test_undefined_action_raises():
    with pytest.raises(CatalogError):
        node_loss("active_pxc", "add", "conventional")
    with pytest.raises(CatalogError):
        node_loss("cwdm_oadm_simple", "add", "entangled")


def test_pxc_derivation():
    assert derive_pxc_cross_loss(4) == 4.0
    assert derive_pxc_cross_loss(4, injection=True) == 2.5
    assert derive_pxc_cross_loss(4, {4: 0.0}, wdm_mux_db=0, switch_db=0) == 0
    with pytest.raises(CatalogError):
        derive_pxc_cross_loss(8)


def test_pxc_port_chain_matches_table_value():
    chain = pxc_port_chain(0, 2, 4)
    assert chain_loss(chain, C) == node_loss("active_pxc", "cross", "quantum_oneway")


def test_out_of_range_component_is_named():
    bad = DEFAULT_CATALOG.with_overrides()
    dwdm = bad["dwdm_oadm_1ch"]
    with pytest.raises(CatalogError, match="dwdm_oadm_1ch"):
        chain_loss(ComponentChain(((dwdm, 0.0),)), O)


def test_overrides_do_not_touch_defaults():
    cat = DEFAULT_CATALOG.with_overrides({"awg32": 3.5}, {"passive_oadm": {("add", "entangled"): 3.4}})
    assert cat["awg32"].loss(C) == 3.5
    assert DEFAULT_CATALOG["awg32"].loss(C) == 3.0
    assert cat.node_loss(NodeKind.PASSIVE_OADM, Action.ADD, SignalClass.ENTANGLED) == 3.4
    with pytest.raises(CatalogError):
        DEFAULT_CATALOG.with_overrides({"awg32": -1})
    with pytest.raises(CatalogError):
        DEFAULT_CATALOG.with_overrides(None, {"active_pxc": {("drop", "entangled"): 1}})
    with pytest.raises(CatalogError):
        DEFAULT_CATALOG["no_such_part"]
