"""Insertion-loss catalog and backbone-node action losses.

All losses are held as integer hundredths of a dB ("cdB") so that table
values compare exactly.  Public helpers return floats in dB.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum
from types import MappingProxyType

from .wdm_grid import Band


class CatalogError(ValueError):
    pass


def to_cdb(db: float) -> int:
    return int(round(db * 100))


def to_db(cdb: int) -> float:
    return cdb / 100


class ComponentKind(Enum):
    FIBER = "fiber"
    SPLITTER = "splitter"
    CWDM_OADM_1CH = "cwdm_oadm_1ch"
    DWDM_OADM_1CH = "dwdm_oadm_1ch"
    CWDM_MUX4 = "cwdm_mux4"
    WDM_MUX_1310_1550 = "wdm_mux_1310_1550"
    BANDPASS_FILTER = "bandpass_filter"
    CIRCULATOR = "circulator"
    AWG32 = "awg32"
    SWITCH = "switch"


class NodeKind(Enum):
    PASSIVE_OADM = "passive_oadm"
    ACTIVE_PXC = "active_pxc"
    CWDM_OADM_SIMPLE = "cwdm_oadm_simple"


class Action(Enum):
    ADD = "add"
    PASS = "pass"
    CROSS = "cross"
    DROP = "drop"


class SignalClass(Enum):
    CONVENTIONAL = "conventional"
    QUANTUM_ONEWAY = "quantum_oneway"
    ENTANGLED = "entangled"

    @property
    def band(self) -> Band:
        return Band.O_CONVENTIONAL if self is SignalClass.CONVENTIONAL else Band.C_QUANTUM


@dataclass(frozen=True)
class ComponentSpec:
    name: str
    kind: ComponentKind
    loss_cdb: MappingProxyType  # Band -> cdB (per km for fiber)
    per_km: bool = False
    wavelength_ranges: tuple[tuple[float, float], ...] | None = None
    loss_range_cdb: tuple[int, int] | None = None  # for "0.4-0.6" style rows
    # cyclic AWGs are used in any free spectral range, so their nominal range is not enforced
    cyclic: bool = False

    def loss(self, band: Band) -> float:
        return to_db(self.loss_cdb[band])

    @property
    def loss_range(self) -> tuple[float, float] | None:
        if self.loss_range_cdb is None:
            return None
        return to_db(self.loss_range_cdb[0]), to_db(self.loss_range_cdb[1])

    def covers(self, band: Band) -> bool:
        if self.cyclic or self.wavelength_ranges is None:
            return True
        lo, hi = band.operating_span
        return any(a <= lo and hi <= b for a, b in self.wavelength_ranges)

    def with_loss(self, db: float, band: Band | None = None) -> "ComponentSpec":
        table = dict(self.loss_cdb)
        for b in ([band] if band else list(Band)):
            table[b] = to_cdb(db)
        if any(v < 0 for v in table.values()):
            raise CatalogError(f"{self.name}: insertion loss must be non-negative")
        return replace(self, loss_cdb=MappingProxyType(table))


def _spec(name, kind, db, ranges=None, loss_range=None, cyclic=False):
    cdb = to_cdb(db)
    return ComponentSpec(
        name, kind, MappingProxyType({b: cdb for b in Band}),
        wavelength_ranges=ranges,
        loss_range_cdb=None if loss_range is None else (to_cdb(loss_range[0]), to_cdb(loss_range[1])),
        cyclic=cyclic,
    )


# Range-valued rows default to the 0.5 dB midpoint.
TABLE_1 = (
    ComponentSpec(
        "fiber", ComponentKind.FIBER,
        MappingProxyType({Band.C_QUANTUM: 20, Band.O_CONVENTIONAL: 32}),
        per_km=True,
    ),
    _spec("splitter_1x2", ComponentKind.SPLITTER, 3.6, ((1260, 1610),)),
    _spec("splitter_1x32", ComponentKind.SPLITTER, 16.5, ((1260, 1610),)),
    _spec("cwdm_oadm_1ch", ComponentKind.CWDM_OADM_1CH, 0.5, ((1270, 1610),), (0.4, 0.6)),
    _spec("dwdm_oadm_1ch", ComponentKind.DWDM_OADM_1CH, 0.5, ((1525, 1610),), (0.4, 0.6)),
    _spec("cwdm_mux4", ComponentKind.CWDM_MUX4, 1.0, ((1270, 1610),)),
    _spec("wdm_mux_1310_1550", ComponentKind.WDM_MUX_1310_1550, 0.5, ((1260, 1360), (1500, 1600))),
    _spec("bandpass_filter", ComponentKind.BANDPASS_FILTER, 0.5, None, (0.4, 0.6)),
    _spec("circulator", ComponentKind.CIRCULATOR, 0.8),
    _spec("awg32", ComponentKind.AWG32, 3.0, ((1533, 1558),), cyclic=True),
    _spec("switch", ComponentKind.SWITCH, 1.0, ((1270, 1675),)),
)

_C, _Q, _E = SignalClass.CONVENTIONAL, SignalClass.QUANTUM_ONEWAY, SignalClass.ENTANGLED


def _row(action, conv, quant, ent):
    return {(action, _C): to_cdb(conv), (action, _Q): to_cdb(quant), (action, _E): to_cdb(ent)}


# Entangled column = loss seen by a pair photon injected at this node.
DEFAULT_NODE_LOSSES = {
    NodeKind.PASSIVE_OADM: {
        **_row(Action.ADD, 6.2, 6.2, 3.6),
        **_row(Action.PASS, 4.8, 4.8, 4.8),
        **_row(Action.DROP, 2.3, 1.7, 1.7),
    },
    NodeKind.ACTIVE_PXC: _row(Action.CROSS, 4.0, 4.0, 2.5),
    NodeKind.CWDM_OADM_SIMPLE: {
        **_row(Action.PASS, 0.5, 0.5, 0.5),
        **_row(Action.DROP, 0.5, 0.5, 0.5),
    },
}

# add/drop unbalanced-splitter penalty on the access add path (engineering figure, not 10*log10(0.9))
SPLITTER_90_10_PENALTY_DB = 0.8


@dataclass(frozen=True)
class Catalog:
    components: MappingProxyType = field(
        default_factory=lambda: MappingProxyType({c.name: c for c in TABLE_1}))
    node_losses: MappingProxyType = field(
        default_factory=lambda: MappingProxyType(
            {k: MappingProxyType(dict(v)) for k, v in DEFAULT_NODE_LOSSES.items()}))

    def __getitem__(self, name: str) -> ComponentSpec:
        try:
            return self.components[name]
        except KeyError:
            raise CatalogError(f"unknown component {name!r}") from None

    def node_loss_cdb(self, node_kind: NodeKind, action: Action, signal_class: SignalClass) -> int:
        table = self.node_losses.get(node_kind, {})
        try:
            return table[(action, signal_class)]
        except KeyError:
            raise CatalogError(
                f"{action.value!r} is not defined for {signal_class.value} signals on "
                f"{node_kind.value}") from None

    def node_loss(self, node_kind, action, signal_class) -> float:
        return to_db(self.node_loss_cdb(node_kind, action, signal_class))

    def with_overrides(self, components=None, node_losses=None) -> "Catalog":
        comps = dict(self.components)
        for name, db in (components or {}).items():
            comps[name] = self[name].with_loss(db)
        nodes = {k: dict(v) for k, v in self.node_losses.items()}
        for kind, entries in (node_losses or {}).items():
            kind = NodeKind(kind)
            for (action, cls), db in entries.items():
                key = (Action(action), SignalClass(cls))
                if key not in nodes[kind]:
                    raise CatalogError(f"{action}/{cls} is not an action of {kind.value}")
                if db < 0:
                    raise CatalogError("node losses must be non-negative")
                nodes[kind][key] = to_cdb(db)
        return Catalog(MappingProxyType(comps),
                       MappingProxyType({k: MappingProxyType(v) for k, v in nodes.items()}))


DEFAULT_CATALOG = Catalog()


def node_loss(node_kind, action, signal_class, catalog: Catalog = DEFAULT_CATALOG) -> float:
    return catalog.node_loss(NodeKind(node_kind), Action(action), SignalClass(signal_class))


@dataclass(frozen=True)
class ComponentChain:
    items: tuple[tuple[ComponentSpec, float], ...] = ()

    @classmethod
    def of(cls, *items, catalog: Catalog = DEFAULT_CATALOG) -> "ComponentChain":
        """Build from names, or ``(name, km)`` tuples for fiber."""
        out = []
        for it in items:
            name, km = (it, 0.0) if isinstance(it, str) else it
            out.append((catalog[name], float(km)))
        return cls(tuple(out))

    def __add__(self, other: "ComponentChain") -> "ComponentChain":
        return ComponentChain(self.items + other.items)

    def __len__(self):
        return len(self.items)


def item_loss_cdb(spec: ComponentSpec, length_km: float, band: Band) -> int:
    if not spec.covers(band):
        raise CatalogError(f"{spec.name} does not operate in the {band.key} band")
    if spec.per_km:
        return int(round(spec.loss_cdb[band] * length_km))
    return spec.loss_cdb[band]


def chain_loss_cdb(chain: ComponentChain, band: Band) -> int:
    return sum(item_loss_cdb(spec, km, band) for spec, km in chain.items)


def chain_loss(chain: ComponentChain, band: Band) -> float:
    return to_db(chain_loss_cdb(chain, band))


def derive_pxc_cross_loss(n_cwdm_channels: int = 4, cwdm_mux_losses: dict[int, float] | None = None,
                          wdm_mux_db: float = 0.5, switch_db: float = 1.0,
                          injection: bool = False) -> float:
    """Loss through one PXC, derived from its internal chain.

    A crossing signal sees WDM demux, CWDM demux, switch, CWDM mux, WDM mux.
    A pair photon injected at the switch sees only the last three.  Only the
    4-channel CWDM mux is catalogued; other channel counts need an entry in
    ``cwdm_mux_losses``.
    """
    if not 1 <= n_cwdm_channels <= 18:
        raise CatalogError("a PXC band carries between 1 and 18 CWDM channels")
    muxes = {4: 1.0} if cwdm_mux_losses is None else cwdm_mux_losses
    if n_cwdm_channels not in muxes:
        raise CatalogError(f"no CWDM mux loss configured for {n_cwdm_channels} channels")
    mux = to_cdb(muxes[n_cwdm_channels])
    tail = to_cdb(switch_db) + mux + to_cdb(wdm_mux_db)
    if injection:
        return to_db(tail)
    return to_db(to_cdb(wdm_mux_db) + mux + tail)


def pxc_port_chain(in_port: int, out_port: int, degree: int, n_cwdm_channels: int = 4,
                   catalog: Catalog = DEFAULT_CATALOG) -> ComponentChain:
    """Components between two ports of a PXC of the given degree.

    Every port has its own WDM and CWDM (de)multiplexers feeding a shared
    switch, so the chain does not depend on ``degree`` or the port numbers.
    """
    if degree < 1 or not (0 <= in_port < degree and 0 <= out_port < degree):
        raise CatalogError("port outside node degree")
    if n_cwdm_channels != 4:
        raise CatalogError("only the 4-channel CWDM mux is catalogued")
    return ComponentChain.of("wdm_mux_1310_1550", "cwdm_mux4", "switch", "cwdm_mux4",
                             "wdm_mux_1310_1550", catalog=catalog)
