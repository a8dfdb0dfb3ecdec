"""Network graph, reference architectures and route enumeration."""
from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field
from enum import Enum
from typing import Any

import networkx as nx

from .catalog import DEFAULT_CATALOG, Action, Catalog, NodeKind, SignalClass
from .wdm_grid import Band, CwdmChannel, DwdmChannel, cwdm_parent, dwdm_channels_in

log = logging.getLogger(__name__)

AWG_PERIOD_OFFSET_NM = 220  # C-band quantum channel -> O-band conventional partner (C1510 <-> C1290)
PASSIVE_QUANTUM_START = 1510
ENT_ONLY_QUANTUM_START = 1470


class TopologyError(ValueError):
    pass


class RouteError(LookupError):
    pass


class TopologyKind(Enum):
    STAR = "star"
    OPEN_RING = "open_ring"
    RING = "ring"
    MESH = "mesh"


DEFAULT_NODE_KIND = {
    TopologyKind.STAR: None,
    TopologyKind.OPEN_RING: NodeKind.CWDM_OADM_SIMPLE,
    TopologyKind.RING: NodeKind.PASSIVE_OADM,
    TopologyKind.MESH: NodeKind.ACTIVE_PXC,
}


@dataclass(frozen=True)
class Distances:
    user_awg_km: float = 1.0
    awg_backbone_km: float = 3.5
    backbone_km: float = 4.0


@dataclass(frozen=True, order=True)
class User:
    an: int
    index: int = 0

    def __str__(self):
        return f"A{self.an}.u{self.index}"


@dataclass(frozen=True)
class AccessNetwork:
    id: int
    node: int | None
    n_users: int = 16
    return_loops: int = 1
    awg_channels: int = 32
    conventional: CwdmChannel | None = None
    quantum: CwdmChannel | None = None

    def __post_init__(self):
        if self.return_loops < 0:
            raise TopologyError(f"A{self.id}: return-path loop count must be >= 0")
        if self.n_users > self.awg_channels:
            raise TopologyError(f"A{self.id}: {self.n_users} users exceed {self.awg_channels} AWG ports")

    @property
    def switch_ports(self) -> int:
        # user side + uplink + both ends of every loop
        return self.n_users + 1 + 2 * self.return_loops

    @property
    def users(self) -> tuple[User, ...]:
        return tuple(User(self.id, k) for k in range(self.n_users))

    def __str__(self):
        return f"A{self.id}"


@dataclass(frozen=True)
class SourceSite:
    id: str
    node: int | None  # None: head of an open ring, or the hub of a star
    spec: Any = None

    def __str__(self):
        return self.id


@dataclass(frozen=True)
class NetworkModel:
    kind: TopologyKind
    node_kind: NodeKind | None
    nodes: tuple[int, ...]
    edges: tuple[tuple[int, int, float], ...]
    access: tuple[AccessNetwork, ...]
    sources: tuple[SourceSite, ...] = ()
    distances: Distances = field(default_factory=Distances)
    catalog: Catalog = DEFAULT_CATALOG
    head_span_km: float | None = None

    @property
    def is_ring(self) -> bool:
        return self.kind in (TopologyKind.RING, TopologyKind.OPEN_RING)

    @property
    def n_access(self) -> int:
        return len(self.access)

    def access_network(self, an_id: int) -> AccessNetwork:
        for an in self.access:
            if an.id == an_id:
                return an
        raise TopologyError(f"no access network A{an_id}")

    def access_at(self, node: int) -> list[AccessNetwork]:
        return [an for an in self.access if an.node == node]

    def source(self, site_id: str) -> SourceSite:
        for s in self.sources:
            if s.id == site_id:
                return s
        raise TopologyError(f"no source site {site_id!r}")

    def sources_at(self, node: int | None) -> list[SourceSite]:
        return [s for s in self.sources if s.node == node]

    @property
    def access_assignment(self) -> dict[int, tuple[CwdmChannel | None, CwdmChannel | None]]:
        return {an.id: (an.conventional, an.quantum) for an in self.access}

    def span_km(self, u: int, v: int) -> float:
        for a, b, km in self.edges:
            if (a, b) == (u, v) or (not self.is_ring and (b, a) == (u, v)):
                return km
        raise RouteError(f"no backbone span N{u}-N{v}")

    def graph(self) -> nx.Graph:
        """Backbone as an undirected graph (built once; treat as read-only)."""
        g = self.__dict__.get("_graph")
        if g is None:
            g = nx.Graph()
            g.add_nodes_from(self.nodes)
            for a, b, km in self.edges:
                g.add_edge(a, b, length_km=km)
            nx.freeze(g)
            object.__setattr__(self, "_graph", g)
        return g

    def ring_successor(self, node: int) -> int:
        for a, b, _ in self.edges:
            if a == node:
                return b
        raise RouteError(f"N{node} has no successor")

    def users(self) -> list[User]:
        return [u for an in self.access for u in an.users]


def validate_network(net: NetworkModel) -> list[str]:
    """Structural problems with a network, empty when it is well formed."""
    issues = []
    nodes = set(net.nodes)
    for an in net.access:
        if net.kind is TopologyKind.STAR:
            continue
        if an.node not in nodes:
            issues.append(f"A{an.id} attached to unknown backbone node {an.node}")
    for a, b, km in net.edges:
        if a not in nodes or b not in nodes:
            issues.append(f"span N{a}-N{b} references an unknown node")
        if km <= 0:
            issues.append(f"span N{a}-N{b} has non-positive length")
    d = net.distances
    if min(d.user_awg_km, d.awg_backbone_km, d.backbone_km) <= 0:
        issues.append("distances must be positive")
    if net.kind is TopologyKind.RING and net.nodes:
        succ = {}
        for a, b, _ in net.edges:
            if a in succ:
                issues.append(f"N{a} has two ring successors")
            succ[a] = b
        seen, cur = [], net.nodes[0]
        while cur in succ and cur not in seen:
            seen.append(cur)
            cur = succ[cur]
        if len(seen) != len(nodes) or cur != net.nodes[0] or len(succ) != len(nodes):
            issues.append("backbone spans do not form a single cycle")
    if net.kind is TopologyKind.MESH and net.nodes and not nx.is_connected(net.graph()):
        issues.append("mesh backbone is not connected")
    ids = [an.id for an in net.access]
    if len(set(ids)) != len(ids):
        issues.append("duplicate access network ids")
    return issues


def _default_channels(kind: TopologyKind, node_kind, i: int, passband: float):
    """(conventional, quantum) CWDM channels for the i-th (0-based) access network."""
    if kind is TopologyKind.MESH:
        return None, None
    if node_kind in (NodeKind.CWDM_OADM_SIMPLE, None):
        w = ENT_ONLY_QUANTUM_START + 20 * i if kind is not TopologyKind.STAR else 1550
        return None, (CwdmChannel(w, passband) if w <= 1610 else None)
    q = PASSIVE_QUANTUM_START + 20 * i
    if q > 1610:
        return None, None
    c = q - AWG_PERIOD_OFFSET_NM
    quantum = CwdmChannel(q, passband)
    conv = CwdmChannel(c, passband)
    return (conv if conv.band is Band.O_CONVENTIONAL else None), quantum


def default_users(grid_spacing: float = 100.0, passband: float = 13.0) -> int:
    """Users per access network: DWDM channels in one CWDM passband near 1550 nm."""
    return len(dwdm_channels_in(CwdmChannel(1550, passband), grid_spacing))


def default_mesh_edges(n: int) -> list[tuple[int, int]]:
    """Cycle through all nodes plus one chord from node 1 to the opposite node."""
    if n == 1:
        return []
    if n == 2:
        return [(1, 2)]
    edges = [(i, i % n + 1) for i in range(1, n + 1)]
    if n >= 4:
        edges.append((1, 1 + n // 2))
    return edges


def build_reference_network(kind, n_access: int, node_kind=None, *,
                            distances: Distances | None = None,
                            catalog: Catalog = DEFAULT_CATALOG,
                            edges=None, source_nodes=None,
                            n_users: int | None = None, return_loops: int = 1,
                            grid_spacing: float = 100.0, passband: float = 13.0) -> NetworkModel:
    """One backbone node per access network, default spans and sources.

    Rings propagate in increasing node order.  A passive ring carries a
    source site at every node; the entanglement-only ring (simple CWDM OADMs)
    and open rings carry one grouped source at the head, one backbone span
    before node 1.  Meshes carry a source at every node.
    """
    kind = TopologyKind(kind)
    if n_access < 1:
        raise TopologyError("at least one access network is required")
    node_kind = DEFAULT_NODE_KIND[kind] if node_kind is None else NodeKind(node_kind)
    d = distances or Distances()
    if kind is TopologyKind.STAR:
        if n_access != 1:
            raise TopologyError("a star network has exactly one access network")
        q = CwdmChannel(1550, passband)
        users = n_users if n_users is not None else default_users(grid_spacing, passband)
        an = AccessNetwork(1, None, users, return_loops, quantum=q)
        return NetworkModel(kind, None, (), (), (an,), (SourceSite("src0", None),), d, catalog)

    if kind is TopologyKind.MESH and n_access < 3:
        warnings.warn(f"a mesh of {n_access} nodes degenerates to a ring", stacklevel=2)

    nodes = tuple(range(1, n_access + 1))
    if kind is TopologyKind.RING:
        links = [(i, i % n_access + 1, d.backbone_km) for i in nodes]
    elif kind is TopologyKind.OPEN_RING:
        links = [(i, i + 1, d.backbone_km) for i in nodes[:-1]]
    else:
        pairs = edges if edges is not None else default_mesh_edges(n_access)
        links = []
        for e in pairs:
            a, b, *rest = e
            links.append((int(a), int(b), float(rest[0]) if rest else d.backbone_km))

    users = n_users if n_users is not None else default_users(grid_spacing, passband)
    access = []
    for i, node in enumerate(nodes):
        conv, quant = _default_channels(kind, node_kind, i, passband)
        access.append(AccessNetwork(i + 1, node, users, return_loops, conventional=conv, quantum=quant))

    head = None
    if kind is TopologyKind.OPEN_RING or node_kind is NodeKind.CWDM_OADM_SIMPLE:
        sources = (SourceSite("src0", None),)
        head = d.backbone_km
    else:
        at = nodes if source_nodes is None else tuple(source_nodes)
        sources = tuple(SourceSite(f"src{n}", n) for n in at)
    net = NetworkModel(kind, node_kind, nodes, tuple(links), tuple(access), sources, d, catalog, head)
    issues = validate_network(net)
    if issues:
        raise TopologyError("; ".join(issues))
    return net


# --- routes -----------------------------------------------------------------

@dataclass(frozen=True)
class Fiber:
    label: str
    length_km: float


@dataclass(frozen=True)
class Element:
    component: str
    label: str


@dataclass(frozen=True)
class NodeHop:
    node: int
    action: Action
    inject: bool = False

    @property
    def label(self) -> str:
        return f"N{self.node} {self.action.value}{' (source)' if self.inject else ''}"


@dataclass(frozen=True)
class Route:
    origin: User | SourceSite
    destination: User
    signal_class: SignalClass
    segments: tuple
    x_closest: int
    backbone_path: tuple[int, ...] = ()
    channel: DwdmChannel | CwdmChannel | None = None
    via_return_loop: bool = False

    @property
    def hops(self) -> list[NodeHop]:
        return [s for s in self.segments if isinstance(s, NodeHop)]


def _uplink(net: NetworkModel, user: User) -> list:
    d = net.distances
    a = f"A{user.an}"
    return [Fiber(f"{user}-{a} switch", d.user_awg_km), Element("switch", f"{a} switch"),
            Element("awg32", f"{a} AWG"), Fiber(f"{a} AWG-backbone", d.awg_backbone_km)]


def _downlink(net: NetworkModel, user: User) -> list:
    d = net.distances
    a = f"A{user.an}"
    return [Fiber(f"backbone-{a} AWG", d.awg_backbone_km), Element("awg32", f"{a} AWG"),
            Element("switch", f"{a} switch"), Fiber(f"{a} switch-{user}", d.user_awg_km)]


def _return_loop(net: NetworkModel, a: User, b: User) -> list:
    d = net.distances
    an = f"A{a.an}"
    return [Fiber(f"{a}-{an} switch", d.user_awg_km), Element("switch", f"{an} switch"),
            Element("switch", f"{an} switch (return loop)"), Fiber(f"{an} switch-{b}", d.user_awg_km)]


def _backbone(net: NetworkModel, path: list[int], inject: bool, entering: float | None = None) -> list:
    """Node hops and spans along ``path``; ``entering`` is a head span before the first node."""
    segs = []
    ring_like = net.node_kind in (NodeKind.PASSIVE_OADM, NodeKind.CWDM_OADM_SIMPLE)
    if entering is not None:
        segs.append(Fiber(f"source-N{path[0]}", entering))
    for i, node in enumerate(path):
        last = i == len(path) - 1
        if not ring_like:
            segs.append(NodeHop(node, Action.CROSS, inject and i == 0))
        elif i == 0 and entering is None:
            segs.append(NodeHop(node, Action.ADD, inject))
        elif last:
            segs.append(NodeHop(node, Action.DROP))
        else:
            segs.append(NodeHop(node, Action.PASS))
        if not last:
            segs.append(Fiber(f"N{node}-N{path[i + 1]}", net.span_km(node, path[i + 1])))
    return segs


def _ring_path(net: NetworkModel, start: int, end: int, via_backbone: bool) -> list[int]:
    path = [start]
    cur = start
    while cur != end or (len(path) == 1 and via_backbone):
        cur = net.ring_successor(cur)
        path.append(cur)
        if len(path) > len(net.nodes) + 1:
            raise RouteError(f"N{end} unreachable from N{start}")
    return path


def _check_channel(net, destination: AccessNetwork, channel, signal_class):
    if channel is None or not net.is_ring:
        return
    want = destination.conventional if signal_class is SignalClass.CONVENTIONAL else destination.quantum
    if want is None:
        return
    got = channel if isinstance(channel, CwdmChannel) else cwdm_parent(channel, [want])
    if got != want:
        raise RouteError(f"no route for channel {channel}: A{destination.id} is assigned {want}")


def _class_of(origin, channel, signal_class) -> SignalClass:
    if isinstance(origin, SourceSite):
        return SignalClass.ENTANGLED
    if signal_class is not None:
        return SignalClass(signal_class)
    if channel is not None:
        wl = channel.nominal_wavelength if isinstance(channel, CwdmChannel) else channel.wavelength
        if Band.O_CONVENTIONAL.contains(wl):
            return SignalClass.CONVENTIONAL
    return SignalClass.QUANTUM_ONEWAY


def enumerate_route(net: NetworkModel, origin: User | SourceSite, destination: User,
                    channel: DwdmChannel | CwdmChannel | None = None, *,
                    signal_class: SignalClass | None = None, path=None, configuration=None,
                    via_backbone: bool = False) -> Route:
    """Route of one signal from a user or source site to a user.

    Rings use fixed wavelength routing, so the route is unique.  In a mesh
    the backbone path comes from ``configuration`` (anything with a
    ``trace(net, origin, destination, channel)`` method returning a node list),
    from an explicit ``path``, or else the fewest-hop path.
    """
    cls = _class_of(origin, channel, signal_class)
    dest_an = net.access_network(destination.an)
    _check_channel(net, dest_an, channel, cls)

    if isinstance(origin, User):
        src_an = net.access_network(origin.an)
        if origin.an == destination.an and not via_backbone and src_an.return_loops > 0:
            if origin == destination:
                raise RouteError("origin and destination are the same user")
            return Route(origin, destination, cls, tuple(_return_loop(net, origin, destination)), 0,
                         (), channel, True)
        if net.kind is TopologyKind.STAR:
            raise RouteError(f"no route for channel {channel}: star has no backbone")
        start = src_an.node
        head = None
    else:
        if net.kind is TopologyKind.STAR:
            segs = [Element("switch", "A1 switch"), Fiber(f"A1 switch-{destination}", net.distances.user_awg_km)]
            return Route(origin, destination, cls, tuple(segs), 0, (), channel)
        start = origin.node
        head = net.head_span_km if origin.node is None else None
        if origin.node is None:
            start = net.nodes[0]
            if not net.is_ring:
                raise RouteError("head source sites exist only on rings")

    end = dest_an.node
    if net.is_ring:
        if path is not None:
            raise RouteError("ring routes are fixed; an explicit path is not accepted")
        if head is not None:
            bpath = _ring_path(net, start, end, via_backbone=False)
        else:
            bpath = _ring_path(net, start, end, via_backbone=(start == end))
    else:
        if configuration is not None:
            bpath = list(configuration.trace(net, origin, destination, channel))
        elif path is not None:
            bpath = [int(n) for n in path]
        else:
            try:
                bpath = nx.shortest_path(net.graph(), start, end)
            except nx.NetworkXNoPath:
                raise RouteError(f"no route for channel {channel}: N{end} unreachable") from None
        if not bpath or bpath[0] != start or bpath[-1] != end:
            raise RouteError(f"no route for channel {channel}: path does not join N{start} to N{end}")
        g = net.graph()
        for a, b in zip(bpath, bpath[1:]):
            if not g.has_edge(a, b):
                raise RouteError(f"no route for channel {channel}: no span N{a}-N{b}")

    segs = []
    if isinstance(origin, User):
        segs += _uplink(net, origin)
    segs += _backbone(net, bpath, inject=isinstance(origin, SourceSite), entering=head)
    segs += _downlink(net, destination)
    hops = len(bpath) - 1 + (1 if head is not None else 0)
    return Route(origin, destination, cls, tuple(segs), hops, tuple(bpath), channel)
