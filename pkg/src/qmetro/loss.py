"""Path losses per signal class, entangled links and worst-case tables."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import networkx as nx

from .catalog import CatalogError, NodeKind, SignalClass, item_loss_cdb, to_cdb, to_db
from .topology import (
    Element, Fiber, NetworkModel, NodeHop, Route, RouteError, SourceSite, TopologyKind, User,
    enumerate_route,
)

DEFAULT_BUDGET_DB = 30.0


@dataclass(frozen=True)
class Budget:
    """Per-class loss budgets in dB; ``None`` means the class is not checked.

    Conventional signals are classical and are not held to the QKD budget
    unless one is configured.
    """
    quantum_oneway: float | None = DEFAULT_BUDGET_DB
    entangled: float | None = DEFAULT_BUDGET_DB
    conventional: float | None = None

    @classmethod
    def uniform(cls, db: float | None, conventional: float | None = None) -> "Budget":
        return cls(db, db, conventional)

    def for_class(self, cls: SignalClass) -> float | None:
        return {SignalClass.QUANTUM_ONEWAY: self.quantum_oneway,
                SignalClass.ENTANGLED: self.entangled,
                SignalClass.CONVENTIONAL: self.conventional}[cls]


def as_budget(budget) -> Budget:
    if isinstance(budget, Budget):
        return budget
    return Budget.uniform(budget)


@dataclass(frozen=True)
class PathLossReport:
    routes: tuple[Route, ...]
    segments: tuple[tuple[str, int], ...]  # (element label, cdB)
    total_cdb: int
    signal_class: SignalClass
    budget_db: float | None = DEFAULT_BUDGET_DB
    arm_cdb: tuple[int, ...] = ()

    @property
    def total_db(self) -> float:
        return to_db(self.total_cdb)

    @property
    def arms_db(self) -> tuple[float, ...]:
        return tuple(to_db(a) for a in self.arm_cdb)

    @property
    def x_closest(self) -> tuple[int, ...]:
        return tuple(r.x_closest for r in self.routes)

    @property
    def feasible(self) -> bool:
        return within(self.total_cdb, self.budget_db)

    @property
    def endpoints(self) -> str:
        if self.signal_class is SignalClass.ENTANGLED and len(self.routes) == 2:
            a, b = self.routes
            return f"{a.origin}->({a.destination}, {b.destination})"
        r = self.routes[0]
        return f"{r.origin}->{r.destination}"

    def describe(self) -> str:
        arms = ""
        if self.arm_cdb:
            arms = " (" + " + ".join(_fmt(a) for a in self.arms_db) + ")"
        verdict = "ok" if self.feasible else f"exceeds {self.budget_db:g} dB"
        return f"{self.signal_class.value} {self.endpoints}: {_fmt(self.total_db)} dB{arms} [{verdict}]"


def within(cdb: int, limit: float | None) -> bool:
    return limit is None or math.isinf(limit) or cdb <= to_cdb(limit)


def _fmt(db: float) -> str:
    return f"{db:.2f}".rstrip("0").rstrip(".")


def _price(net: NetworkModel, route: Route) -> list[tuple[str, int]]:
    cat = net.catalog
    band = route.signal_class.band
    out = []
    for seg in route.segments:
        if isinstance(seg, Fiber):
            out.append((f"fiber {seg.label} ({seg.length_km:g} km)",
                        item_loss_cdb(cat["fiber"], seg.length_km, band)))
        elif isinstance(seg, Element):
            out.append((seg.label, item_loss_cdb(cat[seg.component], 0.0, band)))
        elif isinstance(seg, NodeHop):
            # a pair photon pays the entangled column only where it is injected
            cls = route.signal_class
            if cls is SignalClass.ENTANGLED and not seg.inject:
                cls = SignalClass.QUANTUM_ONEWAY
            out.append((seg.label, cat.node_loss_cdb(net.node_kind, seg.action, cls)))
        else:  # pragma: no cover - routes only hold the three segment types
            raise TypeError(f"unexpected route segment {seg!r}")
    return out


def route_loss_cdb(net: NetworkModel, route: Route) -> int:
    return sum(c for _, c in _price(net, route))


def one_way_loss(net: NetworkModel, route: Route, budget=DEFAULT_BUDGET_DB) -> PathLossReport:
    segs = _price(net, route)
    b = as_budget(budget).for_class(route.signal_class)
    return PathLossReport((route,), tuple(segs), sum(c for _, c in segs), route.signal_class, b)


def entangled_link_loss(net: NetworkModel, source: SourceSite | str, user_a: User, user_b: User,
                        channel_pair=None, *, paths=None, configuration=None,
                        budget=DEFAULT_BUDGET_DB) -> PathLossReport:
    """Link loss of a pair shared by two users: the sum of both arms."""
    site = net.source(source) if isinstance(source, str) else source
    ch_a = ch_b = None
    if channel_pair is not None:
        ch_a, ch_b = channel_pair
        if site.spec is not None and site.spec.partner(ch_a) != ch_b:
            raise RouteError(f"{ch_b} is not the entangled partner of {ch_a} for {site}")
    pa, pb = paths if paths is not None else (None, None)
    arm_a = enumerate_route(net, site, user_a, ch_a, path=pa, configuration=configuration)
    arm_b = enumerate_route(net, site, user_b, ch_b, path=pb, configuration=configuration)
    sa, sb = _price(net, arm_a), _price(net, arm_b)
    ca, cb = sum(c for _, c in sa), sum(c for _, c in sb)
    segs = tuple([(f"arm A: {l}", c) for l, c in sa] + [(f"arm B: {l}", c) for l, c in sb])
    return PathLossReport((arm_a, arm_b), segs, ca + cb, SignalClass.ENTANGLED,
                          as_budget(budget).entangled, (ca, cb))


# --- x-closest tables --------------------------------------------------------

def _path_with_hops(net: NetworkModel, start: int, hops: int) -> list[int] | None:
    """First simple backbone path of exactly ``hops`` spans from ``start`` (mesh)."""
    if hops == 0:
        return [start]
    g = net.graph()
    best = None
    for target in sorted(net.nodes):
        if target == start:
            continue
        for p in nx.all_simple_paths(g, start, target, cutoff=hops):
            if len(p) - 1 == hops and (best is None or p < best):
                best = p
    return best


def x_closest_report(net: NetworkModel, x: int, signal_class: SignalClass,
                     budget=DEFAULT_BUDGET_DB, origin_an: int | None = None) -> PathLossReport | None:
    """Loss from an emitter to the x-closest access network, or None when undefined.

    In a ring the x-closest network is x hops downstream; x = N wraps back to
    the emitter's own network through the whole backbone.  In a mesh the
    route follows the first simple path with x spans.
    """
    origin_an = origin_an or net.access[0].id
    an = net.access_network(origin_an)
    cls = SignalClass(signal_class)
    if net.is_ring:
        n = len(net.nodes)
        if x < 0 or x > n:
            return None
        idx = net.nodes.index(an.node)
        target_node = net.nodes[(idx + x) % n]
        target = net.access_at(target_node)[0]
        dest = User(target.id, 1 if target.id == an.id and x == 0 else 0)
        if cls is SignalClass.ENTANGLED:
            if x == 0:
                return None  # needs the whole backbone; that is the x = N row
            site = _site_at(net, an.node)
            if site.node is None:
                target = net.access[x - 1] if x <= len(net.access) else None
                if target is None:
                    return None
                dest = User(target.id, 0)
            route = enumerate_route(net, site, dest)
        else:
            route = enumerate_route(net, User(an.id, 0), dest, signal_class=cls, via_backbone=(x == n))
        return _single(net, route, budget)
    if net.kind is TopologyKind.MESH:
        path = _path_with_hops(net, an.node, x)
        if path is None:
            return None
        target = net.access_at(path[-1])[0]
        if cls is SignalClass.ENTANGLED:
            route = enumerate_route(net, _site_at(net, an.node), User(target.id, 0), path=path)
        elif x == 0:
            route = enumerate_route(net, User(an.id, 0), User(an.id, 1), signal_class=cls)
        else:
            route = enumerate_route(net, User(an.id, 0), User(target.id, 0), signal_class=cls, path=path)
        return _single(net, route, budget)
    return None


def _single(net, route, budget) -> PathLossReport:
    rep = one_way_loss(net, route, budget)
    if route.signal_class is SignalClass.ENTANGLED:
        return PathLossReport(rep.routes, rep.segments, rep.total_cdb, rep.signal_class,
                              rep.budget_db, (rep.total_cdb,))
    return rep


def _site_at(net: NetworkModel, node: int) -> SourceSite:
    at = net.sources_at(node)
    if at:
        return at[0]
    head = net.sources_at(None)
    if head:
        return head[0]
    raise RouteError(f"no source site at N{node}")


CLASS_COLUMNS = (SignalClass.CONVENTIONAL, SignalClass.QUANTUM_ONEWAY, SignalClass.ENTANGLED)


@dataclass
class Boundary:
    """Worst cell within budget and first cell beyond it, per class."""
    signal_class: SignalClass
    worst_feasible_db: float | None
    worst_feasible_rows: tuple[int, ...] | None
    first_infeasible_db: float | None
    first_infeasible_rows: tuple[int, ...] | None


@dataclass
class LossTable:
    rows: list[int]
    cells: dict  # (x, SignalClass) -> PathLossReport | None
    boundaries: dict = field(default_factory=dict)
    title: str = ""

    def value(self, x: int, cls: SignalClass) -> float | None:
        rep = self.cells.get((x, SignalClass(cls)))
        return None if rep is None else rep.total_db

    def as_rows(self) -> list[tuple[int, list[float | None]]]:
        return [(x, [self.value(x, c) for c in CLASS_COLUMNS]) for x in self.rows]


def _max_rows(net: NetworkModel) -> int:
    if net.is_ring:
        return len(net.nodes)
    g = net.graph()
    longest = 0
    for s in net.nodes:
        for t in net.nodes:
            if s != t:
                for p in nx.all_simple_paths(g, s, t):
                    longest = max(longest, len(p) - 1)
    return longest


def worst_case_analysis(net: NetworkModel, budget=DEFAULT_BUDGET_DB, origin_an: int | None = None) -> LossTable:
    """Loss to every x-closest access network, per class, plus budget boundaries."""
    budget = as_budget(budget)
    rows = list(range(_max_rows(net) + 1))
    cells = {}
    for x in rows:
        for cls in CLASS_COLUMNS:
            try:
                cells[(x, cls)] = x_closest_report(net, x, cls, budget, origin_an)
            except (CatalogError, RouteError):
                cells[(x, cls)] = None  # class not carried, or no such access network
    table = LossTable(rows, cells)
    for cls in (SignalClass.CONVENTIONAL, SignalClass.QUANTUM_ONEWAY):
        table.boundaries[cls] = _one_way_boundary(table, cls, budget.for_class(cls))
    table.boundaries[SignalClass.ENTANGLED] = _entangled_boundary(table, budget.entangled)
    return table


def _one_way_boundary(table: LossTable, cls, limit) -> Boundary:
    feas, infeas = None, None
    for x in table.rows:
        v = table.value(x, cls)
        if v is None:
            continue
        if within(to_cdb(v), limit):
            if feas is None or v >= feas[0]:
                feas = (v, (x,))
        elif infeas is None:
            infeas = (v, (x,))
    return Boundary(cls, *(feas or (None, None)), *(infeas or (None, None)))


def _entangled_boundary(table: LossTable, limit) -> Boundary:
    """Arm-sum boundary over all pairs of table rows.

    Ties on the worst feasible sum go to the most balanced pair of arms.
    """
    arms = [(x, table.cells[(x, SignalClass.ENTANGLED)]) for x in table.rows]
    arms = [(x, r.total_cdb) for x, r in arms if r is not None]
    feas, infeas = None, None
    for (x1, c1), (x2, c2) in itertools.combinations_with_replacement(arms, 2):
        total = c1 + c2
        if within(total, limit):
            key = (total, -abs(c1 - c2))
            if feas is None or key > feas[0]:
                feas = (key, (x1, x2))
        else:
            key = (total, abs(c1 - c2))
            if infeas is None or key < infeas[0]:
                infeas = (key, (x1, x2))
    return Boundary(SignalClass.ENTANGLED,
                    to_db(feas[0][0]) if feas else None, feas[1] if feas else None,
                    to_db(infeas[0][0]) if infeas else None, infeas[1] if infeas else None)


# --- requirement checks used by capacity planning ------------------------------

def best_entangled_link(net: NetworkModel, an_a: int, an_b: int, budget=DEFAULT_BUDGET_DB) -> PathLossReport:
    """Lowest-loss way to share a pair between two access networks.

    Every source site is tried; in a mesh the arms follow fewest-hop paths.
    """
    best = None
    ua = User(an_a, 0)
    ub = User(an_b, 1 if an_a == an_b else 0)
    for site in net.sources:
        try:
            rep = entangled_link_loss(net, site, ua, ub, budget=budget)
        except (RouteError, CatalogError):
            continue
        if best is None or rep.total_cdb < best.total_cdb:
            best = rep
    if best is None:
        raise RouteError(f"no source can reach both A{an_a} and A{an_b}")
    return best


def required_links(net: NetworkModel, budget=DEFAULT_BUDGET_DB, *, include_self_pairs: bool | None = None):
    """Every link the design must support, each priced by its best route.

    One-way quantum and conventional paths are needed between every ordered
    pair of access networks (rings only: the entanglement-only design has no
    one-way traffic).  Entangled links are needed for every unordered pair.
    Self pairs are left out of the entanglement-only ring by default, where
    they would dominate the distinct-pair worst case, except when it has a
    single access network.
    """
    budget = as_budget(budget)
    ids = [an.id for an in net.access]
    entangled_only = net.node_kind in (NodeKind.CWDM_OADM_SIMPLE, None)
    if include_self_pairs is None:
        include_self_pairs = not entangled_only or len(ids) == 1
    out = []
    if not entangled_only:
        for a, b in itertools.product(ids, ids):
            for cls in (SignalClass.QUANTUM_ONEWAY, SignalClass.CONVENTIONAL):
                ua, ub = User(a, 0), User(b, 1 if a == b else 0)
                route = enumerate_route(net, ua, ub, signal_class=cls)
                out.append(one_way_loss(net, route, budget))
    for a, b in itertools.combinations_with_replacement(ids, 2):
        if a == b and not include_self_pairs:
            continue
        out.append(best_entangled_link(net, a, b, budget))
    return out


def violations(reports) -> list[PathLossReport]:
    return [r for r in reports if not r.feasible]


def worst(reports, cls: SignalClass) -> PathLossReport | None:
    pool = [r for r in reports if r.signal_class is cls]
    return max(pool, key=lambda r: r.total_cdb) if pool else None


def budget_is_unbounded(budget) -> bool:
    b = as_budget(budget)
    return all(v is None or math.isinf(v) for v in (b.quantum_oneway, b.entangled, b.conventional))
