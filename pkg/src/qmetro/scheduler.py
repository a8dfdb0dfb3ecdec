"""Switch configurations for active-PXC mesh backbones.

A configuration sets every PXC's port map.  Demands (direct paths and
entangled pairs between access networks) are packed into as few
configurations as possible so that no CWDM channel is used twice on one
directed fiber, access link or source output within a configuration.
"""
from __future__ import annotations

import itertools
import math
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from enum import Enum

import networkx as nx

from .catalog import CatalogError, NodeKind, SignalClass
from .loss import (
    DEFAULT_BUDGET_DB, PathLossReport, _price, as_budget, entangled_link_loss, one_way_loss, within,
)
from .topology import NetworkModel, RouteError, SourceSite, User, enumerate_route
from .wdm_grid import Band, CwdmChannel, DwdmChannel, cwdm_parent

DEFAULT_MAX_PATHS = 4
EXACT_SEARCH_MAX_ACCESS = 6
DEFAULT_EXPANSION_LIMIT = 200_000


class ScheduleError(ValueError):
    pass


class DemandKind(Enum):
    DIRECT = "direct"
    ENTANGLED = "entangled"


@dataclass(frozen=True)
class Demand:
    kind: DemandKind
    a: int
    b: int

    def __post_init__(self):
        if self.a > self.b:
            lo, hi = self.b, self.a
            object.__setattr__(self, "a", lo)
            object.__setattr__(self, "b", hi)

    @property
    def ident(self) -> str:
        tag = "D" if self.kind is DemandKind.DIRECT else "E"
        return f"{tag}(A{self.a},A{self.b})"

    @property
    def is_self_pair(self) -> bool:
        return self.a == self.b

    def sort_key(self):
        return (self.kind is DemandKind.DIRECT, self.a, self.b)

    def __lt__(self, other):
        return self.sort_key() < other.sort_key()

    def __str__(self):
        return self.ident


@dataclass(frozen=True)
class DemandSet:
    direct: frozenset = frozenset()
    entangled: frozenset = frozenset()

    def __post_init__(self):
        d = frozenset(tuple(sorted(p)) for p in self.direct)
        e = frozenset(tuple(sorted(p)) for p in self.entangled)
        for a, b in d:
            if a == b:
                raise ScheduleError(f"direct path (A{a},A{a}) stays inside the access network (return path)")
        object.__setattr__(self, "direct", d)
        object.__setattr__(self, "entangled", e)

    @classmethod
    def complete(cls, n_access: int, include_self_pairs: bool = True) -> "DemandSet":
        ids = range(1, n_access + 1)
        ent = itertools.combinations_with_replacement(ids, 2) if include_self_pairs \
            else itertools.combinations(ids, 2)
        return cls(frozenset(itertools.combinations(ids, 2)), frozenset(ent))

    def demands(self) -> list[Demand]:
        out = [Demand(DemandKind.ENTANGLED, a, b) for a, b in self.entangled]
        out += [Demand(DemandKind.DIRECT, a, b) for a, b in self.direct]
        return sorted(out)

    def access_ids(self) -> set[int]:
        return {x for p in self.direct | self.entangled for x in p}

    def __len__(self):
        return len(self.direct) + len(self.entangled)


def mesh_reference_demands(include_self_pairs: bool = False) -> DemandSet:
    """All direct and entangled pairs among four access networks."""
    return DemandSet.complete(4, include_self_pairs)


# --- realizations and configurations -----------------------------------------

@dataclass(frozen=True)
class Lightpath:
    """One channel switched from ``start_port`` at ``nodes[0]`` to ``end_port`` at ``nodes[-1]``."""
    band: Band
    channel: CwdmChannel
    start_port: str  # "A<i>" for an access uplink, or a source-site id
    nodes: tuple[int, ...]
    end_port: str  # "A<j>"

    def hops(self):
        """(node, in_port, out_port) for every switch the channel crosses."""
        ports_in = [self.start_port] + [f"N{u}" for u in self.nodes[:-1]]
        ports_out = [f"N{v}" for v in self.nodes[1:]] + [self.end_port]
        return list(zip(self.nodes, ports_in, ports_out))

    def resources(self):
        band, ch = self.band.key, self.channel.label
        out = []
        if self.start_port.startswith("A"):
            out.append(("uplink", self.start_port, band, ch))
        else:
            out.append(("source", self.start_port, band, ch))
        for u, v in zip(self.nodes, self.nodes[1:]):
            out.append(("link", f"N{u}->N{v}", band, ch))
        out.append(("downlink", self.end_port, band, ch))
        return out


@dataclass(frozen=True)
class Realization:
    demand: Demand
    lightpaths: tuple[Lightpath, ...]
    source: str | None = None
    loss_cdb: int = 0

    def resources(self):
        return [r for lp in self.lightpaths for r in lp.resources()]


def _describe_resource(res) -> str:
    kind, where, band, ch = res
    if kind == "link":
        return f"link {where} channel {ch} ({band})"
    return f"{kind} {where} channel {ch} ({band})"


@dataclass
class NodeConfiguration:
    """Port maps of every PXC: ``ports[node][(band, in_port, cwdm)] = out_port``."""
    ports: dict = field(default_factory=dict)
    realizations: dict = field(default_factory=dict)  # Demand -> Realization
    clashes: list = field(default_factory=list)
    quantum_channels: tuple = ()
    conventional_channels: tuple = ()

    @classmethod
    def from_realizations(cls, realizations, quantum_channels=(), conventional_channels=()):
        conf = cls(quantum_channels=tuple(quantum_channels),
                   conventional_channels=tuple(conventional_channels))
        for r in realizations:
            conf.add(r)
        return conf

    def add(self, realization: Realization):
        self.realizations[realization.demand] = realization
        for lp in realization.lightpaths:
            for node, pin, pout in lp.hops():
                self.set_port(node, lp.band, pin, lp.channel, pout)

    def set_port(self, node: int, band: Band, in_port: str, channel: CwdmChannel, out_port: str):
        table = self.ports.setdefault(node, {})
        key = (band, in_port, channel)
        if key in table and table[key] != out_port:
            self.clashes.append(f"N{node}: {channel} ({band.key}) from {in_port} switched to both "
                                f"{table[key]} and {out_port}")
            return
        table[key] = out_port

    def _cwdm(self, channel, band):
        if isinstance(channel, CwdmChannel):
            return channel
        pool = self.quantum_channels if band is Band.C_QUANTUM else self.conventional_channels
        if isinstance(channel, DwdmChannel) and pool:
            return cwdm_parent(channel, pool)
        raise RouteError(f"no route for channel {channel}: CWDM channel unknown")

    def trace(self, net: NetworkModel, origin, destination: User, channel) -> list[int]:
        """Backbone nodes visited by ``channel`` from ``origin`` to ``destination``."""
        if channel is None:
            raise RouteError("tracing a configuration needs a channel")
        if isinstance(origin, SourceSite):
            band = Band.C_QUANTUM
            node, port = origin.node, origin.id
        else:
            wl = channel.nominal_wavelength if isinstance(channel, CwdmChannel) else channel.wavelength
            band = Band.O_CONVENTIONAL if Band.O_CONVENTIONAL.contains(wl) else Band.C_QUANTUM
            node, port = net.access_network(origin.an).node, f"A{origin.an}"
        cw = self._cwdm(channel, band)
        target = f"A{destination.an}"
        path, seen = [node], set()
        while True:
            if (node, port) in seen:
                raise RouteError(f"no route for channel {cw}: switching loop at N{node}")
            seen.add((node, port))
            out = self.ports.get(node, {}).get((band, port, cw))
            if out is None:
                raise RouteError(f"no route for channel {cw}: N{node} does not switch it from {port}")
            if out == target:
                return path
            if not out.startswith("N"):
                raise RouteError(f"no route for channel {cw}: N{node} sends it to {out}, not {target}")
            nxt = int(out[1:])
            port, node = f"N{node}", nxt
            path.append(node)

    def served(self) -> list[Demand]:
        return sorted(self.realizations)

    def port_rows(self):
        """(node, band, in_port, channel, out_port) in a stable order."""
        rows = []
        for node in sorted(self.ports):
            for (band, pin, ch), pout in self.ports[node].items():
                rows.append((node, band.key, pin, ch.label, pout))
        return sorted(rows, key=lambda r: (r[0], r[1], r[3], r[2]))


# --- option enumeration --------------------------------------------------------

@dataclass(frozen=True)
class _Option:
    realization: Realization
    resources: frozenset
    downlinks: tuple  # access ids whose quantum downlink is used, with multiplicity


def _check_mesh(net: NetworkModel):
    if net.node_kind is not NodeKind.ACTIVE_PXC:
        raise ScheduleError("scheduling needs a mesh of active PXC nodes")


def _channels(chs) -> tuple[CwdmChannel, ...]:
    return tuple(c if isinstance(c, CwdmChannel) else CwdmChannel.parse(c) for c in chs)


class _Pricer:
    """Caches the loss of single routes within one scheduling run."""

    def __init__(self, net: NetworkModel):
        self.net = net
        self.graph = net.graph()
        self._paths = {}
        self._cost = {}

    def paths(self, u: int, v: int, limit: int) -> list[list[int]]:
        key = (u, v, limit)
        if key not in self._paths:
            if u == v:
                self._paths[key] = [[u]]
            else:
                try:
                    gen = nx.shortest_simple_paths(self.graph, u, v)
                    self._paths[key] = list(itertools.islice(gen, limit))
                except nx.NetworkXNoPath:
                    self._paths[key] = []
        return self._paths[key]

    def cost(self, origin, dest: User, path, cls: SignalClass) -> int:
        key = (origin, dest.an, tuple(path), cls)
        if key not in self._cost:
            route = enumerate_route(self.net, origin, dest, signal_class=cls, path=path)
            self._cost[key] = sum(c for _, c in _price(self.net, route))
        return self._cost[key]


def _demand_options(net, demand: Demand, pricer: _Pricer, quantum, conventional, budget, max_paths):
    """All admissible realizations of ``demand`` plus the lowest loss seen (admissible or not)."""
    b = as_budget(budget)
    opts, best = [], None
    node = {an.id: an.node for an in net.access}
    a, z = demand.a, demand.b
    ua, uz = User(a, 0), User(z, 0 if a != z else 1)
    qb, cb = Band.C_QUANTUM, Band.O_CONVENTIONAL
    if demand.kind is DemandKind.DIRECT:
        for path in pricer.paths(node[a], node[z], max_paths):
            q = pricer.cost(ua, uz, path, SignalClass.QUANTUM_ONEWAY)
            c = pricer.cost(ua, uz, path, SignalClass.CONVENTIONAL)
            best = q if best is None else min(best, q)
            if not (within(q, b.quantum_oneway) and within(c, b.conventional)):
                continue
            back = tuple(reversed(path))
            for i, qch in enumerate(quantum):
                lps = [Lightpath(qb, qch, f"A{a}", tuple(path), f"A{z}"),
                       Lightpath(qb, qch, f"A{z}", back, f"A{a}")]
                if conventional:
                    cch = conventional[i % len(conventional)]
                    lps += [Lightpath(cb, cch, f"A{a}", tuple(path), f"A{z}"),
                            Lightpath(cb, cch, f"A{z}", back, f"A{a}")]
                r = Realization(demand, tuple(lps), None, q)
                opts.append(_Option(r, frozenset(r.resources()), (a, z)))
    else:
        for site in sorted(net.sources, key=lambda s: s.id):
            if site.node is None:
                continue
            if demand.is_self_pair:
                if site.node != node[a]:
                    continue
                loss = 2 * pricer.cost(site, ua, [site.node], SignalClass.ENTANGLED)
                best = loss if best is None else min(best, loss)
                if not within(loss, b.entangled):
                    continue
                for qch in quantum:
                    r = Realization(demand, (Lightpath(qb, qch, site.id, (site.node,), f"A{a}"),),
                                    site.id, loss)
                    opts.append(_Option(r, frozenset(r.resources()), (a,)))
                continue
            for pa in pricer.paths(site.node, node[a], max_paths):
                ca = pricer.cost(site, ua, pa, SignalClass.ENTANGLED)
                for pz in pricer.paths(site.node, node[z], max_paths):
                    loss = ca + pricer.cost(site, uz, pz, SignalClass.ENTANGLED)
                    best = loss if best is None else min(best, loss)
                    if not within(loss, b.entangled):
                        continue
                    for qa, qz in itertools.permutations(quantum, 2):
                        lps = (Lightpath(qb, qa, site.id, tuple(pa), f"A{a}"),
                               Lightpath(qb, qz, site.id, tuple(pz), f"A{z}"))
                        r = Realization(demand, lps, site.id, loss)
                        opts.append(_Option(r, frozenset(r.resources()), (a, z)))
    index = {c: i for i, c in enumerate(quantum)}
    opts.sort(key=lambda o: (o.realization.loss_cdb, o.realization.source or "",
                             [(index[lp.channel] if lp.band is qb else -1, lp.nodes)
                              for lp in o.realization.lightpaths]))
    return opts, best


# --- schedules ---------------------------------------------------------------

@dataclass
class Schedule:
    configurations: list[NodeConfiguration]
    served: list[tuple[Demand, ...]]
    lower_bound: int = 0
    non_minimal_possible: bool = False
    method: str = "exact"

    @property
    def coverage(self) -> dict:
        out = {}
        for i, group in enumerate(self.served):
            for d in group:
                out.setdefault(d, i)
        return out

    def __len__(self):
        return len(self.configurations)

    @property
    def minimal(self) -> bool:
        return not self.non_minimal_possible


def _downlink_need(demands) -> Counter:
    need = Counter()
    for d in demands:
        need[d.a] += 1
        if not d.is_self_pair:
            need[d.b] += 1
    return need


def schedule_lower_bound(demands, n_quantum: int) -> int:
    """Configurations needed so every access link can carry its quantum channels."""
    need = _downlink_need(demands)
    return max((math.ceil(v / n_quantum) for v in need.values()), default=0)


def _greedy(order, options):
    configs: list[dict] = []  # resource -> demand
    chosen: list[list[_Option]] = []
    for d in order:
        placed = False
        for used, group in zip(configs, chosen):
            for opt in options[d]:
                if used.keys().isdisjoint(opt.resources):
                    for r in opt.resources:
                        used[r] = d
                    group.append(opt)
                    placed = True
                    break
            if placed:
                break
        if not placed:
            opt = options[d][0]
            configs.append({r: d for r in opt.resources})
            chosen.append([opt])
    return chosen


class _LimitReached(Exception):
    pass


def _exact(order, options, k: int, n_quantum: int, limit: int, caps=None):
    """Partition ``order`` into ``k`` conflict-free groups, or None when impossible.

    ``caps`` optionally bounds how many demands of each kind one group may hold.
    """
    used = [set() for _ in range(k)]
    kinds = [Counter() for _ in range(k)]
    picks: list[list[_Option]] = [[] for _ in range(k)]
    remaining = _downlink_need(order)
    down = [Counter() for _ in range(k)]
    expansions = 0

    def feasible_downlinks():
        for an, need in remaining.items():
            if need and need > sum(n_quantum - down[g][an] for g in range(k)):
                return False
        return True

    def place(i: int, opened: int) -> bool:
        nonlocal expansions
        if i == len(order):
            return True
        d = order[i]
        for g in range(min(opened + 1, k)):
            if caps and kinds[g][d.kind] >= caps[d.kind]:
                continue
            for opt in options[d]:
                if not used[g].isdisjoint(opt.resources):
                    continue
                expansions += 1
                if expansions > limit:
                    raise _LimitReached
                used[g] |= opt.resources
                picks[g].append(opt)
                kinds[g][d.kind] += 1
                for an in opt.downlinks:
                    down[g][an] += 1
                    remaining[an] -= 1
                if feasible_downlinks() and place(i + 1, max(opened, g + 1)):
                    return True
                for an in opt.downlinks:
                    down[g][an] -= 1
                    remaining[an] += 1
                picks[g].pop()
                kinds[g][d.kind] -= 1
                used[g] -= opt.resources
        return False

    return picks if place(0, 0) else None


def _balanced(order, options, k: int, n_quantum: int, limit: int):
    """Same number of groups, each holding an even share of every demand kind, if one exists."""
    totals = Counter(d.kind for d in order)
    caps = {kind: math.ceil(n / k) for kind, n in totals.items()}
    try:
        return _exact(order, options, k, n_quantum, limit, caps)
    except _LimitReached:
        return None


def schedule(net: NetworkModel, demands: DemandSet, quantum_channels, conventional_channels=(), *,
             budget=DEFAULT_BUDGET_DB, max_paths: int = DEFAULT_MAX_PATHS,
             exact: bool | None = None, expansion_limit: int = DEFAULT_EXPANSION_LIMIT) -> Schedule:
    """Fewest configurations serving every demand.

    Exact search is used for up to six access networks (or when ``exact`` is
    forced); otherwise, or when the search exceeds ``expansion_limit`` node
    expansions, the first-fit result is returned with
    ``non_minimal_possible`` set unless it meets the lower bound.
    """
    _check_mesh(net)
    quantum = _channels(quantum_channels)
    conventional = _channels(conventional_channels)
    if not quantum:
        raise ScheduleError("at least one quantum CWDM channel is required")
    if len(set(quantum)) != len(quantum) or len(set(conventional)) != len(conventional):
        raise ScheduleError("channel lists must not repeat a channel")
    for c in quantum:
        if c.band is not Band.C_QUANTUM:
            raise ScheduleError(f"{c} is not a quantum-band channel")
    for c in conventional:
        if c.band is not Band.O_CONVENTIONAL:
            raise ScheduleError(f"{c} is not a conventional-band channel")
    known = {an.id for an in net.access}
    for an in sorted(demands.access_ids() - known):
        raise ScheduleError(f"demand references unknown access network A{an}")

    order = demands.demands()
    if not order:
        return Schedule([], [], 0, False, "exact")
    pricer = _Pricer(net)
    options, unservable = {}, []
    for d in order:
        opts, best = _demand_options(net, d, pricer, quantum, conventional, budget, max_paths)
        if not opts:
            detail = "no route" if best is None else f"minimum achievable loss {best / 100:g} dB"
            unservable.append(f"{d.ident}: {detail}")
        options[d] = opts
    if unservable:
        raise ScheduleError("demands unservable within budget: " + "; ".join(unservable))

    lb = max(1, schedule_lower_bound(order, len(quantum)))
    # place the most constrained demands first
    search_order = sorted(order, key=lambda d: (len(options[d]), d.sort_key()))
    groups = _greedy(search_order, options)
    method, flagged = "greedy", False
    use_exact = exact if exact is not None else len(known) <= EXACT_SEARCH_MAX_ACCESS
    if len(groups) > lb:
        if use_exact:
            method = "exact"
            for k in range(lb, len(groups)):
                try:
                    found = _exact(search_order, options, k, len(quantum), expansion_limit)
                except _LimitReached:
                    flagged, method = True, "greedy"
                    break
                if found is not None:
                    groups = found
                    break
        else:
            flagged = True
    else:
        method = "exact" if use_exact else "greedy"

    if use_exact and not flagged:
        groups = _balanced(search_order, options, len(groups), len(quantum), expansion_limit) or groups

    confs, served = [], []
    groups = [sorted(g, key=lambda o: o.realization.demand.sort_key()) for g in groups if g]
    groups.sort(key=lambda g: [o.realization.demand.sort_key() for o in g])
    for g in groups:
        confs.append(NodeConfiguration.from_realizations([o.realization for o in g], quantum, conventional))
        served.append(tuple(o.realization.demand for o in g))
    return Schedule(confs, served, lb, flagged, method)


def assign_configuration(net: NetworkModel, demands, quantum_channels, conventional_channels=(), *,
                         budget=DEFAULT_BUDGET_DB, max_paths: int = DEFAULT_MAX_PATHS) -> NodeConfiguration:
    """One configuration serving all of ``demands`` at once, or ScheduleError."""
    _check_mesh(net)
    quantum, conventional = _channels(quantum_channels), _channels(conventional_channels)
    order = sorted(demands.demands() if isinstance(demands, DemandSet) else demands)
    pricer = _Pricer(net)
    options = {}
    for d in order:
        options[d], _ = _demand_options(net, d, pricer, quantum, conventional, budget, max_paths)
        if not options[d]:
            raise ScheduleError(f"{d.ident} cannot be served within budget")
    found = _exact(order, options, 1, len(quantum), DEFAULT_EXPANSION_LIMIT)
    if found is None:
        raise ScheduleError("demands " + ", ".join(d.ident for d in order) +
                            " cannot share one configuration")
    return NodeConfiguration.from_realizations([o.realization for o in found[0]], quantum, conventional)


# --- validation ----------------------------------------------------------------

@dataclass
class ConfigurationVerdict:
    problems: list[str] = field(default_factory=list)
    reports: list[PathLossReport] = field(default_factory=list)

    @property
    def valid(self) -> bool:
        return not self.problems

    def __bool__(self):
        return self.valid


def _discover(net, conf: NodeConfiguration, d: Demand):
    """Lightpaths for a demand with no recorded realization, found by tracing the port maps."""
    quantum = conf.quantum_channels or tuple(
        sorted({k[2] for t in conf.ports.values() for k in t if k[0] is Band.C_QUANTUM},
               key=lambda c: c.nominal_wavelength))
    ua, uz = User(d.a, 0), User(d.b, 0)
    if d.kind is DemandKind.DIRECT:
        for q in quantum:
            try:
                fwd = conf.trace(net, ua, uz, q)
                back = conf.trace(net, uz, ua, q)
            except RouteError:
                continue
            return Realization(d, (Lightpath(Band.C_QUANTUM, q, f"A{d.a}", tuple(fwd), f"A{d.b}"),
                                   Lightpath(Band.C_QUANTUM, q, f"A{d.b}", tuple(back), f"A{d.a}")))
        return None
    for site in sorted(net.sources, key=lambda s: s.id):
        if site.node is None:
            continue
        pairs = [(q, q) for q in quantum] if d.is_self_pair else itertools.permutations(quantum, 2)
        for qa, qz in pairs:
            try:
                pa = conf.trace(net, site, ua, qa)
                pz = conf.trace(net, site, uz, qz)
            except RouteError:
                continue
            lps = (Lightpath(Band.C_QUANTUM, qa, site.id, tuple(pa), f"A{d.a}"),)
            if not d.is_self_pair:
                lps += (Lightpath(Band.C_QUANTUM, qz, site.id, tuple(pz), f"A{d.b}"),)
            return Realization(d, lps, site.id)
    return None


def validate_configuration(net: NetworkModel, conf: NodeConfiguration, served=None, *,
                           budget=DEFAULT_BUDGET_DB) -> ConfigurationVerdict:
    """Check switch injectivity, channel disjointness, routes and budgets of one configuration."""
    verdict = ConfigurationVerdict(list(conf.clashes))
    served = sorted(conf.realizations) if served is None else sorted(served)

    for node in sorted(conf.ports):
        outputs = defaultdict(list)
        for (band, pin, ch), pout in conf.ports[node].items():
            outputs[(band, pout, ch)].append(pin)
            plan = conf.quantum_channels if band is Band.C_QUANTUM else conf.conventional_channels
            if plan and ch not in plan:
                verdict.problems.append(f"N{node}: {ch} is not a planned {band.key}-band channel")
        for (band, pout, ch), ins in sorted(outputs.items(), key=lambda kv: (kv[0][0].key, kv[0][1], kv[0][2].label)):
            if len(ins) > 1:
                verdict.problems.append(f"N{node}: {ch} ({band.key}) from {', '.join(sorted(ins))} "
                                        f"all switched to {pout}")

    realizations = []
    for d in served:
        r = conf.realizations.get(d) or _discover(net, conf, d)
        if r is None:
            verdict.problems.append(f"{d.ident}: no route through the configuration")
            continue
        realizations.append(r)

    owner = {}
    for r in realizations:
        for res in r.resources():
            other = owner.setdefault(res, r.demand)
            if other != r.demand:
                verdict.problems.append(f"{_describe_resource(res)} used by both {other.ident} and {r.demand.ident}")

    for r in realizations:
        d = r.demand
        try:
            if d.kind is DemandKind.DIRECT:
                for lp in r.lightpaths:
                    cls = SignalClass.QUANTUM_ONEWAY if lp.band is Band.C_QUANTUM else SignalClass.CONVENTIONAL
                    origin = User(int(lp.start_port[1:]), 0)
                    dest = User(int(lp.end_port[1:]), 0)
                    route = enumerate_route(net, origin, dest, lp.channel, signal_class=cls,
                                            configuration=conf, via_backbone=True)
                    rep = one_way_loss(net, route, budget)
                    verdict.reports.append(rep)
                    if not rep.feasible:
                        verdict.problems.append(f"{d.ident}: {rep.describe()}")
            else:
                lps = r.lightpaths
                ua, uz = User(d.a, 0), User(d.b, 0 if d.a != d.b else 1)
                ca = lps[0].channel
                cz = lps[1].channel if len(lps) > 1 else ca
                rep = entangled_link_loss(net, net.source(r.source), ua, uz, (ca, cz),
                                          configuration=conf, budget=budget)
                verdict.reports.append(rep)
                if not rep.feasible:
                    verdict.problems.append(f"{d.ident}: {rep.describe()}")
        except (RouteError, CatalogError) as exc:
            verdict.problems.append(f"{d.ident}: {exc}")
    return verdict


# --- channel rotation ----------------------------------------------------------

def rotate_channel_assignment(plan, n_access: int, n_channels: int | None = None, regions=None) -> list[dict]:
    """Steps of an access-network -> CWDM channel assignment that cycle every network through every channel.

    ``plan`` is the list of channels (or None for channel indices).  With
    ``regions`` (disjoint groups of access ids) each region is rotated on
    its own, so a channel can be live in several regions in the same step.
    A single step suffices when no region has more networks than channels.
    """
    chans = list(plan) if plan is not None else list(range(n_channels or 0))
    n = n_channels if n_channels is not None else len(chans)
    if n < 1:
        raise ValueError("at least one channel is needed")
    chans = chans[:n] if len(chans) >= n else list(range(n))
    groups = [sorted(g) for g in regions] if regions else [list(range(1, n_access + 1))]
    length = n if any(len(g) > n for g in groups) else 1
    steps = []
    for t in range(length):
        step = {}
        for g in groups:
            for pos, an in enumerate(g):
                step[an] = chans[(pos + t) % n]
        steps.append(step)
    return steps


def rotation_problems(steps, n_channels: int, regions=None) -> list[str]:
    """Unbalanced channel loads inside a region, or networks never given some channel."""
    out = []
    if not steps:
        return ["empty rotation"]
    ans = sorted(steps[0])
    groups = [sorted(g) for g in regions] if regions else [ans]
    for t, step in enumerate(steps):
        for g in groups:
            load = Counter(step[an] for an in g)
            counts = list(load.values()) + [0] * (min(n_channels, len(g)) - len(load))
            if max(counts) - min(counts) > 1:
                out.append(f"step {t}: uneven channel load {dict(load)} in region {g}")
    for g in groups:
        if len(g) > n_channels:
            for an in g:
                seen = {step[an] for step in steps}
                if len(seen) < n_channels:
                    out.append(f"A{an} only uses {len(seen)} of {n_channels} channels")
    return out
