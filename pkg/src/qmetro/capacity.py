"""Channel plans and capacity limits of the ring designs."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field, replace
from enum import Enum

import networkx as nx

from .catalog import NodeKind, SignalClass
from .loss import DEFAULT_BUDGET_DB, PathLossReport, as_budget, required_links, violations, worst
from .source import ConnectionScheme, EntangledSourceSpec, plan_sources_for_pairs, serving_pairs
from .topology import (
    AWG_PERIOD_OFFSET_NM, ENT_ONLY_QUANTUM_START, PASSIVE_QUANTUM_START, AccessNetwork, Distances,
    NetworkModel, TopologyKind, build_reference_network,
)
from .wdm_grid import Band, CwdmChannel, DwdmChannel, dwdm_channels_in


class PlanError(ValueError):
    pass


class Role(Enum):
    ENTANGLED = "entangled"
    ONE_WAY = "one_way"
    RESERVED = "reserved"


class LimitingFactor(Enum):
    LOSS_BUDGET = "loss_budget"
    SOURCE_WIDTH = "source_width"
    CWDM_SPECTRUM = "cwdm_spectrum"


@dataclass(frozen=True)
class ChannelRole:
    role: Role
    source: str | None = None

    def __str__(self):
        return f"{self.role.value}({self.source})" if self.source else self.role.value


@dataclass
class ChannelPlan:
    assignments: dict  # AN id -> (conventional CwdmChannel, quantum CwdmChannel)
    roles: dict  # DwdmChannel -> ChannelRole
    sources: list[EntangledSourceSpec]
    grid_spacing: float = 100.0
    scheme: ConnectionScheme = ConnectionScheme.FIXED_SPLIT

    def block(self, an_id: int) -> list[DwdmChannel]:
        return dwdm_channels_in(self.assignments[an_id][1], self.grid_spacing)

    def count(self, an_id: int, role: Role) -> int:
        return sum(1 for ch in self.block(an_id) if self.roles[ch].role is role)

    def source(self, name: str) -> EntangledSourceSpec:
        return next(s for s in self.sources if s.name == name)

    def entangled_pairs_between(self, a: int, b: int) -> list[tuple[str, DwdmChannel, DwdmChannel]]:
        """Connected (source, x, partner) with x in A_a's block and partner in A_b's."""
        block_a, block_b = set(self.block(a)), set(self.block(b))
        out = []
        for src in self.sources:
            for ch in sorted(src.connected_channels):
                p = src.partner(ch)
                if ch in block_a and p in block_b and (a != b or ch < p):
                    out.append((src.name, ch, p))
        return out

    def problems(self) -> list[str]:
        """Violated plan invariants; empty for a sound plan."""
        out = []
        ids = sorted(self.assignments)
        for a in ids:
            conv, quant = self.assignments[a]
            if quant is None or quant.band is not Band.C_QUANTUM:
                out.append(f"A{a}: quantum channel {quant} outside the quantum band")
            if conv is not None:
                if conv.band is not Band.O_CONVENTIONAL:
                    out.append(f"A{a}: conventional channel {conv} outside the O band")
                if quant is not None and quant.nominal_wavelength - conv.nominal_wavelength != AWG_PERIOD_OFFSET_NM:
                    out.append(f"A{a}: {conv} is not in the AWG period of {quant}")
        owner = {}
        for src in self.sources:
            for ch in src.connected_channels:
                if owner.setdefault(ch, src.name) != src.name:
                    out.append(f"{ch} connected to both {owner[ch]} and {src.name}")
                role = self.roles.get(ch)
                if role is None or role.role is not Role.ENTANGLED or role.source != src.name:
                    out.append(f"{ch} connected to {src.name} but has role {role}")
        for a, b in itertools.combinations_with_replacement(ids, 2):
            if not self.entangled_pairs_between(a, b):
                out.append(f"no entangled pair routed to (A{a}, A{b})")
        return out


def quantum_channels(n: int, start: int = PASSIVE_QUANTUM_START, passband: float = 13.0) -> list[CwdmChannel]:
    return [CwdmChannel(start + 20 * k, passband) for k in range(n)]


def full_plan_pool(passband: float = 13.0) -> list[tuple[CwdmChannel, CwdmChannel]]:
    """(conventional, quantum) CWDM pairs whose passbands sit inside their bands."""
    out = []
    for q in Band.C_QUANTUM.cwdm_channels(passband):
        if q.nominal_wavelength < PASSIVE_QUANTUM_START:
            continue
        w = q.nominal_wavelength - AWG_PERIOD_OFFSET_NM
        try:
            c = CwdmChannel(w, passband)
        except ValueError:
            continue
        if c.band is Band.O_CONVENTIONAL:
            out.append((c, q))
    return out


def entanglement_only_pool(passband: float = 13.0) -> list[CwdmChannel]:
    """The eight CWDM channels from 1470 to 1610 nm."""
    return [CwdmChannel(w, passband) for w in range(ENT_ONLY_QUANTUM_START, 1611, 20)]


def synthesize_channel_plan(n_access: int, grid_spacing: float = 100.0,
                            source_scheme: ConnectionScheme | str = ConnectionScheme.FIXED_SPLIT, *,
                            one_way_fraction: float = 0.5, max_width: float = 70.0,
                            passband: float = 13.0, overlap: bool = False,
                            reserved=()) -> ChannelPlan:
    """Assign CWDM channels per access network and DWDM roles per source.

    Within each access network's quantum block a fraction of the DWDM
    channels is held back for one-way signals; the rest is dealt round-robin
    to the sources touching that network, one mirrored pair at a time, so
    every source's connected set stays closed under pairing.
    """
    scheme = ConnectionScheme(source_scheme)
    if scheme is not ConnectionScheme.FIXED_SPLIT:
        raise PlanError("channel plans are synthesised for the fixed-split connection scheme")
    if not 0 <= one_way_fraction < 1:
        raise PlanError("one-way fraction must be in [0, 1)")
    pool = full_plan_pool(passband)
    if not 1 <= n_access <= len(pool):
        raise PlanError(f"{n_access} access networks requested, {len(pool)} CWDM channel pairs available")
    assignments = {i + 1: pool[i] for i in range(n_access)}
    quant = [assignments[i][1] for i in sorted(assignments)]
    splan = plan_sources_for_pairs(quant, max_width, spacing=grid_spacing, overlap=overlap)
    if splan.infeasible:
        raise PlanError("; ".join(str(x) for x in splan.infeasible))

    an_of = {}
    blocks = {}
    for a, (_, q) in assignments.items():
        blocks[a] = dwdm_channels_in(q, grid_spacing)
        for ch in blocks[a]:
            an_of[ch] = a
    reserved = set(reserved)
    quota = {}
    for a, blk in blocks.items():
        usable = [ch for ch in blk if ch not in reserved]
        keep = math.ceil(len(usable) * one_way_fraction) if one_way_fraction > 0 else 0
        quota[a] = len(usable) - keep

    # candidate pairs per source, every (target_a, target_b) combination it serves
    cand = {}
    for src in splan.sources:
        pairs = []
        for a, b in itertools.combinations_with_replacement(sorted(assignments), 2):
            qa, qb = assignments[a][1], assignments[b][1]
            for x, p in serving_pairs(src, qa, qb):
                pairs.append((abs(2 * x.index - src.center_half_index), x, p))
        pairs.sort(key=lambda t: (t[0], t[1].index))
        cand[src.name] = [(x, p) for _, x, p in pairs]

    taken: dict[DwdmChannel, str] = {}
    used = {a: 0 for a in blocks}
    connected = {s.name: set() for s in splan.sources}

    def try_take(name, x, p) -> bool:
        if x in taken or p in taken or x in reserved or p in reserved:
            return False
        need = {}
        for ch in (x, p):
            need[an_of[ch]] = need.get(an_of[ch], 0) + 1
        if any(used[a] + k > quota[a] for a, k in need.items()):
            return False
        for a, k in need.items():
            used[a] += k
        taken[x] = taken[p] = name
        connected[name] |= {x, p}
        return True

    # first give every access-network pair one DWDM pair, preferring the source planned for it;
    # pairs with the fewest candidate DWDM pairs (self pairs, mostly) go first
    def options(ab):
        qa, qb = assignments[ab[0]][1], assignments[ab[1]][1]
        return sum(len(serving_pairs(s, qa, qb)) for s in splan.sources)

    an_pairs_ = sorted(itertools.combinations_with_replacement(sorted(assignments), 2),
                       key=lambda ab: (options(ab), ab))
    for a, b in an_pairs_:
        qa, qb = assignments[a][1], assignments[b][1]
        ranked = sorted(splan.sources, key=lambda s: (set(s.targets) != {qa, qb}, splan.sources.index(s)))
        for src in ranked:
            pairs = sorted(serving_pairs(src, qa, qb), key=lambda xp: (abs(2 * xp[0].index - src.center_half_index),
                                                                      xp[0].index))
            if any(try_take(src.name, x, p) for x, p in pairs):
                break

    cursor = {s.name: 0 for s in splan.sources}
    progress = True
    while progress:
        progress = False
        for src in splan.sources:
            lst = cand[src.name]
            while cursor[src.name] < len(lst):
                x, p = lst[cursor[src.name]]
                cursor[src.name] += 1
                if try_take(src.name, x, p):
                    progress = True
                    break

    starved = [s.name for s in splan.sources if not connected[s.name]]
    if starved:
        raise PlanError(f"sources {starved} got no DWDM pair: "
                        f"{len(starved)} more entangled pairs needed than the blocks allow")
    roles = {}
    for a, blk in blocks.items():
        for ch in blk:
            if ch in reserved:
                roles[ch] = ChannelRole(Role.RESERVED)
            elif ch in taken:
                roles[ch] = ChannelRole(Role.ENTANGLED, taken[ch])
            else:
                roles[ch] = ChannelRole(Role.ONE_WAY)
        if one_way_fraction > 0 and not any(roles[ch].role is Role.ONE_WAY for ch in blk):
            raise PlanError(f"A{a} has no DWDM channel left for one-way signals")
    sources = [replace(s, connected_channels=frozenset(connected[s.name])) for s in splan.sources]
    return ChannelPlan(assignments, roles, sources, grid_spacing, scheme)


def convert_to_entangled(plan: ChannelPlan, source: str, ch: DwdmChannel) -> ChannelPlan:
    """Connect one more source output pair, taking two one-way channels."""
    src = plan.source(source)
    p = src.partner(ch)
    for c in (ch, p):
        if plan.roles.get(c) != ChannelRole(Role.ONE_WAY):
            raise PlanError(f"{c} is not a free one-way channel")
    roles = dict(plan.roles)
    roles[ch] = roles[p] = ChannelRole(Role.ENTANGLED, source)
    sources = [replace(s, connected_channels=s.connected_channels | {ch, p}) if s.name == source else s
               for s in plan.sources]
    return ChannelPlan(plan.assignments, roles, sources, plan.grid_spacing, plan.scheme)


# --- capacity ------------------------------------------------------------------

@dataclass
class CapacityReport:
    max_access_networks: int
    limiting_factor: LimitingFactor | None
    users_per_an: int
    total_users: int
    witnesses: list[PathLossReport] = field(default_factory=list)
    violations: list[PathLossReport] = field(default_factory=list)
    width_violations: list = field(default_factory=list)
    notes: list[str] = field(default_factory=list)

    @property
    def summary(self) -> str:
        lim = self.limiting_factor.value if self.limiting_factor else "none"
        return f"N={self.max_access_networks}, {self.total_users} users (limited by {lim})"


def _reference(node_kind: NodeKind, n: int, distances: Distances | None, catalog=None, passband=13.0):
    kind = TopologyKind.RING
    kw = {} if catalog is None else {"catalog": catalog}
    return build_reference_network(kind, n, node_kind, distances=distances, passband=passband, **kw)


def max_access_networks(node_kind=NodeKind.CWDM_OADM_SIMPLE, budget_db=DEFAULT_BUDGET_DB,
                        source_width: float = 70.0, *, grid_spacing: float = 100.0,
                        passband: float = 13.0, distances: Distances | None = None,
                        catalog=None, cwdm_pool: int | None = None) -> CapacityReport:
    """Largest ring that meets the loss budget, source width and CWDM spectrum.

    Constraints are tested in the fixed order loss budget, source width,
    CWDM spectrum; the first one that fails at N + 1 is reported.
    """
    node_kind = NodeKind(node_kind)
    if node_kind is NodeKind.ACTIVE_PXC:
        raise ValueError("a reconfigurable mesh is not bounded by these constraints; "
                         "add links and rotate CWDM channels instead")
    budget = as_budget(budget_db)
    if node_kind is NodeKind.CWDM_OADM_SIMPLE:
        pool = entanglement_only_pool(passband)
    else:
        pool = [q for _, q in full_plan_pool(passband)]
    limit = len(pool) if cwdm_pool is None else cwdm_pool
    users_per_an = len(dwdm_channels_in(CwdmChannel(1550, passband), grid_spacing))

    def check(n):
        net = _reference(node_kind, n, distances, catalog, passband)
        reports = required_links(net, budget)
        bad = violations(reports)
        if bad:
            return LimitingFactor.LOSS_BUDGET, reports, bad
        if n <= len(pool):
            splan = plan_sources_for_pairs(pool[:n], source_width, spacing=grid_spacing)
            if splan.infeasible:
                return LimitingFactor.SOURCE_WIDTH, reports, splan.infeasible
        if n > limit or n > len(pool):
            return LimitingFactor.CWDM_SPECTRUM, reports, []
        return None, reports, []

    best, best_reports = 0, []
    n = 1
    while True:
        factor, reports, bad = check(n)
        if factor is not None:
            break
        best, best_reports = n, reports
        n += 1
    witnesses = [w for cls in SignalClass if (w := worst(best_reports, cls)) is not None]
    rep = CapacityReport(best, factor, users_per_an, best * users_per_an, witnesses)
    if factor is LimitingFactor.LOSS_BUDGET:
        rep.violations = bad
    elif factor is LimitingFactor.SOURCE_WIDTH:
        rep.width_violations = bad
    return rep


@dataclass
class ExtensionVerdict:
    feasible: bool
    violations: list[PathLossReport]
    worst: dict  # SignalClass -> PathLossReport
    network: NetworkModel


@dataclass(frozen=True)
class AddedAccessNetwork:
    """Where a new access network joins: mesh links to existing backbone nodes."""
    attach_to: tuple[int, ...] = ()
    span_km: float | None = None


def extend_network(net: NetworkModel, added: AddedAccessNetwork | None = None) -> NetworkModel:
    n = len(net.nodes) + 1
    if net.is_ring:
        return build_reference_network(net.kind, n, net.node_kind, distances=net.distances,
                                       catalog=net.catalog, n_users=net.access[0].n_users)
    if net.kind is not TopologyKind.MESH:
        raise ValueError("only rings and meshes can be extended")
    added = added or AddedAccessNetwork((net.nodes[-1], net.nodes[0]))
    if not added.attach_to:
        raise ValueError("a new mesh node needs at least one link")
    new = max(net.nodes) + 1
    km = added.span_km or net.distances.backbone_km
    edges = net.edges + tuple((a, new, km) for a in added.attach_to)
    access = net.access + (AccessNetwork(max(a.id for a in net.access) + 1, new, net.access[0].n_users),)
    sources = net.sources + tuple(type(s)(f"src{new}", new) for s in net.sources[:1])
    out = replace(net, nodes=net.nodes + (new,), edges=edges, access=access, sources=sources)
    if not nx.is_connected(out.graph()):
        raise ValueError("extension leaves the mesh disconnected")
    return out


def feasibility_of_extension(net: NetworkModel, added_an: AddedAccessNetwork | None = None,
                             budget_db=DEFAULT_BUDGET_DB) -> ExtensionVerdict:
    """Every required link of the network grown by one access network, checked against budget."""
    grown = extend_network(net, added_an)
    reports = required_links(grown, budget_db)
    bad = violations(reports)
    worst_by = {cls: w for cls in SignalClass if (w := worst(reports, cls)) is not None}
    return ExtensionVerdict(not bad, bad, worst_by, grown)
