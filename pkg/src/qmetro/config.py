"""Declarative network descriptions in TOML.

Every section is optional; missing values fall back to the reference
network of the requested topology kind.

    budget_db = 30
    conventional_budget_db = 35        # optional, unchecked when absent

    [grid]
    spacing_ghz = 100
    cwdm_passband_nm = 13

    [topology]
    kind = "mesh"                      # star | open_ring | ring | mesh
    node_kind = "active_pxc"           # passive_oadm | active_pxc | cwdm_oadm_simple
    n_access = 4
    return_loops = 1
    users_per_an = 16

    [topology.distances]
    user_awg_km = 1.0
    awg_backbone_km = 3.5
    backbone_km = 4.0

    [[edge]]                           # mesh spans; omitted -> cycle plus chord
    a = 1
    b = 2
    length_km = 4.0

    [[source]]                         # source sites; omitted -> reference placement
    node = 1

    [catalog.components]
    awg32 = 3.5

    [catalog.nodes.passive_oadm.add]
    entangled = 3.4

    [demands]
    direct = [[1, 2], [3, 4]]
    entangled = [[1, 2], [3, 3]]

    [schedule]
    quantum_channels = ["C1530", "C1550"]
    conventional_channels = ["C1290", "C1310"]
    max_paths = 4

    [planning]
    source_width_nm = 70
    one_way_fraction = 0.5
    overlap = false
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field

import tomli
import tomli_w

from .catalog import DEFAULT_CATALOG, Action, Catalog, CatalogError, NodeKind, SignalClass
from .loss import Budget
from .scheduler import DemandSet
from .topology import (
    DEFAULT_NODE_KIND, Distances, NetworkModel, TopologyError, TopologyKind, build_reference_network,
)
from .wdm_grid import CwdmChannel

DEFAULT_N_ACCESS = {
    TopologyKind.STAR: 1,
    TopologyKind.OPEN_RING: 8,
    TopologyKind.RING: 3,
    TopologyKind.MESH: 4,
}


class ConfigError(ValueError):
    """Malformed configuration; ``line`` is 1-based when known."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line else message)


@dataclass(frozen=True)
class ConfigDocument:
    budget_db: float = 30.0
    conventional_budget_db: float | None = None
    spacing_ghz: float = 100.0
    cwdm_passband_nm: float = 13.0
    kind: str = "ring"
    node_kind: str | None = None
    n_access: int | None = None
    return_loops: int = 1
    users_per_an: int | None = None
    distances: tuple[float, float, float] = (1.0, 3.5, 4.0)
    edges: tuple[tuple[int, int, float], ...] = ()
    sources: tuple[int, ...] | None = None
    component_losses: tuple[tuple[str, float], ...] = ()
    node_losses: tuple[tuple[str, str, str, float], ...] = ()
    direct: tuple[tuple[int, int], ...] | None = None
    entangled: tuple[tuple[int, int], ...] | None = None
    quantum_channels: tuple[str, ...] = ("C1530", "C1550")
    conventional_channels: tuple[str, ...] = ("C1290", "C1310")
    max_paths: int = 4
    source_width_nm: float = 70.0
    one_way_fraction: float = 0.5
    overlap: bool = False

    @property
    def topology_kind(self) -> TopologyKind:
        return TopologyKind(self.kind)

    @property
    def resolved_node_kind(self) -> NodeKind | None:
        if self.node_kind is not None:
            return NodeKind(self.node_kind)
        return DEFAULT_NODE_KIND[self.topology_kind]

    @property
    def resolved_n_access(self) -> int:
        return self.n_access if self.n_access is not None else DEFAULT_N_ACCESS[self.topology_kind]

    @property
    def budget(self) -> Budget:
        return Budget(self.budget_db, self.budget_db, self.conventional_budget_db)

    def catalog(self) -> Catalog:
        nodes: dict = {}
        for kind, action, cls, db in self.node_losses:
            nodes.setdefault(kind, {})[(action, cls)] = db
        return DEFAULT_CATALOG.with_overrides(dict(self.component_losses), nodes)

    def demand_set(self) -> DemandSet:
        n = self.resolved_n_access
        if self.direct is None and self.entangled is None:
            return DemandSet.complete(n, include_self_pairs=False)
        return DemandSet(frozenset(self.direct or ()), frozenset(self.entangled or ()))


# --- parsing -------------------------------------------------------------------

_HEADER = re.compile(r"^\s*(\[\[?)\s*([^\]]+?)\s*\]\]?")
_KEY = re.compile(r'^\s*("?)([A-Za-z0-9_\-]+)\1\s*=')


def _line_of(text: str, section: str, key: str | None = None) -> int | None:
    """First line declaring ``key`` in ``section`` ("" is the root table), or the section header."""
    current = ""
    for no, line in enumerate(text.splitlines(), 1):
        m = _HEADER.match(line)
        if m:
            current = m.group(2).replace(" ", "")
            if key is None and current == section:
                return no
            continue
        if key is not None and current == section:
            k = _KEY.match(line)
            if k and k.group(2) == key:
                return no
    return None


class _Reader:
    def __init__(self, text: str):
        self.text = text

    def fail(self, message: str, section: str, key: str | None = None):
        raise ConfigError(message, _line_of(self.text, section, key))

    def check_keys(self, table: dict, allowed, section: str):
        for key in table:
            if key not in allowed:
                where = f"[{section}]" if section else "the top level"
                self.fail(f"unknown key {key!r} in {where}", section, key)

    def number(self, table, key, section, default, *, integer=False, minimum=None, allow_none=False):
        if key not in table:
            return default
        v = table[key]
        ok = isinstance(v, int) if integer else isinstance(v, (int, float))
        if isinstance(v, bool) or not ok:
            want = "an integer" if integer else "a number"
            self.fail(f"{key} must be {want}, got {type(v).__name__}", section, key)
        if minimum is not None and v < minimum:
            self.fail(f"{key} must be >= {minimum}", section, key)
        return v if integer else float(v)

    def string(self, table, key, section, default, choices=None):
        if key not in table:
            return default
        v = table[key]
        if not isinstance(v, str):
            self.fail(f"{key} must be a string, got {type(v).__name__}", section, key)
        if choices is not None and v not in choices:
            self.fail(f"{key} must be one of {', '.join(sorted(choices))}; got {v!r}", section, key)
        return v

    def table(self, doc, key, section):
        v = doc.get(key, {})
        if not isinstance(v, dict):
            self.fail(f"{key} must be a table", section, key)
        return v


def parse_config(text: str) -> ConfigDocument:
    """Parse a TOML network description; raises ConfigError with a line number."""
    try:
        raw = tomli.loads(text)
    except tomli.TOMLDecodeError as exc:
        m = re.search(r"line (\d+)", str(exc))
        raise ConfigError(str(exc), int(m.group(1)) if m else None) from None
    r = _Reader(text)
    r.check_keys(raw, {"budget_db", "conventional_budget_db", "grid", "topology", "edge", "source",
                       "catalog", "demands", "schedule", "planning"}, "")
    kw: dict = {}
    kw["budget_db"] = r.number(raw, "budget_db", "", 30.0, minimum=0)
    kw["conventional_budget_db"] = r.number(raw, "conventional_budget_db", "", None, minimum=0)

    grid = r.table(raw, "grid", "")
    r.check_keys(grid, {"spacing_ghz", "cwdm_passband_nm"}, "grid")
    kw["spacing_ghz"] = r.number(grid, "spacing_ghz", "grid", 100.0, minimum=1e-9)
    kw["cwdm_passband_nm"] = r.number(grid, "cwdm_passband_nm", "grid", 13.0, minimum=1e-9)

    topo = r.table(raw, "topology", "")
    r.check_keys(topo, {"kind", "node_kind", "n_access", "return_loops", "users_per_an", "distances"},
                 "topology")
    kw["kind"] = r.string(topo, "kind", "topology", "ring", {k.value for k in TopologyKind})
    kw["node_kind"] = r.string(topo, "node_kind", "topology", None, {k.value for k in NodeKind})
    kw["n_access"] = r.number(topo, "n_access", "topology", None, integer=True, minimum=1)
    kw["return_loops"] = r.number(topo, "return_loops", "topology", 1, integer=True, minimum=0)
    kw["users_per_an"] = r.number(topo, "users_per_an", "topology", None, integer=True, minimum=1)
    dist = r.table(topo, "distances", "topology")
    r.check_keys(dist, {"user_awg_km", "awg_backbone_km", "backbone_km"}, "topology.distances")
    kw["distances"] = tuple(r.number(dist, k, "topology.distances", d, minimum=1e-9)
                            for k, d in (("user_awg_km", 1.0), ("awg_backbone_km", 3.5), ("backbone_km", 4.0)))

    edges = raw.get("edge", [])
    if not isinstance(edges, list):
        r.fail("edge must be an array of tables ([[edge]])", "", "edge")
    out_edges = []
    for e in edges:
        r.check_keys(e, {"a", "b", "length_km"}, "edge")
        if "a" not in e or "b" not in e:
            r.fail("every [[edge]] needs a and b", "edge")
        out_edges.append((r.number(e, "a", "edge", None, integer=True, minimum=1),
                          r.number(e, "b", "edge", None, integer=True, minimum=1),
                          r.number(e, "length_km", "edge", kw["distances"][2], minimum=1e-9)))
    kw["edges"] = tuple(out_edges)

    sources = raw.get("source")
    if sources is not None:
        if not isinstance(sources, list):
            r.fail("source must be an array of tables ([[source]])", "", "source")
        nodes = []
        for s in sources:
            r.check_keys(s, {"node"}, "source")
            if "node" not in s:
                r.fail("every [[source]] needs a node", "source")
            nodes.append(r.number(s, "node", "source", None, integer=True, minimum=1))
        kw["sources"] = tuple(nodes)

    cat = r.table(raw, "catalog", "")
    r.check_keys(cat, {"components", "nodes"}, "catalog")
    comps = r.table(cat, "components", "catalog")
    known = set(DEFAULT_CATALOG.components)
    r.check_keys(comps, known, "catalog.components")
    kw["component_losses"] = tuple(sorted(
        (k, r.number(comps, k, "catalog.components", None, minimum=0)) for k in comps))
    nodes_t = r.table(cat, "nodes", "catalog")
    r.check_keys(nodes_t, {k.value for k in NodeKind}, "catalog.nodes")
    entries = []
    for kind, actions in nodes_t.items():
        sec = f"catalog.nodes.{kind}"
        if not isinstance(actions, dict):
            r.fail(f"{sec} must be a table", "catalog.nodes", kind)
        r.check_keys(actions, {a.value for a in Action}, sec)
        for action, classes in actions.items():
            s2 = f"{sec}.{action}"
            if not isinstance(classes, dict):
                r.fail(f"{s2} must be a table", sec, action)
            r.check_keys(classes, {c.value for c in SignalClass}, s2)
            for cls in classes:
                key = (Action(action), SignalClass(cls))
                if key not in DEFAULT_CATALOG.node_losses[NodeKind(kind)]:
                    r.fail(f"{action} is not an action of {kind}", s2, cls)
                entries.append((kind, action, cls, r.number(classes, cls, s2, None, minimum=0)))
    kw["node_losses"] = tuple(sorted(entries))

    dem = r.table(raw, "demands", "")
    r.check_keys(dem, {"direct", "entangled"}, "demands")
    for key in ("direct", "entangled"):
        if key in dem:
            kw[key] = _pairs(r, dem[key], key)

    sch = r.table(raw, "schedule", "")
    r.check_keys(sch, {"quantum_channels", "conventional_channels", "max_paths"}, "schedule")
    for key, default in (("quantum_channels", ("C1530", "C1550")), ("conventional_channels", ("C1290", "C1310"))):
        kw[key] = _channel_list(r, sch, key, default)
    kw["max_paths"] = r.number(sch, "max_paths", "schedule", 4, integer=True, minimum=1)

    plan = r.table(raw, "planning", "")
    r.check_keys(plan, {"source_width_nm", "one_way_fraction", "overlap"}, "planning")
    kw["source_width_nm"] = r.number(plan, "source_width_nm", "planning", 70.0, minimum=1e-9)
    kw["one_way_fraction"] = r.number(plan, "one_way_fraction", "planning", 0.5, minimum=0)
    if kw["one_way_fraction"] >= 1:
        r.fail("one_way_fraction must be below 1", "planning", "one_way_fraction")
    ov = plan.get("overlap", False)
    if not isinstance(ov, bool):
        r.fail("overlap must be true or false", "planning", "overlap")
    kw["overlap"] = ov
    return ConfigDocument(**kw)


def _pairs(r: _Reader, value, key):
    if not isinstance(value, list):
        r.fail(f"{key} must be a list of [a, b] pairs", "demands", key)
    out = []
    for p in value:
        if (not isinstance(p, list) or len(p) != 2
                or not all(isinstance(x, int) and not isinstance(x, bool) and x >= 1 for x in p)):
            r.fail(f"{key} entries must be [a, b] with positive integer access ids, got {p!r}", "demands", key)
        out.append(tuple(sorted(p)))
    if key == "direct" and any(a == b for a, b in out):
        r.fail("direct pairs join two different access networks", "demands", key)
    return tuple(sorted(set(out)))


def _channel_list(r: _Reader, table, key, default):
    if key not in table:
        return default
    v = table[key]
    if not isinstance(v, list) or not all(isinstance(x, str) for x in v):
        r.fail(f"{key} must be a list of CWDM channel labels such as \"C1550\"", "schedule", key)
    for label in v:
        try:
            CwdmChannel.parse(label)
        except ValueError as exc:
            r.fail(f"{key}: {exc}", "schedule", key)
    return tuple(v)


# --- canonical serialization ---------------------------------------------------

def to_dict(doc: ConfigDocument) -> dict:
    out: dict = {"budget_db": doc.budget_db}
    if doc.conventional_budget_db is not None:
        out["conventional_budget_db"] = doc.conventional_budget_db
    out["grid"] = {"spacing_ghz": doc.spacing_ghz, "cwdm_passband_nm": doc.cwdm_passband_nm}
    topo: dict = {"kind": doc.kind}
    if doc.node_kind is not None:
        topo["node_kind"] = doc.node_kind
    if doc.n_access is not None:
        topo["n_access"] = doc.n_access
    topo["return_loops"] = doc.return_loops
    if doc.users_per_an is not None:
        topo["users_per_an"] = doc.users_per_an
    topo["distances"] = dict(zip(("user_awg_km", "awg_backbone_km", "backbone_km"), doc.distances))
    out["topology"] = topo
    if doc.edges:
        out["edge"] = [{"a": a, "b": b, "length_km": km} for a, b, km in doc.edges]
    if doc.sources is not None:
        out["source"] = [{"node": n} for n in doc.sources]
    if doc.component_losses or doc.node_losses:
        cat: dict = {}
        if doc.component_losses:
            cat["components"] = dict(doc.component_losses)
        if doc.node_losses:
            nodes: dict = {}
            for kind, action, cls, db in doc.node_losses:
                nodes.setdefault(kind, {}).setdefault(action, {})[cls] = db
            cat["nodes"] = nodes
        out["catalog"] = cat
    dem = {}
    if doc.direct is not None:
        dem["direct"] = [list(p) for p in doc.direct]
    if doc.entangled is not None:
        dem["entangled"] = [list(p) for p in doc.entangled]
    if dem:
        out["demands"] = dem
    out["schedule"] = {"quantum_channels": list(doc.quantum_channels),
                       "conventional_channels": list(doc.conventional_channels),
                       "max_paths": doc.max_paths}
    out["planning"] = {"source_width_nm": doc.source_width_nm, "one_way_fraction": doc.one_way_fraction,
                       "overlap": doc.overlap}
    return out


def serialize(doc: ConfigDocument) -> str:
    return tomli_w.dumps(to_dict(doc))


# --- network construction ------------------------------------------------------

def build_network(doc: ConfigDocument) -> NetworkModel:
    """The network a document describes; ConfigError when the pieces do not fit together."""
    kind = doc.topology_kind
    if doc.edges and kind is not TopologyKind.MESH:
        raise ConfigError("[[edge]] blocks apply to mesh topologies only")
    try:
        return build_reference_network(
            kind, doc.resolved_n_access, doc.resolved_node_kind,
            distances=Distances(*doc.distances), catalog=doc.catalog(),
            edges=doc.edges or None, source_nodes=doc.sources, n_users=doc.users_per_an,
            return_loops=doc.return_loops, grid_spacing=doc.spacing_ghz, passband=doc.cwdm_passband_nm)
    except (TopologyError, CatalogError, ValueError) as exc:
        raise ConfigError(str(exc)) from None
