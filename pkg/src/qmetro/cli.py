"""Command-line entry point: ``qmetro <command> [config.toml] [--records]``.

Exit status 0 on success, 1 when the network is infeasible (the report is
still printed), 2 when the configuration cannot be read.
"""
from __future__ import annotations

import argparse
import sys
import warnings

from .capacity import PlanError, entanglement_only_pool, feasibility_of_extension, max_access_networks, \
    synthesize_channel_plan
from .catalog import CatalogError, NodeKind
from .config import ConfigDocument, ConfigError, build_network, parse_config
from .loss import required_links, worst_case_analysis
from .report import (
    ReportDocument, ReportKind, capacity_report, channel_plan_report, extension_report, loss_table_report,
    schedule_report, source_plan_report, validation_report,
)
from .scheduler import ScheduleError, schedule, validate_configuration
from .source import SourceError, plan_sources_for_pairs
from .topology import RouteError, TopologyKind

EXIT_OK, EXIT_INFEASIBLE, EXIT_CONFIG = 0, 1, 2
COMMANDS = ("validate", "loss-report", "capacity", "plan", "schedule")


def _describe(doc: ConfigDocument) -> str:
    nk = doc.resolved_node_kind
    return f"{doc.kind} of {doc.resolved_n_access} access networks" + (f" ({nk.value} nodes)" if nk else "")


def cmd_validate(doc: ConfigDocument) -> ReportDocument:
    from .topology import validate_network
    net = build_network(doc)
    issues = validate_network(net)
    reports = []
    try:
        reports = required_links(net, doc.budget)
    except (RouteError, CatalogError) as exc:
        issues.append(str(exc))
    return validation_report(issues, reports, _describe(doc))


def cmd_loss_report(doc: ConfigDocument) -> ReportDocument:
    net = build_network(doc)
    table = worst_case_analysis(net, doc.budget)
    return loss_table_report(table, f"Path losses (dB) from A{net.access[0].id}, {_describe(doc)}")


def cmd_capacity(doc: ConfigDocument) -> ReportDocument:
    kind = doc.topology_kind
    if kind is TopologyKind.MESH:
        net = build_network(doc)
        verdict = feasibility_of_extension(net, budget_db=doc.budget)
        return extension_report(verdict, f"adding access network A{len(net.access) + 1} to the {_describe(doc)}")
    if kind is TopologyKind.STAR:
        raise ConfigError("capacity planning needs a ring backbone or a mesh")
    rep = max_access_networks(doc.resolved_node_kind, doc.budget, doc.source_width_nm,
                              grid_spacing=doc.spacing_ghz, passband=doc.cwdm_passband_nm,
                              distances=build_network(doc).distances, catalog=doc.catalog())
    return capacity_report(rep, doc.n_access)


def cmd_plan(doc: ConfigDocument) -> ReportDocument:
    net = build_network(doc)
    n = len(net.access)
    if net.kind is TopologyKind.RING and net.node_kind is NodeKind.PASSIVE_OADM:
        try:
            plan = synthesize_channel_plan(n, doc.spacing_ghz, one_way_fraction=doc.one_way_fraction,
                                           max_width=doc.source_width_nm, passband=doc.cwdm_passband_nm,
                                           overlap=doc.overlap)
        except PlanError as exc:
            out = ReportDocument(ReportKind.CHANNEL_PLAN, ok=False)
            out.records.append({"record": "problem", "detail": str(exc)})
            out.lines.append(f"no channel plan: {exc}")
            return out
        return channel_plan_report(plan)
    if net.kind is TopologyKind.MESH:
        channels = list(doc.quantum_channels)
    else:
        pool = entanglement_only_pool(doc.cwdm_passband_nm)
        if n > len(pool):
            out = ReportDocument(ReportKind.CHANNEL_PLAN, ok=False)
            out.records.append({"record": "problem", "detail": f"{n} access networks, {len(pool)} CWDM channels"})
            out.lines.append(f"no channel plan: {n} access networks but only {len(pool)} CWDM channels")
            return out
        channels = [an.quantum for an in net.access]
    splan = plan_sources_for_pairs(channels, doc.source_width_nm, spacing=doc.spacing_ghz, overlap=doc.overlap)
    return source_plan_report(splan)


def cmd_schedule(doc: ConfigDocument) -> ReportDocument:
    if doc.topology_kind is not TopologyKind.MESH:
        raise ConfigError("schedule needs topology kind \"mesh\"")
    net = build_network(doc)
    try:
        sched = schedule(net, doc.demand_set(), doc.quantum_channels, doc.conventional_channels,
                         budget=doc.budget, max_paths=doc.max_paths)
    except ScheduleError as exc:
        out = ReportDocument(ReportKind.SCHEDULE, ok=False)
        out.records.append({"record": "problem", "detail": str(exc)})
        out.lines.append(f"no schedule: {exc}")
        return out
    verdicts = [validate_configuration(net, c, budget=doc.budget) for c in sched.configurations]
    return schedule_report(sched, verdicts)


HANDLERS = {
    "validate": cmd_validate,
    "loss-report": cmd_loss_report,
    "capacity": cmd_capacity,
    "plan": cmd_plan,
    "schedule": cmd_schedule,
}


def run(command: str, config_text: str, records: bool = False) -> tuple[int, str]:
    """Exit status and standard-output text for one command."""
    doc = parse_config(config_text)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        report = HANDLERS[command](doc)
    body = report.render_records() if records else report.render()
    return (EXIT_OK if report.ok else EXIT_INFEASIBLE), body


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="qmetro", description="Plan and check quantum metropolitan optical networks.")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("config", nargs="?", help="TOML network description (defaults: passive-ring reference)")
    p.add_argument("--records", action="store_true", help="emit JSON Lines records instead of a table")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    text = ""
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                text = fh.read()
        except (OSError, UnicodeDecodeError) as exc:
            print(f"{args.config}: {exc}", file=sys.stderr)
            return EXIT_CONFIG
    try:
        status, body = run(args.command, text, args.records)
    except ConfigError as exc:
        where = args.config or "<defaults>"
        print(f"{where}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (SourceError, PlanError) as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_INFEASIBLE
    sys.stdout.write(body)
    return status


if __name__ == "__main__":
    sys.exit(main())
