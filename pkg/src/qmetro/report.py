"""Rendered tables and line-oriented records for every report kind."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum

from .capacity import CapacityReport, ChannelPlan, Role
from .catalog import SignalClass
from .loss import CLASS_COLUMNS, LossTable, PathLossReport
from .scheduler import Schedule
from .source import SourcePlan


class ReportKind(Enum):
    LOSS_TABLE = "loss_table"
    CAPACITY = "capacity"
    CHANNEL_PLAN = "channel_plan"
    SCHEDULE = "schedule"
    VALIDATION = "validation"


@dataclass
class ReportDocument:
    kind: ReportKind
    records: list[dict] = field(default_factory=list)
    lines: list[str] = field(default_factory=list)
    ok: bool = True

    def render(self) -> str:
        return "\n".join(self.lines) + "\n"

    def render_records(self) -> str:
        return "".join(json.dumps(r, separators=(", ", ": ")) + "\n" for r in self.records)


def fmt_db(db: float | None) -> str:
    """dB with at most two decimals and no trailing zeros; a dash when undefined."""
    if db is None:
        return "-"
    return f"{db:.2f}".rstrip("0").rstrip(".")


def _num(db: float | None):
    return None if db is None else round(db, 2)


_HEADINGS = {SignalClass.CONVENTIONAL: "Conv.", SignalClass.QUANTUM_ONEWAY: "Quant.",
             SignalClass.ENTANGLED: "Ent."}


def _grid(header: list[str], rows: list[list[str]]) -> list[str]:
    widths = [max(len(r[i]) for r in [header] + rows) for i in range(len(header))]
    line = lambda r: "  ".join(c.rjust(w) for c, w in zip(r, widths)).rstrip()
    return [line(header), "  ".join("-" * w for w in widths)] + [line(r) for r in rows]


def path_record(rep: PathLossReport, **extra) -> dict:
    rec = {"record": "path", **extra, "class": rep.signal_class.value, "endpoints": rep.endpoints,
           "loss_db": _num(rep.total_db)}
    if rep.arm_cdb and len(rep.arm_cdb) > 1:
        rec["arms_db"] = [_num(a) for a in rep.arms_db]
    rec["budget_db"] = rep.budget_db
    rec["feasible"] = rep.feasible
    return rec


def loss_table_report(table: LossTable, title: str = "") -> ReportDocument:
    doc = ReportDocument(ReportKind.LOSS_TABLE)
    if title:
        doc.lines.append(title)
    header = ["x-closest"] + [_HEADINGS[c] for c in CLASS_COLUMNS]
    rows = []
    for x, values in table.as_rows():
        rows.append([str(x)] + [fmt_db(v) for v in values])
        rec = {"record": "loss_cell", "x_closest": x}
        for cls, v in zip(CLASS_COLUMNS, values):
            rec[cls.value] = _num(v)
        doc.records.append(rec)
    doc.lines += _grid(header, rows)
    doc.lines.append("")
    for cls in CLASS_COLUMNS:
        b = table.boundaries.get(cls)
        if b is None:
            continue
        doc.records.append({"record": "boundary", "class": cls.value,
                            "worst_feasible_db": _num(b.worst_feasible_db),
                            "worst_feasible_rows": list(b.worst_feasible_rows or []),
                            "first_infeasible_db": _num(b.first_infeasible_db),
                            "first_infeasible_rows": list(b.first_infeasible_rows or [])})
        rows_ok = ",".join(map(str, b.worst_feasible_rows or ()))
        rows_bad = ",".join(map(str, b.first_infeasible_rows or ()))
        budgets = {rep.budget_db for (_, c), rep in table.cells.items() if c is cls and rep is not None}
        if budgets == {None}:
            doc.lines.append(f"{_HEADINGS[cls]:<7} worst {fmt_db(b.worst_feasible_db)} dB"
                             f" (x={rows_ok or '-'}); no budget applied")
            continue
        doc.lines.append(f"{_HEADINGS[cls]:<7} worst within budget {fmt_db(b.worst_feasible_db)} dB"
                         f" (x={rows_ok or '-'}); first beyond {fmt_db(b.first_infeasible_db)} dB"
                         f" (x={rows_bad or '-'})")
    return doc


def capacity_report(rep: CapacityReport, configured: int | None = None) -> ReportDocument:
    doc = ReportDocument(ReportKind.CAPACITY)
    lim = rep.limiting_factor.value if rep.limiting_factor else None
    doc.records.append({"record": "capacity", "max_access_networks": rep.max_access_networks,
                        "users_per_an": rep.users_per_an, "total_users": rep.total_users,
                        "limiting_factor": lim})
    doc.lines.append(rep.summary)
    doc.lines.append(f"users per access network: {rep.users_per_an}")
    for w in rep.witnesses:
        doc.records.append(path_record(w, role="worst_served"))
        doc.lines.append(f"worst served: {w.describe()}")
    for v in rep.violations:
        doc.records.append(path_record(v, role="blocking"))
        doc.lines.append(f"blocking at N={rep.max_access_networks + 1}: {v.describe()}")
    for v in rep.width_violations:
        doc.records.append({"record": "width_violation", "detail": str(v)})
        doc.lines.append(f"blocking at N={rep.max_access_networks + 1}: {v}")
    if configured is not None:
        doc.ok = configured <= rep.max_access_networks
        verdict = "within capacity" if doc.ok else "exceeds capacity"
        doc.records.append({"record": "configured", "n_access": configured, "within_capacity": doc.ok})
        doc.lines.append(f"configured {configured} access networks: {verdict}")
    return doc


def extension_report(verdict, title: str) -> ReportDocument:
    doc = ReportDocument(ReportKind.CAPACITY, ok=verdict.feasible)
    doc.lines.append(title)
    doc.records.append({"record": "extension", "feasible": verdict.feasible,
                        "n_access": len(verdict.network.access)})
    for cls in CLASS_COLUMNS:
        w = verdict.worst.get(cls)
        if w is not None:
            doc.records.append(path_record(w, role="worst_served"))
            doc.lines.append(f"worst: {w.describe()}")
    for v in verdict.violations:
        doc.records.append(path_record(v, role="blocking"))
        doc.lines.append(f"blocking: {v.describe()}")
    return doc


def channel_plan_report(plan: ChannelPlan) -> ReportDocument:
    doc = ReportDocument(ReportKind.CHANNEL_PLAN)
    header = ["AN", "Conv.", "Quant.", "entangled", "one-way", "reserved"]
    rows = []
    for a in sorted(plan.assignments):
        conv, quant = plan.assignments[a]
        counts = {r: plan.count(a, r) for r in Role}
        rows.append([f"A{a}", conv.label if conv else "-", quant.label, str(counts[Role.ENTANGLED]),
                     str(counts[Role.ONE_WAY]), str(counts[Role.RESERVED])])
        doc.records.append({"record": "access_network", "an": a, "conventional": conv.label if conv else None,
                            "quantum": quant.label, "entangled": counts[Role.ENTANGLED],
                            "one_way": counts[Role.ONE_WAY], "reserved": counts[Role.RESERVED]})
    doc.lines += _grid(header, rows)
    doc.lines.append("")
    doc.lines += _source_lines(doc, plan.sources, {s.name: len(s.connected_channels) for s in plan.sources})
    problems = plan.problems()
    for p in problems:
        doc.records.append({"record": "problem", "detail": p})
        doc.lines.append(f"problem: {p}")
    doc.ok = not problems
    return doc


def _source_lines(doc: ReportDocument, sources, connected=None) -> list[str]:
    lines = []
    for s in sources:
        targets = ", ".join(t.label for t in s.targets)
        rec = {"record": "source", "name": s.name, "center_nm": s.nominal_center_nm,
               "center_exact_nm": round(s.center_wavelength, 3), "width_nm": s.spectral_width,
               "targets": [t.label for t in s.targets]}
        line = f"{s.name}: center {s.nominal_center_nm:g} nm serving ({targets})"
        if connected is not None:
            rec["connected_channels"] = connected[s.name]
            line += f", {connected[s.name]} channels connected"
        doc.records.append(rec)
        lines.append(line)
    return lines


def source_plan_report(plan: SourcePlan) -> ReportDocument:
    doc = ReportDocument(ReportKind.CHANNEL_PLAN, ok=plan.feasible)
    doc.lines += _source_lines(doc, plan.sources)
    for bad in plan.infeasible:
        doc.records.append({"record": "infeasible_pair", "pair": [c.label for c in bad.pair],
                            "required_width_nm": round(bad.required_width, 2), "max_width_nm": bad.max_width})
        doc.lines.append(f"infeasible: {bad}")
    return doc


def schedule_report(sched: Schedule, verdicts=None) -> ReportDocument:
    doc = ReportDocument(ReportKind.SCHEDULE)
    minimal = "minimal" if sched.minimal else "not proven minimal"
    doc.lines.append(f"{len(sched)} configurations ({minimal}; lower bound {sched.lower_bound})")
    doc.records.append({"record": "schedule", "configurations": len(sched), "lower_bound": sched.lower_bound,
                        "non_minimal_possible": sched.non_minimal_possible, "method": sched.method})
    for i, (conf, group) in enumerate(zip(sched.configurations, sched.served), 1):
        ent = [d.ident for d in group if d.kind.value == "entangled"]
        direct = [d.ident for d in group if d.kind.value == "direct"]
        doc.lines.append(f"configuration {i}: entangled {', '.join(ent) or '-'}; direct {', '.join(direct) or '-'}")
        doc.records.append({"record": "configuration", "index": i, "entangled": ent, "direct": direct})
        for d in group:
            r = conf.realizations[d]
            for lp in r.lightpaths:
                path = "-".join(f"N{n}" for n in lp.nodes)
                doc.lines.append(f"  {d.ident}: {lp.channel.label} {lp.start_port} {path} {lp.end_port}")
                doc.records.append({"record": "lightpath", "configuration": i, "demand": d.ident,
                                    "band": lp.band.key, "channel": lp.channel.label, "from": lp.start_port,
                                    "nodes": list(lp.nodes), "to": lp.end_port})
        if verdicts is not None:
            v = verdicts[i - 1]
            doc.records.append({"record": "validation", "configuration": i, "valid": v.valid,
                                "problems": list(v.problems)})
            doc.lines.append(f"  valid: {'yes' if v.valid else 'no'}")
            for p in v.problems:
                doc.lines.append(f"  problem: {p}")
            doc.ok = doc.ok and v.valid
    return doc


def validation_report(issues: list[str], reports: list[PathLossReport], title: str) -> ReportDocument:
    bad = [r for r in reports if not r.feasible]
    doc = ReportDocument(ReportKind.VALIDATION, ok=not issues and not bad)
    doc.lines.append(title)
    doc.records.append({"record": "validation", "structural_issues": len(issues), "paths_checked": len(reports),
                        "over_budget": len(bad)})
    for i in issues:
        doc.records.append({"record": "issue", "detail": i})
        doc.lines.append(f"issue: {i}")
    for r in bad:
        doc.records.append(path_record(r, role="over_budget"))
        doc.lines.append(f"over budget: {r.describe()}")
    doc.lines.append("valid" if doc.ok else "invalid")
    return doc
