import json
import re
from pathlib import Path

import pytest

import oracles
from qmetro.cli import EXIT_CONFIG, EXIT_INFEASIBLE, EXIT_OK, main, run
from qmetro.config import ConfigDocument, ConfigError, build_network, parse_config, serialize
from qmetro.topology import TopologyKind

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


def test_empty_document_is_passive_ring_reference():
    doc = parse_config("")
    assert doc == ConfigDocument()
    net = build_network(doc)
    assert net.kind is TopologyKind.RING and len(net.access) == 3
    assert net.node_kind.value == "passive_oadm"


def test_unknown_key_is_named_with_line():
    text = "budget_db = 30\n[topology]\nkind = \"ring\"\nflavour = 2\n"
    with pytest.raises(ConfigError) as exc:
        parse_config(text)
    assert exc.value.line == 4 and "flavour" in str(exc.value)


def test_unknown_section_rejected():
    with pytest.raises(ConfigError, match="routing"):
        parse_config("[routing]\nx = 1\n")


def test_duplicate_key_has_line_number():
    with pytest.raises(ConfigError) as exc:
        parse_config("budget_db = 30\nbudget_db = 25\n")
    assert exc.value.line == 2


def test_type_mismatch_has_line_number():
    with pytest.raises(ConfigError) as exc:
        parse_config("[grid]\n\nspacing_ghz = \"wide\"\n")
    assert exc.value.line == 3 and "spacing_ghz" in str(exc.value)


def test_bad_enum_and_channel():
    with pytest.raises(ConfigError, match="kind"):
        parse_config('[topology]\nkind = "bus"\n')
    with pytest.raises(ConfigError, match="quantum_channels"):
        parse_config('[schedule]\nquantum_channels = ["C1555"]\n')


def test_round_trip_of_every_sample():
    for path in sorted(CONFIGS.glob("*.toml")):
        doc = parse_config(path.read_text())
        assert parse_config(serialize(doc)) == doc, path.name


def test_round_trip_with_overrides():
    text = """
budget_db = 28
conventional_budget_db = 35
[topology]
kind = "mesh"
n_access = 4
[[edge]]
a = 1
b = 2
[catalog.components]
awg32 = 3.5
[catalog.nodes.active_pxc.cross]
entangled = 2.0
[demands]
direct = [[2, 1]]
entangled = [[3, 3]]
"""
    doc = parse_config(text)
    assert doc.direct == ((1, 2),)
    assert parse_config(serialize(doc)) == doc
    assert doc.catalog()["awg32"].loss_cdb


def test_budget_25_shrinks_entanglement_only_capacity():
    text = (CONFIGS / "entanglement_only_ring.toml").read_text().replace("budget_db = 30", "budget_db = 25")
    status, body = run("capacity", text, records=True)
    first = json.loads(body.splitlines()[0])
    assert first["max_access_networks"] == oracles.ent_only_capacity(25) == 6
    assert status == EXIT_INFEASIBLE  # 8 networks configured, only 6 fit


def test_loss_report_renders_table_values():
    status, body = run("loss-report", (CONFIGS / "passive_ring.toml").read_text())
    assert status == EXIT_OK
    rows = [l.split() for l in body.splitlines() if re.match(r"\s*\d+\s", l)]
    assert rows == [["0", "2.64", "2.4", "-"], ["1", "20.66", "18.5", "11"],
                    ["2", "26.74", "24.1", "16.6"], ["3", "32.82", "29.7", "22.2"]]


def test_table_and_records_agree():
    text = (CONFIGS / "mesh.toml").read_text()
    _, table = run("loss-report", text)
    _, recs = run("loss-report", text, records=True)
    cells = [json.loads(l) for l in recs.splitlines() if '"loss_cell"' in l]
    rows = [l.split() for l in table.splitlines() if re.match(r"\s*\d+\s", l)]
    for rec, row in zip(cells, rows):
        rendered = [None if v == "-" else float(v) for v in row[1:]]
        assert rendered == [rec["conventional"], rec["quantum_oneway"], rec["entangled"]]


def test_capacity_command_on_entanglement_only_reference():
    status, body = run("capacity", (CONFIGS / "entanglement_only_ring.toml").read_text())
    assert status == EXIT_OK and body.startswith("N=8, 128 users")


def test_schedule_command_lists_three_configurations():
    status, body = run("schedule", (CONFIGS / "mesh.toml").read_text())
    assert status == EXIT_OK
    assert body.startswith("3 configurations")
    assert len(re.findall(r"^configuration \d", body, re.M)) == 3


def test_output_is_deterministic():
    text = (CONFIGS / "mesh.toml").read_text()
    for cmd in ("validate", "loss-report", "capacity", "plan", "schedule"):
        assert run(cmd, text) == run(cmd, text)
        assert run(cmd, text, True) == run(cmd, text, True)


def test_records_keep_field_order():
    _, body = run("capacity", (CONFIGS / "passive_ring.toml").read_text(), records=True)
    first = json.loads(body.splitlines()[0])
    assert list(first) == ["record", "max_access_networks", "users_per_an", "total_users", "limiting_factor"]


def test_main_exit_codes(tmp_path, capsys):
    bad = tmp_path / "bad.toml"
    bad.write_text("[topology]\nkindd = \"ring\"\n")
    assert main(["validate", str(bad)]) == EXIT_CONFIG
    assert "kindd" in capsys.readouterr().err
    assert main(["validate", str(tmp_path / "missing.toml")]) == EXIT_CONFIG
    assert main(["validate", str(CONFIGS / "passive_ring.toml")]) == EXIT_OK
    big = tmp_path / "big.toml"
    big.write_text('[topology]\nkind = "ring"\nnode_kind = "passive_oadm"\nn_access = 4\n')
    assert main(["validate", str(big)]) == EXIT_INFEASIBLE
    out = capsys.readouterr().out
    assert "over budget" in out and "33.2" in out


def test_schedule_requires_mesh():
    status = main(["schedule", str(CONFIGS / "passive_ring.toml")])
    assert status == EXIT_CONFIG
