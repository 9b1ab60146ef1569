import json

import pytest

from fogweaver.cli import main
from fogweaver.fixtures import uc1_text
from fogweaver.pipeline import run_pipeline


@pytest.fixture()
def uc1_file(tmp_path):
    path = tmp_path / "uc1.fog"
    path.write_text(uc1_text(), encoding="utf-8")
    return path


def test_validate_ok(uc1_file, capsys):
    assert main(["validate", str(uc1_file)]) == 0
    assert "10 streams" in capsys.readouterr().out


def test_validate_reports_violations(tmp_path, capsys):
    bad = tmp_path / "bad.fog"
    bad.write_text('node E1 { cores 2 class 1 }\n'
                   'app "a" on E1 { level 1 tasks 1 period 10ms util 1.2 }\n')
    assert main(["validate", str(bad)]) == 1
    assert "utilization" in capsys.readouterr().err


def test_malformed_file_exits_1(tmp_path, capsys):
    bad = tmp_path / "bad.fog"
    bad.write_text("node { huh }")
    assert main(["validate", str(bad)]) == 1
    assert capsys.readouterr().err


def test_missing_file_exits_3(tmp_path, capsys):
    assert main(["validate", str(tmp_path / "nope.fog")]) == 3
    assert "i/o error" in capsys.readouterr().err


def test_pipeline_end_to_end(uc1_file, tmp_path):
    out = tmp_path / "report.json"
    gantt = tmp_path / "gantt"
    code = main(["pipeline", str(uc1_file), "-o", str(out),
                 "--gantt", str(gantt), "--format", "ascii"])
    assert code == 0
    report = json.loads(out.read_text())
    assert len(report["net"]["streams"]) == 10
    assert len(report["nodes"]) == 5
    assert report["net"]["verification"] == "clean"
    assert all(n["verification"] == "clean" for n in report["nodes"])
    assert report["utilization"]["average"] == 0.574
    assert report["tesla"]["security_tasks"] == 20
    assert (gantt / "net.txt").exists()
    assert (gantt / "gcl.json").exists()
    assert (gantt / "node_E3.txt").exists()


def test_pipeline_reports_are_byte_identical(uc1_file, tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert main(["pipeline", str(uc1_file), "-o", str(a), "--seed", "42"]) == 0
    assert main(["pipeline", str(uc1_file), "-o", str(b), "--seed", "42"]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_pipeline_infeasible_exits_2(tmp_path):
    text = """
    switch A
    switch B
    link A -> B
    stream "s1" { src A dst B size 1500B period 200us criticality 3 route A,B }
    stream "s2" { src A dst B size 1500B period 200us criticality 3 route A,B }
    """
    path = tmp_path / "overloaded.fog"
    path.write_text(text)
    out = tmp_path / "report.json"
    code = main(["pipeline", str(path), "-o", str(out)])
    assert code == 2
    report = json.loads(out.read_text())
    assert "infeasible" in report["net"]
    assert report["net"]["unplaced"]


def test_net_schedule_subcommand(uc1_file, tmp_path):
    out = tmp_path / "net.json"
    assert main(["net-schedule", str(uc1_file), "-o", str(out)]) == 0
    doc = json.loads(out.read_text())
    eds = {row["id"]: row["ed_us"] for row in doc["summary"]["streams"]}
    assert eds["S1 data"] == 60
    assert {p["port"] for p in doc["gcl"]} == {
        "S1->W1", "W1->E1", "S2->W1", "W1->E2", "S3->W2", "W2->E3",
        "S4->W2", "W2->E4", "S5->W3", "W3->E5", "E2->W1", "E5->W3",
        "W3->W2", "S6->W3", "E4->W2", "E3->W2", "W2->W1",
    }


def test_node_schedule_single_node(uc1_file, tmp_path):
    out = tmp_path / "nodes.json"
    assert main(["node-schedule", str(uc1_file), "--node", "E3",
                 "-o", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert [n["node"] for n in doc["nodes"]] == ["E3"]
    assert doc["tables"][0]["major_frame_us"] == 30_000


def test_extensibility_subcommand(uc1_file, tmp_path):
    out = tmp_path / "ext.json"
    assert main(["extensibility", str(uc1_file), "--optimize",
                 "-o", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert len(doc["cores"]) == 10
    for row in doc["cores"]:
        assert row["metric_optimized"] <= row["metric"]


def test_admit_subcommand_on_fixture_schedule(uc1_file, tmp_path):
    from fogweaver.fixtures import fixture_text

    sched = tmp_path / "base.json"
    sched.write_text(fixture_text("extensibility_base.json"))
    dyn = tmp_path / "dynamic.json"
    dyn.write_text(json.dumps({"tasks": [
        {"id": "app1", "wcet_us": 1020, "period_ms": 6},
        {"id": "app2", "wcet_us": 1040, "period_ms": 8},
        {"id": "app3", "wcet_us": 1500, "period_ms": 10},
        {"id": "app4", "wcet_us": 1560, "period_ms": 12},
    ]}))
    out = tmp_path / "admit.json"
    code = main(["admit", str(uc1_file), "--dynamic", str(dyn),
                 "--node", "E4", "--core", "2", "--horizon", "120",
                 "--schedule", str(sched), "-o", str(out)])
    assert code == 0
    doc = json.loads(out.read_text())
    assert doc["admitted"]["app4"] is False
    assert any(m["deadline_us"] == 12_000 for m in doc["misses"])


def test_d_hop_override_changes_delays(uc1_file, tmp_path):
    out = tmp_path / "net.json"
    assert main(["net-schedule", str(uc1_file), "--d-hop", "0",
                 "-o", str(out)]) == 0
    doc = json.loads(out.read_text())
    eds = {row["id"]: row["ed_us"] for row in doc["summary"]["streams"]}
    assert eds["S1 data"] == 56  # pure wire time once forwarding is free


def test_tesla_subcommand(uc1_file, tmp_path):
    out = tmp_path / "tesla.json"
    assert main(["tesla", str(uc1_file), "--interval", "1000",
                 "--disclosure", "1", "-o", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert doc["security_tasks"] == 20
    assert len(doc["streams"]) == 10
    assert doc["avg_delta_us"] > 0


def test_run_pipeline_api(uc1_file):
    code, report = run_pipeline(uc1_file)
    assert code == 0
    assert report["scenario"]["streams"] == 10
