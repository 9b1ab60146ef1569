"""End-to-end pipeline: validate, schedule network and nodes, quantify
extensibility, apply the security overlay, and emit one machine-readable
report.

Reports are plain dicts of JSON-compatible values, assembled in a fixed
order with no timestamps, so two runs over the same inputs and seed produce
byte-identical files.
"""

from __future__ import annotations

import hashlib
import json
import pathlib
from fractions import Fraction

from . import __version__
from .errors import InfeasibleError
from .extensibility import ext_metric, optimize_extensibility
from .gantt import emit_gantt
from .gclsched import (
    NetSchedule,
    gcl_export,
    qoc_proxy,
    synthesize_gcl,
    verify_net_schedule,
)
from .netmodel import lower_bound_delay, resolve_route
from .nodesched import (
    NodeSchedule,
    map_to_cores,
    node_schedule_to_json,
    synthesize_node_schedule,
    utilization_report,
    verify_node_schedule,
)
from .scenario import Scenario, validate, with_params
from .teslasec import TeslaConfig, apply_tesla, secured_delay, tesla_overhead_report
from .units import time_to_number

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_INFEASIBLE = 2
EXIT_IO = 3


def _num(t) -> int | float:
    return time_to_number(Fraction(t))


def scenario_digest(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def _report_skeleton(text: str, s: Scenario | None, seed: int | None) -> dict:
    return {
        "version": __version__,
        "seed": seed if seed is not None
        else (s.params.solver_seed if s else None),
        "scenario": {
            "digest": scenario_digest(text),
            "nodes": len(s.nodes) if s else 0,
            "streams": len(s.streams) if s else 0,
            "applications": len(s.applications) if s else 0,
        },
        "net": None,
        "nodes": [],
        "extensibility": None,
        "tesla": None,
    }


def net_summary(ns: NetSchedule, s: Scenario) -> dict:
    rows = []
    for st in s.streams:
        timing = ns.per_stream[st.id]
        route = resolve_route(s, st)
        rows.append({
            "id": st.id,
            "offset_us": _num(ns.offsets[st.id]),
            "ed_us": _num(timing.ed_us),
            "jitter_us": _num(timing.jitter_us),
            "deadline_us": st.deadline_us,
            "lower_bound_us": _num(lower_bound_delay(st, route, s.params)),
        })
    verification = verify_net_schedule(ns, s)
    return {
        "cycle_us": ns.cycle_us,
        "qoc_proxy": float(qoc_proxy(ns, s)),
        "streams": rows,
        "verification": "clean" if verification.ok
        else [str(v) for v in verification],
    }


def node_summary(ns: NodeSchedule) -> dict:
    verification = verify_node_schedule(ns)
    return {
        "node": ns.node,
        "major_frame_us": ns.major_frame_us,
        "per_core_utilization": [_num(u) for u in ns.per_core_utilization],
        "partitions": len(ns.partitions),
        "slices": len(ns.slices),
        "verification": "clean" if verification.ok
        else [str(v) for v in verification],
    }


def synthesize_all_nodes(s: Scenario) -> list[NodeSchedule]:
    schedules = []
    for node in s.nodes:
        apps = list(s.apps_on(node.id))
        if not apps:
            continue
        mapping = map_to_cores(apps, node.cores)
        schedules.append(synthesize_node_schedule(node, apps, mapping))
    return schedules


def run_pipeline(scenario_path: str | pathlib.Path, *,
                 d_hop_us=None, seed: int | None = None,
                 out: str | pathlib.Path | None = None,
                 gantt_dir: str | pathlib.Path | None = None,
                 gantt_format: str = "svg",
                 tesla_config: TeslaConfig | None = None,
                 ) -> tuple[int, dict]:
    """Run every stage on a scenario file; returns (exit code, report).

    Stages run in order - validation, network schedule, node schedules,
    extensibility, security overlay - and stop at the first validation
    failure (exit 1) or infeasibility (exit 2), leaving the corresponding
    marker in the report. File-system problems raise OSError; the CLI maps
    those to exit 3.
    """
    from .dsl import parse_scenario  # local import keeps module load light
    from .errors import FogweaverError

    text = pathlib.Path(scenario_path).read_text(encoding="utf-8")
    report = _report_skeleton(text, None, seed)
    try:
        s = parse_scenario(text)
    except FogweaverError as exc:
        report["validation"] = [str(exc)]
        _write_artifacts(report, out, None, [], gantt_dir, gantt_format)
        return EXIT_VALIDATION, report

    if d_hop_us is not None:
        s = with_params(s, d_hop_us=Fraction(d_hop_us))
    if seed is not None:
        s = with_params(s, solver_seed=seed)
    report = _report_skeleton(text, s, seed)

    validation = validate(s)
    if not validation.ok:
        report["validation"] = [str(v) for v in validation]
        _write_artifacts(report, out, None, [], gantt_dir, gantt_format)
        return EXIT_VALIDATION, report
    report["validation"] = []

    try:
        ns = synthesize_gcl(s)
    except InfeasibleError as exc:
        report["net"] = {"infeasible": str(exc), "unplaced": list(exc.unplaced)}
        _write_artifacts(report, out, None, [], gantt_dir, gantt_format)
        return EXIT_INFEASIBLE, report
    report["net"] = net_summary(ns, s)

    try:
        schedules = synthesize_all_nodes(s)
    except InfeasibleError as exc:
        report["nodes"] = [{"infeasible": str(exc), "unplaced": list(exc.unplaced)}]
        _write_artifacts(report, out, ns, [], gantt_dir, gantt_format)
        return EXIT_INFEASIBLE, report
    report["nodes"] = [node_summary(n) for n in schedules]
    util = utilization_report(schedules)
    report["utilization"] = {
        "average": _num(util.average),
        "max": _num(util.max_value),
        "max_node": util.max_node,
        "max_core": util.max_core,
    }

    ext_rows = []
    optimized: list[NodeSchedule] = []
    for n in schedules:
        opt = optimize_extensibility(n)
        optimized.append(opt)
        for core in range(n.cores):
            ext_rows.append({
                "node": n.node,
                "core": core,
                "metric": ext_metric(n, core),
                "metric_optimized": ext_metric(opt, core),
            })
    report["extensibility"] = {"cores": ext_rows}

    cfg = tesla_config or TeslaConfig()
    try:
        overlay, secured = apply_tesla(s, ns, cfg)
        secured_ns = synthesize_gcl(secured)
    except InfeasibleError as exc:
        report["tesla"] = {"infeasible": str(exc), "unplaced": list(exc.unplaced)}
        _write_artifacts(report, out, ns, schedules, gantt_dir, gantt_format)
        return EXIT_INFEASIBLE, report
    before = {st.id: ns.per_stream[st.id].ed_us for st in s.streams}
    after = {
        st.id: secured_delay(secured.stream(st.id),
                             secured_ns.per_stream[st.id].ed_us, cfg,
                             send_offset_us=secured_ns.offsets[st.id])
        for st in s.streams
    }
    overhead = tesla_overhead_report(before, after)
    report["tesla"] = {
        "config": {
            "mac_bytes": cfg.mac_bytes,
            "key_bytes": cfg.key_bytes,
            "key_interval_us": cfg.key_interval_us,
            "disclosure_delay": cfg.disclosure_delay,
            "grow_frames": cfg.grow_frames,
        },
        "security_tasks": len(overlay.tasks),
        **overhead.to_json(),
    }

    _write_artifacts(report, out, ns, schedules, gantt_dir, gantt_format)
    return EXIT_OK, report


def report_to_json(report: dict) -> str:
    return json.dumps(report, indent=2) + "\n"


def _write_artifacts(report: dict, out, ns: NetSchedule | None,
                     schedules: list[NodeSchedule],
                     gantt_dir, gantt_format: str) -> None:
    if out is not None:
        pathlib.Path(out).write_text(report_to_json(report), encoding="utf-8")
    if gantt_dir is None:
        return
    directory = pathlib.Path(gantt_dir)
    directory.mkdir(parents=True, exist_ok=True)
    ext = "svg" if gantt_format == "svg" else "txt"
    if ns is not None:
        (directory / f"net.{ext}").write_text(
            emit_gantt(ns, gantt_format), encoding="utf-8")
        (directory / "gcl.json").write_text(
            json.dumps(gcl_export(ns), indent=2) + "\n", encoding="utf-8")
    for n in schedules:
        (directory / f"node_{n.node}.{ext}").write_text(
            emit_gantt(n, gantt_format), encoding="utf-8")
        (directory / f"node_{n.node}.json").write_text(
            json.dumps(node_schedule_to_json(n), indent=2) + "\n",
            encoding="utf-8")
