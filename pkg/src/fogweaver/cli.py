"""Command-line driver.

Subcommands mirror the pipeline stages::

    fogweaver validate <scenario>
    fogweaver net-schedule <scenario> [-o out.json] [--gantt DIR] [--format svg|ascii]
    fogweaver node-schedule <scenario> [--node ID] [-o out.json] [--gantt DIR]
    fogweaver extensibility <scenario> [--optimize] [-o out.json]
    fogweaver admit <scenario> --dynamic FILE --node ID --core N --horizon MS
                    [--schedule saved.json] [-o out.json]
    fogweaver tesla <scenario> [--interval US] [--disclosure D] [-o out.json]
    fogweaver pipeline <scenario> [-o report.json] [--gantt DIR] [--format ...]

Exit codes: 0 success, 1 validation failure, 2 infeasible, 3 I/O error.
"""

from __future__ import annotations

import argparse
import json
import pathlib
import sys
from fractions import Fraction

from . import __version__
from .dsl import parse_scenario
from .errors import FogweaverError, InfeasibleError
from .extensibility import admit_dynamic, ext_metric, optimize_extensibility
from .gantt import emit_gantt
from .gclsched import gcl_export, synthesize_gcl, verify_net_schedule
from .nodesched import (
    node_schedule_from_json,
    node_schedule_to_json,
    verify_node_schedule,
)
from .pipeline import (
    EXIT_INFEASIBLE,
    EXIT_IO,
    EXIT_OK,
    EXIT_VALIDATION,
    net_summary,
    node_summary,
    run_pipeline,
    synthesize_all_nodes,
)
from .scenario import Scenario, TaskSpec, validate, with_params
from .teslasec import TeslaConfig, apply_tesla, secured_delay, tesla_overhead_report


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fogweaver",
        description="Offline schedule synthesis for TSN-based fog platforms.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, gantt=True):
        p.add_argument("scenario", help="scenario description file")
        p.add_argument("-o", "--output", metavar="PATH",
                       help="write the JSON result here")
        p.add_argument("--d-hop", type=float, metavar="US",
                       help="override the per-hop forwarding latency")
        p.add_argument("--seed", type=int, help="override the solver seed")
        if gantt:
            p.add_argument("--gantt", metavar="DIR",
                           help="write Gantt charts into this directory")
            p.add_argument("--format", choices=("svg", "ascii"), default="svg",
                           help="chart format (default svg)")

    add_common(sub.add_parser("validate", help="check a scenario"), gantt=False)
    add_common(sub.add_parser("net-schedule", help="synthesize the GCLs"))
    p = sub.add_parser("node-schedule", help="synthesize node schedules")
    add_common(p)
    p.add_argument("--node", help="only this fog node")

    p = sub.add_parser("extensibility", help="idle-time metrics per core")
    add_common(p, gantt=False)
    p.add_argument("--optimize", action="store_true",
                   help="also optimize and report the improved metrics")

    p = sub.add_parser("admit", help="simulate dynamic-task admission")
    add_common(p, gantt=False)
    p.add_argument("--dynamic", required=True, metavar="FILE",
                   help="JSON file with the dynamic task set")
    p.add_argument("--node", required=True, help="fog node to admit into")
    p.add_argument("--core", required=True, type=int, help="core index")
    p.add_argument("--horizon", required=True, type=int, metavar="MS",
                   help="simulation horizon in milliseconds")
    p.add_argument("--schedule", metavar="JSON",
                   help="admit into this exported node schedule instead of "
                        "synthesizing one from the scenario")

    p = sub.add_parser("tesla", help="apply the security overlay")
    add_common(p, gantt=False)
    p.add_argument("--interval", type=int, metavar="US",
                   help="key interval in microseconds (default 1000)")
    p.add_argument("--disclosure", type=int, metavar="D",
                   help="key disclosure delay in intervals (default 1)")

    add_common(sub.add_parser("pipeline", help="run every stage"))
    return parser


def _load_scenario(args) -> Scenario:
    text = pathlib.Path(args.scenario).read_text(encoding="utf-8")
    s = parse_scenario(text)
    if getattr(args, "d_hop", None) is not None:
        s = with_params(s, d_hop_us=Fraction(str(args.d_hop)))
    if getattr(args, "seed", None) is not None:
        s = with_params(s, solver_seed=args.seed)
    return s


def _emit(args, payload: dict) -> None:
    text = json.dumps(payload, indent=2) + "\n"
    if args.output:
        pathlib.Path(args.output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _validated(args) -> Scenario:
    s = _load_scenario(args)
    report = validate(s)
    if not report.ok:
        for v in report:
            print(str(v), file=sys.stderr)
        raise SystemExit(EXIT_VALIDATION)
    return s


def cmd_validate(args) -> int:
    s = _load_scenario(args)
    report = validate(s)
    if report.ok:
        print(f"ok: {len(s.streams)} streams, {len(s.applications)} "
              f"applications, {len(s.nodes)} fog nodes")
        return EXIT_OK
    for v in report:
        print(str(v), file=sys.stderr)
    return EXIT_VALIDATION


def cmd_net_schedule(args) -> int:
    s = _validated(args)
    ns = synthesize_gcl(s)
    assert verify_net_schedule(ns, s).ok
    _emit(args, {"summary": net_summary(ns, s), "gcl": gcl_export(ns)})
    if args.gantt:
        directory = pathlib.Path(args.gantt)
        directory.mkdir(parents=True, exist_ok=True)
        ext = "svg" if args.format == "svg" else "txt"
        (directory / f"net.{ext}").write_text(emit_gantt(ns, args.format),
                                              encoding="utf-8")
    return EXIT_OK


def cmd_node_schedule(args) -> int:
    s = _validated(args)
    schedules = synthesize_all_nodes(s)
    if args.node:
        schedules = [n for n in schedules if n.node == args.node]
        if not schedules:
            print(f"no applications on node {args.node!r}", file=sys.stderr)
            return EXIT_VALIDATION
    for n in schedules:
        assert verify_node_schedule(n).ok
    _emit(args, {"nodes": [node_summary(n) for n in schedules],
                 "tables": [node_schedule_to_json(n) for n in schedules]})
    if args.gantt:
        directory = pathlib.Path(args.gantt)
        directory.mkdir(parents=True, exist_ok=True)
        ext = "svg" if args.format == "svg" else "txt"
        for n in schedules:
            (directory / f"node_{n.node}.{ext}").write_text(
                emit_gantt(n, args.format), encoding="utf-8")
    return EXIT_OK


def cmd_extensibility(args) -> int:
    s = _validated(args)
    rows = []
    for n in synthesize_all_nodes(s):
        opt = optimize_extensibility(n) if args.optimize else None
        for core in range(n.cores):
            row = {"node": n.node, "core": core, "metric": ext_metric(n, core)}
            if opt is not None:
                row["metric_optimized"] = ext_metric(opt, core)
            rows.append(row)
    _emit(args, {"cores": rows})
    return EXIT_OK


def _load_dynamic_tasks(path: str) -> list[TaskSpec]:
    doc = json.loads(pathlib.Path(path).read_text(encoding="utf-8"))
    tasks = []
    for row in doc["tasks"]:
        period = row.get("period_us", row.get("period_ms", 0) * 1000)
        tasks.append(TaskSpec(row["id"], Fraction(str(row["wcet_us"])), period,
                              row.get("deadline_us")))
    return tasks


def cmd_admit(args) -> int:
    dynamic = _load_dynamic_tasks(args.dynamic)
    if args.schedule:
        doc = json.loads(pathlib.Path(args.schedule).read_text(encoding="utf-8"))
        schedule = node_schedule_from_json(doc)
        if schedule.node != args.node:
            print(f"schedule file describes node {schedule.node!r}, "
                  f"not {args.node!r}", file=sys.stderr)
            return EXIT_VALIDATION
    else:
        s = _validated(args)
        matches = [n for n in synthesize_all_nodes(s) if n.node == args.node]
        if not matches:
            print(f"no applications on node {args.node!r}", file=sys.stderr)
            return EXIT_VALIDATION
        schedule = matches[0]
    report = admit_dynamic(schedule, args.core, dynamic, args.horizon * 1000)
    _emit(args, report.to_json())  # a deadline miss is a result, not an error
    return EXIT_OK


def cmd_tesla(args) -> int:
    s = _validated(args)
    overrides = {}
    if args.interval is not None:
        overrides["key_interval_us"] = args.interval
    if args.disclosure is not None:
        overrides["disclosure_delay"] = args.disclosure
    cfg = TeslaConfig(**overrides)
    ns = synthesize_gcl(s)
    overlay, secured = apply_tesla(s, ns, cfg)
    secured_ns = synthesize_gcl(secured)
    before = {st.id: ns.per_stream[st.id].ed_us for st in s.streams}
    after = {
        st.id: secured_delay(secured.stream(st.id),
                             secured_ns.per_stream[st.id].ed_us, cfg,
                             send_offset_us=secured_ns.offsets[st.id])
        for st in s.streams
    }
    payload = tesla_overhead_report(before, after).to_json()
    payload["security_tasks"] = len(overlay.tasks)
    _emit(args, payload)
    return EXIT_OK


def cmd_pipeline(args) -> int:
    code, report = run_pipeline(
        args.scenario,
        d_hop_us=Fraction(str(args.d_hop)) if args.d_hop is not None else None,
        seed=args.seed,
        out=args.output,
        gantt_dir=args.gantt,
        gantt_format=args.format,
    )
    if not args.output:
        sys.stdout.write(json.dumps(report, indent=2) + "\n")
    if code == EXIT_VALIDATION:
        for line in report.get("validation", []):
            print(line, file=sys.stderr)
    return code


_COMMANDS = {
    "validate": cmd_validate,
    "net-schedule": cmd_net_schedule,
    "node-schedule": cmd_node_schedule,
    "extensibility": cmd_extensibility,
    "admit": cmd_admit,
    "tesla": cmd_tesla,
    "pipeline": cmd_pipeline,
}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except InfeasibleError as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        if exc.unplaced:
            print(f"unplaced: {', '.join(exc.unplaced)}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except FogweaverError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
