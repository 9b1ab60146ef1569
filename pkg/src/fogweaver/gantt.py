"""Gantt rendering of network and node schedules (SVG and plain text).

Both renderers list every window/slice exactly once. The text form is a
per-lane timeline listing (stable, diffable, terminal-friendly); the SVG
form draws filled boxes for execution slices and frame windows, transparent
outlines for partition windows, a small arrow head on slices that continue
after preemption, and a distinct heavy border on missed-deadline boxes.
Output is deterministic: no timestamps, no generated ids.
"""

from __future__ import annotations

from fractions import Fraction

from .gclsched import NetSchedule
from .nodesched import NodeSchedule
from .units import time_to_number

_PALETTE = [
    "#4e79a7", "#f28e2b", "#59a14f", "#e15759", "#76b7b2",
    "#edc948", "#b07aa1", "#ff9da7", "#9c755f", "#bab0ac",
]


def _fmt(t) -> str:
    n = time_to_number(t)
    return f"{n:g}" if isinstance(n, float) else str(n)


def emit_gantt(schedule: NetSchedule | NodeSchedule, format: str = "ascii",
               missed=()) -> str:
    """Render a schedule as an ``ascii`` listing or an ``svg`` document.

    ``missed`` is a collection of ``(task_id, job_index)`` pairs (node
    schedules only) whose boxes get the missed-deadline style.
    """
    if format not in ("ascii", "svg"):
        raise ValueError(f"format must be 'ascii' or 'svg', got {format!r}")
    missed = set(missed)
    if isinstance(schedule, NetSchedule):
        lanes = _net_lanes(schedule)
        span = schedule.cycle_us
        title = f"network schedule, cycle {span} us"
    else:
        lanes = _node_lanes(schedule, missed)
        span = schedule.major_frame_us
        title = (f"node {schedule.node} schedule, "
                 f"major frame {span} us")
    if format == "ascii":
        return _ascii(title, span, lanes)
    return _svg(title, span, lanes)


# Lane model shared by both renderers:
#   (lane label, boxes, outlines)
#   box = (start, end, label, color_key, flags)  flags: "miss", "cont"
#   outline = (start, end, label)


def _net_lanes(ns: NetSchedule):
    per_link: dict[str, list] = {}
    for w in ns.windows:
        per_link.setdefault(w.link, []).append(w)
    lanes = []
    for link_id in sorted(per_link):
        boxes = [
            (w.open_us, w.close_us, f"{w.stream} #{w.instance}", w.stream,
             frozenset())
            for w in sorted(per_link[link_id],
                            key=lambda w: (w.open_us, w.stream))
        ]
        lanes.append((link_id, boxes, []))
    return lanes


def _node_lanes(ns: NodeSchedule, missed: set):
    lanes = []
    for core in range(ns.cores):
        slices = ns.core_slices(core)
        # a job split over several slices continues after every slice but
        # its last one
        last_slice: dict[tuple[str, int], Fraction] = {}
        for sl in slices:
            key = (sl.task, sl.job_index)
            if key not in last_slice or sl.end_us > last_slice[key]:
                last_slice[key] = sl.end_us
        boxes = []
        for sl in slices:
            flags = set()
            if (sl.task, sl.job_index) in missed:
                flags.add("miss")
            if last_slice[(sl.task, sl.job_index)] != sl.end_us:
                flags.add("cont")
            boxes.append((sl.start_us, sl.end_us,
                          f"{sl.task} #{sl.job_index}", sl.task,
                          frozenset(flags)))
        outlines = [
            (w[0], w[1], p.id)
            for p in ns.partitions if p.core == core
            for w in p.windows
        ]
        outlines.sort(key=lambda o: (o[0], o[2]))
        lanes.append((f"core {core}", boxes, outlines))
    return lanes


def _ascii(title: str, span, lanes) -> str:
    out = [f"== {title} =="]
    out.append(f"   0 {'-' * 50} {_fmt(span)} us")
    for label, boxes, outlines in lanes:
        out.append(f"{label}:")
        for start, end, text in outlines:
            out.append(f"  (partition) [{_fmt(start)}, {_fmt(end)}) {text}")
        for start, end, text, _key, flags in boxes:
            marks = ""
            if "cont" in flags:
                marks += " >"    # preempted, continues later
            if "miss" in flags:
                marks += " !MISS"
            out.append(f"  [{_fmt(start)}, {_fmt(end)}) {text}{marks}")
        if not boxes and not outlines:
            out.append("  (empty)")
    return "\n".join(out) + "\n"


def _svg(title: str, span, lanes) -> str:
    width, lane_h, pad, label_w = 900.0, 34, 8, 150
    chart_w = width - label_w - 2 * pad
    height = pad * 2 + 22 + lane_h * max(len(lanes), 1)
    scale = chart_w / float(span) if span else 0.0

    def x(t) -> float:
        return round(label_w + pad + float(t) * scale, 2)

    colors: dict[str, str] = {}

    def color(key: str) -> str:
        if key not in colors:
            colors[key] = _PALETTE[len(colors) % len(_PALETTE)]
        return colors[key]

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width:g}" '
        f'height="{height}" font-family="monospace" font-size="11">',
        f'<text x="{pad}" y="{pad + 10}">{_esc(title)}</text>',
    ]
    y0 = pad + 22
    for i, (label, boxes, outlines) in enumerate(lanes):
        y = y0 + i * lane_h
        parts.append(f'<text x="{pad}" y="{y + lane_h / 2:g}">{_esc(label)}</text>')
        parts.append(
            f'<line x1="{x(0):g}" y1="{y + lane_h - 6}" x2="{x(span):g}" '
            f'y2="{y + lane_h - 6}" stroke="#999" stroke-width="0.5"/>')
        for start, end, text in outlines:
            parts.append(
                f'<rect x="{x(start):g}" y="{y + 1}" '
                f'width="{max(x(end) - x(start), 0.5):g}" height="{lane_h - 6}" '
                f'fill="none" stroke="#555" stroke-dasharray="3,2">'
                f'<title>{_esc(text)}</title></rect>')
        for start, end, text, key, flags in boxes:
            style = 'stroke="red" stroke-width="2"' if "miss" in flags \
                else 'stroke="#333" stroke-width="0.5"'
            parts.append(
                f'<rect x="{x(start):g}" y="{y + 5}" '
                f'width="{max(x(end) - x(start), 0.8):g}" height="{lane_h - 14}" '
                f'fill="{color(key)}" {style}>'
                f'<title>{_esc(text)} [{_fmt(start)}, {_fmt(end)})</title></rect>')
            if "cont" in flags:  # arrow head: job continues in a later slice
                xe, ym = x(end), y + lane_h / 2 - 2
                parts.append(
                    f'<path d="M {xe:g} {ym - 4:g} L {xe + 5:g} {ym:g} '
                    f'L {xe:g} {ym + 4:g} Z" fill="#333"/>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def _esc(text: str) -> str:
    return (text.replace("&", "&amp;").replace("<", "&lt;")
            .replace(">", "&gt;").replace('"', "&quot;"))
