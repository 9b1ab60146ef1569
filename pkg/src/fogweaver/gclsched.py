"""Gate-control-list synthesis and independent schedule verification.

Every stream gets a single injection offset per period (zero jitter by
construction); its frame then occupies one transmission window per route
link, the window on link ``j`` opening exactly ``j * d_hop`` after the
previous one (cut-through forwarding). Synthesis is a deterministic
earliest-offset search: streams are ordered by criticality (descending),
period (ascending) and size (descending), each is placed at the earliest
0.1 us grid offset whose windows fit into the idle time of every route
link, and chronological backtracking revisits earlier placements when a
stream cannot be placed. The effect is a small weighted-offset objective:
high-criticality streams are pushed toward their delay lower bound first.

The verifier re-checks a finished schedule with plain interval arithmetic
and shares no code with the solver.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator

from .errors import InfeasibleError, StreamNotScheduledError
from .netmodel import Route, resolve_route, transmission_time
from .reporting import Report, ReportBuilder
from .scenario import Scenario, StreamSpec, hyperperiod
from .units import GRID_US, ceil_to_grid, time_to_json

DEFAULT_NODE_BUDGET = 10**6


@dataclass(frozen=True)
class FrameWindow:
    """One gate-open interval for one frame instance on one link."""

    link: str        # link id "src->dst"
    stream: str
    instance: int    # k-th release within the cycle
    open_us: Fraction
    close_us: Fraction


@dataclass(frozen=True)
class StreamTiming:
    ed_us: Fraction      # worst-case end-to-end delay, release to last bit
    jitter_us: Fraction  # max - min delay across instances


@dataclass(frozen=True)
class NetSchedule:
    """A synthesized network schedule over one cycle (stream hyperperiod)."""

    cycle_us: int
    d_hop_us: Fraction
    offsets: dict[str, Fraction]          # stream -> injection offset
    windows: tuple[FrameWindow, ...]
    per_stream: dict[str, StreamTiming]


def _priority_key(st: StreamSpec):
    # higher criticality first, then shorter period, then bigger frames
    return (-st.criticality, st.period_us, -st.size_bytes, st.id)


def _stream_windows(st: StreamSpec, route: Route, tx: Fraction, phi: Fraction,
                    d_hop: Fraction, cycle: int) -> list[FrameWindow]:
    wins = []
    for k in range(cycle // st.period_us):
        base = phi + k * st.period_us
        for j, link in enumerate(route.links):
            opn = base + j * d_hop
            wins.append(FrameWindow(link.id, st.id, k, opn, opn + tx))
    return wins


def _forbidden_offsets(st: StreamSpec, route: Route, tx: Fraction,
                       d_hop: Fraction, phi_max: Fraction,
                       busy: dict[str, list[tuple[Fraction, Fraction]]],
                       ) -> list[tuple[Fraction, Fraction]]:
    """Open intervals of phi that collide with already-placed windows."""
    T = st.period_us
    out: list[tuple[Fraction, Fraction]] = []
    for j, link in enumerate(route.links):
        shift = j * d_hop
        for b0, b1 in busy.get(link.id, ()):
            # window [phi + kT + shift, phi + kT + shift + tx) overlaps
            # [b0, b1) iff  b0 - kT - shift - tx < phi < b1 - kT - shift
            k_lo = math.floor((b0 - shift - tx - phi_max) / T)
            k_hi = math.floor((b1 - shift) / T)
            for k in range(max(k_lo, 0), k_hi + 1):
                lo = b0 - k * T - shift - tx
                hi = b1 - k * T - shift
                if hi <= 0 or lo >= phi_max:
                    continue
                out.append((lo, hi))
    out.sort()
    merged: list[tuple[Fraction, Fraction]] = []
    for lo, hi in out:
        if merged and lo < merged[-1][1]:  # strict: touching intervals keep the
            if hi > merged[-1][1]:         # shared endpoint schedulable
                merged[-1] = (merged[-1][0], hi)
        else:
            merged.append((lo, hi))
    return merged


def _offset_candidates(st: StreamSpec, route: Route, tx: Fraction,
                       d_hop: Fraction,
                       busy: dict[str, list[tuple[Fraction, Fraction]]],
                       ) -> Iterator[Fraction]:
    """Feasible injection offsets in increasing order, on the 0.1 us grid."""
    phi_max = Fraction(st.deadline_us) - route.hops * d_hop - tx
    if phi_max < 0:
        return
    forbidden = _forbidden_offsets(st, route, tx, d_hop, phi_max, busy)
    phi = Fraction(0)
    idx = 0
    while phi <= phi_max:
        while idx < len(forbidden) and forbidden[idx][1] <= phi:
            idx += 1
        if idx < len(forbidden) and forbidden[idx][0] < phi < forbidden[idx][1]:
            phi = ceil_to_grid(forbidden[idx][1])
            continue
        yield phi
        phi += GRID_US


def synthesize_gcl(s: Scenario, node_budget: int = DEFAULT_NODE_BUDGET) -> NetSchedule:
    """Place every stream at its earliest feasible offset, with backtracking.

    Deterministic for a given scenario. Raises :class:`InfeasibleError`
    naming the streams that could not be placed when the search space or
    the ``node_budget`` is exhausted.
    """
    if not s.streams:
        return NetSchedule(0, s.params.d_hop_us, {}, (), {})

    d_hop = s.params.d_hop_us
    cycle = hyperperiod([st.period_us for st in s.streams])
    order = sorted(s.streams, key=_priority_key)
    routes = {st.id: resolve_route(s, st) for st in order}
    tx = {
        st.id: transmission_time(
            st.size_bytes, min(l.rate_bps for l in routes[st.id].links))
        for st in order
    }

    busy: dict[str, list[tuple[Fraction, Fraction]]] = {}
    placed_windows: list[list[FrameWindow] | None] = [None] * len(order)
    offsets: list[Fraction | None] = [None] * len(order)
    gens: list[Iterator[Fraction] | None] = [None] * len(order)
    nodes_tried = 0
    deepest_failure = 0

    i = 0
    while 0 <= i < len(order):
        st = order[i]
        if gens[i] is None:
            gens[i] = _offset_candidates(st, routes[st.id], tx[st.id], d_hop, busy)
        phi = next(gens[i], None)
        if phi is None:
            # dead end: drop this stream's generator, undo the previous
            # placement and continue from its next candidate offset
            deepest_failure = max(deepest_failure, i)
            gens[i] = None
            i -= 1
            if i >= 0:
                for w in placed_windows[i]:
                    busy[w.link].remove((w.open_us, w.close_us))
                placed_windows[i] = None
                offsets[i] = None
            continue
        nodes_tried += 1
        if nodes_tried > node_budget:
            raise InfeasibleError(
                f"search budget of {node_budget} placements exhausted",
                unplaced=[o.id for o in order[i:]])
        wins = _stream_windows(st, routes[st.id], tx[st.id], phi, d_hop, cycle)
        for w in wins:
            busy.setdefault(w.link, []).append((w.open_us, w.close_us))
        placed_windows[i] = wins
        offsets[i] = phi
        i += 1

    if i < 0:
        raise InfeasibleError(
            "no feasible offset assignment",
            unplaced=[o.id for o in order[deepest_failure:]])

    windows = tuple(w for wins in placed_windows for w in wins)
    offset_map = {st.id: offsets[idx] for idx, st in enumerate(order)}
    schedule = NetSchedule(
        cycle_us=cycle,
        d_hop_us=d_hop,
        offsets={st.id: offset_map[st.id] for st in s.streams},
        windows=windows,
        per_stream={},
    )
    per_stream = {st.id: stream_metrics(schedule, st) for st in s.streams}
    return NetSchedule(cycle, d_hop, schedule.offsets, windows, per_stream)


def stream_metrics(ns: NetSchedule, st: StreamSpec) -> StreamTiming:
    """End-to-end delay and jitter of one stream, measured from the windows.

    The delay of instance ``k`` is the close of its last window plus the
    final forwarding hop, relative to the release at ``k * period``; jitter
    is the spread of that delay across instances.
    """
    by_instance: dict[int, Fraction] = {}
    for w in ns.windows:
        if w.stream == st.id:
            prev = by_instance.get(w.instance)
            if prev is None or w.close_us > prev:
                by_instance[w.instance] = w.close_us
    if not by_instance:
        raise StreamNotScheduledError(st.id)
    delays = [close + ns.d_hop_us - k * st.period_us
              for k, close in by_instance.items()]
    return StreamTiming(ed_us=max(delays), jitter_us=max(delays) - min(delays))


def verify_net_schedule(ns: NetSchedule, s: Scenario) -> Report:
    """Re-check a network schedule by direct interval arithmetic.

    Independent of the solver: works only from the windows, the offsets and
    the scenario. Checks per-link non-overlap, route precedence spacing,
    window length, period containment, deadline satisfaction, zero jitter
    and completeness (every instance of every stream present).
    """
    rb = ReportBuilder()

    per_link: dict[str, list[FrameWindow]] = {}
    for w in ns.windows:
        per_link.setdefault(w.link, []).append(w)
    for link_id in sorted(per_link):
        wins = sorted(per_link[link_id], key=lambda w: (w.open_us, w.close_us))
        for a, b in zip(wins, wins[1:]):
            if b.open_us < a.close_us:
                rb.add("overlap", link_id,
                       f"{a.stream}#{a.instance} [{a.open_us}, {a.close_us}) overlaps "
                       f"{b.stream}#{b.instance} [{b.open_us}, {b.close_us})")

    per_stream: dict[str, list[FrameWindow]] = {}
    for w in ns.windows:
        per_stream.setdefault(w.stream, []).append(w)

    for st in s.streams:
        wins = per_stream.get(st.id, [])
        phi = ns.offsets.get(st.id)
        if phi is None or not wins:
            rb.add("missing", st.id, "stream has no offset or no windows")
            continue
        route = resolve_route(s, st)
        tx = transmission_time(st.size_bytes,
                               min(l.rate_bps for l in route.links))
        T = st.period_us
        instances = ns.cycle_us // T if T else 0
        link_order = [l.id for l in route.links]

        by_key = {(w.instance, w.link): w for w in wins}
        if len(by_key) != len(wins):
            rb.add("missing", st.id, "duplicate window for one (instance, link)")
        for k in range(instances):
            delays = []
            for j, link_id in enumerate(link_order):
                w = by_key.get((k, link_id))
                if w is None:
                    rb.add("missing", st.id, f"instance {k} has no window on {link_id}")
                    continue
                expected_open = phi + k * T + j * ns.d_hop_us
                if w.open_us != expected_open:
                    rb.add("precedence", st.id,
                           f"instance {k} on {link_id} opens at {w.open_us}, "
                           f"expected {expected_open}")
                if w.close_us - w.open_us != tx:
                    rb.add("window-length", st.id,
                           f"instance {k} on {link_id} has length "
                           f"{w.close_us - w.open_us}, expected {tx}")
                if not (k * T <= w.open_us and w.close_us <= (k + 1) * T):
                    rb.add("containment", st.id,
                           f"instance {k} window [{w.open_us}, {w.close_us}) leaves "
                           f"its period slot [{k * T}, {(k + 1) * T})")
                if not (0 <= w.open_us < w.close_us <= ns.cycle_us):
                    rb.add("containment", st.id,
                           f"instance {k} window [{w.open_us}, {w.close_us}) leaves "
                           f"the cycle [0, {ns.cycle_us})")
                delays.append(w.close_us + ns.d_hop_us - k * T)
            if delays and max(delays) > st.deadline_us:
                rb.add("deadline", st.id,
                       f"instance {k} arrives {max(delays)} us after release, "
                       f"deadline is {st.deadline_us} us")
        try:
            timing = stream_metrics(ns, st)
        except StreamNotScheduledError:
            timing = None
        if timing is not None and timing.jitter_us != 0:
            rb.add("jitter", st.id, f"jitter {timing.jitter_us} us, expected 0")
    return rb.build()


def qoc_proxy(ns: NetSchedule, s: Scenario) -> Fraction:
    """Relative control-quality proxy: mean normalized delay + jitter of
    control streams (criticality >= 3). Lower is better; only meaningful
    for comparing schedules of the same scenario."""
    control = [st for st in s.streams if st.criticality >= 3]
    if not control:
        return Fraction(0)
    total = Fraction(0)
    for st in control:
        timing = ns.per_stream.get(st.id) or stream_metrics(ns, st)
        total += timing.ed_us / st.period_us + timing.jitter_us / st.period_us
    return total / len(control)


def objective(ns: NetSchedule, s: Scenario) -> Fraction:
    """Criticality-weighted offset sum the earliest-offset search keeps small."""
    w = s.params.weight_base
    return sum((w ** st.criticality * ns.offsets[st.id] for st in s.streams),
               Fraction(0))


def gcl_export(ns: NetSchedule) -> list[dict]:
    """One JSON-ready object per egress port, entries sorted by open time."""
    per_link: dict[str, list[FrameWindow]] = {}
    for w in ns.windows:
        per_link.setdefault(w.link, []).append(w)
    out = []
    for link_id in sorted(per_link):
        entries = sorted(per_link[link_id], key=lambda w: (w.open_us, w.stream))
        out.append({
            "port": link_id,
            "cycle_us": ns.cycle_us,
            "entries": [
                {
                    "open_us": time_to_json(w.open_us),
                    "close_us": time_to_json(w.close_us),
                    "stream": w.stream,
                    "instance": w.instance,
                }
                for w in entries
            ],
        })
    return out
