import random
from dataclasses import replace
from fractions import Fraction

import pytest

from genutil import brute_force_feasible, chain_scenario
from fogweaver.errors import InfeasibleError, StreamNotScheduledError
from fogweaver.gclsched import (
    NetSchedule,
    gcl_export,
    objective,
    qoc_proxy,
    stream_metrics,
    synthesize_gcl,
    verify_net_schedule,
)
from fogweaver.netmodel import lower_bound_delay, resolve_route
from fogweaver.scenario import (
    LinkSpec,
    ModelParams,
    Scenario,
    StreamSpec,
    SwitchSpec,
)

SENSOR_EDS = {"S1 data": 60, "S2 data": 72, "S3 data": 52,
              "S4 data": 80, "S5 data": 44}


def test_uc1_all_streams_scheduled(uc1, uc1_net):
    assert set(uc1_net.offsets) == {st.id for st in uc1.streams}
    assert uc1_net.cycle_us == 300_000
    for st in uc1.streams:
        timing = uc1_net.per_stream[st.id]
        assert timing.ed_us <= st.deadline_us
        assert timing.jitter_us == 0


def test_uc1_sensor_streams_hit_their_bounds(uc1_net):
    for sid, ed in SENSOR_EDS.items():
        assert uc1_net.offsets[sid] == 0
        assert uc1_net.per_stream[sid].ed_us == ed


def test_uc1_verifies_clean(uc1, uc1_net):
    assert verify_net_schedule(uc1_net, uc1).ok


def _one_link_scenario(streams):
    return Scenario(
        switches=(SwitchSpec("A"), SwitchSpec("B")),
        links=(LinkSpec("A", "B"),),
        streams=tuple(streams),
        params=ModelParams(),
    )


def test_single_stream_gets_zero_offset():
    st = StreamSpec("s", "A", "B", 700, 10_000, 3, ("A", "B"))
    s = _one_link_scenario([st])
    ns = synthesize_gcl(s)
    assert ns.offsets["s"] == 0
    assert ns.per_stream["s"].ed_us == lower_bound_delay(
        st, resolve_route(s, st), s.params)


def test_two_identical_streams_share_a_link():
    streams = [StreamSpec(f"s{i}", "A", "B", 700, 10_000, 3, ("A", "B"))
               for i in range(2)]
    s = _one_link_scenario(streams)
    ns = synthesize_gcl(s)
    offsets = sorted(ns.offsets.values())
    assert offsets[0] == 0
    assert offsets[1] >= 56  # second frame waits for the first (56 us at 100 Mbps)
    for st in streams:
        assert ns.per_stream[st.id].ed_us <= st.deadline_us

    # exhaustive check at 1 us granularity: with stream 1 fixed at offset 0,
    # the earliest second offset whose windows never collide is 56
    def collides(phi):
        return any(phi < k * 10_000 + 56 and k * 10_000 < phi + 56
                   for k in range(30))

    earliest = next(phi for phi in range(10_000) if not collides(phi))
    assert earliest == 56
    assert offsets[1] == earliest


def test_empty_scenario_yields_empty_schedule():
    ns = synthesize_gcl(Scenario())
    assert ns.windows == () and ns.offsets == {}


def test_overloaded_link_reports_infeasible():
    # two maximum-size frames per 200 us on one link cannot fit: 2 x 120 > 200
    streams = [StreamSpec(f"s{i}", "A", "B", 1500, 200, 3, ("A", "B"))
               for i in range(2)]
    with pytest.raises(InfeasibleError) as exc:
        synthesize_gcl(_one_link_scenario(streams))
    assert exc.value.unplaced


def _backtracking_instance():
    # "a" is placed first and must vacate the earliest slot: "b" has so
    # little deadline slack that only offset 0 works for it
    return Scenario(
        switches=(SwitchSpec("A"), SwitchSpec("B")),
        links=(LinkSpec("A", "B"),),
        streams=(
            StreamSpec("a", "A", "B", 250, 100, 3, ("A", "B"), deadline_us=40),
            StreamSpec("b", "A", "B", 250, 100, 3, ("A", "B"), deadline_us=20),
        ),
        params=ModelParams(d_hop_us=Fraction(0)),
    )


def test_backtracking_revisits_earlier_placements():
    s = _backtracking_instance()
    ns = synthesize_gcl(s)
    assert ns.offsets == {"a": 20, "b": 0}
    assert verify_net_schedule(ns, s).ok


def test_node_budget_bounds_the_search():
    with pytest.raises(InfeasibleError) as exc:
        synthesize_gcl(_backtracking_instance(), node_budget=10)
    assert "budget" in str(exc.value)


def test_impossible_deadline_is_infeasible():
    # 120 us of wire time cannot meet a 50 us deadline
    st = StreamSpec("s", "A", "B", 1500, 10_000, 3, ("A", "B"), deadline_us=50)
    with pytest.raises(InfeasibleError):
        synthesize_gcl(_one_link_scenario([st]))


def test_determinism_same_scenario_same_offsets(uc1):
    a = synthesize_gcl(uc1)
    b = synthesize_gcl(uc1)
    assert a.offsets == b.offsets
    assert a.windows == b.windows


# -- metrics ------------------------------------------------------------------


def test_stream_metrics_s4(uc1, uc1_net):
    timing = stream_metrics(uc1_net, uc1.stream("S4 data"))
    assert timing.ed_us == 80
    assert timing.jitter_us == 0


def test_stream_metrics_unscheduled_stream(uc1, uc1_net):
    ghost = StreamSpec("ghost", "S1", "E1", 100, 10_000, 0, ("S1", "W1", "E1"))
    with pytest.raises(StreamNotScheduledError):
        stream_metrics(uc1_net, ghost)


def _shift_instance(ns: NetSchedule, stream: str, instance: int,
                    delta) -> NetSchedule:
    windows = tuple(
        replace(w, open_us=w.open_us + delta, close_us=w.close_us + delta)
        if w.stream == stream and w.instance == instance else w
        for w in ns.windows)
    return replace(ns, windows=windows)


def test_perturbed_instance_shows_jitter(uc1, uc1_net):
    bumped = _shift_instance(uc1_net, "S1 data", 3, Fraction(10))
    timing = stream_metrics(bumped, uc1.stream("S1 data"))
    assert timing.jitter_us == 10
    assert timing.ed_us == 70


def test_qoc_proxy_uc1(uc1, uc1_net):
    # control streams all have 10 ms periods: mean(60,72,52,80,44)/10000
    assert qoc_proxy(uc1_net, uc1) == Fraction(77, 12500)
    assert float(qoc_proxy(uc1_net, uc1)) == 0.00616


def test_qoc_proxy_monotone_under_uniform_slowdown(uc1, uc1_net):
    slower = replace(
        uc1_net,
        per_stream={sid: replace(t, ed_us=t.ed_us + 10)
                    for sid, t in uc1_net.per_stream.items()})
    assert qoc_proxy(uc1_net, uc1) < qoc_proxy(slower, uc1)


def test_qoc_proxy_counts_jitter(uc1, uc1_net):
    # 1 ms of jitter on one of five 10 ms control streams: +0.1 / 5
    jittery = replace(
        uc1_net,
        per_stream={
            sid: replace(t, jitter_us=t.jitter_us + (1000 if sid == "S1 data" else 0))
            for sid, t in uc1_net.per_stream.items()})
    assert qoc_proxy(jittery, uc1) - qoc_proxy(uc1_net, uc1) == Fraction(1, 50)


def test_objective_is_weighted_offset_sum(uc1, uc1_net):
    expected = sum(
        (uc1.params.weight_base ** st.criticality * uc1_net.offsets[st.id]
         for st in uc1.streams), Fraction(0))
    assert objective(uc1_net, uc1) == expected


# -- verifier mutation suite --------------------------------------------------


def _mutate_window(ns, index, **changes):
    windows = list(ns.windows)
    windows[index] = replace(windows[index], **changes)
    return replace(ns, windows=tuple(windows))


def test_verifier_flags_overlap(uc1, uc1_net):
    # drop a second stream's window onto S1's slot on the shared link W1->E1
    i = next(i for i, w in enumerate(uc1_net.windows)
             if w.stream == "m2 state" and w.link == "W1->E1" and w.instance == 0)
    j = next(w for w in uc1_net.windows
             if w.stream == "S1 data" and w.link == "W1->E1" and w.instance == 0)
    mutant = _mutate_window(uc1_net, i, open_us=j.open_us,
                            close_us=j.open_us + (uc1_net.windows[i].close_us
                                                  - uc1_net.windows[i].open_us))
    assert "overlap" in verify_net_schedule(mutant, uc1).kinds()


def test_verifier_flags_precedence(uc1, uc1_net):
    # nudge one window off its exact cut-through position
    i = next(i for i, w in enumerate(uc1_net.windows)
             if w.stream == "S1 data" and w.instance == 1 and w.link == "W1->E1")
    w = uc1_net.windows[i]
    mutant = _mutate_window(uc1_net, i, open_us=w.open_us + 1,
                            close_us=w.close_us + 1)
    assert "precedence" in verify_net_schedule(mutant, uc1).kinds()


def test_verifier_flags_window_length(uc1, uc1_net):
    i = next(i for i, w in enumerate(uc1_net.windows)
             if w.stream == "S3 data" and w.instance == 0)
    w = uc1_net.windows[i]
    mutant = _mutate_window(uc1_net, i, close_us=w.close_us - Fraction(1, 10))
    assert "window-length" in verify_net_schedule(mutant, uc1).kinds()


def _shift_stream(ns: NetSchedule, stream: str, delta) -> NetSchedule:
    windows = tuple(
        replace(w, open_us=w.open_us + delta, close_us=w.close_us + delta)
        if w.stream == stream else w for w in ns.windows)
    offsets = dict(ns.offsets)
    offsets[stream] += delta
    return replace(ns, windows=windows, offsets=offsets)


def test_verifier_flags_deadline():
    # deadline shorter than the period leaves room to shift without leaving
    # the period slot, so only the deadline check fires
    st = StreamSpec("s", "A", "B", 700, 10_000, 3, ("A", "B"),
                    deadline_us=100)
    s = _one_link_scenario([st])
    ns = synthesize_gcl(s)
    late = _shift_stream(ns, "s", Fraction(50))
    report = verify_net_schedule(late, s)
    assert report.kinds() == {"deadline"}


def test_verifier_flags_period_containment(uc1, uc1_net):
    # move instance 0 into instance 1's slot (keeps its instance tag)
    mutant = _shift_instance(uc1_net, "S5 data", 0, Fraction(10_000))
    kinds = verify_net_schedule(mutant, uc1).kinds()
    assert "containment" in kinds


def test_verifier_flags_jitter(uc1, uc1_net):
    mutant = _shift_instance(uc1_net, "S2 data", 2, Fraction(5))
    kinds = verify_net_schedule(mutant, uc1).kinds()
    assert "jitter" in kinds


def test_verifier_flags_missing_stream(uc1, uc1_net):
    windows = tuple(w for w in uc1_net.windows if w.stream != "m2 set")
    mutant = replace(uc1_net, windows=windows)
    assert "missing" in verify_net_schedule(mutant, uc1).kinds()


# -- small-instance oracle ----------------------------------------------------


def test_solver_succeeds_whenever_brute_force_does():
    rng = random.Random(20240817)
    feasible_seen = 0
    for _ in range(60):
        s = chain_scenario(rng)
        if brute_force_feasible(s):
            feasible_seen += 1
            ns = synthesize_gcl(s)  # must not raise
            assert verify_net_schedule(ns, s).ok
    assert feasible_seen >= 20  # the generator must actually exercise the claim


def test_gcl_export_schema(uc1_net):
    ports = gcl_export(uc1_net)
    assert [p["port"] for p in ports] == sorted(p["port"] for p in ports)
    total = sum(len(p["entries"]) for p in ports)
    assert total == len(uc1_net.windows)
    for port in ports:
        assert port["cycle_us"] == uc1_net.cycle_us
        opens = [e["open_us"] for e in port["entries"]]
        assert opens == sorted(opens)
        for e in port["entries"]:
            assert set(e) == {"open_us", "close_us", "stream", "instance"}
