"""Per-node partition and task schedule synthesis.

Each fog node hosts applications of several criticality levels on a small
number of cores. Tasks are bin-packed onto cores (first-fit decreasing by
utilization, no migration), each core is scheduled with preemptive EDF over
the node's major frame, and maximal contiguous runs of same-criticality
execution are wrapped into partition windows, yielding one partition per
criticality level per core. The verifier re-derives every property of a
finished schedule from the slices alone.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from fractions import Fraction

from .errors import InfeasibleError
from .reporting import Report, ReportBuilder
from .scenario import ApplicationSpec, FogNodeSpec, expand_tasks, hyperperiod
from .units import time_from_json, time_to_json


@dataclass(frozen=True)
class NodeTask:
    """A schedulable task on a node: application task plus its criticality."""

    id: str
    criticality: int
    wcet_us: Fraction
    period_us: int
    deadline_us: int

    @property
    def utilization(self) -> Fraction:
        return self.wcet_us / self.period_us


@dataclass(frozen=True)
class Partition:
    """Time windows on one core reserved for one criticality level."""

    id: str
    node: str
    criticality: int
    core: int | None = None
    windows: tuple[tuple[Fraction, Fraction], ...] = ()


@dataclass(frozen=True)
class TaskSlice:
    """One contiguous execution interval of one job."""

    task: str
    core: int
    partition: str
    start_us: Fraction
    end_us: Fraction
    job_index: int

    @property
    def duration_us(self) -> Fraction:
        return self.end_us - self.start_us


@dataclass(frozen=True)
class NodeSchedule:
    node: str
    cores: int
    major_frame_us: int
    tasks: dict[str, NodeTask]
    partitions: tuple[Partition, ...]
    slices: tuple[TaskSlice, ...]
    per_core_utilization: tuple[Fraction, ...]

    def core_slices(self, core: int) -> list[TaskSlice]:
        return sorted((sl for sl in self.slices if sl.core == core),
                      key=lambda sl: sl.start_us)


def node_tasks(apps: list[ApplicationSpec]) -> list[NodeTask]:
    """Expand every application into criticality-tagged schedulable tasks."""
    out = []
    for app in apps:
        for t in expand_tasks(app):
            out.append(NodeTask(t.id, app.level, t.wcet_us, t.period_us,
                                t.deadline_us))
    return out


def assign_partitions(apps: list[ApplicationSpec]) -> list[Partition]:
    """One partition per distinct criticality level present on the node.

    Cores and windows are assigned later by the schedule synthesis; the
    returned partitions carry only identity and level.
    """
    if not apps:
        return []
    node = apps[0].node
    levels = sorted({a.level for a in apps}, reverse=True)
    return [Partition(f"{node}.L{lvl}", node, lvl) for lvl in levels]


def map_to_cores(apps: list[ApplicationSpec], cores: int) -> dict[str, int]:
    """First-fit-decreasing bin packing of tasks onto cores by utilization.

    Tasks never migrate. Raises :class:`InfeasibleError` naming the tasks
    that do not fit when the packing fails.
    """
    if cores < 1:
        raise ValueError(f"need at least one core, got {cores}")
    tasks = sorted(node_tasks(apps), key=lambda t: (-t.utilization, t.id))
    load = [Fraction(0)] * cores
    mapping: dict[str, int] = {}
    unplaced: list[str] = []
    for t in tasks:
        for core in range(cores):
            if load[core] + t.utilization <= 1:
                load[core] += t.utilization
                mapping[t.id] = core
                break
        else:
            unplaced.append(t.id)
    if unplaced:
        total = sum((t.utilization for t in tasks), Fraction(0))
        raise InfeasibleError(
            f"cannot pack tasks onto {cores} cores "
            f"(total utilization {float(total):.3f})",
            unplaced=unplaced)
    return mapping


def _edf_core(tasks: list[NodeTask], major_frame: int,
              node: str, core: int) -> list[tuple[NodeTask, int, Fraction, Fraction]]:
    """Preemptive EDF over one major frame on one core.

    Returns merged execution runs as (task, job_index, start, end). Raises
    :class:`InfeasibleError` at the first job that cannot finish by its
    deadline, identified by task and absolute deadline.
    """
    jobs = []  # [deadline, task, job_index, release, remaining]
    for t in tasks:
        for k in range(major_frame // t.period_us):
            jobs.append([k * t.period_us + t.deadline_us, t, k,
                         k * t.period_us, t.wcet_us])
    runs: list[tuple[NodeTask, int, Fraction, Fraction]] = []
    t_now = Fraction(0)
    pending = sorted(jobs, key=lambda j: (j[3], j[0], j[1].id))  # by release
    ready: list = []
    next_pending = 0
    while next_pending < len(pending) or ready:
        while (next_pending < len(pending)
               and pending[next_pending][3] <= t_now):
            ready.append(pending[next_pending])
            next_pending += 1
        if not ready:
            t_now = Fraction(pending[next_pending][3])
            continue
        job = min(ready, key=lambda j: (j[0], j[1].id, j[2]))
        next_release = (Fraction(pending[next_pending][3])
                        if next_pending < len(pending) else None)
        run = job[4]
        if next_release is not None and t_now + run > next_release:
            run = next_release - t_now
        start, end = t_now, t_now + run
        if runs and runs[-1][0] is job[1] and runs[-1][1] == job[2] \
                and runs[-1][3] == start:
            runs[-1] = (job[1], job[2], runs[-1][2], end)
        else:
            runs.append((job[1], job[2], start, end))
        job[4] -= run
        t_now = end
        if job[4] == 0:
            ready.remove(job)
            if end > job[0]:
                raise InfeasibleError(
                    f"node {node} core {core}: job {job[1].id}#{job[2]} "
                    f"finishes at {float(end):.1f} us, after its deadline "
                    f"{job[0]} us",
                    unplaced=[job[1].id])
    return runs


def synthesize_node_schedule(node: FogNodeSpec, apps: list[ApplicationSpec],
                             mapping: dict[str, int]) -> NodeSchedule:
    """Build the static partition + task schedule of one node.

    ``mapping`` assigns every task (see :func:`node_tasks`) to a core.
    Per core, jobs are laid out by preemptive EDF over the node's major
    frame (LCM of all task periods on the node); contiguous runs of
    same-criticality execution become partition windows.
    """
    tasks = node_tasks(apps)
    task_map = {t.id: t for t in tasks}
    missing = [t.id for t in tasks if t.id not in mapping]
    if missing:
        raise ValueError(f"mapping misses tasks: {missing}")
    bad_core = {t: c for t, c in mapping.items() if not 0 <= c < node.cores}
    if bad_core:
        raise ValueError(f"mapping uses cores outside 0..{node.cores - 1}: {bad_core}")

    if not tasks:
        return NodeSchedule(node.id, node.cores, 0, {}, (),
                            (), tuple(Fraction(0) for _ in range(node.cores)))

    major_frame = hyperperiod([t.period_us for t in tasks])
    slices: list[TaskSlice] = []
    for core in range(node.cores):
        core_tasks = [t for t in tasks if mapping[t.id] == core]
        if not core_tasks:
            continue
        for task, job, start, end in _edf_core(core_tasks, major_frame,
                                               node.id, core):
            slices.append(TaskSlice(task.id, core, "", start, end, job))

    util = []
    for core in range(node.cores):
        busy = sum((sl.duration_us for sl in slices if sl.core == core),
                   Fraction(0))
        util.append(busy / major_frame)
    bare = NodeSchedule(node.id, node.cores, major_frame, task_map,
                        (), tuple(slices), tuple(util))
    return rebuild_partitions(bare)


def rebuild_partitions(ns: NodeSchedule) -> NodeSchedule:
    """Re-derive partition windows from the slices (after slices moved)."""
    partitions: dict[tuple[int, int], list[tuple[Fraction, Fraction]]] = {}
    new_slices = []
    for core in range(ns.cores):
        for sl in ns.core_slices(core):
            lvl = ns.tasks[sl.task].criticality
            key = (core, lvl)
            wins = partitions.setdefault(key, [])
            if wins and wins[-1][1] == sl.start_us:
                wins[-1] = (wins[-1][0], sl.end_us)
            else:
                wins.append((sl.start_us, sl.end_us))
            new_slices.append(replace(sl, partition=f"{ns.node}.c{core}.L{lvl}"))
    partition_objs = tuple(
        Partition(f"{ns.node}.c{core}.L{lvl}", ns.node, lvl, core, tuple(wins))
        for (core, lvl), wins in sorted(partitions.items())
    )
    return replace(ns, partitions=partition_objs, slices=tuple(new_slices))


def verify_node_schedule(ns: NodeSchedule) -> Report:
    """Independent check of a node schedule.

    Verifies per-core non-overlap, full WCET before every deadline,
    criticality isolation, slice containment in partition windows,
    per-core window disjointness and the recorded utilization figures.
    """
    rb = ReportBuilder()
    parts = {p.id: p for p in ns.partitions}

    for core in range(ns.cores):
        slices = ns.core_slices(core)
        for a, b in zip(slices, slices[1:]):
            if b.start_us < a.end_us:
                rb.add("core-overlap", f"{ns.node}.c{core}",
                       f"{a.task}#{a.job_index} [{a.start_us}, {a.end_us}) overlaps "
                       f"{b.task}#{b.job_index} [{b.start_us}, {b.end_us})")
        wins = sorted(((w, p) for p in ns.partitions if p.core == core
                       for w in p.windows), key=lambda wp: wp[0])
        for (w1, p1), (w2, p2) in zip(wins, wins[1:]):
            if w2[0] < w1[1]:
                rb.add("window-overlap", f"{ns.node}.c{core}",
                       f"partition {p1.id} window [{w1[0]}, {w1[1]}) overlaps "
                       f"{p2.id} window [{w2[0]}, {w2[1]})")

    for sl in ns.slices:
        if sl.end_us <= sl.start_us:
            rb.add("containment", sl.task, f"empty or inverted slice at {sl.start_us}")
        task = ns.tasks.get(sl.task)
        part = parts.get(sl.partition)
        if task is None or part is None:
            rb.add("reference", sl.task,
                   f"slice references unknown task or partition {sl.partition!r}")
            continue
        if part.criticality != task.criticality:
            rb.add("isolation", sl.task,
                   f"level-{task.criticality} task runs in level-{part.criticality} "
                   f"partition {part.id}")
        if part.core != sl.core or not any(
                w[0] <= sl.start_us and sl.end_us <= w[1] for w in part.windows):
            rb.add("containment", sl.task,
                   f"slice [{sl.start_us}, {sl.end_us}) on core {sl.core} is not "
                   f"inside a window of partition {part.id}")

    for task in ns.tasks.values():
        if ns.major_frame_us % task.period_us:
            rb.add("frame", task.id,
                   f"period {task.period_us} does not divide major frame "
                   f"{ns.major_frame_us}")
            continue
        for k in range(ns.major_frame_us // task.period_us):
            release = k * task.period_us
            deadline = release + task.deadline_us
            job_slices = [sl for sl in ns.slices
                          if sl.task == task.id and sl.job_index == k]
            inside = [sl for sl in job_slices
                      if release <= sl.start_us and sl.end_us <= deadline]
            if len(inside) != len(job_slices):
                rb.add("deadline", task.id,
                       f"job {k} executes outside its window "
                       f"[{release}, {deadline})")
            total = sum((sl.duration_us for sl in job_slices), Fraction(0))
            if total != task.wcet_us:
                rb.add("deadline", task.id,
                       f"job {k} received {total} us of {task.wcet_us} us "
                       f"before its deadline")

    for core in range(ns.cores):
        busy = sum((sl.duration_us for sl in ns.slices if sl.core == core),
                   Fraction(0))
        expected = busy / ns.major_frame_us if ns.major_frame_us else Fraction(0)
        recorded = (ns.per_core_utilization[core]
                    if core < len(ns.per_core_utilization) else None)
        if recorded != expected:
            rb.add("utilization", f"{ns.node}.c{core}",
                   f"recorded utilization {recorded}, slices give {expected}")
        if expected > 1:
            rb.add("utilization", f"{ns.node}.c{core}",
                   f"core is busy {float(expected):.3f} of the frame")
    return rb.build()


@dataclass(frozen=True)
class UtilizationReport:
    per_core: tuple[tuple[str, int, Fraction], ...]  # (node, core, busy fraction)
    average: Fraction
    max_value: Fraction
    max_node: str
    max_core: int


def utilization_report(schedules: list[NodeSchedule]) -> UtilizationReport:
    """Busy fractions per core, their average and the most loaded core."""
    per_core = []
    for ns in schedules:
        for core in range(ns.cores):
            per_core.append((ns.node, core, ns.per_core_utilization[core]))
    if not per_core:
        return UtilizationReport((), Fraction(0), Fraction(0), "", 0)
    average = sum((u for _, _, u in per_core), Fraction(0)) / len(per_core)
    max_node, max_core, max_value = max(per_core, key=lambda x: (x[2], x[0], x[1]))
    return UtilizationReport(tuple(per_core), average, max_value, max_node, max_core)


# -- JSON round-trip -------------------------------------------------------


def node_schedule_to_json(ns: NodeSchedule) -> dict:
    """Partition-table export: windows and slices per core, plus the task
    metadata needed to re-verify the schedule after loading."""
    cores = []
    for core in range(ns.cores):
        cores.append({
            "core": core,
            "windows": [
                {
                    "partition": p.id,
                    "criticality": p.criticality,
                    "start_us": time_to_json(w[0]),
                    "end_us": time_to_json(w[1]),
                }
                for p in ns.partitions if p.core == core for w in p.windows
            ],
            "slices": [
                {
                    "task": sl.task,
                    "job": sl.job_index,
                    "partition": sl.partition,
                    "start_us": time_to_json(sl.start_us),
                    "end_us": time_to_json(sl.end_us),
                }
                for sl in ns.core_slices(core)
            ],
        })
    return {
        "node": ns.node,
        "major_frame_us": ns.major_frame_us,
        "cores": cores,
        "tasks": {
            t.id: {
                "criticality": t.criticality,
                "wcet_us": time_to_json(t.wcet_us),
                "period_us": t.period_us,
                "deadline_us": t.deadline_us,
            }
            for t in ns.tasks.values()
        },
        "per_core_utilization": [time_to_json(u) for u in ns.per_core_utilization],
    }


def node_schedule_from_json(doc: dict) -> NodeSchedule:
    tasks = {
        tid: NodeTask(tid, spec["criticality"], time_from_json(spec["wcet_us"]),
                      spec["period_us"], spec["deadline_us"])
        for tid, spec in doc.get("tasks", {}).items()
    }
    partitions: dict[str, Partition] = {}
    slices: list[TaskSlice] = []
    for core_doc in doc["cores"]:
        core = core_doc["core"]
        for w in core_doc.get("windows", ()):
            pid = w["partition"]
            win = (time_from_json(w["start_us"]), time_from_json(w["end_us"]))
            if pid in partitions:
                partitions[pid] = replace(partitions[pid],
                                          windows=partitions[pid].windows + (win,))
            else:
                partitions[pid] = Partition(pid, doc["node"], w["criticality"],
                                            core, (win,))
        for sl in core_doc.get("slices", ()):
            slices.append(TaskSlice(sl["task"], core, sl["partition"],
                                    time_from_json(sl["start_us"]),
                                    time_from_json(sl["end_us"]), sl["job"]))
    n_cores = (max(c["core"] for c in doc["cores"]) + 1) if doc["cores"] else 0
    util = [time_from_json(u) for u in doc.get("per_core_utilization", [])]
    while len(util) < n_cores:
        util.append(Fraction(0))
    return NodeSchedule(doc["node"], n_cores, doc["major_frame_us"], tasks,
                        tuple(partitions.values()), tuple(slices), tuple(util))
