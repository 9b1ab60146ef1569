#!/usr/bin/env python3
"""Tour of the scenario model: parse the UC1 platform description, validate
it, and poke at the pieces every later stage builds on.

UC1 is a conveyor distribution platform: six sensors feed five dual-core
fog nodes through three TSN switches, fifteen mixed-criticality
applications exchange ten periodic streams.
"""

from fogweaver import expand_tasks, hyperperiod, parse_scenario, validate
from fogweaver.fixtures import uc1_text

s = parse_scenario(uc1_text())
print(f"{len(s.switches)} switches, {len(s.nodes)} fog nodes, "
      f"{len(s.endpoints)} sensors")
print(f"{len(s.streams)} streams, {len(s.applications)} applications\n")

report = validate(s)
print("validation:", "clean" if report.ok else report)

print("\nstreams (size, period, criticality, route):")
for st in s.streams:
    print(f"  {st.id:10s} {st.size_bytes:5d} B  {st.period_us // 1000:3d} ms"
          f"  L{st.criticality}  {' -> '.join(st.route)}")

print("\nthe network cycle is the least common multiple of the periods:")
cycle = hyperperiod([st.period_us for st in s.streams])
print(f"  hyperperiod = {cycle} us = {cycle // 1000} ms")

print("\napplications are expanded into equal-WCET task sets, for example:")
app = next(a for a in s.applications if a.id == "Database access")
tasks = expand_tasks(app)
print(f"  {app.id}: {app.task_count} tasks x {float(tasks[0].wcet_us):.2f} us "
      f"every {app.period_us // 1000} ms "
      f"(utilization {float(app.utilization):.2f})")

print("\napplications per node:")
for node in s.nodes:
    apps = s.apps_on(node.id)
    total = float(sum(a.utilization for a in apps))
    print(f"  {node.id} ({node.cores} cores): "
          f"{', '.join(a.id for a in apps)}  [sum C = {total:.2f}]")
