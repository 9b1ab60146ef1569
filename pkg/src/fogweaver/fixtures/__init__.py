"""Checked-in fixtures: the UC1 platform description, reference delay data
and the extensibility demonstration schedules."""

from __future__ import annotations

import json
from importlib import resources


def fixture_text(name: str) -> str:
    return resources.files(__name__).joinpath(name).read_text(encoding="utf-8")


def fixture_json(name: str) -> dict:
    return json.loads(fixture_text(name))


def uc1_text() -> str:
    """The UC1 scenario document (conveyor distribution platform)."""
    return fixture_text("uc1.fog")


def reference_delays() -> dict[str, dict[str, int]]:
    """Per-stream reference delays, plain and with the security overlay."""
    return fixture_json("uc1_reference_ed.json")["streams"]


#: Core index the extensibility fixtures are defined on.
EXTENSIBILITY_CORE = 2

#: Standard dynamic logging workload used with the extensibility fixtures:
#: periods 6/8/10/12 ms at utilizations 17/13/15/13 %.
def dynamic_logging_tasks():
    from fractions import Fraction

    from ..scenario import TaskSpec

    return [
        TaskSpec("app1", Fraction(1020), 6_000),
        TaskSpec("app2", Fraction(1040), 8_000),
        TaskSpec("app3", Fraction(1500), 10_000),
        TaskSpec("app4", Fraction(1560), 12_000),
    ]


def extensibility_schedule(kind: str):
    """Load the BASE or OPTIMIZED extensibility fixture as a NodeSchedule."""
    from ..nodesched import node_schedule_from_json

    if kind not in ("base", "optimized"):
        raise ValueError(f"kind must be 'base' or 'optimized', got {kind!r}")
    return node_schedule_from_json(fixture_json(f"extensibility_{kind}.json"))
