"""Validation and verification reports.

Checks never raise on bad data; each violated rule becomes one entry so a
caller sees everything wrong at once. An empty report means the artifact
passed every check.
"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class Violation:
    kind: str      # stable machine-readable class, e.g. "overlap", "isolation"
    subject: str   # what the entry is about (stream, link, task, ...)
    detail: str    # human-readable explanation

    def __str__(self) -> str:
        return f"[{self.kind}] {self.subject}: {self.detail}"


@dataclass(frozen=True)
class Report:
    violations: tuple[Violation, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations

    def kinds(self) -> set[str]:
        return {v.kind for v in self.violations}

    def of_kind(self, kind: str) -> tuple[Violation, ...]:
        return tuple(v for v in self.violations if v.kind == kind)

    def __len__(self) -> int:
        return len(self.violations)

    def __iter__(self):
        return iter(self.violations)

    def __str__(self) -> str:
        if self.ok:
            return "ok"
        return "\n".join(str(v) for v in self.violations)


class ReportBuilder:
    """Mutable collector used internally by validators and verifiers."""

    def __init__(self):
        self._violations: list[Violation] = []

    def add(self, kind: str, subject: str, detail: str) -> None:
        self._violations.append(Violation(kind, subject, detail))

    def build(self) -> Report:
        return Report(tuple(self._violations))
