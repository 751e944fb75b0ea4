"""Shared fixtures: the acceptance suite records one verdict per criterion and
the terminal summary prints them as PASS/FAIL lines."""

from __future__ import annotations

from dataclasses import dataclass, field

import pytest


@dataclass
class Criterion:
    key: str
    title: str
    parts: dict = field(default_factory=dict)  # part -> (measured, bound, passed)

    @property
    def passed(self) -> bool:
        return bool(self.parts) and all(ok for _, _, ok in self.parts.values())

    def line(self) -> str:
        verdict = "PASS" if self.passed else "FAIL"
        body = "; ".join(f"{p}: {m:.3g} {b}" for p, (m, b, _) in self.parts.items())
        return f"{verdict} {self.key} {self.title} [{body}]"


_CRITERIA: dict = {}


@pytest.fixture
def criterion():
    """``criterion(key, title, part, measured, tolerance)`` records and returns pass/fail.

    ``measured`` is an error (or a margin) that passes when ``<= tolerance``,
    or ``< tolerance`` with ``strict=True``.
    """

    def record(key: str, title: str, part: str, measured: float, tolerance: float, strict: bool = False) -> bool:
        entry = _CRITERIA.setdefault(key, Criterion(key, title))
        ok = bool(measured < tolerance) if strict else bool(measured <= tolerance)  # NaN fails
        bound = f"{'<' if strict else '<='} {tolerance:g}"
        entry.parts[part] = (float(measured), bound, ok)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(_CRITERIA, key=lambda k: int(k[2:])):
        terminalreporter.write_line(_CRITERIA[key].line())
