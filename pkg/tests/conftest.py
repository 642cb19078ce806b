"""Collects acceptance verdicts and prints one line per criterion after the run."""

from __future__ import annotations

import pytest

_VERDICTS: dict[str, list[tuple[bool, str]]] = {}


class Recorder:
    def __call__(self, criterion: str, ok: bool, detail: str) -> bool:
        _VERDICTS.setdefault(criterion, []).append((bool(ok), detail))
        return bool(ok)


@pytest.fixture
def verdict():
    return Recorder()


def _order(key: str):
    head, _, tail = key.partition("-")
    return int(head[1:]) if head[1:].isdigit() else 99, tail


def pytest_terminal_summary(terminalreporter):
    if not _VERDICTS:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for key in sorted(_VERDICTS, key=_order):
        parts = _VERDICTS[key]
        ok = all(p for p, _ in parts)
        tr.write_line(f"{key:<6} {'PASS' if ok else 'FAIL'}  " + " | ".join(d for _, d in parts))
