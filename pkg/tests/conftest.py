"""Shared fixtures plus the acceptance-line reporter.

Acceptance tests call record_acceptance() before asserting, so every
criterion prints exactly one PASS/FAIL line even when the run goes red;
the lines are repeated in a terminal section at the end of the session.
"""

import numpy as np
import pytest

_ACCEPTANCE_LINES: list[str] = []


def record_acceptance(name: str, ok: bool, detail: str = "") -> None:
    line = f"[{'PASS' if ok else 'FAIL'}] {name}"
    if detail:
        line += f" :: {detail}"
    _ACCEPTANCE_LINES.append(line)
    print(line, flush=True)


def random_hermitian(rng: np.random.Generator, k: int, scale: float = 1.0) -> np.ndarray:
    a = rng.standard_normal((k, k)) + 1j * rng.standard_normal((k, k))
    return scale * (a + a.conj().T) / 2.0


def random_complex_matrix(rng: np.random.Generator, k: int, scale: float = 1.0) -> np.ndarray:
    return scale * (rng.standard_normal((k, k)) + 1j * rng.standard_normal((k, k)))


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20260814)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in _ACCEPTANCE_LINES:
        terminalreporter.write_line(line)
