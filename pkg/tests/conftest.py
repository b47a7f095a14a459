import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

import mompca.core as core  # noqa: E402

# Orthonormality audit: every call the fitter makes to check an iterate is
# recorded, so the whole session can be checked against the 1e-10 budget.
ORTHO_LOG = []
_original = core.orthonormality_error


def _recording(V):
    err = _original(V)
    ORTHO_LOG.append(err)
    return err


core.orthonormality_error = _recording


@pytest.fixture
def ortho_log():
    return ORTHO_LOG


ACCEPTANCE = {}


@pytest.fixture
def criterion():
    """Record an acceptance verdict: ``criterion(n, ok, detail)``."""

    def record(number, ok, detail):
        ACCEPTANCE[number] = (bool(ok), detail)
        print(f"criterion {number}: {'PASS' if ok else 'FAIL'} | {detail}")
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for number in sorted(ACCEPTANCE):
            ok, detail = ACCEPTANCE[number]
            terminalreporter.write_line(f"criterion {number:>2}: {'PASS' if ok else 'FAIL'} | {detail}")
    if ORTHO_LOG:
        worst = max(ORTHO_LOG)
        terminalreporter.write_line(
            f"orthonormality audit: {len(ORTHO_LOG)} iterates checked, worst ||V^T V - I||_F = {worst:.2e}"
        )


def pytest_sessionfinish(session, exitstatus):
    if ORTHO_LOG and max(ORTHO_LOG) > core.ORTHO_TOL:
        session.exitstatus = 1
