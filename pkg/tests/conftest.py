import pytest

from giantgyro.linear_response import SystemParams

# One line per acceptance criterion, filled in by tests/test_acceptance.py.
ACCEPTANCE_LINES = []


def record(number: int, passed: bool, text: str) -> None:
    line = f"{'PASS' if passed else 'FAIL'} criterion {number}: {text}"
    ACCEPTANCE_LINES.append((number, line))
    print(line)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in sorted(ACCEPTANCE_LINES, key=lambda item: item[0]):
        terminalreporter.write_line(line)


@pytest.fixture
def ref_params():
    """Reference scenario at phi = pi, C_o = 0.1."""
    import math

    return SystemParams.reference(0.1, drive_phase_per_tau=math.pi)
