import numpy as np
import pytest
from hypothesis import settings

from riqubit import QubitState, RIParams

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")


@pytest.fixture
def detuned():
    """Strongly coupled, detuned model used across most reference runs."""
    return RIParams(omega_s=1.0, omega_a=2.0, j_xx=2.0, j_yy=1.0, j_zz=0.0, beta=1.0, tau=0.01)


@pytest.fixture
def coherent_state():
    return QubitState(p=0.627, c=0.459 - 0.152j)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


_CRITERIA_KEY = pytest.StashKey[dict]()


@pytest.fixture
def criterion(request):
    """Record one pass/fail line for an acceptance criterion, then assert it."""
    lines = request.config.stash.setdefault(_CRITERIA_KEY, {})

    def report(number: int, ok: bool, detail: str) -> None:
        line = f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
        lines[number] = line
        print(line)
        assert ok, line

    return report


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_CRITERIA_KEY, {})
    if lines:
        terminalreporter.section("acceptance criteria")
        for number in sorted(lines):
            terminalreporter.write_line(lines[number])
