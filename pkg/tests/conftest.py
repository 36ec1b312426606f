import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "default", deadline=None, max_examples=60, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def reference_cfg():
    from qteleport.config import load_config
    from pathlib import Path

    return load_config(Path(__file__).resolve().parents[1] / "configs" / "reference.yaml")


ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def accept():
    """Record one PASS/FAIL line per acceptance criterion, then assert it."""

    def record(criterion: str, ok: bool, detail: str):
        line = f"[{'PASS' if ok else 'FAIL'}] criterion {criterion}: {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        assert ok, line

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
