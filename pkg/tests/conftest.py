import pytest
from hypothesis import HealthCheck, settings

from centrifuge_pilot import _kernels
from centrifuge_pilot.config import PipelineConfig

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture
def cfg():
    return PipelineConfig()


@pytest.fixture(params=sorted(_kernels.available_backends()))
def backend(request, monkeypatch):
    """Run the test once per importable kernel backend."""
    monkeypatch.setattr(_kernels, "backend", _kernels.available_backends()[request.param])
    return request.param


def pytest_terminal_summary(terminalreporter):
    from .acceptance_log import LINES
    if LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(LINES, key=lambda s: int(s.split("criterion ")[1].split(":")[0])):
            terminalreporter.write_line(line)
