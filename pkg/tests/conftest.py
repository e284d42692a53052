import warnings

import pytest

from corruwave.errors import BandGapWarning
from corruwave.modes import Device, WaveguideSpec


@pytest.fixture(scope="session")
def spec():
    return WaveguideSpec()


@pytest.fixture(scope="session")
def device(spec):
    return Device.from_spec(spec)


@pytest.fixture(autouse=True)
def _quiet_band_gap():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", BandGapWarning)
        yield


ACCEPTANCE_LINES = []


@pytest.fixture
def report():
    """Record one acceptance line, then assert it."""

    def _report(criterion, ok, detail):
        line = f"criterion {criterion}: {'PASS' if ok else 'FAIL'} - {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return ok

    return _report


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
