import pytest

from ionjch.sweeps import SweepSpec, run_sweep

_criteria = []


@pytest.fixture(scope="session")
def default_sweep():
    """Default N=5, M=5, t=0.3g sweep over [-15g, 15g] with 301 points."""
    return run_sweep(SweepSpec())


def pytest_runtest_logreport(report):
    if report.when == "call" and "test_acceptance.py::test_criterion_" in report.nodeid:
        name = report.nodeid.split("::")[-1]
        _criteria.append((name, report.outcome))


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for name, outcome in _criteria:
        terminalreporter.write_line(f"{'PASS' if outcome == 'passed' else 'FAIL'}  {name}")
