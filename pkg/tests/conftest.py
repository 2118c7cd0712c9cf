import pytest

from nsgate.feedforward import table1_report
from nsgate.solver import SolverConfig, scan_sequences

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def config() -> SolverConfig:
    return SolverConfig()


@pytest.fixture(scope="session")
def scan_entries(config):
    return scan_sequences(4, 2, config)


@pytest.fixture(scope="session")
def table_rows(config):
    return table1_report(config)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
