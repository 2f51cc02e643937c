import pytest

from ponderoscatter import PhysicalConfig, derive_sim_params

# filled by test_acceptance; echoed at the end of the session
ACCEPTANCE_LINES: dict[int, str] = {}


@pytest.fixture(scope="session")
def params():
    return derive_sim_params(PhysicalConfig())


@pytest.fixture(scope="session")
def params_mu0():
    return derive_sim_params(PhysicalConfig(mu=0.0))


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[k])
