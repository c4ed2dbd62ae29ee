import pytest

from mfderive.pipeline import bundled_model_path, derive, load_model
from mfderive.taylor import ExpansionOptions


@pytest.fixture(scope="session")
def pedestrian():
    return load_model(bundled_model_path("pedestrian"))


@pytest.fixture(scope="session")
def adhesion():
    return load_model(bundled_model_path("adhesion"))


@pytest.fixture(scope="session")
def pedestrian_report(pedestrian):
    return derive(pedestrian)


@pytest.fixture(scope="session")
def adhesion_report(adhesion):
    return derive(adhesion, ExpansionOptions(order=2, scaling=2, keep=1))


def pytest_terminal_summary(terminalreporter):
    from .test_acceptance import RESULTS

    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
