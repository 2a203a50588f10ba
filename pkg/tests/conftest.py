import pytest
from hypothesis import settings

from thermoplate.kernel import make_exponential
from thermoplate.spectral import DomainSpec, build_basis

settings.register_profile("default", max_examples=40, deadline=None)
settings.load_profile("default")

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def basis32():
    return build_basis(DomainSpec(modes=32))


@pytest.fixture(scope="session")
def basis8():
    return build_basis(DomainSpec(modes=8))


@pytest.fixture(scope="session")
def exp_kernel():
    return make_exponential(1.0, 1.0)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
