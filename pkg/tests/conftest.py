import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from reliable_chain import GeneratorParams, bundled_sites, generate_synthetic
from reliable_chain.instance import random_instance

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture(scope="session")
def sites49():
    return bundled_sites()


@pytest.fixture(scope="session")
def inst49(sites49):
    return generate_synthetic(GeneratorParams(sites=sites49, q=0.1))


@pytest.fixture
def small():
    return random_instance(np.random.default_rng(7), 4, 3, 2, 8, q=0.3)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
