import numpy as np
import pytest
from hypothesis import settings

# derandomized so repeated runs explore the same examples
settings.register_profile("repo", derandomize=True, deadline=None, max_examples=60)
settings.load_profile("repo")

ACCEPTANCE_LINES: list[str] = []


def pytest_addoption(parser):
    parser.addoption("--seed", type=int, default=20241015, help="seed for numpy-randomized tests")


@pytest.fixture
def rng(request):
    return np.random.default_rng(request.config.getoption("--seed"))


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
