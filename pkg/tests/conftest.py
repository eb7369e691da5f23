import pytest
from hypothesis import settings

from senstropy import build_sft, full_shift, golden_mean_shift

settings.register_profile("default", max_examples=60, deadline=None, derandomize=True)
settings.load_profile("default")

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def full2():
    return full_shift(2)


@pytest.fixture(scope="session")
def golden():
    return golden_mean_shift()


@pytest.fixture(scope="session")
def single():
    return build_sft(1, [[1]])


@pytest.fixture(scope="session")
def two_fixed():
    return build_sft(2, [[1, 0], [0, 1]])


@pytest.fixture(scope="session")
def acceptance_log():
    return ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
