import random

import pytest

from wkneading import fixtures


@pytest.fixture
def tent():
    return fixtures.tent()


@pytest.fixture
def golden():
    return fixtures.golden()


@pytest.fixture
def appc():
    return fixtures.appendix_c(5)


@pytest.fixture
def rng():
    return random.Random(20240611)


EXACT_FIXTURES = {
    "tent": fixtures.tent,
    "golden": fixtures.golden,
    "appendix_c": lambda: fixtures.appendix_c(5),
    "discont_3_2": fixtures.discont_3_2,
}


@pytest.fixture(params=sorted(EXACT_FIXTURES))
def any_fixture(request):
    return EXACT_FIXTURES[request.param]()


def pytest_terminal_summary(terminalreporter):
    lines = []
    for key in ("passed", "failed"):
        for rep in terminalreporter.stats.get(key, []):
            if rep.when != "call":
                continue
            for name, value in getattr(rep, "user_properties", []):
                if name == "criterion":
                    lines.append(value)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
