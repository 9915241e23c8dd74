import pytest

from algcalc import corpus
from algcalc.algebroid import tangent_algebroid


@pytest.fixture
def tr2():
    return tangent_algebroid(2)


@pytest.fixture
def tr3():
    return tangent_algebroid(3)


@pytest.fixture
def so3():
    return corpus.so3()


@pytest.fixture
def contact(tr3):
    from algcalc.ids import SubbundleSpec
    return SubbundleSpec((tr3.section(0, 1, 0), tr3.section(1, 0, "x2")), "contact")


@pytest.fixture
def plane(tr3):
    from algcalc.ids import SubbundleSpec
    return SubbundleSpec((tr3.section(1, 0, 0), tr3.section(0, 1, 0)), "plane")


VALIDATED = corpus.validated_algebroids()


@pytest.fixture(params=sorted(VALIDATED))
def validated(request):
    return VALIDATED[request.param]


ACCEPTANCE_LINES: list[str] = []


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    if rep.when == "call":
        item.rep_call = rep


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
