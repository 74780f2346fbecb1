import pytest

from hamforge.expcalc import ensure_precision, mpf
from hamforge.profiles import AnsatzConfig
from hamforge import solvers

ensure_precision()

# one line per acceptance criterion, printed in the terminal summary
ACCEPTANCE_LINES = {}


def record(criterion: int, passed: bool, detail: str = "") -> None:
    flag = "PASS" if passed else "FAIL"
    line = f"criterion {criterion}: {flag} {detail}".rstrip()
    ACCEPTANCE_LINES[criterion] = line
    print(line)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[k])


def cp1_config():
    return AnsatzConfig("type2", "cy", 1, 2, (0, 0), (1, 1))


def cy_config():
    return AnsatzConfig("type1", "cy", 2, 3, (0, 0), (2, 1))


def steady_config(a):
    return AnsatzConfig("type1", "steady", 2, 3, (0, 0), (2, 1), a)


def shrinker_config():
    return AnsatzConfig("type1", "shrinking", 3, 4, (0, 0), (2, 1))


def expander_config():
    return AnsatzConfig("type1", "expanding", 1, 2, (0, 0), (2, 1), 1)


def rank3_config(a):
    return AnsatzConfig("type2", "cy" if a == 0 else "steady", 3, 4, (0, 0, 0), (1, 2, 1), a)


@pytest.fixture(scope="session")
def cp1_model():
    return solvers.solve(cp1_config())


@pytest.fixture(scope="session")
def cy_model():
    return solvers.solve(cy_config())


@pytest.fixture(scope="session")
def steady_models():
    return {a: solvers.solve(steady_config(a)) for a in (mpf("0.5"), 1, 2)}


@pytest.fixture(scope="session")
def shrinker_model():
    return solvers.solve(shrinker_config())


@pytest.fixture(scope="session")
def expander_model():
    return solvers.solve(expander_config())
