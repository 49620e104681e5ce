import pytest

from divmca import Grid, example_model, solve

# criterion number -> (passed, detail); filled by test_acceptance.py
ACCEPTANCE = {}


@pytest.fixture(scope="session")
def acceptance():
    return ACCEPTANCE


@pytest.fixture(scope="session")
def coarse_grid():
    return Grid(0.25, 20.0)


@pytest.fixture(scope="session")
def prop_exp():
    return example_model("prop-exp")


@pytest.fixture(scope="session")
def prop_exp_solution(prop_exp):
    g = Grid(0.1, 100.0)
    return g, solve(prop_exp, g)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[k]
        tr.write_line(f"criterion {k}: {'PASS' if ok else 'FAIL'}  {detail}")
