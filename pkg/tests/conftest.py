import pytest

from frozen_planet import seed_r1, newton_solve, sweep

ACCEPTANCE_LINES = []


def record(number, ok, detail):
    ACCEPTANCE_LINES.append(f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}")
    print(ACCEPTANCE_LINES[-1])


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def orbit_r1():
    return newton_solve(seed_r1(), 1.0)


@pytest.fixture(scope="session")
def branch20():
    return sweep(1.0, 0.0, 20)


@pytest.fixture(scope="session")
def orbit_half(branch20):
    return next(o for o in branch20.orbits if o.r == 0.5)


@pytest.fixture(scope="session")
def orbit_r0(branch20):
    return branch20.orbits[-1]
