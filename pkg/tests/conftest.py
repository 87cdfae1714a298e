import numpy as np
import pytest

from ccworkbench.dziobek import solve_normalized

UNIT_SQUARE = np.array([[0.0, 0.0], [1.0, 1.0], [1.0, 0.0], [0.0, 1.0]])


@pytest.fixture(scope="session")
def square_newton():
    return solve_normalized([1, 1, 1, 1], -1.5, "--++")


@pytest.fixture(scope="session")
def square_vortex():
    return solve_normalized([1, 1, 1, 1], -1.0, "--++")


@pytest.fixture(scope="session")
def generic_1234():
    return solve_normalized([1, 2, 3, 4], -1.5, "--++")


def pytest_terminal_summary(terminalreporter):
    from . import test_acceptance

    if test_acceptance.RESULTS:
        terminalreporter.section("acceptance criteria")
        for k in sorted(test_acceptance.RESULTS):
            ok, detail = test_acceptance.RESULTS[k]
            terminalreporter.write_line(f"criterion {k:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
