import functools

import numpy as np
import pytest

from cometquiver import SolveOptions, complete_comet, minimal_comet, solve


def generic_alpha(n: int) -> np.ndarray:
    """Level vector with no balanced partial sums for n <= 5."""
    k = np.arange(n)
    return 1.0 + 0.13 * k + 0.011 * k**2


def make_quiver(kind: str, r: int, n: int, g: int):
    return (complete_comet if kind == "complete" else minimal_comet)(r, n, g)


@functools.lru_cache(maxsize=None)
def solved(kind: str, r: int, n: int, g: int, seed: int = 11):
    q = make_quiver(kind, r, n, g)
    return q, solve(q, generic_alpha(n), SolveOptions(seed=seed))


@pytest.fixture(scope="session")
def d4():
    """The minimal rank-2 comet with four arms, solved at a generic level."""
    return solved("minimal", 2, 4, 0)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import VERDICTS
    except ImportError:
        return
    if VERDICTS:
        terminalreporter.section("acceptance criteria")
        for line in VERDICTS:
            terminalreporter.write_line(line)
