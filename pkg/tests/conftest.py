from dataclasses import dataclass

import numpy as np
import pytest

from uncertainty_bounds.operators import spin_operators
from uncertainty_bounds.qmcore import (
    HermitianObservable,
    StateVector,
    random_observable,
    random_orthogonal_state,
    random_state,
)

ACCEPTANCE_LINES: list[str] = []


@dataclass
class Instance:
    dim: int
    A: HermitianObservable
    B: HermitianObservable
    C: HermitianObservable
    psi: StateVector
    perp: StateVector


def make_instance(seed, dim=None, lo=2, hi=8) -> Instance:
    rng = np.random.default_rng(seed)
    d = int(rng.integers(lo, hi + 1)) if dim is None else dim
    a, b, c = (random_observable(d, rng) for _ in range(3))
    psi = random_state(d, rng)
    return Instance(d, a, b, c, psi, random_orthogonal_state(psi, rng))


@pytest.fixture(scope="session")
def spin1():
    return spin_operators(1)


@pytest.fixture
def ket():
    def _ket(*amps):
        return StateVector.normalized(np.array(amps, dtype=complex))

    return _ket


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
