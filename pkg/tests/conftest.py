import math

import numpy as np
import pytest

from hodokit import State, SystemParams

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def unit():
    return SystemParams(1.0, 1.0)


@pytest.fixture
def canonical():
    """m = k = 1 hyperbolic state at perihelion: e = 3, R = 1/2, Λ = 4, h = 1."""
    return State((1.0, 0.0, 0.0), (0.0, 2.0, 0.0))


@pytest.fixture
def circular():
    return State((1.0, 0.0, 0.0), (0.0, 1.0, 0.0))


@pytest.fixture
def elliptic():
    """e = 0.44, Λ = 1.44 at perihelion for m = k = 1."""
    return State((1.0, 0.0, 0.0), (0.0, 1.2, 0.0))


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


def rotation_about(axis, angle):
    axis = np.asarray(axis, dtype=float)
    axis = axis / np.linalg.norm(axis)
    K = np.array([[0, -axis[2], axis[1]], [axis[2], 0, -axis[0]], [-axis[1], axis[0], 0]])
    return np.eye(3) + math.sin(angle) * K + (1 - math.cos(angle)) * K @ K


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
