"""Shared fixtures: reference channel matrices, hand-typed as independent oracles.

These constants are deliberately duplicated from the package sources so a
transcription error on either side fails loudly.
"""

import numpy as np
import pytest


@pytest.fixture
def motivating_a():
    return np.array([[0.5, 0.0], [0.5, 0.5], [0.0, 0.5]])


@pytest.fixture
def motivating_b():
    return np.eye(3)


@pytest.fixture
def motivating_phis():
    return {
        1: np.eye(3),
        2: np.array(
            [[0.99, 0.005, 0.005], [0.005, 0.99, 0.005], [0.005, 0.005, 0.99]]
        ),
        3: np.array([[0.99, 0.005, 0.0], [0.01, 0.99, 0.01], [0.0, 0.005, 0.99]]),
        4: np.array([[0.99, 0.0, 0.0], [0.01, 1.0, 0.01], [0.0, 0.0, 0.99]]),
    }


@pytest.fixture
def higher_a():
    t = 1.0 / 3.0
    return np.array(
        [
            [t, 0.0, 0.0],
            [t, t, 0.0],
            [t, t, t],
            [0.0, t, t],
            [0.0, 0.0, t],
        ]
    )


@pytest.fixture
def higher_b():
    return np.array(
        [
            [1.0, 0.5, 0.0, 0.0, 0.0],
            [0.0, 0.5, 0.7, 0.0, 0.0],
            [0.0, 0.0, 0.3, 0.5, 0.0],
            [0.0, 0.0, 0.0, 0.5, 1.0],
        ]
    )


@pytest.fixture
def higher_phis():
    q = 0.0025
    w = 0.01 / 3.0
    return {
        1: np.eye(5),
        2: np.array(
            [
                [0.99, q, q, q, q],
                [q, 0.99, q, q, q],
                [q, q, 0.99, q, q],
                [q, q, q, 0.99, q],
                [q, q, q, q, 0.99],
            ]
        ),
        3: np.array(
            [
                [0.99, w, q, 0.0, 0.0],
                [0.005, 0.99, q, w, 0.0],
                [0.005, w, 0.99, w, 0.005],
                [0.0, w, q, 0.99, 0.005],
                [0.0, 0.0, q, w, 0.99],
            ]
        ),
        4: np.array(
            [
                [0.985, 0.0, 0.0, 0.0, 0.0],
                [0.0075, 0.985, 0.0, 0.0, 0.0],
                [0.0075, 0.015, 1.0, 0.015, 0.0075],
                [0.0, 0.0, 0.0, 0.985, 0.0075],
                [0.0, 0.0, 0.0, 0.0, 0.985],
            ]
        ),
    }


@pytest.fixture
def counter_b():
    return np.array(
        [
            [1.0, 0.0, 0.0, 0.0, 0.0],
            [0.0, 0.5, 0.0, 0.3, 0.2],
            [0.0, 0.0, 0.5, 0.2, 0.3],
            [0.0, 0.3, 0.2, 0.5, 0.0],
            [0.0, 0.2, 0.3, 0.0, 0.5],
        ]
    )


def counter_upsilon(psi: float) -> np.ndarray:
    return np.array(
        [
            [0.0, 0.0, 0.0, 0.0, 0.0],
            [0.0, psi, 0.0, 0.0, 0.0],
            [0.0, 0.0, psi, 0.0, -psi],
            [0.0, -psi, 0.0, 0.0, 0.0],
            [0.0, 0.0, -psi, 0.0, psi],
        ]
    )


@pytest.fixture
def counter_upsilon_1():
    return counter_upsilon(1.0)


@pytest.fixture
def counter_phi2():
    return np.eye(5) - counter_upsilon(1.0)


# ---------- acceptance-criterion reporting ----------

_criterion_lines = []


def record_criterion(number: int, detail: str):
    _criterion_lines.append((number, detail))


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _criterion_lines:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for number, detail in sorted(_criterion_lines):
        terminalreporter.write_line(f"criterion {number:2d}: {detail}")
