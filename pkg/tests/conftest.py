import numpy as np
import pytest

from risqkd.noise import NoiseVariances


def random_passive(rng: np.random.Generator, rows: int, cols: int, max_gain: float = 1.0) -> np.ndarray:
    """Complex matrix with singular values drawn in [0, max_gain]."""
    a = rng.normal(size=(rows, cols)) + 1j * rng.normal(size=(rows, cols))
    u, _, vh = np.linalg.svd(a, full_matrices=False)
    s = np.sort(rng.uniform(0, max_gain, size=min(rows, cols)))[::-1]
    return (u * s) @ vh


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def default_noise():
    return NoiseVariances.at_temperature(15e12, 296.0)


def generic_two_mode_eve(beta: float, v_a: float, v_e: float, s2: float):
    """Eve's (e_out, idler) covariance before and after Bob's noisy x-homodyne.

    Built by pushing Alice's thermal mode and Eve's TMSV through an explicit
    beam splitter of transmissivity ``beta``; independent of any closed form.
    """
    from risqkd.gaussian import homodyne_condition, tmsv_covariance

    cov = np.zeros((6, 6))
    cov[:2, :2] = v_a * np.eye(2)
    cov[2:, 2:] = tmsv_covariance(v_e)
    t, r = np.sqrt(beta), np.sqrt(1 - beta)
    s = np.eye(6)
    s[:4, :4] = np.kron(np.array([[t, r], [-r, t]]), np.eye(2))
    out = s @ cov @ s.T
    out[:2, :2] += s2 * np.eye(2)
    return out[2:, 2:], homodyne_condition(out, [1, 2], [0])


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
