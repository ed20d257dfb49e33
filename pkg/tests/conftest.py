import numpy as np
import pytest

from qtruncate.circuit import BeamSplitter, Circuit, PhaseShifter


def random_circuit(rng: np.random.Generator, num_modes: int, depth: int | None = None) -> Circuit:
    depth = 2 * num_modes if depth is None else depth
    elements = []
    for _ in range(depth):
        if num_modes > 1:
            a, b = rng.choice(num_modes, size=2, replace=False) + 1
            elements.append(BeamSplitter(int(a), int(b), float(rng.uniform())))
        elements.append(PhaseShifter(int(rng.integers(1, num_modes + 1)), float(rng.uniform(0, 2 * np.pi))))
    return Circuit(num_modes, tuple(elements))


def random_occupation(rng: np.random.Generator, num_modes: int, max_total: int) -> tuple:
    total = int(rng.integers(0, max_total + 1))
    cuts = np.sort(rng.integers(0, total + 1, size=num_modes - 1))
    edges = np.concatenate([[0], cuts, [total]])
    return tuple(int(v) for v in np.diff(edges))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for number in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[number])
