import numpy as np
import pytest

from archpmle.params import ParamVector
from archpmle.weights import ModelSpec

GEXP_BOUNDS = np.array([[0.02, 1.0], [-0.5, 0.5], [0.05, 1.5], [0.1, 3.0]])


@pytest.fixture
def gexp_theta():
    return ParamVector(ModelSpec("gexp", 1), 0.2, 0.0, [0.5, 0.7])


def central_diff(f, x, h):
    """Central differences of a scalar- or array-valued ``f`` along each coordinate."""
    x = np.asarray(x, dtype=float)
    cols = []
    for i in range(x.shape[0]):
        step = np.zeros_like(x)
        step[i] = h[i]
        cols.append((np.asarray(f(x + step)) - np.asarray(f(x - step))) / (2.0 * h[i]))
    return np.stack(cols, axis=-1)


def rel_err(a, b):
    a, b = np.asarray(a), np.asarray(b)
    return float(np.max(np.abs(a - b)) / max(np.max(np.abs(b)), 1e-300))


ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def acceptance():
    """Record and print one result line per acceptance criterion."""

    def record(number: int, ok: bool, detail: str) -> None:
        line = f"ACCEPTANCE {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
