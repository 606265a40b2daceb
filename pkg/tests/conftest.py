import math
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from decafsa.instances import TspInstance, distance_matrix  # noqa: E402

UNIT_SQUARE = ((0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0))

# hand-placed micro instances, 4 to 9 cities
MICRO = {
    "square4": UNIT_SQUARE,
    "pentagon5": tuple((math.cos(2 * math.pi * k / 5), math.sin(2 * math.pi * k / 5))
                       for k in range(5)),
    "rect6": ((0, 0), (2, 0), (4, 0), (4, 1), (2, 1), (0, 1)),
    "zigzag7": ((0, 0), (1, 3), (2, 0), (3, 3), (4, 0), (5, 3), (6, 0)),
    "grid8": ((0, 0), (1, 0), (2, 0), (3, 0), (3, 1), (2, 1), (1, 1), (0, 1)),
    "star9": ((0, 0), (5, 1), (1, 5), (-4, 3), (-5, -1), (-2, -5), (3, -4), (2, 2), (-1, 1)),
}


@pytest.fixture
def square_d():
    return distance_matrix(TspInstance("square", UNIT_SQUARE))


def make_d(points, metric="real"):
    return distance_matrix(TspInstance("t", tuple(tuple(map(float, p)) for p in points), metric))


ACCEPTANCE: list[str] = []


def record(criterion: str, passed: bool, detail: str) -> bool:
    line = f"{'PASS' if passed else 'FAIL'}  criterion {criterion}: {detail}"
    ACCEPTANCE.append(line)
    print(line)
    return passed


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE:
            terminalreporter.write_line(line)
