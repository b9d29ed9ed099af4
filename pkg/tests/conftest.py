import numpy as np
import pytest

from hopf_vem.element import CellData, ModelCoefficients, build_element
from hopf_vem.mesh import build_mesh

UNIT_SQUARE = [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)]
RIGHT_TRIANGLE = [(0.0, 0.0), (1.0, 0.0), (0.0, 1.0)]
PENTAGON = [(0.0, 0.0), (2.0, 0.0), (2.5, 1.0), (1.0, 2.0), (-0.5, 1.0)]
HEXAGON = [(np.cos(t), np.sin(t)) for t in np.arange(6) * np.pi / 3]

# lines collected by the acceptance suite and echoed in the terminal summary
ACCEPTANCE_LINES: list[str] = []


def green_integral(pts, a: int, b: int) -> float:
    """int_P x^a y^b by the divergence theorem with F = (x^(a+1) / (a+1), 0).

    Edge integrals use Gauss-Legendre with enough nodes to be exact, so no
    sub-triangulation is involved.
    """
    pts = np.asarray(pts, dtype=float)
    xi, w = np.polynomial.legendre.leggauss((a + b + 2) // 2 + 1)
    s, w = 0.5 * (xi + 1), 0.5 * w
    total = 0.0
    for p, q in zip(pts, np.roll(pts, -1, axis=0)):
        x = p[0] + s * (q[0] - p[0])
        y = p[1] + s * (q[1] - p[1])
        total += (w * x ** (a + 1) * y**b).sum() / (a + 1) * (q[1] - p[1])
    return float(total)


def single_cell_mesh(pts):
    return build_mesh(np.asarray(pts, dtype=float), [list(range(len(pts)))])


def two_quads():
    """[0,2] x [0,1] split into two unit squares."""
    verts = np.array([(0, 0), (1, 0), (2, 0), (0, 1), (1, 1), (2, 1)], dtype=float)
    return build_mesh(verts, [[0, 1, 4, 3], [1, 2, 5, 4]])


@pytest.fixture
def square_cell():
    return CellData.standalone(UNIT_SQUARE)


@pytest.fixture(params=[2, 3, 4], ids=lambda k: f"k{k}")
def k(request):
    return request.param


@pytest.fixture
def square_ops(square_cell, k):
    return build_element(square_cell, k, ModelCoefficients())


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance: acceptance-criteria suite")


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
