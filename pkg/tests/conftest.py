import itertools

import numpy as np
import pytest

from niss import BinarySourceSpec


def random_source(rng: np.random.Generator, floor: float = 0.02) -> BinarySourceSpec:
    """Random 2x2 pmf with every cell at least ``floor`` (non-degenerate marginals)."""
    w = rng.dirichlet(np.ones(4)) * (1 - 4 * floor) + floor
    return BinarySourceSpec(w.reshape(2, 2))


def points(d):
    """Coordinates of every point, in index order (bit j <-> x_{j+1}, 1 <-> +1)."""
    return [tuple(1 if (i >> j) & 1 else -1 for j in range(d)) for i in range(1 << d)]


def brute_joint(src: BinarySourceSpec, d: int):
    """P^{(x)d}(x, y) by explicit per-coordinate products."""
    pts = points(d)
    out = np.zeros((1 << d, 1 << d))
    for i, x in enumerate(pts):
        for j, y in enumerate(pts):
            prob = 1.0
            for a, b in zip(x, y):
                prob *= src.pmf[(a + 1) // 2, (b + 1) // 2]
            out[i, j] = prob
    return out


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def all_subsets_pairs(d):
    return itertools.product(range(1 << d), repeat=2)


_VERDICTS: list[tuple[int, bool, str]] = []


@pytest.fixture
def record():
    def _record(n, passed, detail):
        line = f"criterion {n}: {'PASS' if passed else 'FAIL'} - {detail}"
        _VERDICTS.append((n, passed, detail))
        print(line)

    return _record


def pytest_terminal_summary(terminalreporter):
    if not _VERDICTS:
        return
    terminalreporter.section("acceptance criteria")
    for n, passed, detail in sorted(_VERDICTS):
        terminalreporter.write_line(f"criterion {n}: {'PASS' if passed else 'FAIL'} - {detail}")
