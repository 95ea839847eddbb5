import sys

import numpy as np
import pytest

from loopscope import (
    CloverNontrivial,
    DoubleLoop,
    Line,
    PartialCircle,
    SO3Circle,
    Spiral,
    TorusCircle,
    build_distance_field,
    extract_components,
)
from loopscope.detection import Clustering, Detections

N = 512


def block_detections(shapes, n_samples=100_000, gap=20):
    """Detections filling disjoint rectangles of the (i, j) sample grid, one cluster each.

    ``shapes`` lists (rows, cols) per cluster. Returns (detections, clustering).
    """
    ii, jj, lab = [], [], []
    base = 0
    for k, (h, w) in enumerate(shapes):
        I, J = np.meshgrid(np.arange(h), np.arange(w), indexing="ij")
        ii.append(I.ravel() + base)
        jj.append(J.ravel() + base + h + 5)
        lab.append(np.full(h * w, k))
        base += h + w + gap
    i, j = np.concatenate(ii), np.concatenate(jj)
    assert j.max() < n_samples
    d = Detections(i / n_samples, j / n_samples, np.zeros(len(i)), i, j)
    return d, Clustering(np.concatenate(lab).astype(np.int64), len(shapes))


FIXTURES = {
    "line": Line(),
    "circle": PartialCircle(),
    "double-loop": DoubleLoop(),
    "spiral": Spiral(),
    "clover": CloverNontrivial(),
    "torus": TorusCircle(),
    "so3": SO3Circle(),
}


@pytest.fixture(scope="session")
def trajectories():
    return {k: g.generate() for k, g in FIXTURES.items()}


_cache = {}


def field_and_components(traj_name, gamma, resolution=N):
    key = (traj_name, gamma, resolution)
    if key not in _cache:
        traj = FIXTURES[traj_name].generate()
        f = build_distance_field(traj, gamma, resolution)
        _cache[key] = (f, extract_components(f))
    return _cache[key]


@pytest.fixture(scope="session")
def fc():
    return field_and_components


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if results:
        terminalreporter.section("acceptance criteria")
        for k in sorted(results):
            terminalreporter.write_line(results[k])
