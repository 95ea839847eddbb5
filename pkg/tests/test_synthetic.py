import numpy as np
import pytest
from scipy.spatial.transform import Rotation

from conftest import FIXTURES
from loopscope import (
    L2,
    CloverNontrivial,
    DoubleLoop,
    Line,
    PartialCircle,
    SO3Circle,
    SO3Frobenius,
    Spiral,
    StreetGrid,
    TorusCircle,
    TorusL2,
    build_distance_field,
    extract_components,
    generate,
    pairwise_distance,
)
from loopscope.synthetic import FIXTURE_RADIUS, GENERATORS

# 2 r sin(0.05 pi) at r = 7 pi / 8, computed once from the chord formula
CIRCLE_GAP = 0.8600433907426176
# 2 sqrt(2) sin(pi / 8): relative angle 2r mod 2pi = pi / 4 at the antipode
SO3_ANTIPODE_GAP = 1.0823922002923940


def test_frozen_constants():
    assert CIRCLE_GAP == pytest.approx(2 * FIXTURE_RADIUS * np.sin(0.05 * np.pi), abs=1e-15)
    assert CIRCLE_GAP == pytest.approx(0.8599, abs=2e-3)
    assert SO3_ANTIPODE_GAP == pytest.approx(2 * np.sqrt(2) * np.sin(np.pi / 8), abs=1e-15)


@pytest.mark.parametrize("name", sorted(FIXTURES))
def test_field_symmetric_zero_diagonal(trajectories, name):
    f = build_distance_field(trajectories[name], 1.0, 128)
    np.testing.assert_array_equal(f.values, f.values.T)
    assert np.all(np.diag(f.values) == 0)


@pytest.mark.parametrize("name", sorted(FIXTURES))
def test_uniform_time_and_default_metric(trajectories, name):
    tr = trajectories[name]
    np.testing.assert_allclose(np.diff(tr.times), 1 / (len(tr) - 1), rtol=1e-9)
    expected = {"euclidean": L2, "torus": TorusL2, "so3": SO3Frobenius}[tr.kind]
    assert type(tr.metric) is expected
    assert tr.times[0] == 0 and tr.times[-1] == 1


def test_circle_endpoint_gap(trajectories):
    tr = trajectories["circle"]
    assert len(tr) == 1000
    assert pairwise_distance(tr, 0.0, 1.0) == pytest.approx(CIRCLE_GAP, abs=1e-12)


def test_full_circle_closes():
    tr = PartialCircle(fraction=1.0).generate()
    assert pairwise_distance(tr, 0.0, 1.0) <= 1e-12


def test_torus_circle_closes(trajectories):
    assert pairwise_distance(trajectories["torus"], 0.0, 1.0) <= 1e-6


def test_torus_two_near_approach_components(fc):
    f, cs = fc("torus", 1.0)
    off = [c for c in cs.nontrivial() if c.bbox[0] > 0 or c.bbox[3] < 1]
    assert len(off) == 2


def test_so3_interior_minimum_at_antipode(trajectories):
    tr = trajectories["so3"]
    n = len(tr)
    row = np.array([pairwise_distance(tr, 0.0, t) for t in tr.times])
    interior = slice(n // 8, n - n // 8)
    k = interior.start + int(np.argmin(row[interior]))
    # dense scan of the closed-form curve with an independent rotation library
    s = np.linspace(0, 1, 200_001)
    a = 2 * np.pi * s
    pts = FIXTURE_RADIUS * np.column_stack([np.cos(a), np.sin(a), np.zeros_like(a)])
    theta = (Rotation.from_rotvec(pts[:1]).inv() * Rotation.from_rotvec(pts)).magnitude()
    ref = 2 * np.sqrt(2) * np.sin(theta / 2)
    inner = (s > 0.125) & (s < 0.875)
    s_star = s[inner][np.argmin(ref[inner])]
    assert s_star == pytest.approx(0.5, abs=1e-5)
    assert ref[inner].min() == pytest.approx(SO3_ANTIPODE_GAP, abs=1e-9)
    assert abs(k - s_star * (n - 1)) <= 2
    assert row[k] == pytest.approx(SO3_ANTIPODE_GAP, abs=1e-4)


def test_line_is_time_difference(trajectories):
    tr = trajectories["line"]
    rng = np.random.default_rng(0)
    for t, u in rng.random((50, 2)):
        ti, ui = tr.times[tr.nearest_index(t)], tr.times[tr.nearest_index(u)]
        assert pairwise_distance(tr, ti, ui) == pytest.approx(abs(ti - ui), abs=1e-12)


def test_fixture_component_layouts(fc):
    assert len(fc("circle", 1.0)[1]) == 2
    assert len(fc("double-loop", 1.0)[1]) > 1
    assert len(fc("double-loop", 3.0)[1]) == 1
    for g in (1.0, 3.0):
        cs = fc("spiral", g)[1]
        assert len(cs) == 1 and cs[0].is_trivial
    assert fc("clover", 1.0)[1].trivial.hole_count >= 1


@pytest.mark.parametrize(
    "bad",
    [
        lambda: PartialCircle(radius=0),
        lambda: PartialCircle(fraction=0),
        lambda: PartialCircle(fraction=1.2),
        lambda: Spiral(pitch=-1),
        lambda: Line(samples=1),
        lambda: Line(samples=2.5),
        lambda: DoubleLoop(offset=-0.1),
        lambda: TorusCircle(radius=-1),
        lambda: SO3Circle(radius=4.0),
        lambda: CloverNontrivial(width=0),
        lambda: StreetGrid(samples=1),
    ],
)
def test_invalid_parameters(bad):
    with pytest.raises(ValueError):
        bad().generate()


def test_generate_dispatch_and_registry():
    assert set(GENERATORS) == {"line", "circle", "double-loop", "spiral", "clover",
                               "torus-circle", "so3-circle", "street-grid"}
    a = generate(Spiral(samples=50))
    b = Spiral(samples=50).generate()
    np.testing.assert_array_equal(a.points, b.points)


def test_double_loop_offset_separates_circles():
    tr = DoubleLoop(offset=0.5, samples=400).generate()
    # connector is straight along x
    mid = (tr.points[:, 1] == 0) & (tr.points[:, 0] > 0) & (tr.points[:, 0] < 0.5)
    assert mid.any()


def test_street_grid_shape():
    g = StreetGrid(samples=3000, blocks=4, seed=3)
    tr = g.generate()
    assert tr.kind == "se3" and tr.points.shape == (3000, 6)
    assert tr.raw_time_span == (0.0, 299.9)
    step = np.linalg.norm(np.diff(tr.points[:, :3], axis=0), axis=1)
    np.testing.assert_allclose(step, 1.0, atol=1e-9)
    assert tr.points[:, :2].min() >= 0 and tr.points[:, :2].max() <= 400
    np.testing.assert_array_equal(StreetGrid(samples=3000, blocks=4, seed=3).generate().points, tr.points)
