import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.spatial.transform import Rotation as R

import oracles
from conftest import FIXTURES
from loopscope import (
    DetectionGraphConfig,
    Detections,
    build_distance_field,
    cluster_detections,
    detect,
    detect_brute_force,
    extract_components,
    pairwise_distance,
    subsample,
)

GAMMA = {"line": 0.1, "circle": 1.0, "double-loop": 1.0, "spiral": 1.0, "clover": 1.0, "torus": 1.0, "so3": 1.0}


def oracle_distance(kind):
    if kind == "euclidean":
        return None
    if kind == "torus":
        def torus(a, b):
            d = np.abs(a - b) % (2 * np.pi)
            d = np.minimum(d, 2 * np.pi - d)
            return np.sqrt((d**2).sum(axis=1))
        return torus

    def so3(a, b):
        theta = (R.from_rotvec(a).inv() * R.from_rotvec(b)).magnitude()
        return 2 * np.sqrt(2) * np.sin(theta / 2)
    return so3


def pairs(d):
    return set(zip(d.i.tolist(), d.j.tolist()))


@pytest.mark.parametrize("name", sorted(FIXTURES))
@pytest.mark.parametrize("band", [0.0, 0.05])
def test_detect_equals_banded_brute_force(trajectories, name, band):
    tr = trajectories[name]
    g = GAMMA[name]
    got = detect(tr, g, exclude_band=band)
    ref = detect_brute_force(tr, g, exclude_band=band)
    assert pairs(got) == pairs(ref)
    np.testing.assert_array_equal(got.i, ref.i)
    np.testing.assert_array_equal(got.j, ref.j)
    np.testing.assert_array_equal(got.dist, ref.dist)
    # independent enumeration, ignoring pairs within rounding of gamma
    expected = oracles.all_pairs_within(tr.points, g, tr.times, band, oracle_distance(tr.kind))
    near = oracles.all_pairs_within(tr.points, g + 1e-9, tr.times, band, oracle_distance(tr.kind)) - \
        oracles.all_pairs_within(tr.points, g - 1e-9, tr.times, band, oracle_distance(tr.kind))
    assert pairs(got) - near == expected - near


def test_detection_record_invariants(trajectories):
    tr = trajectories["double-loop"]
    d = detect(tr, 1.0)
    assert np.all(d.t < d.t_prime) and np.all(d.dist <= 1.0)
    order = np.lexsort((d.t_prime, d.t))
    np.testing.assert_array_equal(order, np.arange(len(d)))
    for k in np.random.default_rng(0).choice(len(d), 50, replace=False):
        det = d[int(k)]
        assert det.dist == pairwise_distance(tr, det.t, det.t_prime)


def test_line_all_pairs_within_gamma(trajectories):
    tr = trajectories["line"]
    d = detect(tr, 0.1)
    gap = d.t_prime - d.t
    assert np.all(gap <= 0.1 + 1e-12)
    n = len(tr)
    i, j = np.triu_indices(n, 1)
    assert len(d) == int(np.count_nonzero(np.abs(tr.points[j, 0] - tr.points[i, 0]) <= 0.1))


def test_everything_within_max(trajectories):
    for name in ("circle", "torus", "so3"):
        tr = trajectories[name]
        n = len(tr)
        d = detect(tr, tr.max_pairwise_distance())
        assert len(d) == n * (n - 1) // 2


def test_circle_band_only_nontrivial(trajectories):
    tr = trajectories["circle"]
    d = detect(tr, 1.0, exclude_band=0.5)
    assert len(d) > 0
    f = build_distance_field(tr, 1.0, len(tr))
    cs = extract_components(f)
    labels = cs.labels[d.i, d.j]
    (c,) = cs.nontrivial()
    assert np.all(labels == c.id)
    assert len(d) == c.size


def test_detect_worker_independent(trajectories, monkeypatch):
    tr = trajectories["spiral"]
    ref = detect(tr, 1.0, workers=1)
    for w in (2, 5):
        got = detect(tr, 1.0, workers=w)
        np.testing.assert_array_equal(got.i, ref.i)
        np.testing.assert_array_equal(got.dist, ref.dist)
    monkeypatch.setenv("LOOPSCOPE_THREADS", "3")
    np.testing.assert_array_equal(detect(tr, 1.0).j, ref.j)


def test_detect_preconditions(trajectories):
    with pytest.raises(ValueError):
        detect(trajectories["line"], 0.0)
    with pytest.raises(ValueError):
        detect(trajectories["line"], 0.1, exclude_band=-1.0)


def test_empty_detection_valid(trajectories):
    d = detect(trajectories["line"], 1e-6, exclude_band=0.5)
    assert len(d) == 0


# ---------------------------------------------------------------------------
# subsample


def flat_detections(n):
    t = np.arange(n) / (2 * n)
    return Detections.from_arrays(t, t + 0.5, np.zeros(n))


def test_subsample_identity_and_size():
    d = flat_detections(10_000)
    assert subsample(d, 1.0, 3) is d
    s = subsample(d, 0.01, 3)
    assert len(s) == 100
    assert np.all(np.diff(s.t) > 0)
    np.testing.assert_array_equal(subsample(d, 0.01, 3).t, s.t)
    assert not np.array_equal(subsample(d, 0.01, 4).t, s.t)


@pytest.mark.parametrize("f", [0.0, -0.5, 1.5])
def test_subsample_fraction_range(f):
    with pytest.raises(ValueError):
        subsample(flat_detections(10), f, 0)


# ---------------------------------------------------------------------------
# clustering


def from_points(XY):
    XY = np.asarray(XY, dtype=float)
    return Detections.from_arrays(XY[:, 0], XY[:, 1], np.zeros(len(XY)))


def test_cluster_within_and_beyond_eps():
    eps = 0.01
    one = cluster_detections(from_points([[0.1, 0.9], [0.1 + eps / 2, 0.9]]), DetectionGraphConfig(eps))
    assert one.n_clusters == 1
    two = cluster_detections(from_points([[0.1, 0.9], [0.1 + 2 * eps, 0.9]]), DetectionGraphConfig(eps))
    assert two.n_clusters == 2


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 300), st.floats(0.005, 0.2))
def test_cluster_matches_all_pairs_oracle(seed, n, eps):
    rng = np.random.default_rng(seed)
    t = rng.random(n) * 0.5
    XY = np.column_stack([t, t + 1e-6 + rng.random(n) * 0.5])
    d = from_points(XY)
    c = cluster_detections(d, DetectionGraphConfig(eps))
    assert oracles.partitions_equal(c.labels, oracles.epsilon_graph_partition(d.plane(), eps))


def test_cluster_exact_eps_not_linked():
    d = from_points([[0.25, 0.5], [0.25, 0.75]])
    assert cluster_detections(d, DetectionGraphConfig(0.25)).n_clusters == 2


@pytest.mark.parametrize("name", ["double-loop", "torus", "clover"])
def test_cluster_fixture_detections_match_oracle(trajectories, name):
    full = detect(trajectories[name], 1.0, exclude_band=0.05)
    d = subsample(full, min(1.0, 4000 / len(full)), 1)
    assert 0 < len(d) <= 4000
    c = cluster_detections(d, DetectionGraphConfig(0.02))
    assert oracles.partitions_equal(c.labels, oracles.epsilon_graph_partition(d.plane(), 0.02))


def test_cluster_order_independent(trajectories):
    d = subsample(detect(trajectories["double-loop"], 1.0), 0.05, 2)
    cfg = DetectionGraphConfig(0.01)
    ref = cluster_detections(d, cfg)
    perm = np.random.default_rng(5).permutation(len(d))
    shuffled = Detections(d.t[perm], d.t_prime[perm], d.dist[perm], d.i[perm], d.j[perm])
    got = cluster_detections(shuffled, cfg)
    np.testing.assert_array_equal(got.labels, ref.labels[perm])


def test_min_component_size_drops_small():
    XY = [[0.1, 0.2], [0.1, 0.201], [0.1, 0.202], [0.5, 0.9]]
    c = cluster_detections(from_points(XY), DetectionGraphConfig(0.01, min_component_size=2))
    assert c.n_clusters == 1
    np.testing.assert_array_equal(c.labels, [0, 0, 0, -1])
    default = cluster_detections(from_points(XY), DetectionGraphConfig(0.01))
    assert default.n_clusters == 2


def test_circle_clusters_match_components_by_majority(trajectories):
    tr = trajectories["circle"]
    d = detect(tr, 1.0)
    c = cluster_detections(d, DetectionGraphConfig(0.02))
    cs = extract_components(build_distance_field(tr, 1.0, len(tr)))
    lab = cs.labels[d.i, d.j]
    votes = {k: np.bincount(lab[c.labels == k]).argmax() for k in range(c.n_clusters)}
    assert c.n_clusters == len(cs) == 2
    assert sorted(votes.values()) == [0, 1]
    banded = cluster_detections(detect(tr, 1.0, exclude_band=0.5), DetectionGraphConfig(0.02))
    assert banded.n_clusters == 1


@pytest.mark.parametrize("name", ["circle", "double-loop", "torus"])
def test_each_component_in_one_cluster(trajectories, name):
    tr = trajectories[name]
    n = len(tr)
    d = detect(tr, 1.0)
    c = cluster_detections(d, DetectionGraphConfig(2.0 / (n - 1)))
    cs = extract_components(build_distance_field(tr, 1.0, n))
    lab = cs.labels[d.i, d.j]
    for comp in cs.nontrivial():
        assert len(np.unique(c.labels[lab == comp.id])) == 1


def test_config_validation():
    with pytest.raises(ValueError):
        DetectionGraphConfig(0.0)
    with pytest.raises(ValueError):
        DetectionGraphConfig(0.1, min_component_size=0)
    with pytest.raises(ValueError):
        DetectionGraphConfig(0.1, subsample_fraction=0.0)
