"""Discretely sampled trajectories and their pairwise distance fields."""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .manifolds import (
    DEFAULT_METRIC,
    ManifoldPoint,
    Metric,
    bind,
    canonicalize_points,
    make_metric,
    point_from_array,
)

MAX_DEFAULT_RESOLUTION = 2048


def worker_count(default: int | None = None) -> int:
    """Worker cap from ``LOOPSCOPE_THREADS`` (falls back to the CPU count)."""
    env = os.environ.get("LOOPSCOPE_THREADS")
    if env:
        try:
            n = int(env)
        except ValueError:
            raise ValueError(f"LOOPSCOPE_THREADS must be an integer, got {env!r}") from None
        return max(1, n)
    if default is not None:
        return max(1, default)
    return max(1, os.cpu_count() or 1)


def _check_time(t) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    if np.any(~np.isfinite(t)) or np.any(t < 0.0) or np.any(t > 1.0):
        raise ValueError("time outside [0, 1]")
    return t


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Samples ``points[k]`` of a manifold-valued path at normalized ``times[k]``.

    ``times`` run strictly increasing from exactly 0 to exactly 1;
    ``raw_time_span`` keeps the original (t0, tf) in seconds.
    """

    times: np.ndarray
    points: np.ndarray
    kind: str
    metric: Metric
    raw_time_span: tuple[float, float] = (0.0, 1.0)
    _features: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        t = np.array(self.times, dtype=float)
        P = canonicalize_points(self.kind, self.points)
        if t.ndim != 1 or len(t) != len(P):
            raise ValueError("times and points must have matching length")
        if len(t) < 2:
            raise ValueError("a trajectory needs at least 2 samples")
        if t[0] != 0.0 or t[-1] != 1.0:
            raise ValueError("normalized times must start at 0 and end at 1")
        if np.any(np.diff(t) <= 0):
            raise ValueError("times must be strictly increasing")
        t0, tf = map(float, self.raw_time_span)
        if not tf > t0:
            raise ValueError("raw time span must have tf > t0")
        bound = bind(self.metric, self.kind)
        t.setflags(write=False)
        P.setflags(write=False)
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "points", P)
        object.__setattr__(self, "raw_time_span", (t0, tf))
        feats = bound.features(P)
        feats.setflags(write=False)
        object.__setattr__(self, "_features", feats)
        object.__setattr__(self, "_bound", bound)

    @classmethod
    def from_samples(cls, seconds, points, kind: str = "euclidean", metric: Metric | str | None = None):
        """Build from raw timestamps, normalizing them onto [0, 1]."""
        s = np.asarray(seconds, dtype=float)
        if s.ndim != 1 or len(s) < 2:
            raise ValueError("need at least 2 timestamps")
        if np.any(np.diff(s) <= 0):
            raise ValueError("timestamps must be strictly increasing")
        t0, tf = float(s[0]), float(s[-1])
        t = (s - t0) / (tf - t0)
        t[0], t[-1] = 0.0, 1.0
        if metric is None:
            metric = DEFAULT_METRIC[kind]
        if isinstance(metric, str):
            metric = make_metric(metric)
        return cls(t, points, kind, metric, (t0, tf))

    def __len__(self) -> int:
        return len(self.times)

    @property
    def duration(self) -> float:
        """Length of the raw time span in seconds."""
        t0, tf = self.raw_time_span
        return tf - t0

    @property
    def seconds(self) -> np.ndarray:
        t0, tf = self.raw_time_span
        return t0 + self.times * (tf - t0)

    def to_normalized(self, seconds: float) -> float:
        """Convert a duration in seconds to normalized time."""
        return float(seconds) / self.duration

    def with_metric(self, metric: Metric) -> Trajectory:
        return Trajectory(self.times, self.points, self.kind, metric, self.raw_time_span)

    @property
    def features(self) -> np.ndarray:
        return self._features

    def feature_distance(self, fa, fb):
        return self._bound.feature_distance(fa, fb)

    def nearest_index(self, t) -> np.ndarray:
        """Index of the nearest sample; exact midpoints go to the lower index."""
        t = _check_time(t)
        hi = np.clip(np.searchsorted(self.times, t, side="left"), 1, len(self.times) - 1)
        lo = hi - 1
        pick_hi = (self.times[hi] - t) < (t - self.times[lo])
        return np.where(pick_hi, hi, lo)

    def evaluate_at(self, t: float) -> ManifoldPoint:
        """Point at the sample nearest to ``t`` (no manifold interpolation)."""
        return point_from_array(self.kind, self.points[int(self.nearest_index(t))])

    def pairwise_distance(self, t: float, t_prime: float) -> float:
        i = int(self.nearest_index(t))
        j = int(self.nearest_index(t_prime))
        if i == j:
            return 0.0
        return float(self.feature_distance(self._features[i], self._features[j]))

    def max_pairwise_distance(self) -> float:
        """Largest distance between any two samples (brute force)."""
        best = 0.0
        F = self._features
        for i in range(len(F)):
            d = self.feature_distance(F[i], F[i:])
            best = max(best, float(d.max()))
        return best


def pairwise_distance(traj: Trajectory, t: float, t_prime: float) -> float:
    return traj.pairwise_distance(t, t_prime)


def evaluate_at(traj: Trajectory, t: float) -> ManifoldPoint:
    return traj.evaluate_at(t)


@dataclass(frozen=True, eq=False)
class DistanceField:
    """Grid discretization of the pairwise distance function on [0, 1]^2.

    ``values[i, j]`` is the distance between the trajectory at ``times[i]`` and
    at ``times[j]``; ``mask`` is its ``gamma``-sublevel set.
    """

    values: np.ndarray
    times: np.ndarray
    gamma: float
    sample_index: np.ndarray
    raw_time_span: tuple[float, float] = (0.0, 1.0)

    @property
    def resolution(self) -> int:
        return len(self.times)

    @cached_property
    def mask(self) -> np.ndarray:
        m = self.values <= self.gamma
        m.setflags(write=False)
        return m

    def with_gamma(self, gamma: float) -> DistanceField:
        if gamma < 0:
            raise ValueError("gamma must be non-negative")
        return DistanceField(self.values, self.times, float(gamma), self.sample_index, self.raw_time_span)

    def row_of(self, t: float) -> int:
        """Grid row nearest to normalized time ``t``."""
        return grid_row(t, self.resolution)


def grid_row(t: float, n: int) -> int:
    """Nearest row of an ``n``-point uniform grid on [0, 1]; ties go low."""
    t = float(_check_time(t))
    return int(np.ceil(t * (n - 1) - 0.5))


def default_resolution(traj: Trajectory) -> int:
    return min(len(traj), MAX_DEFAULT_RESOLUTION)


def _fill_rows(values, idx, traj, rows):
    F = traj.features
    for i in rows:
        a = idx[i]
        d = traj.feature_distance(F[a], F[idx[i:]])
        # same sample on both ends is an exact zero regardless of rounding
        d = np.where(idx[i:] == a, 0.0, d)
        values[i, i:] = d


def build_distance_field(
    traj: Trajectory,
    gamma: float,
    resolution: int | None = None,
    workers: int | None = None,
) -> DistanceField:
    """Evaluate pairwise distances on a uniform ``resolution`` x ``resolution`` grid.

    Only the upper triangle is computed; the lower triangle is its mirror.
    Rows are split across ``workers`` threads (default from
    ``LOOPSCOPE_THREADS``); every row is computed by the same call whatever
    the split, so the result does not depend on the worker count.
    """
    if resolution is None:
        resolution = default_resolution(traj)
    if int(resolution) != resolution or resolution < 2:
        raise ValueError("resolution must be an integer >= 2")
    if not gamma >= 0:
        raise ValueError("gamma must be non-negative")
    n = int(resolution)
    times = np.linspace(0.0, 1.0, n)
    idx = traj.nearest_index(times)
    values = np.zeros((n, n))
    workers = worker_count(workers) if workers is None else max(1, workers)
    # interleaved row blocks balance the shrinking triangle rows
    blocks = [range(k, n, workers) for k in range(workers)]
    if workers == 1:
        _fill_rows(values, idx, traj, blocks[0])
    else:
        with ThreadPoolExecutor(workers) as pool:
            list(pool.map(lambda rows: _fill_rows(values, idx, traj, rows), blocks))
    iu = np.triu_indices(n, 1)
    values[(iu[1], iu[0])] = values[iu]
    values.setflags(write=False)
    times.setflags(write=False)
    idx.setflags(write=False)
    return DistanceField(values, times, float(gamma), idx, traj.raw_time_span)
