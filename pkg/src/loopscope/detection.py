"""Detecting inexact loops between trajectory samples and grouping them.

Detections are stored column-wise in :class:`Detections` (sample indices,
normalized times and distances) and iterate as :class:`Detection` tuples.
Every detection is canonicalized to ``t < t'``.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from itertools import product
from typing import NamedTuple

import numpy as np

from .trajectory import Trajectory, worker_count

_CHUNK_PAIRS = 2_000_000


class Detection(NamedTuple):
    t: float
    t_prime: float
    dist: float


@dataclass(frozen=True, eq=False)
class Detections:
    """Column store of detections, sorted by ``(t, t_prime)``.

    ``i`` and ``j`` are the sample indices behind ``t`` and ``t_prime``;
    they are ``-1`` when detections were built from times alone.
    """

    t: np.ndarray
    t_prime: np.ndarray
    dist: np.ndarray
    i: np.ndarray
    j: np.ndarray

    @classmethod
    def from_arrays(cls, t, t_prime, dist, i=None, j=None, sort: bool = True) -> Detections:
        t = np.asarray(t, dtype=float)
        tp = np.asarray(t_prime, dtype=float)
        dist = np.asarray(dist, dtype=float)
        i = np.full(len(t), -1, dtype=np.int64) if i is None else np.asarray(i, dtype=np.int64)
        j = np.full(len(t), -1, dtype=np.int64) if j is None else np.asarray(j, dtype=np.int64)
        if np.any(t >= tp):
            raise ValueError("detections must satisfy t < t_prime")
        if sort:
            order = np.lexsort((tp, t))
            t, tp, dist, i, j = t[order], tp[order], dist[order], i[order], j[order]
        return cls(t, tp, dist, i, j)

    @classmethod
    def empty(cls) -> Detections:
        z = np.zeros(0)
        zi = np.zeros(0, dtype=np.int64)
        return cls(z, z, z, zi, zi)

    def __len__(self) -> int:
        return len(self.t)

    def __iter__(self):
        for row in zip(self.t.tolist(), self.t_prime.tolist(), self.dist.tolist()):
            yield Detection(*row)

    def __getitem__(self, k):
        if isinstance(k, (int, np.integer)):
            return Detection(float(self.t[k]), float(self.t_prime[k]), float(self.dist[k]))
        return Detections(self.t[k], self.t_prime[k], self.dist[k], self.i[k], self.j[k])

    def plane(self) -> np.ndarray:
        """(n, 2) coordinates in the (t, t') plane."""
        return np.column_stack([self.t, self.t_prime])


# ---------------------------------------------------------------------------
# detect


def _finish(traj: Trajectory, i, j, gamma, exclude_band) -> Detections:
    times = traj.times
    keep = (times[j] - times[i]) > exclude_band
    i, j = i[keep], j[keep]
    F = traj.features
    d = traj.feature_distance(F[i], F[j])
    keep = d <= gamma
    i, j, d = i[keep], j[keep], d[keep]
    return Detections(times[i], times[j], d, i, j)


def _merge(parts: list[Detections]) -> Detections:
    if not parts:
        return Detections.empty()
    i = np.concatenate([p.i for p in parts])
    j = np.concatenate([p.j for p in parts])
    order = np.lexsort((j, i))
    t = np.concatenate([p.t for p in parts])[order]
    tp = np.concatenate([p.t_prime for p in parts])[order]
    d = np.concatenate([p.dist for p in parts])[order]
    return Detections(t, tp, d, i[order], j[order])


def _run(tasks, fn, workers):
    if workers == 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    with ThreadPoolExecutor(workers) as pool:
        return list(pool.map(fn, tasks))


def detect_brute_force(traj: Trajectory, gamma: float, exclude_band: float = 0.0, workers: int | None = None) -> Detections:
    """All sample pairs within ``gamma`` and more than ``exclude_band`` apart, row by row."""
    n = len(traj)
    times = traj.times
    workers = worker_count(workers)

    def rows(block):
        out_i, out_j = [], []
        F = traj.features
        for a in block:
            # fl(t_j - t_a) is monotone in j, so this is the exact band predicate
            first = a + 1 + np.searchsorted(times[a + 1:] - times[a], exclude_band, side="right")
            js = np.arange(first, n)
            if len(js) == 0:
                continue
            d = traj.feature_distance(F[a], F[js])
            js = js[d <= gamma]
            out_i.append(np.full(len(js), a))
            out_j.append(js)
        if not out_i:
            return Detections.empty()
        return _finish(traj, np.concatenate(out_i), np.concatenate(out_j), gamma, exclude_band)

    blocks = [np.arange(k, n, workers) for k in range(workers)]
    return _merge(_run(blocks, rows, workers))


def _grid_keys(X: np.ndarray, h: float):
    cell = np.floor(X / h).astype(np.int64)
    cell -= cell.min(axis=0)
    radix = cell.max(axis=0) + 3
    if np.prod(radix.astype(float)) > 2.0**62:
        return None
    mult = np.ones(len(radix), dtype=np.int64)
    for k in range(len(radix) - 2, -1, -1):
        mult[k] = mult[k + 1] * radix[k + 1]
    # +1 keeps every neighbour of an occupied cell at a non-negative key
    return (cell + 1) @ mult, mult


def _half_offsets(d: int):
    out = []
    for o in product((-1, 0, 1), repeat=d):
        if o > (0,) * d:
            out.append(np.array(o, dtype=np.int64))
    return out


def detect(traj: Trajectory, gamma: float, exclude_band: float = 0.0, workers: int | None = None) -> Detections:
    """Find every sample pair ``(t_i, t_j)`` with ``t_j - t_i > exclude_band`` and distance <= gamma.

    Uses a uniform hash grid with cell size gamma over the metric's
    Euclidean lower-bound coordinates (L2, or the translation part of
    SE(3)); metrics without one fall back to :func:`detect_brute_force`.
    The result is sorted by ``(t, t')`` and does not depend on ``workers``.
    """
    if not gamma > 0:
        raise ValueError("gamma must be positive")
    if exclude_band < 0:
        raise ValueError("exclude_band must be non-negative")
    emb = traj._bound.embedding(traj.features)
    if emb is None or emb[0].shape[1] > 3:
        return detect_brute_force(traj, gamma, exclude_band, workers)
    X, scale = emb
    # slack so a pair at exactly gamma never straddles two cells
    h = gamma / scale * (1.0 + 1e-9)
    keyed = _grid_keys(np.asarray(X, dtype=float), h)
    if keyed is None:
        return detect_brute_force(traj, gamma, exclude_band, workers)
    keys, mult = keyed
    order = np.argsort(keys, kind="stable")
    ukeys, starts, counts = np.unique(keys[order], return_index=True, return_counts=True)

    # cell pairs (a, b): same cell, then each forward neighbour offset
    pa, pb = [np.arange(len(ukeys))], [np.arange(len(ukeys))]
    for off in _half_offsets(X.shape[1]):
        target = ukeys + off @ mult
        pos = np.searchsorted(ukeys, target)
        pos_c = np.minimum(pos, len(ukeys) - 1)
        hit = ukeys[pos_c] == target
        pa.append(np.flatnonzero(hit))
        pb.append(pos_c[hit])
    same = np.concatenate([np.ones(len(pa[0]), bool)] + [np.zeros(len(a), bool) for a in pa[1:]])
    pa = np.concatenate(pa)
    pb = np.concatenate(pb)

    # tasks: (a_start, a_count, b_start, b_count, same); split oversized ones
    tasks = []
    batch = []
    load = 0
    for a, b, s in zip(pa.tolist(), pb.tolist(), same.tolist()):
        na, nb = int(counts[a]), int(counts[b])
        step = max(1, _CHUNK_PAIRS // max(nb, 1))
        for lo in range(0, na, step):
            sub = min(step, na - lo)
            batch.append((int(starts[a]) + lo, sub, int(starts[b]), nb, s))
            load += sub * nb
            if load >= _CHUNK_PAIRS:
                tasks.append(batch)
                batch, load = [], 0
    if batch:
        tasks.append(batch)

    def run(batch):
        arr = np.array(batch, dtype=np.int64)
        a0, na, b0, nb, s = arr.T
        sizes = na * nb
        pid = np.repeat(np.arange(len(arr)), sizes)
        local = np.arange(sizes.sum()) - np.repeat(np.cumsum(sizes) - sizes, sizes)
        apos = a0[pid] + local // nb[pid]
        bpos = b0[pid] + local % nb[pid]
        keep = (s[pid] == 0) | (apos < bpos)
        p, q = order[apos[keep]], order[bpos[keep]]
        return _finish(traj, np.minimum(p, q), np.maximum(p, q), gamma, exclude_band)

    return _merge(_run(tasks, run, worker_count(workers)))


def subsample(d: Detections, fraction: float, seed: int) -> Detections:
    """Uniform sample of ``round(fraction * len(d))`` detections, order preserved."""
    if not 0 < fraction <= 1:
        raise ValueError("fraction must be in (0, 1]")
    if fraction == 1:
        return d
    size = int(np.floor(fraction * len(d) + 0.5))
    rng = np.random.default_rng(seed)
    idx = np.sort(rng.choice(len(d), size=size, replace=False))
    return d[idx]


# ---------------------------------------------------------------------------
# epsilon-graph clustering


@dataclass(frozen=True)
class DetectionGraphConfig:
    """Settings for grouping detections.

    ``epsilon`` is in normalized time; clusters with fewer than
    ``min_component_size`` members are dropped.
    """

    epsilon: float
    min_component_size: int = 1
    subsample_fraction: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")
        if self.min_component_size < 1:
            raise ValueError("min_component_size must be >= 1")
        if not 0 < self.subsample_fraction <= 1:
            raise ValueError("subsample_fraction must be in (0, 1]")


@dataclass(frozen=True, eq=False)
class Clustering:
    """Cluster id per detection (``-1`` for dropped detections)."""

    labels: np.ndarray
    n_clusters: int

    @property
    def sizes(self) -> np.ndarray:
        return np.bincount(self.labels[self.labels >= 0], minlength=self.n_clusters)

    def members(self, k: int) -> np.ndarray:
        return np.flatnonzero(self.labels == k)

    def groups(self) -> list[np.ndarray]:
        """Member indices of every cluster, in id order."""
        lab = self.labels
        idx = np.flatnonzero(lab >= 0)
        order = idx[np.argsort(lab[idx], kind="stable")]
        bounds = np.searchsorted(lab[order], np.arange(self.n_clusters + 1))
        return [order[bounds[k]:bounds[k + 1]] for k in range(self.n_clusters)]

    def clusters(self, d: Detections) -> list[Detections]:
        return [d[g] for g in self.groups()]

    def __len__(self) -> int:
        return self.n_clusters


def _find(parent, a):
    while parent[a] != a:
        parent[a] = parent[parent[a]]
        a = parent[a]
    return a


def _canonical_labels(roots: np.ndarray) -> tuple[np.ndarray, int]:
    # ids by first member in the given order
    _, first, inverse = np.unique(roots, return_index=True, return_inverse=True)
    rank = np.empty(len(first), dtype=np.int64)
    rank[np.argsort(first, kind="stable")] = np.arange(len(first))
    return rank[inverse], len(first)


def cluster_detections(d: Detections, cfg: DetectionGraphConfig) -> Clustering:
    """Connected components of the graph joining detections closer than epsilon.

    Distances are L2 in the (t, t') plane. Detections are bucketed on a
    grid of side epsilon/2: members of one cell are always within epsilon,
    so only pairs of nearby cells whose groups are still separate need a
    distance check. Cluster ids follow each cluster's first detection in
    ``(t, t')`` order, so the partition and ids do not depend on input order.
    """
    n = len(d)
    if n == 0:
        return Clustering(np.zeros(0, dtype=np.int64), 0)
    eps = float(cfg.epsilon)
    XY = d.plane()
    # canonical processing order: sorted by (t, t')
    sort = np.lexsort((XY[:, 1], XY[:, 0]))
    XY = XY[sort]
    side = eps / 2.0
    cell = np.floor(XY / side).astype(np.int64)
    ckey, cinv = np.unique(cell, axis=0, return_inverse=True)
    cinv = cinv.ravel()
    corder = np.argsort(cinv, kind="stable")
    cstart = np.searchsorted(cinv[corder], np.arange(len(ckey) + 1))
    members = [corder[cstart[k]:cstart[k + 1]] for k in range(len(ckey))]
    lookup = {tuple(c): k for k, c in enumerate(ckey.tolist())}

    parent = list(range(len(ckey)))  # union-find over cells
    offsets = [
        (dx, dy)
        for dx in range(-3, 4)
        for dy in range(-3, 4)
        if (dx, dy) > (0, 0) and max(abs(dx) - 1, 0) ** 2 + max(abs(dy) - 1, 0) ** 2 <= 4
    ]
    for a, (cx, cy) in enumerate(ckey.tolist()):
        A = XY[members[a]]
        for dx, dy in offsets:
            b = lookup.get((cx + dx, cy + dy))
            if b is None:
                continue
            ra, rb = _find(parent, a), _find(parent, b)
            if ra == rb:
                continue
            B = XY[members[b]]
            diff0 = A[:, None, 0] - B[None, :, 0]
            diff1 = A[:, None, 1] - B[None, :, 1]
            if np.any(np.sqrt(diff0 * diff0 + diff1 * diff1) < eps):
                parent[max(ra, rb)] = min(ra, rb)
    cell_root = np.array([_find(parent, k) for k in range(len(ckey))])
    labels_sorted, count = _canonical_labels(cell_root[cinv])
    labels = np.empty(n, dtype=np.int64)
    labels[sort] = labels_sorted

    if cfg.min_component_size > 1:
        sizes = np.bincount(labels, minlength=count)
        keep = sizes >= cfg.min_component_size
        remap = np.full(count, -1, dtype=np.int64)
        remap[keep] = np.arange(keep.sum())
        labels = remap[labels]
        count = int(keep.sum())
    return Clustering(labels, count)
