"""Budgeted inexact-loop samplers and sample-quality reports.

Three samplers, one per complexity class:

* :class:`ConstantPerComponent` keeps ``c`` random detections per cluster.
* :class:`PerPointPerComponent` keeps ``r`` random detections per cluster
  per trajectory sample touching that cluster.
* :class:`ProportionalToArea` draws uniformly from all detections and
  ignores clusters.

The two cluster-aware samplers keep at least one detection per cluster.
When their wanted total exceeds the budget, the budget is split by
largest-remainder proportional scaling on top of that floor.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

import numpy as np
from scipy.spatial import cKDTree
from scipy.stats import spearmanr

from .detection import Clustering, Detections


class BudgetError(ValueError):
    """The budget cannot give every cluster its one guaranteed sample."""


@dataclass(frozen=True)
class ConstantPerComponent:
    c: int = 1
    budget: int = 10_000
    seed: int = 0

    name = "const"

    def __post_init__(self):
        if self.c < 1:
            raise ValueError("c must be >= 1")
        if self.budget < 1:
            raise ValueError("budget must be >= 1")


@dataclass(frozen=True)
class PerPointPerComponent:
    r: int = 1
    budget: int = 10_000
    seed: int = 0

    name = "rho"

    def __post_init__(self):
        if self.r < 1:
            raise ValueError("r must be >= 1")
        if self.budget < 1:
            raise ValueError("budget must be >= 1")


@dataclass(frozen=True)
class ProportionalToArea:
    budget: int = 10_000
    seed: int = 0

    name = "alpha"

    def __post_init__(self):
        if self.budget < 1:
            raise ValueError("budget must be >= 1")


SamplerSpec = Union[ConstantPerComponent, PerPointPerComponent, ProportionalToArea]


def make_sampler(name: str, budget: int, seed: int, c: int = 1, r: int = 1) -> SamplerSpec:
    if name == "const":
        return ConstantPerComponent(c=c, budget=budget, seed=seed)
    if name == "rho":
        return PerPointPerComponent(r=r, budget=budget, seed=seed)
    if name == "alpha":
        return ProportionalToArea(budget=budget, seed=seed)
    raise ValueError(f"unknown sampler {name!r}; choose const, rho or alpha")


@dataclass(frozen=True, eq=False)
class SamplePlan:
    """Sampled detections (indices into the detection list) with their cluster ids.

    ``wanted`` is each cluster's sample count before budget scaling;
    ``floored`` flags clusters kept at one sample only by the coverage
    floor, i.e. whose plain proportional share of the budget is below one.
    """

    sampler: SamplerSpec
    indices: np.ndarray
    cluster_ids: np.ndarray
    n_clusters: int
    wanted: np.ndarray = field(repr=False)
    floored: np.ndarray = field(repr=False)

    def __len__(self) -> int:
        return len(self.indices)

    @property
    def per_cluster_counts(self) -> dict[int, int]:
        counts = np.bincount(self.cluster_ids[self.cluster_ids >= 0], minlength=self.n_clusters)
        return {k: int(v) for k, v in enumerate(counts)}

    @property
    def covered_clusters(self) -> int:
        return int(np.unique(self.cluster_ids[self.cluster_ids >= 0]).size)

    @property
    def floor_activations(self) -> int:
        return int(self.floored.sum())

    def samples(self, d: Detections) -> list:
        return [(d[int(k)], int(c)) for k, c in zip(self.indices, self.cluster_ids)]


def _rng(seed: int, *key: int) -> np.random.Generator:
    seed = int(seed) & 0xFFFF_FFFF_FFFF_FFFF
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=key))


def allocate(wanted: np.ndarray, budget: int) -> np.ndarray:
    """Scale per-cluster counts into ``budget`` keeping at least one each.

    Largest-remainder apportionment of ``budget - K`` extra slots in
    proportion to ``wanted - 1``; ties go to the lower cluster id.
    """
    wanted = np.asarray(wanted, dtype=np.int64)
    K = len(wanted)
    total = int(wanted.sum())
    if total <= budget:
        return wanted.copy()
    if budget < K:
        raise BudgetError(f"budget below component count ({budget} < {K})")
    extra = wanted - 1
    R = budget - K
    S = int(extra.sum())
    num = R * extra
    base = num // S
    frac = num % S
    left = R - int(base.sum())
    order = np.lexsort((np.arange(K), -frac))
    base[order[:left]] += 1
    return 1 + base


def floor_flags(wanted: np.ndarray, budget: int) -> np.ndarray:
    """Clusters whose proportional share ``budget * q / sum(q)`` is below one."""
    wanted = np.asarray(wanted, dtype=np.int64)
    total = int(wanted.sum())
    if total <= budget:
        return np.zeros(len(wanted), dtype=bool)
    return budget * wanted < total


def _grouped(clustering: Clustering, n: int):
    if len(clustering.labels) != n:
        raise ValueError("clustering does not match the detections")
    if clustering.n_clusters == 0:
        raise ValueError("cluster-aware samplers need at least one cluster")
    return clustering.groups()


def _per_point(d: Detections, members: np.ndarray, r: int, rng) -> np.ndarray:
    if np.all(d.i[members] >= 0):
        ends = np.concatenate([d.i[members], d.j[members]])
    else:
        ends = np.unique(np.concatenate([d.t[members], d.t_prime[members]]), return_inverse=True)[1]
    dets = np.concatenate([members, members])
    prio = rng.random(len(dets))
    order = np.lexsort((prio, ends))
    ends_s = ends[order]
    start = np.flatnonzero(np.r_[True, ends_s[1:] != ends_s[:-1]])
    rank = np.arange(len(order)) - np.repeat(start, np.diff(np.r_[start, len(order)]))
    return np.unique(dets[order[rank < r]])


def sample(d: Detections, clustering: Clustering | None, spec: SamplerSpec) -> SamplePlan:
    """Draw a budgeted sample of detections.

    ``clustering`` may be ``None`` for :class:`ProportionalToArea`, in which
    case every sample is tagged with cluster id -1.

    Raises
    ------
    BudgetError
        For the cluster-aware samplers when the budget is smaller than the
        number of clusters.
    """
    n = len(d)
    if isinstance(spec, ProportionalToArea):
        rng = _rng(spec.seed)
        idx = np.sort(rng.choice(n, size=min(spec.budget, n), replace=False))
        if clustering is None:
            cid = np.full(len(idx), -1, dtype=np.int64)
            k = 0
        else:
            if len(clustering.labels) != n:
                raise ValueError("clustering does not match the detections")
            cid = clustering.labels[idx]
            k = clustering.n_clusters
        wanted = np.zeros(k, dtype=np.int64) if clustering is None else clustering.sizes
        return SamplePlan(spec, idx, cid, k, wanted, np.zeros(k, dtype=bool))

    if clustering is None:
        raise ValueError(f"{type(spec).__name__} needs a clustering")
    groups = _grouped(clustering, n)
    picks = []
    for k, members in enumerate(groups):
        rng = _rng(spec.seed, k)
        if isinstance(spec, ConstantPerComponent):
            picks.append(members[rng.permutation(len(members))])
            continue
        chosen = _per_point(d, members, spec.r, rng)
        picks.append(chosen[rng.permutation(len(chosen))])
    if isinstance(spec, ConstantPerComponent):
        wanted = np.array([min(spec.c, len(p)) for p in picks], dtype=np.int64)
    else:
        wanted = np.array([len(p) for p in picks], dtype=np.int64)
    alloc = allocate(wanted, spec.budget)
    idx = np.concatenate([p[:a] for p, a in zip(picks, alloc)])
    cid = np.concatenate([np.full(a, k, dtype=np.int64) for k, a in enumerate(alloc)])
    order = np.argsort(idx, kind="stable")
    return SamplePlan(spec, idx[order], cid[order], len(groups), wanted, floor_flags(wanted, spec.budget))


@dataclass
class CoverageReport:
    """Sample quality per cluster.

    ``coverage`` is the fraction of clusters with at least one sample.
    ``min_spacing[k]`` is the smallest (t, t') distance between two
    samples of cluster k, or ``None`` with fewer than two samples.
    ``size_count_spearman`` is the rank correlation between cluster size
    and sample count (nan when either is constant).
    """

    sizes: np.ndarray
    counts: np.ndarray
    coverage: float
    min_spacing: list
    size_count_spearman: float
    floor_activations: int

    @property
    def n_clusters(self) -> int:
        return len(self.sizes)


def coverage_report(plan: SamplePlan, d: Detections, clustering: Clustering) -> CoverageReport:
    sizes = clustering.sizes
    K = clustering.n_clusters
    cid = clustering.labels[plan.indices]
    counts = np.bincount(cid[cid >= 0], minlength=K)
    coverage = float(np.count_nonzero(counts) / K) if K else 1.0
    XY = d.plane()[plan.indices]
    spacing = []
    for k in range(K):
        pts = XY[cid == k]
        if len(pts) < 2:
            spacing.append(None)
            continue
        dist, _ = cKDTree(pts).query(pts, k=2)
        spacing.append(float(dist[:, 1].min()))
    if K > 1 and np.ptp(sizes) > 0 and np.ptp(counts) > 0:
        rho = float(spearmanr(sizes, counts).statistic)
    else:
        rho = float("nan")
    return CoverageReport(sizes, counts, coverage, spacing, rho, plan.floor_activations)
