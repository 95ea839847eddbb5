"""Choosing a fixed budget of loop closures from a long drive.

    python demos/budgeted_sampling.py

A vehicle drives a random route on a street grid. Every pair of poses
within 40 m (and more than 30 s apart) is a candidate loop closure. The
candidates are clustered in the time square and three samplers spend the
same budget on them.
"""
import numpy as np

from loopscope import (
    ConstantPerComponent,
    DetectionGraphConfig,
    PerPointPerComponent,
    ProportionalToArea,
    StreetGrid,
    cluster_detections,
    coverage_report,
    detect,
    sample,
    subsample,
)

traj = StreetGrid(samples=30_000, seed=1).generate()
seconds = traj.duration
d = detect(traj, 40.0, exclude_band=30.0 / seconds)
d = subsample(d, 0.05, seed=0)
clusters = cluster_detections(d, DetectionGraphConfig(epsilon=30.0 / seconds))
sizes = clusters.sizes
print(f"{len(d)} candidate pairs in {clusters.n_clusters} clusters "
      f"(largest {sizes.max()}, median {int(np.median(sizes))}, smallest {sizes.min()})")

budget = 300
for spec in (ProportionalToArea(budget, seed=0),
             PerPointPerComponent(r=1, budget=budget, seed=0),
             ConstantPerComponent(c=2, budget=budget, seed=0)):
    plan = sample(d, clusters, spec)
    rep = coverage_report(plan, d, clusters)
    rho = "n/a" if np.isnan(rep.size_count_spearman) else f"{rep.size_count_spearman:.2f}"
    print(f"{spec.name:>5}: {len(plan)} samples, coverage {rep.coverage:.3f}, "
          f"size/count rank correlation {rho}, "
          f"floor used on {rep.floor_activations} clusters")

# Sampling in proportion to area favours the big clusters (long stretches
# driven twice) and leaves many short revisits without a sample. The
# per-point and constant samplers give every cluster at least one.
