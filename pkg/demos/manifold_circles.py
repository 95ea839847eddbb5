"""Circles on the flat torus and in SO(3), and where they come back to themselves.

    python demos/manifold_circles.py
"""
import numpy as np

from loopscope import (
    SO3Circle,
    TorusCircle,
    build_distance_field,
    extract_components,
    pairwise_distance,
)

# Torus: a circle of angular radius 7pi/8 wraps past the fundamental domain,
# so besides closing exactly it passes close to itself twice more.
torus = TorusCircle().generate()
print(f"torus: distance between start and end = {pairwise_distance(torus, 0.0, 1.0):.2e}")
field = build_distance_field(torus, 1.0, resolution=512)
cs = extract_components(field)
for c in cs.nontrivial():
    rows, cols = c.rows, c.cols
    k = np.argmin(field.values[rows, cols])
    t, tp = field.times[rows[k]], field.times[cols[k]]
    print(f"  component #{c.id}: closest pair ({t:.3f}, {tp:.3f}) at distance {field.values[rows[k], cols[k]]:.3f}")

# SO(3): the same circle in axis-angle coordinates. Halfway round, the
# rotation vector points the other way; rotations by 7pi/8 about opposite
# axes differ by only pi/4.
so3 = SO3Circle().generate()
row = np.array([pairwise_distance(so3, 0.0, t) for t in so3.times])
inner = (so3.times > 0.125) & (so3.times < 0.875)
k = np.flatnonzero(inner)[np.argmin(row[inner])]
print(f"so3: closest interior return to the start at t'={so3.times[k]:.4f}, "
      f"distance {row[k]:.4f} (2 sqrt(2) sin(pi/8) = {2 * np.sqrt(2) * np.sin(np.pi / 8):.4f})")
