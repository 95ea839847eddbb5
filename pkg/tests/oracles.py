"""Independent reference implementations used to pin the library's results.

Nothing here shares code with the package under test beyond data types.
"""
from collections import deque

import numpy as np
from scipy import ndimage
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components
from scipy.spatial.distance import pdist, squareform
from scipy.spatial.transform import Rotation


def bfs_labels(mask, upper=False, diagonal_link=False):
    """Plain BFS flood fill, 4-neighbourhood; labels by first cell in row-major order."""
    mask = np.asarray(mask, dtype=bool)
    H, W = mask.shape
    inside = mask.copy()
    if upper:
        inside &= np.triu(np.ones((H, W), dtype=bool))
    labels = np.full((H, W), -1, dtype=np.int64)
    count = 0
    for r in range(H):
        for c in range(W):
            if not inside[r, c] or labels[r, c] >= 0:
                continue
            labels[r, c] = count
            queue = deque([(r, c)])
            while queue:
                y, x = queue.popleft()
                nbrs = [(y - 1, x), (y + 1, x), (y, x - 1), (y, x + 1)]
                if diagonal_link and y == x:
                    nbrs += [(y - 1, x - 1), (y + 1, x + 1)]
                for ny, nx in nbrs:
                    if 0 <= ny < H and 0 <= nx < W and inside[ny, nx] and labels[ny, nx] < 0:
                        labels[ny, nx] = count
                        queue.append((ny, nx))
            count += 1
    return labels, count


def same_partition(a, b):
    """Label arrays describe the same partition of the same foreground."""
    fa, fb = a.ravel(), b.ravel()
    if not np.array_equal(fa >= 0, fb >= 0):
        return False
    pairs = set(zip(fa[fa >= 0].tolist(), fb[fb >= 0].tolist()))
    return len(pairs) == len(set(fa[fa >= 0].tolist())) == len(set(fb[fb >= 0].tolist()))


def enclosed_regions(region):
    """Holes via scipy's labeling of the complement."""
    comp, n = ndimage.label(~np.asarray(region, dtype=bool))
    edge = np.concatenate([comp[0], comp[-1], comp[:, 0], comp[:, -1]])
    return n - len(set(edge[edge > 0].tolist()))


def rodrigues(v):
    return Rotation.from_rotvec(np.asarray(v, dtype=float)).as_matrix()


def so3_frobenius(a, b):
    Ra, Rb = rodrigues(a), rodrigues(b)
    return np.linalg.norm(np.eye(3) - Ra @ Rb.T, ord="fro")


def least_angle_bruteforce(a, b):
    """Smallest |a - b + 2 pi k| over a window of wraps."""
    k = np.arange(-3, 4)
    return np.min(np.abs(a - b + 2 * np.pi * k))


def all_pairs_within(X, gamma, times, band, dist_fn=None):
    """Every (i, j), i < j, t_j - t_i > band and distance <= gamma, by full enumeration."""
    n = len(X)
    i, j = np.triu_indices(n, 1)
    if dist_fn is None:
        d = np.sqrt(((X[i] - X[j]) ** 2).sum(axis=1))
    else:
        d = dist_fn(X[i], X[j])
    keep = (d <= gamma) & ((times[j] - times[i]) > band)
    return set(zip(i[keep].tolist(), j[keep].tolist()))


def epsilon_graph_partition(XY, eps):
    """Connected components of the all-pairs graph with edges at distance < eps."""
    n = len(XY)
    if n == 0:
        return np.zeros(0, dtype=np.int64)
    D = squareform(pdist(XY))
    r, c = np.nonzero(D < eps)
    g = coo_matrix((np.ones(len(r)), (r, c)), shape=(n, n))
    return connected_components(g, directed=False)[1]


def partitions_equal(a, b):
    a, b = np.asarray(a), np.asarray(b)
    return len(set(zip(a.tolist(), b.tolist()))) == len(set(a.tolist())) == len(set(b.tolist()))


def hypergeom_miss_probability(sizes, budget, k):
    """P(no draw from cluster k) when drawing ``budget`` of sum(sizes) without replacement."""
    from scipy.stats import hypergeom

    total = int(sum(sizes))
    return float(hypergeom(total, int(sizes[k]), int(budget)).pmf(0))


def hypergeom_miss_enumerated(sizes, budget, k):
    """Same probability as a product of exact fractions."""
    from fractions import Fraction

    total, other = sum(sizes), sum(sizes) - sizes[k]
    p = Fraction(1)
    for m in range(budget):
        p *= Fraction(other - m, total - m)
    return p


def band_area(gamma):
    """Area of {|t - t'| <= gamma} in the unit square."""
    return 2 * gamma - gamma**2
