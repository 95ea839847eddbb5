"""Loop components: connected regions of the sublevel mask.

Components are enumerated once per symmetric pair, on the upper triangle
``i <= j`` of the grid. Cells are 4-connected. Consecutive diagonal cells are
always linked as well, since every pair ``(t, t)`` is an exact loop and the
continuous diagonal is a path inside the sublevel set; this keeps the
trivial component unique even when a coarse grid or ``gamma = 0`` leaves
no off-diagonal cell between two diagonal ones.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .trajectory import DistanceField, grid_row


class NotAnInexactLoopError(ValueError):
    """The queried time pair is outside the sublevel set."""


# ---------------------------------------------------------------------------
# run-based union-find labeling


class _DisjointSet:
    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, a: int) -> int:
        parent = self.parent
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    def union(self, a: int, b: int) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            # smaller root wins: keeps roots stable under edge order
            if ra < rb:
                self.parent[rb] = ra
            else:
                self.parent[ra] = rb


def _row_runs(row: np.ndarray):
    """Start and inclusive end columns of True runs in a 1D boolean array."""
    padded = np.concatenate(([False], row, [False]))
    edges = np.flatnonzero(padded[1:] != padded[:-1])
    return edges[0::2], edges[1::2] - 1


def label_runs(mask: np.ndarray, upper: bool = False, diagonal_link: bool = False):
    """4-connected labeling of a 2D boolean array by union-find over row runs.

    Parameters
    ----------
    mask : (H, W) bool array
    upper : bool
        Only consider cells with ``col >= row`` (square input).
    diagonal_link : bool
        Also join the runs containing ``(i, i)`` and ``(i - 1, i - 1)``.

    Returns
    -------
    labels : (H, W) int32 array, -1 outside the foreground. Labels are
        numbered 0.. in order of each component's first cell in row-major
        order.
    count : int
    """
    mask = np.asarray(mask, dtype=bool)
    H, W = mask.shape
    run_row, run_start, run_end = [], [], []
    row_first = np.zeros(H + 1, dtype=np.int64)
    for i in range(H):
        row = mask[i, i:] if upper else mask[i]
        s, e = _row_runs(row)
        if upper:
            s, e = s + i, e + i
        run_row.append(np.full(len(s), i))
        run_start.append(s)
        run_end.append(e)
        row_first[i + 1] = row_first[i] + len(s)
    n_runs = int(row_first[-1])
    if n_runs == 0:
        return np.full((H, W), -1, dtype=np.int32), 0
    starts = np.concatenate(run_start)
    ends = np.concatenate(run_end)
    rows = np.concatenate(run_row)

    ds = _DisjointSet(n_runs)
    diag_run = np.full(H, -1, dtype=np.int64)
    for i in range(H):
        a0, a1 = row_first[i], row_first[i + 1]
        if diagonal_link and a1 > a0:
            k = a0 + np.searchsorted(ends[a0:a1], i, side="left")
            if k < a1 and starts[k] <= i:
                diag_run[i] = k
                if i > 0 and diag_run[i - 1] >= 0:
                    ds.union(int(diag_run[i - 1]), int(k))
        if i == 0 or a1 == a0:
            continue
        b0, b1 = row_first[i - 1], row_first[i]
        if b1 == b0:
            continue
        ps, pe = starts[b0:b1], ends[b0:b1]
        cs, ce = starts[a0:a1], ends[a0:a1]
        # previous-row runs overlapping [cs, ce]: pe >= cs and ps <= ce
        lo = np.searchsorted(pe, cs, side="left")
        hi = np.searchsorted(ps, ce, side="right")
        for k in np.flatnonzero(hi > lo):
            for m in range(lo[k], hi[k]):
                ds.union(int(a0 + k), int(b0 + m))

    roots = np.array([ds.find(k) for k in range(n_runs)])
    # runs are already in row-major order, so first appearance orders labels
    _, first = np.unique(roots, return_index=True)
    order = np.argsort(first, kind="stable")
    relabel = np.empty(n_runs, dtype=np.int32)
    root_ids = roots[first[order]]
    lookup = dict(zip(root_ids.tolist(), range(len(root_ids))))
    relabel[:] = [lookup[r] for r in roots.tolist()]

    labels = np.full((H, W), -1, dtype=np.int32)
    lengths = ends - starts + 1
    flat_rows = np.repeat(rows, lengths)
    offsets = np.arange(lengths.sum()) - np.repeat(np.cumsum(lengths) - lengths, lengths)
    flat_cols = np.repeat(starts, lengths) + offsets
    labels[flat_rows, flat_cols] = np.repeat(relabel, lengths)
    return labels, len(root_ids)


def count_enclosed(region: np.ndarray) -> int:
    """Number of 4-connected False regions of ``region`` not touching its edge."""
    comp, n = label_runs(~np.asarray(region, dtype=bool))
    if n == 0:
        return 0
    edge = np.concatenate([comp[0], comp[-1], comp[:, 0], comp[:, -1]])
    touching = np.unique(edge[edge >= 0])
    return n - len(touching)


# ---------------------------------------------------------------------------
# components


@dataclass(frozen=True, eq=False)
class LoopComponent:
    """One connected region of the sublevel mask, canonical upper-triangle half.

    ``rows``/``cols`` hold the cells with ``rows <= cols``. ``area`` is the
    full-square area of the component together with its mirror image, in
    normalized time squared.
    """

    id: int
    rows: np.ndarray
    cols: np.ndarray
    is_trivial: bool
    area: float
    bbox: tuple[float, float, float, float]
    hole_count: int
    boundary_rows: np.ndarray = field(repr=False)
    boundary_cols: np.ndarray = field(repr=False)

    @property
    def size(self) -> int:
        return len(self.rows)

    @cached_property
    def cells(self) -> frozenset:
        return frozenset(zip(self.rows.tolist(), self.cols.tolist()))

    @cached_property
    def boundary_cells(self) -> frozenset:
        return frozenset(zip(self.boundary_rows.tolist(), self.boundary_cols.tolist()))


@dataclass(frozen=True, eq=False)
class ComponentSet:
    components: list[LoopComponent]
    gamma: float
    resolution: int
    labels: np.ndarray = field(repr=False)

    @property
    def total_area(self) -> float:
        return float(sum(c.area for c in self.components))

    @property
    def trivial(self) -> LoopComponent:
        return next(c for c in self.components if c.is_trivial)

    def __len__(self) -> int:
        return len(self.components)

    def __iter__(self):
        return iter(self.components)

    def __getitem__(self, k) -> LoopComponent:
        return self.components[k]

    @cached_property
    def full_labels(self) -> np.ndarray:
        """Component ids on the whole square (mirrored), -1 outside the mask."""
        L = self.labels.copy()
        lower = np.tril_indices(self.resolution, -1)
        L[lower] = self.labels.T[lower]
        L.setflags(write=False)
        return L

    def nontrivial(self) -> list[LoopComponent]:
        return [c for c in self.components if not c.is_trivial]


def _holes(rows, cols, is_trivial, n) -> int:
    if is_trivial:
        # holes of the mirrored pair, counted once per mirror twin; the
        # diagonal is inside the component so no hole is its own mirror
        r = np.concatenate([rows, cols])
        c = np.concatenate([cols, rows])
    else:
        r, c = rows, cols
    r0, r1, c0, c1 = r.min(), r.max(), c.min(), c.max()
    # one-cell False frame: everything outside the bbox reaches the border
    crop = np.zeros((r1 - r0 + 3, c1 - c0 + 3), dtype=bool)
    crop[r - r0 + 1, c - c0 + 1] = True
    holes = count_enclosed(crop)
    return holes // 2 if is_trivial else holes


def _boundary(rows, cols, full_mask):
    n = full_mask.shape[0]
    on_edge = (rows == 0) | (cols == 0) | (rows == n - 1) | (cols == n - 1)
    padded = np.pad(full_mask, 1, constant_values=True)
    r, c = rows + 1, cols + 1
    false_nb = ~(padded[r - 1, c] & padded[r + 1, c] & padded[r, c - 1] & padded[r, c + 1])
    keep = on_edge | false_nb
    return rows[keep], cols[keep]


def extract_components(field: DistanceField) -> ComponentSet:
    """Label the upper-triangle sublevel mask into loop components.

    Ids follow the lexicographically smallest cell of each component, so
    id 0 is always the trivial component (it contains cell (0, 0)).
    """
    n = field.resolution
    mask = field.mask
    labels, count = label_runs(mask, upper=True, diagonal_link=True)
    labels.setflags(write=False)
    flat = labels.ravel()
    cells = np.flatnonzero(flat >= 0)
    lab = flat[cells]
    order = np.argsort(lab, kind="stable")
    bounds = np.searchsorted(lab[order], np.arange(count + 1))
    times = field.times
    comps = []
    for k in range(count):
        sel = cells[order[bounds[k]:bounds[k + 1]]]
        rows, cols = np.divmod(sel, n)
        is_trivial = bool(np.any(rows == cols))
        n_diag = int(np.count_nonzero(rows == cols))
        area = (2 * len(rows) - n_diag) / n**2
        bbox = (
            float(times[rows.min()]),
            float(times[rows.max()]),
            float(times[cols.min()]),
            float(times[cols.max()]),
        )
        br, bc = _boundary(rows, cols, mask)
        comps.append(
            LoopComponent(
                id=k,
                rows=rows,
                cols=cols,
                is_trivial=is_trivial,
                area=area,
                bbox=bbox,
                hole_count=_holes(rows, cols, is_trivial, n),
                boundary_rows=br,
                boundary_cols=bc,
            )
        )
    return ComponentSet(comps, field.gamma, n, labels)


def count_holes(c: LoopComponent, field: DistanceField) -> int:
    """Holes of a component (mod mirror symmetry)."""
    return _holes(c.rows, c.cols, c.is_trivial, field.resolution)


def component_boundary(c: LoopComponent) -> frozenset:
    """Cells of ``c`` with a 4-neighbour outside the mask, or on the square edge."""
    return c.boundary_cells


def is_simple(cs: ComponentSet, loop: tuple[float, float]) -> bool:
    """Whether the inexact loop ``(t, t')`` lies in the trivial component.

    Raises
    ------
    NotAnInexactLoopError
        If the pair is outside the sublevel set at this gamma.
    """
    i, j = sorted(grid_row(t, cs.resolution) for t in loop)
    lab = cs.labels[i, j]
    if lab < 0:
        raise NotAnInexactLoopError(f"{loop} is not an inexact loop at gamma={cs.gamma}")
    return cs.components[lab].is_trivial
