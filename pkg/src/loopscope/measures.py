"""Loop duration, loop area and loop density.

All measures integrate an indicator over the full symmetric square with a
Riemann sum on the field grid: each of the N grid rows/columns stands for a
cell of width 1/N. A query time ``t`` snaps to its nearest grid row; a
window ``[a, b)`` covers rows ``round(a N) .. round(b N) - 1``. The
quadrature error is O(1/N).

Counts are integers and the only floating-point step is a division by N
(or N^2), so with N a power of two the additivity identities hold exactly.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .components import ComponentSet
from .trajectory import DistanceField, grid_row


@dataclass(frozen=True)
class MeasureSelection:
    """Which part of the sublevel set to measure.

    ``components=None`` selects the whole sublevel set; otherwise a tuple
    of component ids (each includes its mirror image). ``restrict`` keeps
    only loops that begin at the query time (``"begin"``: t' >= t) or end
    there (``"end"``: t' <= t).
    """

    components: tuple[int, ...] | None = None
    restrict: str | None = None

    def __post_init__(self):
        if self.restrict not in (None, "begin", "end"):
            raise ValueError("restrict must be None, 'begin' or 'end'")
        if self.components is not None:
            object.__setattr__(self, "components", tuple(int(c) for c in self.components))


WHOLE = MeasureSelection()


def _selected(cs: ComponentSet, field: DistanceField, sel: MeasureSelection) -> np.ndarray:
    if cs.resolution != field.resolution:
        raise ValueError("component set and field have different resolutions")
    if sel.components is None:
        m = field.mask.copy()
    else:
        ids = np.asarray(sel.components)
        if ids.size and (ids.min() < 0 or ids.max() >= len(cs)):
            raise ValueError(f"unknown component id in {sel.components}")
        m = np.isin(cs.full_labels, ids)
    if sel.restrict == "begin":
        m = np.triu(m)
    elif sel.restrict == "end":
        m = np.tril(m)
    return m


def selection_matrix(cs: ComponentSet, field: DistanceField, sel: MeasureSelection = WHOLE) -> np.ndarray:
    """Boolean N x N indicator of the selected set on the full square."""
    return _selected(cs, field, sel)


def _rows(field: DistanceField, a: float, b: float) -> slice:
    if not (0.0 <= a < b <= 1.0):
        raise ValueError("need 0 <= a < b <= 1")
    n = field.resolution
    return slice(int(np.floor(a * n + 0.5)), int(np.floor(b * n + 0.5)))


def duration_counts(cs: ComponentSet, field: DistanceField, sel: MeasureSelection = WHOLE) -> np.ndarray:
    """Selected cell count in every grid row (integer loop-duration profile)."""
    return _selected(cs, field, sel).sum(axis=1)


def duration_profile(cs: ComponentSet, field: DistanceField, sel: MeasureSelection = WHOLE) -> np.ndarray:
    """Loop duration at every grid time."""
    return duration_counts(cs, field, sel) / field.resolution


def loop_duration(cs: ComponentSet, field: DistanceField, sel: MeasureSelection, t: float) -> float:
    """Fraction of the trajectory within gamma of the point at ``t`` (restricted to ``sel``)."""
    i = grid_row(t, field.resolution)
    row = _selected(cs, field, sel)[i]
    return int(row.sum()) / field.resolution


def loop_area(cs: ComponentSet, field: DistanceField, sel: MeasureSelection, a: float, b: float) -> float:
    """Area of the selected set between t = a and t = b, in normalized time squared."""
    rows = _rows(field, a, b)
    count = int(_selected(cs, field, sel)[rows].sum())
    return count / field.resolution**2


def loop_density(cs: ComponentSet, field: DistanceField, sel: MeasureSelection, a: float, b: float) -> float:
    """Loop area averaged over the window length ``b - a``."""
    return loop_area(cs, field, sel, a, b) / (b - a)


def standard_selections(cs: ComponentSet) -> dict[str, MeasureSelection]:
    nontrivial = tuple(c.id for c in cs if not c.is_trivial)
    return {
        "whole": WHOLE,
        "trivial": MeasureSelection((cs.trivial.id,)),
        "nontrivial": MeasureSelection(nontrivial),
        "begin": MeasureSelection(restrict="begin"),
        "end": MeasureSelection(restrict="end"),
    }
