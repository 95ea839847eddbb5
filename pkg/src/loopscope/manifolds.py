"""Points and metrics on R^n, the torus S^1 x S^1, SO(3) and SE(3).

Points have two representations. The small frozen dataclasses below are the
user-facing values accepted by :func:`distance`. Trajectories store the same
data as flat float arrays (one row per sample) and use :meth:`Metric.pairwise`,
which is vectorized over leading axes.

Rotations are axis-angle vectors with magnitude in [0, pi].
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import ClassVar, Union

import numpy as np


class MetricMismatchError(TypeError):
    """Raised when a point variant is not accepted by a metric."""

    def __init__(self, metric, point):
        super().__init__(
            f"metric/point mismatch: {type(metric).__name__} does not accept "
            f"{type(point).__name__}"
        )


# ---------------------------------------------------------------------------
# angle and axis-angle helpers


def wrap_angle(x):
    """Wrap angles to [-pi, pi)."""
    x = np.asarray(x, dtype=float)
    out = np.mod(x + np.pi, 2.0 * np.pi) - np.pi
    # mod can round up to exactly 2*pi - pi = pi
    return np.where(out >= np.pi, out - 2.0 * np.pi, out)


def least_angle(a, b):
    """Unsigned least angular distance between two angles, in [0, pi]."""
    # |a - b| first: swapping the arguments then gives bit-identical results
    d = np.mod(np.abs(np.asarray(a, dtype=float) - b), 2.0 * np.pi)
    return np.minimum(d, 2.0 * np.pi - d)


def canonical_rotvec(v):
    """Map axis-angle vectors to the representative with magnitude <= pi.

    A rotation by theta about u equals a rotation by theta - 2*pi about u,
    so any magnitude reduces into [0, pi] possibly flipping the axis.
    """
    v = np.asarray(v, dtype=float)
    theta = np.linalg.norm(v, axis=-1, keepdims=True)
    reduced = np.mod(theta, 2.0 * np.pi)
    reduced = np.where(reduced > np.pi, reduced - 2.0 * np.pi, reduced)
    with np.errstate(invalid="ignore", divide="ignore"):
        scale = np.where(theta > 0, reduced / theta, 1.0)
    return v * scale


def hat(v):
    """Skew-symmetric matrices for a batch of 3-vectors, shape (..., 3, 3)."""
    v = np.asarray(v, dtype=float)
    x, y, z = v[..., 0], v[..., 1], v[..., 2]
    o = np.zeros_like(x)
    return np.stack(
        [np.stack([o, -z, y], -1), np.stack([z, o, -x], -1), np.stack([-y, x, o], -1)],
        axis=-2,
    )


def rotvec_to_matrix(v):
    """Rodrigues' formula, batched over leading axes."""
    v = np.asarray(v, dtype=float)
    theta2 = v[..., 0] ** 2 + v[..., 1] ** 2 + v[..., 2] ** 2
    theta = np.sqrt(theta2)
    small = theta < 1e-8
    safe = np.where(small, 1.0, theta)
    a = np.where(small, 1.0 - theta2 / 6.0, np.sin(safe) / safe)
    b = np.where(small, 0.5 - theta2 / 24.0, (1.0 - np.cos(safe)) / safe**2)
    a = a[..., None, None]
    b = b[..., None, None]
    # K @ K == v v^T - |v|^2 I for K = hat(v)
    KK = v[..., :, None] * v[..., None, :] - theta2[..., None, None] * np.eye(3)
    return np.eye(3) + a * hat(v) + b * KK


# ---------------------------------------------------------------------------
# point variants


@dataclass(frozen=True)
class EuclideanPoint:
    coords: tuple[float, ...]

    kind: ClassVar[str] = "euclidean"

    def __post_init__(self):
        c = tuple(float(x) for x in np.atleast_1d(self.coords))
        if len(c) < 1:
            raise ValueError("EuclideanPoint needs at least one coordinate")
        if not np.all(np.isfinite(c)):
            raise ValueError("coordinates must be finite")
        object.__setattr__(self, "coords", c)

    def as_array(self) -> np.ndarray:
        return np.array(self.coords)


@dataclass(frozen=True)
class TorusPoint:
    theta: float
    phi: float

    kind: ClassVar[str] = "torus"

    def __post_init__(self):
        if not (np.isfinite(self.theta) and np.isfinite(self.phi)):
            raise ValueError("angles must be finite")
        object.__setattr__(self, "theta", float(wrap_angle(self.theta)))
        object.__setattr__(self, "phi", float(wrap_angle(self.phi)))

    def as_array(self) -> np.ndarray:
        return np.array([self.theta, self.phi])


@dataclass(frozen=True)
class Rotation:
    rotvec: tuple[float, float, float]

    kind: ClassVar[str] = "so3"

    def __post_init__(self):
        v = np.asarray(self.rotvec, dtype=float)
        if v.shape != (3,) or not np.all(np.isfinite(v)):
            raise ValueError("rotvec must be a finite 3-vector")
        object.__setattr__(self, "rotvec", tuple(canonical_rotvec(v).tolist()))

    def as_array(self) -> np.ndarray:
        return np.array(self.rotvec)

    def matrix(self) -> np.ndarray:
        return rotvec_to_matrix(self.as_array())


@dataclass(frozen=True)
class RigidPose:
    translation: tuple[float, float, float]
    rotation: Rotation = field(default_factory=lambda: Rotation((0.0, 0.0, 0.0)))

    kind: ClassVar[str] = "se3"

    def __post_init__(self):
        t = np.asarray(self.translation, dtype=float)
        if t.shape != (3,) or not np.all(np.isfinite(t)):
            raise ValueError("translation must be a finite 3-vector")
        object.__setattr__(self, "translation", tuple(t.tolist()))
        if not isinstance(self.rotation, Rotation):
            object.__setattr__(self, "rotation", Rotation(self.rotation))

    def as_array(self) -> np.ndarray:
        return np.concatenate([self.translation, self.rotation.rotvec])


ManifoldPoint = Union[EuclideanPoint, TorusPoint, Rotation, RigidPose]

POINT_TYPES = {
    "euclidean": EuclideanPoint,
    "torus": TorusPoint,
    "so3": Rotation,
    "se3": RigidPose,
}


def point_from_array(kind: str, row) -> ManifoldPoint:
    row = np.asarray(row, dtype=float)
    if kind == "euclidean":
        return EuclideanPoint(tuple(row))
    if kind == "torus":
        return TorusPoint(row[0], row[1])
    if kind == "so3":
        return Rotation(tuple(row))
    if kind == "se3":
        return RigidPose(tuple(row[:3]), Rotation(tuple(row[3:6])))
    raise ValueError(f"unknown manifold kind {kind!r}")


def canonicalize_points(kind: str, points) -> np.ndarray:
    """Validate and canonicalize an (n, d) array of points of one variant."""
    P = np.array(points, dtype=float, ndmin=2)
    if P.ndim != 2:
        raise ValueError("points must be a 2D array")
    if not np.all(np.isfinite(P)):
        raise ValueError("coordinates must be finite")
    if kind == "euclidean":
        return P
    if kind == "torus":
        if P.shape[1] != 2:
            raise ValueError("torus points have 2 coordinates")
        return wrap_angle(P)
    if kind == "so3":
        if P.shape[1] != 3:
            raise ValueError("rotations have 3 coordinates")
        return canonical_rotvec(P)
    if kind == "se3":
        if P.shape[1] != 6:
            raise ValueError("rigid poses have 6 coordinates")
        return np.concatenate([P[:, :3], canonical_rotvec(P[:, 3:])], axis=1)
    raise ValueError(f"unknown manifold kind {kind!r}")


# ---------------------------------------------------------------------------
# metrics


def _sqrt_sum_sq(diff):
    # explicit column loop: identical rounding for any batch shape
    acc = diff[..., 0] * diff[..., 0]
    for k in range(1, diff.shape[-1]):
        acc = acc + diff[..., k] * diff[..., k]
    return np.sqrt(acc)


class Metric:
    """Base class.

    A metric maps raw point rows to per-point *features* once
    (:meth:`features`), then evaluates distances between feature rows
    (:meth:`feature_distance`). Every code path goes through the same two
    calls, so a pair's distance is bit-identical wherever it is computed.
    """

    name: ClassVar[str] = ""
    accepts: ClassVar[tuple[str, ...]] = ()

    def features(self, points: np.ndarray) -> np.ndarray:
        return np.asarray(points, dtype=float)

    def feature_distance(self, fa: np.ndarray, fb: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def pairwise(self, a, b) -> np.ndarray:
        """Distances between raw point arrays, broadcast over leading axes."""
        return self.feature_distance(self.features(a), self.features(b))

    def check_kind(self, kind: str) -> None:
        if kind not in self.accepts:
            raise MetricMismatchError(self, POINT_TYPES.get(kind, kind))

    def embedding(self, features: np.ndarray):
        """Coordinates x and scale s with distance >= s * ||x_a - x_b||.

        Returns ``None`` when no cheap low-dimensional lower bound exists.
        """
        return None

    def __call__(self, a, b):
        return distance(self, a, b)


@dataclass(frozen=True)
class L2(Metric):
    """Euclidean distance; on rigid poses, uses the translation part only."""

    name: ClassVar[str] = "l2"
    accepts: ClassVar[tuple[str, ...]] = ("euclidean", "se3")

    def feature_distance(self, fa, fb):
        return _sqrt_sum_sq(fa - fb)

    def embedding(self, features):
        return features, 1.0


@dataclass(frozen=True)
class _PoseTranslationL2(L2):
    # L2 applied to the translation block of 6-column pose rows
    def features(self, points):
        return np.asarray(points, dtype=float)[..., :3]


@dataclass(frozen=True)
class TorusL2(Metric):
    """L2 norm of the per-axis least angular distances."""

    name: ClassVar[str] = "torus"
    accepts: ClassVar[tuple[str, ...]] = ("torus",)

    def feature_distance(self, fa, fb):
        return _sqrt_sum_sq(least_angle(fa, fb))


def _frobenius_gap(Fa, Fb):
    # ||I - Ra Rb^T||_F on row-major flattened matrices, written out so the
    # rounding does not depend on batch layout; entries (i, j) and (j, i) are
    # summed in pairs, so swapping a and b (a transpose) is bit-identical
    def entry(i, j):
        return (
            (1.0 if i == j else 0.0)
            - Fa[..., 3 * i] * Fb[..., 3 * j]
            - Fa[..., 3 * i + 1] * Fb[..., 3 * j + 1]
            - Fa[..., 3 * i + 2] * Fb[..., 3 * j + 2]
        )

    acc = None
    for i in range(3):
        m = entry(i, i)
        acc = m * m if acc is None else acc + m * m
    for i, j in ((0, 1), (0, 2), (1, 2)):
        p, q = entry(i, j), entry(j, i)
        acc = acc + (p * p + q * q)
    # identical rotations give exactly zero rather than rounding residue
    same = np.all(Fa == Fb, axis=-1)
    return np.where(same, 0.0, np.sqrt(acc))


@dataclass(frozen=True)
class SO3Frobenius(Metric):
    """||I - R_a R_b^T||_F for axis-angle inputs.

    Equals 2*sqrt(2)*sin(theta/2) where theta is the relative rotation angle.
    """

    name: ClassVar[str] = "so3"
    accepts: ClassVar[tuple[str, ...]] = ("so3",)

    def features(self, points):
        R = rotvec_to_matrix(points)
        return R.reshape(R.shape[:-2] + (9,))

    def feature_distance(self, fa, fb):
        return _frobenius_gap(fa, fb)


@dataclass(frozen=True)
class SE3Weighted(Metric):
    """sqrt(w_t^2 d_trans^2 + w_r^2 d_rot^2) with d_rot the SO(3) Frobenius metric."""

    w_t: float = 1.0
    w_r: float = 1.0

    name: ClassVar[str] = "se3"
    accepts: ClassVar[tuple[str, ...]] = ("se3",)

    def __post_init__(self):
        if not (self.w_t > 0 and self.w_r > 0):
            raise ValueError("SE3Weighted weights must be strictly positive")

    def features(self, points):
        P = np.asarray(points, dtype=float)
        R = rotvec_to_matrix(P[..., 3:6])
        return np.concatenate([P[..., :3], R.reshape(R.shape[:-2] + (9,))], axis=-1)

    def feature_distance(self, fa, fb):
        dt = _sqrt_sum_sq(fa[..., :3] - fb[..., :3])
        dr = _frobenius_gap(fa[..., 3:], fb[..., 3:])
        return np.sqrt((self.w_t * dt) ** 2 + (self.w_r * dr) ** 2)

    def embedding(self, features):
        return features[:, :3], self.w_t


METRICS = {"l2": L2, "torus": TorusL2, "so3": SO3Frobenius, "se3": SE3Weighted}

DEFAULT_METRIC = {
    "euclidean": "l2",
    "torus": "torus",
    "so3": "so3",
    "se3": "se3",
}


def make_metric(name: str, **params) -> Metric:
    try:
        cls = METRICS[name]
    except KeyError:
        raise ValueError(f"unknown metric {name!r}; choose from {sorted(METRICS)}") from None
    return cls(**params)


def bind(metric: Metric, kind: str) -> Metric:
    """Check ``kind`` against ``metric`` and return the metric to use on raw rows."""
    metric.check_kind(kind)
    if isinstance(metric, L2) and kind == "se3":
        return _PoseTranslationL2()
    return metric


def distance(metric: Metric, a: ManifoldPoint, b: ManifoldPoint) -> float:
    """Distance between two points under ``metric``.

    Raises
    ------
    MetricMismatchError
        If either point is not a variant the metric accepts, or the two
        points are different variants.
    """
    for p in (a, b):
        if getattr(p, "kind", None) not in metric.accepts:
            raise MetricMismatchError(metric, p)
    if type(a) is not type(b):
        raise MetricMismatchError(metric, b)
    if isinstance(a, EuclideanPoint) and len(a.coords) != len(b.coords):
        raise ValueError("Euclidean points differ in dimension")
    return float(bind(metric, a.kind).pairwise(a.as_array(), b.as_array()))
