"""Parametric trajectories that reproduce characteristic loop-component layouts.

Each generator is a small frozen dataclass; call :func:`generate` (or the
instance's ``generate`` method) to get a :class:`~loopscope.trajectory.Trajectory`.
All curves are sampled uniformly in their parameter. ``duration`` sets the
raw time span in seconds.

Fixture constants (radii, pitches) are chosen so the curves show the
intended component structure at ``gamma`` in {1, 3}; see each docstring.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from .manifolds import L2, SO3Frobenius, TorusL2
from .trajectory import Trajectory

FIXTURE_RADIUS = 7.0 * np.pi / 8.0


def _param(samples: int) -> np.ndarray:
    if int(samples) != samples or samples < 2:
        raise ValueError("samples must be an integer >= 2")
    return np.linspace(0.0, 1.0, int(samples))


def _positive(**kw):
    for k, v in kw.items():
        if not v > 0:
            raise ValueError(f"{k} must be positive, got {v}")


def _traj(points, kind, metric, duration):
    _positive(duration=duration)
    s = np.linspace(0.0, 1.0, len(points))
    return Trajectory(s, points, kind, metric, (0.0, float(duration)))


@dataclass(frozen=True)
class Line:
    """Unit-speed straight segment along the first axis of R^dim."""

    length: float = 1.0
    dim: int = 1
    samples: int = 1001
    duration: float = 1.0

    def generate(self) -> Trajectory:
        _positive(length=self.length, dim=self.dim)
        s = _param(self.samples)
        P = np.zeros((len(s), int(self.dim)))
        P[:, 0] = self.length * s
        return _traj(P, "euclidean", L2(), self.duration)


@dataclass(frozen=True)
class PartialCircle:
    """Planar circle covering ``fraction`` of a full turn, starting at angle 0."""

    radius: float = FIXTURE_RADIUS
    fraction: float = 0.95
    samples: int = 1000
    duration: float = 1.0

    def generate(self) -> Trajectory:
        _positive(radius=self.radius)
        if not 0 < self.fraction <= 1:
            raise ValueError("fraction must be in (0, 1]")
        a = 2.0 * np.pi * self.fraction * _param(self.samples)
        P = self.radius * np.column_stack([np.cos(a), np.sin(a)])
        return _traj(P, "euclidean", L2(), self.duration)


@dataclass(frozen=True)
class DoubleLoop:
    """Two circles of equal radius traversed one after the other.

    The path starts at the rightmost point of the left circle, goes once
    around it, crosses a straight connector of length ``offset`` (zero:
    the circles are tangent, a figure eight), then goes once around the
    right circle. Parameterized by arc length. With radius 1.4 the three
    returns to the tangent point are separate components at gamma = 1 and
    everything merges into the trivial component at gamma = 3.
    """

    radius: float = 1.4
    offset: float = 0.0
    samples: int = 1000
    duration: float = 1.0

    def generate(self) -> Trajectory:
        _positive(radius=self.radius)
        if self.offset < 0:
            raise ValueError("offset must be non-negative")
        R, g = float(self.radius), float(self.offset)
        turn = 2.0 * np.pi * R
        total = 2.0 * turn + g
        u = _param(self.samples) * total
        P = np.empty((len(u), 2))
        first = u <= turn
        a = u[first] / R
        # left circle, centre (-R, 0), starting at (0, 0) heading up
        P[first] = np.column_stack([-R + R * np.cos(a), R * np.sin(a)])
        mid = (u > turn) & (u <= turn + g)
        P[mid] = np.column_stack([u[mid] - turn, np.zeros(mid.sum())])
        last = u > turn + g
        b = (u[last] - turn - g) / R
        # right circle, centre (g + R, 0), starting at (g, 0) heading down
        P[last] = np.column_stack([g + R - R * np.cos(b), -R * np.sin(b)])
        return _traj(P, "euclidean", L2(), self.duration)


@dataclass(frozen=True)
class Spiral:
    """Archimedean spiral ``r = pitch * angle / 2pi`` from the centre outwards.

    Adjacent turns are ``pitch`` apart. Every inexact loop is simple at
    gamma = 1 and gamma = 3 for the default pitch of 0.7: any pair within
    gamma can slide inwards, keeping its separation, to the centre.
    """

    pitch: float = 0.7
    turns: float = 4.0
    samples: int = 2000
    duration: float = 1.0

    def generate(self) -> Trajectory:
        _positive(pitch=self.pitch, turns=self.turns)
        a = 2.0 * np.pi * self.turns * _param(self.samples)
        r = self.pitch * a / (2.0 * np.pi)
        P = np.column_stack([r * np.cos(a), r * np.sin(a)])
        return _traj(P, "euclidean", L2(), self.duration)


@dataclass(frozen=True)
class CloverNontrivial:
    """A long thin closed loop traversed ``laps`` times.

    The curve is an ellipse with axes ``length`` and ``width``. Retracing
    it makes the out-and-back and lap-to-lap bands of the distance field
    join the diagonal at both turnarounds, which encloses regions of
    far-apart pairs: at gamma = 1 (with the defaults) the trivial component
    has holes.
    """

    length: float = 8.0
    width: float = 0.4
    laps: int = 2
    samples: int = 2000
    duration: float = 1.0

    def generate(self) -> Trajectory:
        _positive(length=self.length, width=self.width, laps=self.laps)
        a = 2.0 * np.pi * self.laps * _param(self.samples)
        P = np.column_stack(
            [0.5 * self.length * (1.0 - np.cos(a)), 0.5 * self.width * np.sin(a)]
        )
        return _traj(P, "euclidean", L2(), self.duration)


@dataclass(frozen=True)
class TorusCircle:
    """Circle of angular ``radius`` on the flat torus, one full turn.

    Starts at angle ``phase`` so that the two wrap-around near approaches
    (at opposite points of the circle, pi/4 apart for radius 7pi/8) each
    appear once inside the unit time square.
    """

    radius: float = FIXTURE_RADIUS
    phase: float = np.pi / 4.0
    samples: int = 1000
    duration: float = 1.0

    def generate(self) -> Trajectory:
        _positive(radius=self.radius)
        a = 2.0 * np.pi * _param(self.samples) + self.phase
        P = self.radius * np.column_stack([np.cos(a), np.sin(a)])
        return _traj(P, "torus", TorusL2(), self.duration)


@dataclass(frozen=True)
class SO3Circle:
    """Circle of radius ``radius`` in the axis-angle chart of SO(3), in the xy plane."""

    radius: float = FIXTURE_RADIUS
    samples: int = 1000
    duration: float = 1.0

    def generate(self) -> Trajectory:
        _positive(radius=self.radius)
        if self.radius > np.pi:
            raise ValueError("axis-angle radius must be <= pi")
        a = 2.0 * np.pi * _param(self.samples)
        P = self.radius * np.column_stack([np.cos(a), np.sin(a), np.zeros_like(a)])
        return _traj(P, "so3", SO3Frobenius(), self.duration)


@dataclass(frozen=True)
class StreetGrid:
    """A vehicle driving a random route on a square street grid.

    Produces SE(3) poses (heading as a yaw rotation) sampled at ``rate`` Hz
    while driving at constant ``speed`` on a ``blocks`` x ``blocks`` grid
    of ``block_length`` metre blocks. At each intersection the next street
    is drawn uniformly among those that are not a U-turn. The metric is L2
    on translations.
    """

    samples: int = 75_000
    blocks: int = 10
    block_length: float = 100.0
    speed: float = 10.0
    rate: float = 10.0
    seed: int = 0

    def generate(self) -> Trajectory:
        _positive(blocks=self.blocks, block_length=self.block_length, speed=self.speed, rate=self.rate)
        n = int(self.samples)
        if n < 2:
            raise ValueError("samples must be >= 2")
        rng = np.random.default_rng(self.seed)
        step = self.speed / self.rate
        legs_needed = int(np.ceil(n * step / self.block_length)) + 2
        moves = np.array([[1, 0], [0, 1], [-1, 0], [0, -1]])
        node = np.array([self.blocks // 2, self.blocks // 2])
        heading = 0
        nodes = [node.copy()]
        headings = []
        for _ in range(legs_needed):
            options = []
            for h in range(4):
                if h == (heading + 2) % 4 and len(headings) > 0:
                    continue
                nxt = node + moves[h]
                if np.all((nxt >= 0) & (nxt <= self.blocks)):
                    options.append(h)
            heading = options[rng.integers(len(options))]
            node = node + moves[heading]
            nodes.append(node.copy())
            headings.append(heading)
        nodes = np.array(nodes, dtype=float) * self.block_length
        dist = np.arange(n) * step
        leg = np.minimum((dist // self.block_length).astype(int), len(headings) - 1)
        frac = (dist - leg * self.block_length)[:, None]
        xy = nodes[leg] + moves[np.array(headings)[leg]] * frac
        yaw = np.array(headings)[leg] * (np.pi / 2.0)
        yaw = np.where(yaw > np.pi, yaw - 2.0 * np.pi, yaw)
        P = np.zeros((n, 6))
        P[:, :2] = xy
        P[:, 5] = yaw
        seconds = np.arange(n) / self.rate
        return Trajectory.from_samples(seconds, P, kind="se3", metric=L2())


GeneratorSpec = Union[
    Line, PartialCircle, DoubleLoop, Spiral, CloverNontrivial, TorusCircle, SO3Circle, StreetGrid
]

GENERATORS = {
    "line": Line,
    "circle": PartialCircle,
    "double-loop": DoubleLoop,
    "spiral": Spiral,
    "clover": CloverNontrivial,
    "torus-circle": TorusCircle,
    "so3-circle": SO3Circle,
    "street-grid": StreetGrid,
}


def generate(spec: GeneratorSpec) -> Trajectory:
    return spec.generate()
