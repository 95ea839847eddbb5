"""Trajectory files, CSV tables and PGM rasters.

Native trajectory files start with a header line::

    # loopscope manifold=se3 dim=6 metric=se3 w_t=1 w_r=1

followed by ``t_seconds,<coords...>`` rows. Coordinates per manifold:
``euclidean`` any dimension, ``torus`` (theta, phi), ``so3`` an axis-angle
vector, ``se3`` a translation then an axis-angle vector. Files without the
header are read as TUM poses (``timestamp tx ty tz qx qy qz qw``).

Floats are written with 17 significant digits, which round-trips every
double exactly.
"""
from __future__ import annotations

import csv
import dataclasses
from pathlib import Path

import numpy as np
from scipy.spatial.transform import Rotation as _ScipyRotation

from .detection import Clustering, Detections
from .manifolds import DEFAULT_METRIC, Metric, make_metric
from .trajectory import Trajectory

HEADER_TAG = "# loopscope"
ARITY = {"torus": 2, "so3": 3, "se3": 6}


class TrajectoryFileError(OSError):
    """A trajectory or table file could not be parsed; the message names the line."""


def fmt(x) -> str:
    return format(float(x), ".17g")


def _fail(path, lineno, msg):
    raise TrajectoryFileError(f"{path}:{lineno}: {msg}")


# ---------------------------------------------------------------------------
# trajectories


def metric_header(metric: Metric) -> str:
    parts = [f"metric={metric.name}"]
    if dataclasses.is_dataclass(metric):
        parts += [f"{f.name}={fmt(getattr(metric, f.name))}" for f in dataclasses.fields(metric)]
    return " ".join(parts)


def write_trajectory(traj: Trajectory, path) -> None:
    P = traj.points
    lines = [f"{HEADER_TAG} manifold={traj.kind} dim={P.shape[1]} {metric_header(traj.metric)}"]
    for s, row in zip(traj.seconds, P):
        lines.append(",".join([fmt(s)] + [fmt(v) for v in row]))
    Path(path).write_text("\n".join(lines) + "\n")


def _parse_header(path, line):
    fields = {}
    for tok in line[len(HEADER_TAG):].split():
        if "=" not in tok:
            _fail(path, 1, f"malformed header token {tok!r}")
        k, v = tok.split("=", 1)
        fields[k] = v
    kind = fields.pop("manifold", None)
    if kind not in DEFAULT_METRIC:
        _fail(path, 1, f"unknown or missing manifold {kind!r}")
    dim = fields.pop("dim", None)
    name = fields.pop("metric", DEFAULT_METRIC[kind])
    try:
        params = {k: float(v) for k, v in fields.items()}
        metric = make_metric(name, **params)
    except (TypeError, ValueError) as exc:
        _fail(path, 1, f"bad metric parameters: {exc}")
    return kind, None if dim is None else int(dim), metric


def _data_lines(text):
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if line and not line.startswith("#"):
            yield lineno, line


def _floats(path, lineno, tokens):
    try:
        vals = [float(x) for x in tokens]
    except ValueError:
        _fail(path, lineno, "non-numeric value")
    if not all(np.isfinite(vals)):
        _fail(path, lineno, "non-finite value")
    return vals


def _check_increasing(path, linenos, seconds):
    bad = np.flatnonzero(np.diff(seconds) <= 0)
    if len(bad):
        _fail(path, linenos[bad[0] + 1], "timestamps must be strictly increasing")
    if len(seconds) < 2:
        _fail(path, linenos[-1] if linenos else 1, "need at least 2 samples")


def read_trajectory(path, metric: Metric | str | None = None) -> Trajectory:
    """Load a native or TUM trajectory file.

    ``metric`` overrides the metric named in the file.

    Raises
    ------
    TrajectoryFileError
        On unreadable files or malformed rows (message includes the line).
    """
    try:
        text = Path(path).read_text()
    except (OSError, UnicodeDecodeError) as exc:
        raise TrajectoryFileError(f"{path}: cannot read: {exc}") from exc
    first = text.splitlines()[0] if text else ""
    if not first.startswith(HEADER_TAG):
        return read_tum(path, metric, text=text)
    kind, dim, file_metric = _parse_header(path, first)
    arity = ARITY.get(kind, dim)
    seconds, rows, linenos = [], [], []
    for lineno, line in _data_lines(text):
        vals = _floats(path, lineno, line.split(","))
        if arity is None:
            arity = len(vals) - 1
        if len(vals) - 1 != arity or arity < 1:
            _fail(path, lineno, f"expected {arity} coordinates for {kind}, got {len(vals) - 1}")
        seconds.append(vals[0])
        rows.append(vals[1:])
        linenos.append(lineno)
    _check_increasing(path, linenos, np.array(seconds))
    return Trajectory.from_samples(
        np.array(seconds), np.array(rows), kind, file_metric if metric is None else metric
    )


def read_tum(path, metric: Metric | str | None = None, text: str | None = None) -> Trajectory:
    """Load TUM poses; quaternions are renormalized and converted to axis-angle."""
    if text is None:
        try:
            text = Path(path).read_text()
        except (OSError, UnicodeDecodeError) as exc:
            raise TrajectoryFileError(f"{path}: cannot read: {exc}") from exc
    seconds, trans, quats, linenos = [], [], [], []
    for lineno, line in _data_lines(text):
        vals = _floats(path, lineno, line.replace(",", " ").split())
        if len(vals) != 8:
            _fail(path, lineno, f"expected 8 TUM fields, got {len(vals)}")
        q = np.array(vals[4:8])
        norm = np.sqrt(np.sum(q * q))
        if not norm > 1e-12:
            _fail(path, lineno, "zero quaternion")
        seconds.append(vals[0])
        trans.append(vals[1:4])
        quats.append(q / norm)
        linenos.append(lineno)
    if not linenos:
        raise TrajectoryFileError(f"{path}:1: no samples")
    _check_increasing(path, linenos, np.array(seconds))
    rotvec = _ScipyRotation.from_quat(np.array(quats)).as_rotvec()
    P = np.column_stack([np.array(trans), rotvec])
    return Trajectory.from_samples(np.array(seconds), P, "se3", metric)


# ---------------------------------------------------------------------------
# tables


def write_rows(path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) if isinstance(v, (float, np.floating)) else v for v in row])


def read_rows(path, header=None) -> list[dict]:
    try:
        with open(path, newline="") as fh:
            rows = list(csv.DictReader(fh))
            names = rows and list(rows[0]) or []
    except OSError as exc:
        raise TrajectoryFileError(f"{path}: cannot read: {exc}") from exc
    if header is not None and rows and names[: len(header)] != list(header):
        raise TrajectoryFileError(f"{path}:1: expected columns {','.join(header)}")
    return rows


DETECTION_COLUMNS = ("t", "t_prime", "dist")


def write_detections(d: Detections, path) -> None:
    write_rows(path, DETECTION_COLUMNS, zip(d.t.tolist(), d.t_prime.tolist(), d.dist.tolist()))


def read_detections(path) -> Detections:
    rows = read_rows(path, DETECTION_COLUMNS)
    try:
        cols = [np.array([float(r[c]) for r in rows]) for c in DETECTION_COLUMNS]
    except (TypeError, ValueError) as exc:
        raise TrajectoryFileError(f"{path}: malformed detection row: {exc}") from exc
    return Detections.from_arrays(*cols, sort=False)


def write_cluster_labels(clustering: Clustering, path) -> None:
    write_rows(path, ("cluster_id",), ([int(k)] for k in clustering.labels))


def read_cluster_labels(path) -> Clustering:
    rows = read_rows(path, ("cluster_id",))
    labels = np.array([int(r["cluster_id"]) for r in rows], dtype=np.int64)
    n = int(labels.max()) + 1 if len(labels) and labels.max() >= 0 else 0
    return Clustering(labels, n)


# ---------------------------------------------------------------------------
# PGM rasters


def write_pgm(path, image: np.ndarray) -> None:
    """Binary PGM; 8-bit for uint8 input, 16-bit big-endian otherwise."""
    img = np.asarray(image)
    if img.ndim != 2:
        raise ValueError("PGM image must be 2D")
    if img.dtype == np.uint8:
        maxval, data = 255, img.tobytes()
    else:
        if img.min() < 0 or img.max() > 65535:
            raise ValueError("PGM values must be in [0, 65535]")
        maxval, data = 65535, img.astype(">u2").tobytes()
    h, w = img.shape
    Path(path).write_bytes(f"P5\n{w} {h}\n{maxval}\n".encode("ascii") + data)


def read_pgm(path) -> np.ndarray:
    raw = Path(path).read_bytes()
    tokens, pos = [], 0
    while len(tokens) < 4:
        while raw[pos:pos + 1].isspace():
            pos += 1
        if raw[pos:pos + 1] == b"#":
            pos = raw.index(b"\n", pos) + 1
            continue
        end = pos
        while not raw[end:end + 1].isspace():
            end += 1
        tokens.append(raw[pos:end].decode("ascii"))
        pos = end
    if tokens[0] != "P5":
        raise TrajectoryFileError(f"{path}: not a binary PGM")
    w, h, maxval = map(int, tokens[1:])
    body = raw[pos + 1:]
    dtype = np.uint8 if maxval < 256 else np.dtype(">u2")
    return np.frombuffer(body, dtype=dtype, count=w * h).reshape(h, w).astype(
        np.uint8 if maxval < 256 else np.uint16
    )


def field_image(values: np.ndarray, gamma: float) -> np.ndarray:
    """Gray levels round(255 min(d / 2 gamma, 1)); black for gamma = 0 only on d = 0."""
    vis = 2.0 * gamma
    if vis > 0:
        scaled = np.minimum(values / vis, 1.0)
    else:
        scaled = np.where(values > 0, 1.0, 0.0)
    return np.floor(255.0 * scaled + 0.5).astype(np.uint8)


def mask_image(mask: np.ndarray) -> np.ndarray:
    return np.where(mask, 255, 0).astype(np.uint8)


def label_image(full_labels: np.ndarray) -> np.ndarray:
    """16-bit raster: component id + 1, 0 outside the sublevel set."""
    return np.asarray(full_labels, dtype=np.int64) + 1
