"""Command-line interface.

Times given on the command line (``--epsilon``, ``--exclude-band``) are raw
seconds; they are converted to normalized time with the trajectory's span.
``gamma`` is in the metric's own units. ``LOOPSCOPE_THREADS`` caps the
number of worker threads.
"""
from __future__ import annotations

import argparse
import dataclasses
import sys
from pathlib import Path

import numpy as np

from . import io
from .components import extract_components
from .detection import DetectionGraphConfig, cluster_detections, detect, subsample
from .manifolds import METRICS, make_metric
from .measures import duration_profile, loop_area, loop_density, standard_selections
from .sampling import SamplePlan, coverage_report, make_sampler, sample
from .synthetic import GENERATORS
from .trajectory import build_distance_field, default_resolution


class UsageError(ValueError):
    pass


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _load(args):
    metric = None if args.metric is None else make_metric(args.metric)
    return io.read_trajectory(args.trajectory, metric)


def _field(args, traj):
    n = args.resolution if args.resolution is not None else default_resolution(traj)
    return build_distance_field(traj, args.gamma, resolution=n)


def _parse_params(spec_cls, pairs):
    types = {f.name: f.type for f in dataclasses.fields(spec_cls)}
    params = {}
    for pair in pairs:
        if "=" not in pair:
            raise UsageError(f"--param expects NAME=VALUE, got {pair!r}")
        k, v = pair.split("=", 1)
        if k not in types:
            raise UsageError(f"{spec_cls.__name__} has no parameter {k!r}; choose from {sorted(types)}")
        params[k] = int(v) if types[k] in ("int", int) else float(v)
    return params


# ---------------------------------------------------------------------------
# commands


def cmd_generate(args) -> None:
    cls = GENERATORS[args.curve]
    params = _parse_params(cls, args.param)
    if args.samples is not None:
        params["samples"] = args.samples
    if "seed" in {f.name for f in dataclasses.fields(cls)}:
        params.setdefault("seed", args.seed)
    traj = cls(**params).generate()
    Path(args.out).parent.mkdir(parents=True, exist_ok=True)
    io.write_trajectory(traj, args.out)


def _write_field(out, traj, fld):
    io.write_pgm(out / "field.pgm", io.field_image(fld.values, fld.gamma))
    io.write_pgm(out / "mask.pgm", io.mask_image(fld.mask))
    t0, tf = traj.raw_time_span
    io.write_rows(
        out / "field_meta.csv",
        ("key", "value"),
        [
            ("resolution", fld.resolution),
            ("gamma", float(fld.gamma)),
            ("samples", len(traj)),
            ("metric", traj.metric.name),
            ("t0_seconds", t0),
            ("tf_seconds", tf),
            ("seconds_per_unit_time", traj.duration),
        ],
    )


def cmd_field(args) -> None:
    traj = _load(args)
    fld = _field(args, traj)
    _write_field(_out_dir(args), traj, fld)


def cmd_components(args) -> None:
    traj = _load(args)
    fld = _field(args, traj)
    cs = extract_components(fld)
    out = _out_dir(args)
    io.write_rows(
        out / "components.csv",
        ("id", "is_trivial", "area", "holes", "t_min", "t_max", "tp_min", "tp_max"),
        [
            (c.id, "true" if c.is_trivial else "false", float(c.area), c.hole_count, *map(float, c.bbox))
            for c in cs
        ],
    )
    io.write_pgm(out / "labels.pgm", io.label_image(cs.full_labels))


def cmd_measures(args) -> None:
    traj = _load(args)
    fld = _field(args, traj)
    cs = extract_components(fld)
    sels = standard_selections(cs)
    out = _out_dir(args)
    profiles = [duration_profile(cs, fld, s) for s in sels.values()]
    io.write_rows(
        out / "duration.csv",
        ("t", *(f"tau_{k}" for k in sels)),
        zip(fld.times.tolist(), *(p.tolist() for p in profiles)),
    )
    a, b = args.a, args.b
    io.write_rows(
        out / "measures.csv",
        ("selection", "a", "b", "area", "density"),
        [(k, float(a), float(b), loop_area(cs, fld, s, a, b), loop_density(cs, fld, s, a, b)) for k, s in sels.items()],
    )


def cmd_detect(args) -> None:
    traj = _load(args)
    band = (args.exclude_band or 0.0) / traj.duration
    d = detect(traj, args.gamma, exclude_band=band)
    io.write_detections(d, _out_dir(args) / "detections.csv")


def _write_coverage(out, plan: SamplePlan, d, clustering):
    rep = coverage_report(plan, d, clustering)
    io.write_rows(
        out / "coverage.csv",
        ("cluster_id", "size", "count", "min_spacing"),
        [
            (k, int(s), int(c), "" if m is None else float(m))
            for k, (s, c, m) in enumerate(zip(rep.sizes, rep.counts, rep.min_spacing))
        ],
    )
    io.write_rows(
        out / "coverage_summary.csv",
        ("key", "value"),
        [
            ("sampler", plan.sampler.name),
            ("detections", len(d)),
            ("clusters", rep.n_clusters),
            ("samples", len(plan)),
            ("coverage", rep.coverage),
            ("size_count_spearman", rep.size_count_spearman),
            ("floor_activations", rep.floor_activations),
        ],
    )


def cmd_sample(args) -> None:
    traj = _load(args)
    if args.epsilon is None:
        raise UsageError("sample needs --epsilon (seconds)")
    eps = args.epsilon / traj.duration
    band = (args.epsilon if args.exclude_band is None else args.exclude_band) / traj.duration
    d = detect(traj, args.gamma, exclude_band=band)
    d = subsample(d, args.fraction, args.seed)
    clustering = cluster_detections(d, DetectionGraphConfig(epsilon=eps))
    spec = make_sampler(args.sampler, args.budget, args.seed, c=args.c, r=args.r)
    plan = sample(d, clustering, spec)
    out = _out_dir(args)
    io.write_detections(d, out / "detections.csv")
    io.write_cluster_labels(clustering, out / "cluster_labels.csv")
    alloc = np.bincount(plan.cluster_ids[plan.cluster_ids >= 0], minlength=clustering.n_clusters)
    rows = []
    for k, members in enumerate(clustering.groups()):
        XY = d.plane()[members]
        rows.append(
            (k, len(members), float(XY[:, 0].min()), float(XY[:, 0].max()),
             float(XY[:, 1].min()), float(XY[:, 1].max()),
             int(plan.wanted[k]), int(alloc[k]), int(plan.floored[k]))
        )
    io.write_rows(
        out / "clusters.csv",
        ("id", "size", "t_min", "t_max", "tp_min", "tp_max", "wanted", "allocated", "floored"),
        rows,
    )
    io.write_rows(
        out / "plan.csv",
        ("t", "t_prime", "dist", "cluster_id", "sampler"),
        [(float(d.t[i]), float(d.t_prime[i]), float(d.dist[i]), int(c), spec.name)
         for i, c in zip(plan.indices, plan.cluster_ids)],
    )
    _write_coverage(out, plan, d, clustering)


def cmd_report(args) -> None:
    src = Path(args.run)
    d = io.read_detections(src / "detections.csv")
    clustering = io.read_cluster_labels(src / "cluster_labels.csv")
    if len(clustering.labels) != len(d):
        raise UsageError("cluster_labels.csv does not match detections.csv")
    clusters = io.read_rows(src / "clusters.csv")
    plan_rows = io.read_rows(src / "plan.csv", ("t", "t_prime", "dist", "cluster_id", "sampler"))
    index = {(float(a), float(b)): k for k, (a, b) in enumerate(zip(d.t.tolist(), d.t_prime.tolist()))}
    try:
        idx = np.array([index[(float(r["t"]), float(r["t_prime"]))] for r in plan_rows], dtype=np.int64)
    except KeyError as exc:
        raise UsageError(f"plan.csv row {exc} is not among the detections") from None
    cid = np.array([int(r["cluster_id"]) for r in plan_rows], dtype=np.int64)
    name = plan_rows[0]["sampler"] if plan_rows else "alpha"
    wanted = np.array([int(r["wanted"]) for r in clusters], dtype=np.int64)
    floored = np.array([r["floored"] == "1" for r in clusters], dtype=bool)
    plan = SamplePlan(make_sampler(name, max(len(idx), 1), 0), idx, cid, clustering.n_clusters, wanted, floored)
    _write_coverage(_out_dir(args) if args.out else src, plan, d, clustering)


# ---------------------------------------------------------------------------
# parser


def _common(p, gamma=True):
    p.add_argument("trajectory", help="trajectory file (native CSV or TUM poses)")
    if gamma:
        p.add_argument("--gamma", type=float, required=True,
                       help="distance threshold in the metric's units (metres for L2 on poses)")
    p.add_argument("--metric", choices=sorted(METRICS), help="override the file's metric")
    p.add_argument("--out", default=".", help="output directory")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="loopscope", description="Inexact loop analysis of trajectories.")
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="write a synthetic trajectory")
    g.add_argument("curve", choices=sorted(GENERATORS))
    g.add_argument("--param", action="append", default=[], metavar="NAME=VALUE")
    g.add_argument("--samples", type=int)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", required=True, help="output trajectory file")
    g.set_defaults(func=cmd_generate)

    for name, func, helptext in [
        ("field", cmd_field, "pairwise distance raster and sublevel mask"),
        ("components", cmd_components, "loop component table and label raster"),
        ("measures", cmd_measures, "loop duration profile, area and density"),
    ]:
        p = sub.add_parser(name, help=helptext)
        _common(p)
        p.add_argument("--resolution", type=int, help="grid size N (default min(samples, 2048))")
        if name == "measures":
            p.add_argument("--a", type=float, default=0.0, help="window start, normalized time")
            p.add_argument("--b", type=float, default=1.0, help="window end, normalized time")
        p.set_defaults(func=func)

    d = sub.add_parser("detect", help="all inexact loops between samples")
    _common(d)
    d.add_argument("--exclude-band", type=float, help="ignore pairs at most this many seconds apart (default 0)")
    d.set_defaults(func=cmd_detect)

    s = sub.add_parser("sample", help="detect, cluster and draw a budgeted sample")
    _common(s)
    s.add_argument("--epsilon", type=float, help="cluster linking distance in seconds")
    s.add_argument("--exclude-band", type=float, help="seconds; defaults to --epsilon")
    s.add_argument("--fraction", type=float, default=1.0, help="detection subsampling fraction")
    s.add_argument("--budget", type=int, default=10_000)
    s.add_argument("--sampler", choices=("alpha", "rho", "const"), default="rho")
    s.add_argument("--c", type=int, default=1, help="samples per cluster (const)")
    s.add_argument("--r", type=int, default=1, help="samples per cluster per trajectory point (rho)")
    s.add_argument("--seed", type=int, default=0)
    s.set_defaults(func=cmd_sample)

    r = sub.add_parser("report", help="recompute coverage from a sample run directory")
    r.add_argument("run", help="directory written by 'sample'")
    r.add_argument("--out", help="output directory (default: the run directory)")
    r.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except (OSError, ValueError, TypeError) as exc:
        print(f"loopscope: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
