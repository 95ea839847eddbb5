"""Inexact loops of trajectories on Riemannian manifolds.

Build a :class:`Trajectory`, compute its :class:`DistanceField`, label the
sublevel set into loop components, measure loop duration/area/density,
detect and cluster inexact loops, and draw budgeted samples of them.
"""
from .components import (
    ComponentSet,
    LoopComponent,
    NotAnInexactLoopError,
    component_boundary,
    count_holes,
    extract_components,
    is_simple,
)
from .detection import (
    Clustering,
    Detection,
    DetectionGraphConfig,
    Detections,
    cluster_detections,
    detect,
    detect_brute_force,
    subsample,
)
from .manifolds import (
    L2,
    EuclideanPoint,
    MetricMismatchError,
    RigidPose,
    Rotation,
    SE3Weighted,
    SO3Frobenius,
    TorusL2,
    TorusPoint,
    distance,
    make_metric,
)
from .measures import (
    MeasureSelection,
    duration_profile,
    loop_area,
    loop_density,
    loop_duration,
    standard_selections,
)
from .sampling import (
    BudgetError,
    ConstantPerComponent,
    CoverageReport,
    PerPointPerComponent,
    ProportionalToArea,
    SamplePlan,
    coverage_report,
    sample,
)
from .synthetic import (
    CloverNontrivial,
    DoubleLoop,
    Line,
    PartialCircle,
    SO3Circle,
    Spiral,
    StreetGrid,
    TorusCircle,
    generate,
)
from .trajectory import DistanceField, Trajectory, build_distance_field, evaluate_at, pairwise_distance

__version__ = "0.1.0"
