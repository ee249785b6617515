"""Removable sets for convex functions in the plane: exact and numerical tools.

Submodules:

* :mod:`.intervals`: exact interval unions, Cantor sets, gap lists
* :mod:`.plane`: plane sets as depth-indexed outer covers
* :mod:`.thinness`: transparent-segment search and line scans
* :mod:`.counterexample`: a convex-off-a-product function that is not convex
* :mod:`.convexity`: midpoint and diagonal probes
* :mod:`.koch`: exact divergent bounds for the Koch curve
* :mod:`.extension`: numerical continuous extension across thin sets
"""
from .intervals import (
    GapList,
    Interval,
    IntervalSet,
    TernaryCantorSet,
    cantor_function,
    fat_cantor,
    point_classify,
    ternary_cantor,
)
from .plane import (
    Boxes,
    Kind,
    PlaneSetApprox,
    cantor_dust,
    holey_staircase,
    koch_curve,
    koch_polyline,
    last_graph_crossing,
    point_clearance,
    product_approx,
    rect_union,
    segment_clearance,
)
from .thinness import (
    ThinnessQuery,
    TransparencyWitness,
    Unknown,
    directional_thinness_scan,
    find_transparent_segment,
    line_intersection_count,
    totally_disconnected_scan,
)
from .counterexample import (
    CounterexampleParams,
    build_params,
    certify_local_convexity,
    check_certificate,
    eval_f,
    hessian_at,
    nonconvexity_gap,
)
from .convexity import midpoint_violation_scan, separate_convexity_check, sverak_probe, sigma_rho_check
from .koch import koch_lower_bound, koch_product, landmarks, recurrence_propagate
from .extension import PartialFn, extend_at, extension_report
from .report import Report

__version__ = "0.1.0"
