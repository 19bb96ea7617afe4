"""Robust per-point surface normals for sparse organized LiDAR scans.

Each vertical slice of the scan is clustered into smooth chain components by
the orientation change of consecutive line segments; normal estimation then
only pairs points with same-component vertical neighbors, which keeps
normals sharp across surface creases at a small constant runtime overhead.
"""

from .backend import active_backend, available_backends, use_backend
from .clustering import (
    DEFAULT_ALPHA_THRESHOLD,
    ClusteringParams,
    angle_between,
    dfs_reference_clustering,
    encode_lines,
    expand_labels,
    label_points,
)
from .evaluate import EvalReport, angular_error, evaluate
from .io import OsfParseError, export_ply, read_scan, write_scan
from .normals import NormalMethod, normals_baseline, normals_labeled, slice_normals_2d
from .scan import NormalField, NormalStatus, OrganizedScan, Slice, extract_slice
from .simulate import (
    Box,
    GroundTruth,
    Plane,
    Scene,
    SensorRig,
    make_box_scene,
    make_corner_scene,
    make_floor_scene,
    read_ground_truth,
    rig_preset,
    simulate,
    write_ground_truth,
)

__version__ = "0.1.0"

__all__ = [
    "Box",
    "ClusteringParams",
    "DEFAULT_ALPHA_THRESHOLD",
    "EvalReport",
    "GroundTruth",
    "NormalField",
    "NormalMethod",
    "NormalStatus",
    "OrganizedScan",
    "OsfParseError",
    "Plane",
    "Scene",
    "SensorRig",
    "Slice",
    "active_backend",
    "angle_between",
    "angular_error",
    "available_backends",
    "dfs_reference_clustering",
    "encode_lines",
    "evaluate",
    "expand_labels",
    "export_ply",
    "extract_slice",
    "label_points",
    "make_box_scene",
    "make_corner_scene",
    "make_floor_scene",
    "normals_baseline",
    "normals_labeled",
    "read_ground_truth",
    "read_scan",
    "rig_preset",
    "simulate",
    "slice_normals_2d",
    "use_backend",
    "write_ground_truth",
    "write_scan",
]
