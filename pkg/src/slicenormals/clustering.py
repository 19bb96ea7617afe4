"""Chain clustering of slice line segments by orientation change.

A slice's consecutive points define line segments; segments stay in the same
connected component while the angle between consecutive segments stays within
a threshold. Component sizes are kept run-length encoded ("strengths"), and
the segment labels are then expanded onto the points, resolving each disputed
boundary point via component strength and Euclidean proximity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import backend
from .scan import Slice

DEFAULT_ALPHA_THRESHOLD = math.radians(30.0)


@dataclass(frozen=True)
class ClusteringParams:
    """Clustering knobs; alpha_threshold is the orientation-change cutoff in radians."""

    alpha_threshold: float = DEFAULT_ALPHA_THRESHOLD

    def __post_init__(self):
        if not 0.0 < self.alpha_threshold < math.pi:
            raise ValueError(
                f"alpha_threshold must be in (0, pi), got {self.alpha_threshold}"
            )

    @classmethod
    def from_degrees(cls, degrees: float) -> "ClusteringParams":
        return cls(alpha_threshold=math.radians(degrees))

    @property
    def cos_threshold(self) -> float:
        # precomputed once so every backend compares against the same double
        return math.cos(self.alpha_threshold)


def angle_between(v1: np.ndarray, v2: np.ndarray) -> float:
    """Angle in [0, pi] between two non-zero 3D vectors."""
    v1 = np.asarray(v1, dtype=np.float64)
    v2 = np.asarray(v2, dtype=np.float64)
    n1 = math.sqrt(float(v1 @ v1))
    n2 = math.sqrt(float(v2 @ v2))
    if n1 == 0.0 or n2 == 0.0:
        raise ValueError("angle_between requires non-zero vectors")
    c = float(v1 @ v2) / (n1 * n2)
    return math.acos(min(1.0, max(-1.0, c)))


def _check_distinct_consecutive(points: np.ndarray) -> None:
    if np.any(np.all(points[1:] == points[:-1], axis=1)):
        raise ValueError(
            "slice has coincident consecutive points; "
            "merge duplicates first (label_points does this)"
        )


def encode_lines(slc: Slice, params: ClusteringParams) -> np.ndarray:
    """Component strengths (run lengths of same-component line segments).

    Requires at least two points and distinct consecutive points. The sum of
    the strengths equals the number of line segments, len(slc) - 1.
    """
    if len(slc) < 2:
        raise ValueError(f"encode_lines needs at least 2 points, got {len(slc)}")
    _check_distinct_consecutive(slc.points)
    return backend.get_kernels().encode_lines(slc.points, params.cos_threshold)


def expand_labels(slc: Slice, strengths: np.ndarray) -> np.ndarray:
    """Per-point labels from component strengths.

    Boundary points adjacent to a strong component (strength > 1) take its
    label; between two strong components the strictly closer neighbor wins;
    otherwise the point keeps the label of the preceding component.
    """
    strengths = np.ascontiguousarray(strengths, dtype=np.int64)
    if strengths.size and strengths.min() < 1:
        raise ValueError("strengths must all be >= 1")
    if int(strengths.sum()) != max(len(slc) - 1, 0):
        raise ValueError(
            f"strengths sum {int(strengths.sum())} does not match "
            f"{max(len(slc) - 1, 0)} line segments"
        )
    if len(slc) < 2:
        return np.zeros(len(slc), dtype=np.int64)
    return backend.get_kernels().expand_labels(slc.points, strengths)


def label_points(slc: Slice, params: ClusteringParams) -> np.ndarray:
    """Per-point component labels for one slice.

    Empty and singleton slices get all-zero labels. Coincident consecutive
    points are merged for clustering and inherit their twin's label.
    """
    if len(slc) < 2:
        return np.zeros(len(slc), dtype=np.int64)
    return backend.get_kernels().label_slice(slc.points, params.cos_threshold)


def dfs_reference_clustering(slc: Slice, params: ClusteringParams) -> np.ndarray:
    """Reference implementation of encode_lines via explicit graph search.

    Builds the chain graph over line segments with an edge wherever the
    orientation change stays within the threshold, finds connected components
    with an iterative depth-first search, and returns their sizes in chain
    order. Kept independent of the run-length encoder on purpose: it is the
    test oracle for it.
    """
    if len(slc) < 2:
        raise ValueError(f"dfs_reference_clustering needs at least 2 points, got {len(slc)}")
    _check_distinct_consecutive(slc.points)
    pts = slc.points
    vectors = pts[1:] - pts[:-1]
    m = vectors.shape[0]
    adjacency: dict[int, list[int]] = {i: [] for i in range(m)}
    for i in range(m - 1):
        if angle_between(vectors[i], vectors[i + 1]) <= params.alpha_threshold:
            adjacency[i].append(i + 1)
            adjacency[i + 1].append(i)
    seen: set[int] = set()
    components: list[list[int]] = []
    for start in range(m):
        if start in seen:
            continue
        stack = [start]
        seen.add(start)
        comp = []
        while stack:
            node = stack.pop()
            comp.append(node)
            for nb in adjacency[node]:
                if nb not in seen:
                    seen.add(nb)
                    stack.append(nb)
        components.append(comp)
    components.sort(key=min)
    return np.array([len(c) for c in components], dtype=np.int64)
