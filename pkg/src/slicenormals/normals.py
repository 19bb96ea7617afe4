"""Per-point normal estimation on organized scans.

Both estimators take the cross product of the horizontal and vertical
neighbor difference vectors at each cell, substitute the point itself for a
single missing neighbor, normalize, and orient every normal toward the
sensor (n . p <= 0). The label-restricted variant additionally treats a
vertical neighbor from a different slice component as missing, and declines
to estimate where both vertical neighbors belong to other components.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import backend
from .clustering import ClusteringParams, label_points
from .scan import NormalField, OrganizedScan, Slice


@dataclass(frozen=True)
class NormalMethod:
    """Estimator selector: 'baseline' or 'labeled' (with clustering params)."""

    variant: str
    params: ClusteringParams | None = None

    def __post_init__(self):
        if self.variant not in ("baseline", "labeled"):
            raise ValueError(f"unknown variant {self.variant!r}")
        if (self.params is not None) != (self.variant == "labeled"):
            raise ValueError("clustering params are required exactly for the labeled variant")

    @classmethod
    def baseline(cls) -> "NormalMethod":
        return cls("baseline")

    @classmethod
    def labeled(cls, params: ClusteringParams | None = None) -> "NormalMethod":
        return cls("labeled", params if params is not None else ClusteringParams())

    def compute(self, scan: OrganizedScan) -> NormalField:
        if self.variant == "baseline":
            return normals_baseline(scan)
        return normals_labeled(scan, self.params)


def _valid_u8(scan: OrganizedScan) -> np.ndarray:
    return scan.valid.view(np.uint8)


def normals_baseline(scan: OrganizedScan) -> NormalField:
    """Cross-product normals from the four grid neighbors.

    Horizontal neighbors wrap around the revolution; vertical neighbors do
    not. A cell is invalid when it has no return, when an entire neighbor
    direction is missing, or when the neighbor differences are collinear.
    """
    status, normals = backend.get_kernels().normals_baseline(scan.points, _valid_u8(scan))
    return NormalField(status, normals)


def normals_labeled(scan: OrganizedScan, params: ClusteringParams) -> NormalField:
    """Cross-product normals restricted to same-component vertical neighbors.

    Each column is clustered with label_points; a vertical neighbor with a
    different label counts as missing. Cells whose two vertical neighbors
    both exist with different labels are reported as high curvature instead
    of getting an unreliable cross-surface normal.
    """
    status, normals = backend.get_kernels().normals_labeled(
        scan.points, _valid_u8(scan), params.cos_threshold
    )
    return NormalField(status, normals)


def slice_normals_2d(slc: Slice, params: ClusteringParams) -> list[tuple[int, np.ndarray | None]]:
    """In-plane normals along one slice, one entry per slice point.

    The tangent runs from the previous to the next same-label neighbor (the
    point itself substitutes a missing or different-label neighbor). The
    normal is the in-plane direction perpendicular to that tangent, oriented
    toward the sensor. Points with no usable neighbor get None.
    """
    labels = label_points(slc, params)
    pts = slc.points
    n = len(slc)
    out: list[tuple[int, np.ndarray | None]] = []
    for i in range(n):
        row = int(slc.rows[i])
        prev_ok = i > 0 and labels[i - 1] == labels[i]
        next_ok = i + 1 < n and labels[i + 1] == labels[i]
        if not prev_ok and not next_ok:
            out.append((row, None))
            continue
        a = pts[i - 1] if prev_ok else pts[i]
        b = pts[i + 1] if next_ok else pts[i]
        t = b - a
        p = pts[i]
        # perpendicular to the tangent within the plane spanned by the
        # tangent and the range direction; t x (t x p) points at the sensor
        raw = t * float(t @ p) - p * float(t @ t)
        t2 = float(t @ t)
        norm = float(np.linalg.norm(raw))
        if norm <= 1e-9 * t2 * float(np.linalg.norm(p)):
            out.append((row, None))
            continue
        out.append((row, raw / norm))
    return out
