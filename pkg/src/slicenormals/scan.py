"""Organized LiDAR scan data model: beam-by-azimuth grids, slices, normal fields."""

from __future__ import annotations

from dataclasses import dataclass
from enum import IntEnum

import numpy as np


class NormalStatus(IntEnum):
    """Per-cell outcome of normal estimation."""

    INVALID = 0
    NORMAL = 1
    HIGH_CURVATURE = 2


class OrganizedScan:
    """A rows x cols grid of 3D points with a validity mask.

    Rows index laser beams bottom-to-top by elevation angle, columns index
    azimuth firings in acquisition order. Points are in the sensor frame
    (sensor at the origin), in meters. Cells without a laser return are
    marked invalid; their coordinates are canonicalized to zero.

    Instances are immutable after construction.
    """

    def __init__(self, points: np.ndarray, valid: np.ndarray):
        points = np.ascontiguousarray(points, dtype=np.float64)
        valid = np.ascontiguousarray(valid, dtype=bool)
        if points.ndim != 3 or points.shape[2] != 3:
            raise ValueError(f"points must have shape (rows, cols, 3), got {points.shape}")
        if valid.shape != points.shape[:2]:
            raise ValueError(
                f"valid mask shape {valid.shape} does not match grid {points.shape[:2]}"
            )
        rows, cols = valid.shape
        if rows < 2:
            raise ValueError(f"scan needs at least 2 beam rows, got {rows}")
        if cols < 1:
            raise ValueError(f"scan needs at least 1 azimuth column, got {cols}")
        vp = points[valid]
        if not np.all(np.isfinite(vp)):
            raise ValueError("valid points must have finite coordinates")
        if vp.size and np.any(np.einsum("ij,ij->i", vp, vp) <= 0.0):
            raise ValueError("valid points must have range > 0")
        pts = points.copy()
        pts[~valid] = 0.0
        pts.setflags(write=False)
        valid = valid.copy()
        valid.setflags(write=False)
        self.points = pts
        self.valid = valid
        self.rows = rows
        self.cols = cols

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, OrganizedScan):
            return NotImplemented
        return (
            self.rows == other.rows
            and self.cols == other.cols
            and np.array_equal(self.valid, other.valid)
            and np.array_equal(self.points, other.points)
        )

    __hash__ = None  # type: ignore[assignment]

    def __repr__(self) -> str:
        return f"OrganizedScan(rows={self.rows}, cols={self.cols}, valid={int(self.valid.sum())})"


@dataclass(frozen=True)
class Slice:
    """Valid points of one azimuth column, ordered by ascending beam row."""

    column_index: int
    rows: np.ndarray  # (n,) int64, strictly increasing
    points: np.ndarray  # (n, 3) float64

    def __post_init__(self):
        rows = np.ascontiguousarray(self.rows, dtype=np.int64)
        points = np.ascontiguousarray(self.points, dtype=np.float64)
        if points.ndim != 2 or points.shape != (rows.shape[0], 3):
            raise ValueError(f"points shape {points.shape} does not match {rows.shape[0]} rows")
        if rows.size > 1 and not np.all(np.diff(rows) > 0):
            raise ValueError("slice row indices must be strictly increasing")
        rows.setflags(write=False)
        points.setflags(write=False)
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "points", points)

    def __len__(self) -> int:
        return int(self.rows.shape[0])

    @property
    def entries(self):
        """Pairs of (row_index, point)."""
        return list(zip(self.rows.tolist(), self.points))


@dataclass(frozen=True)
class NormalField:
    """Per-cell normal estimate: a status grid plus unit normals where status is NORMAL.

    Normals are zero vectors at non-NORMAL cells.
    """

    status: np.ndarray  # (rows, cols) uint8 of NormalStatus values
    normals: np.ndarray  # (rows, cols, 3) float64

    def __post_init__(self):
        status = np.ascontiguousarray(self.status, dtype=np.uint8)
        normals = np.ascontiguousarray(self.normals, dtype=np.float64)
        if status.ndim != 2:
            raise ValueError(f"status must be 2-D, got shape {status.shape}")
        if normals.shape != status.shape + (3,):
            raise ValueError(
                f"normals shape {normals.shape} does not match status grid {status.shape}"
            )
        if status.max(initial=0) > max(NormalStatus):
            raise ValueError("status grid contains unknown status codes")
        status.setflags(write=False)
        normals.setflags(write=False)
        object.__setattr__(self, "status", status)
        object.__setattr__(self, "normals", normals)

    @property
    def rows(self) -> int:
        return self.status.shape[0]

    @property
    def cols(self) -> int:
        return self.status.shape[1]

    def count(self, status: NormalStatus) -> int:
        return int(np.count_nonzero(self.status == status))


def extract_slice(scan: OrganizedScan, column_index: int) -> Slice:
    """All valid points of one column, in ascending row order. Coordinates are untouched."""
    if not 0 <= column_index < scan.cols:
        raise IndexError(
            f"column_index {column_index} out of range for scan with {scan.cols} columns"
        )
    mask = scan.valid[:, column_index]
    rows = np.nonzero(mask)[0].astype(np.int64)
    return Slice(column_index, rows, scan.points[mask, column_index])
