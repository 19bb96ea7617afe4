"""Synthetic spinning-LiDAR oracle over analytic scenes.

Casts one ray per (beam, azimuth) cell from the sensor pose, keeps the
nearest primitive hit within max_range, and records exact ground truth
(hit face id, outward unit normal, crease flags) alongside the scan.
Scan points and ground-truth normals are expressed in the sensor frame.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import BinaryIO, Union

import numpy as np

from .scan import OrganizedScan

_RAY_EPS = 1e-9


@dataclass(frozen=True)
class Plane:
    """Infinite plane {x : normal . x = offset} with outward unit normal."""

    normal: np.ndarray
    offset: float

    def __post_init__(self):
        n = np.ascontiguousarray(self.normal, dtype=np.float64)
        if n.shape != (3,):
            raise ValueError(f"plane normal must be a 3-vector, got shape {n.shape}")
        if abs(np.linalg.norm(n) - 1.0) > 1e-9:
            raise ValueError("plane normal must be unit length")
        n.setflags(write=False)
        object.__setattr__(self, "normal", n)

    @property
    def face_count(self) -> int:
        return 1


@dataclass(frozen=True)
class Box:
    """Axis-aligned box; six faces in (-x, +x, -y, +y, -z, +z) order."""

    min_corner: np.ndarray
    max_corner: np.ndarray

    def __post_init__(self):
        lo = np.ascontiguousarray(self.min_corner, dtype=np.float64)
        hi = np.ascontiguousarray(self.max_corner, dtype=np.float64)
        if lo.shape != (3,) or hi.shape != (3,):
            raise ValueError("box corners must be 3-vectors")
        if not np.all(hi > lo):
            raise ValueError("box must have positive extents")
        lo.setflags(write=False)
        hi.setflags(write=False)
        object.__setattr__(self, "min_corner", lo)
        object.__setattr__(self, "max_corner", hi)

    @property
    def face_count(self) -> int:
        return 6


Primitive = Union[Plane, Box]


@dataclass(frozen=True)
class Scene:
    """Primitives to raycast; faces get consecutive integer ids in order."""

    primitives: tuple[Primitive, ...]

    def __init__(self, primitives):
        object.__setattr__(self, "primitives", tuple(primitives))

    def face_base(self, index: int) -> int:
        return sum(p.face_count for p in self.primitives[:index])


@dataclass(frozen=True)
class SensorRig:
    """Spinning-array geometry plus noise and pose configuration."""

    beam_elevations: np.ndarray  # radians, strictly increasing, bottom first
    azimuth_steps: int
    pose: np.ndarray = field(default_factory=lambda: np.eye(4))  # sensor-to-world
    max_range: float = 100.0
    range_noise_sigma: float = 0.0
    noise_seed: int = 0

    def __post_init__(self):
        elev = np.ascontiguousarray(self.beam_elevations, dtype=np.float64)
        if elev.ndim != 1 or elev.size < 2:
            raise ValueError("need at least 2 beam elevations")
        if not np.all(np.diff(elev) > 0):
            raise ValueError("beam elevations must be strictly increasing")
        pose = np.ascontiguousarray(self.pose, dtype=np.float64)
        if pose.shape != (4, 4):
            raise ValueError("pose must be a 4x4 rigid transform")
        if self.azimuth_steps < 1:
            raise ValueError("azimuth_steps must be >= 1")
        if self.max_range <= 0:
            raise ValueError("max_range must be positive")
        if self.range_noise_sigma < 0:
            raise ValueError("range_noise_sigma must be >= 0")
        elev.setflags(write=False)
        pose.setflags(write=False)
        object.__setattr__(self, "beam_elevations", elev)
        object.__setattr__(self, "pose", pose)

    @property
    def rows(self) -> int:
        return int(self.beam_elevations.size)

    @property
    def cols(self) -> int:
        return int(self.azimuth_steps)


@dataclass(frozen=True)
class GroundTruth:
    """Exact per-cell truth: hit face id (-1 = miss), outward unit normal in
    the sensor frame, and a crease flag marking cells whose 4-neighborhood
    spans more than one face."""

    valid: np.ndarray  # (rows, cols) bool
    hit_id: np.ndarray  # (rows, cols) int64
    normals: np.ndarray  # (rows, cols, 3) float64
    crease: np.ndarray  # (rows, cols) bool

    def __post_init__(self):
        valid = np.ascontiguousarray(self.valid, dtype=bool)
        hit_id = np.ascontiguousarray(self.hit_id, dtype=np.int64)
        normals = np.ascontiguousarray(self.normals, dtype=np.float64)
        crease = np.ascontiguousarray(self.crease, dtype=bool)
        if not (valid.shape == hit_id.shape == crease.shape == normals.shape[:2]):
            raise ValueError("ground truth grids must share one shape")
        for arr in (valid, hit_id, normals, crease):
            arr.setflags(write=False)
        object.__setattr__(self, "valid", valid)
        object.__setattr__(self, "hit_id", hit_id)
        object.__setattr__(self, "normals", normals)
        object.__setattr__(self, "crease", crease)

    @property
    def rows(self) -> int:
        return self.valid.shape[0]

    @property
    def cols(self) -> int:
        return self.valid.shape[1]


def rig_preset(name: str, **overrides) -> SensorRig:
    """Named rig configurations: 'vlp16' (16 beams, -15..15 deg, 900 steps)
    and 'os0-32' (32 beams, -45..45 deg, 1024 steps)."""
    if name == "vlp16":
        defaults = dict(
            beam_elevations=np.deg2rad(np.linspace(-15.0, 15.0, 16)),
            azimuth_steps=900,
        )
    elif name == "os0-32":
        defaults = dict(
            beam_elevations=np.deg2rad(np.linspace(-45.0, 45.0, 32)),
            azimuth_steps=1024,
        )
    else:
        raise ValueError(f"unknown rig preset {name!r}")
    defaults.update(overrides)
    return SensorRig(**defaults)


def make_floor_scene() -> Scene:
    """A single floor plane one meter below the sensor."""
    return Scene([Plane(np.array([0.0, 0.0, 1.0]), -1.0)])


def make_corner_scene(wall_distance: float) -> Scene:
    """Floor at z = -1 meeting a vertical wall at x = wall_distance."""
    if wall_distance <= 0:
        raise ValueError("wall_distance must be positive")
    return Scene(
        [
            Plane(np.array([0.0, 0.0, 1.0]), -1.0),
            Plane(np.array([-1.0, 0.0, 0.0]), -float(wall_distance)),
        ]
    )


def make_box_scene(distance: float = 5.0) -> Scene:
    """Floor at z = -1 plus a 2x2x1.5 m box sitting on it at the given distance.

    The box top (z = 0.5) sits above the sensor plane so horizontal rays hit
    its front face squarely rather than grazing an edge."""
    if distance <= 0:
        raise ValueError("distance must be positive")
    return Scene(
        [
            Plane(np.array([0.0, 0.0, 1.0]), -1.0),
            Box(np.array([distance, -1.0, -1.0]), np.array([distance + 2.0, 1.0, 0.5])),
        ]
    )


SCENE_BUILDERS = {
    "floor": lambda wall_distance: make_floor_scene(),
    "corner": make_corner_scene,
    "box": make_box_scene,
}


def _ray_directions(rig: SensorRig) -> np.ndarray:
    theta = rig.beam_elevations[:, None]
    phi = 2.0 * np.pi * np.arange(rig.cols) / rig.cols
    cos_t = np.cos(theta)
    dirs = np.empty((rig.rows, rig.cols, 3), dtype=np.float64)
    dirs[..., 0] = cos_t * np.cos(phi)
    dirs[..., 1] = cos_t * np.sin(phi)
    dirs[..., 2] = np.broadcast_to(np.sin(theta), (rig.rows, rig.cols))
    return dirs


def _intersect_plane(plane: Plane, origin, dirs_w, max_range):
    denom = dirs_w @ plane.normal
    with np.errstate(divide="ignore", invalid="ignore"):
        t = (plane.offset - float(plane.normal @ origin)) / denom
    hit = (denom != 0.0) & (t > _RAY_EPS) & (t <= max_range)
    return t, hit


def _intersect_box(box: Box, origin, dirs_w, max_range):
    with np.errstate(divide="ignore", invalid="ignore"):
        t_lo = (box.min_corner - origin) / dirs_w
        t_hi = (box.max_corner - origin) / dirs_w
    t_near = np.fmin(t_lo, t_hi)
    t_far = np.fmax(t_lo, t_hi)
    t_enter = np.max(t_near, axis=-1)
    t_exit = np.min(t_far, axis=-1)
    hit = (t_enter <= t_exit) & (t_enter > _RAY_EPS) & (t_enter <= max_range)
    axis = np.argmax(t_near, axis=-1)
    # entering through the min face when traveling along +axis
    axis_dir = np.take_along_axis(dirs_w, axis[..., None], axis=-1)[..., 0]
    face = axis * 2 + (axis_dir < 0).astype(np.int64)
    return t_enter, hit, face


_BOX_FACE_NORMALS = np.array(
    [
        [-1.0, 0.0, 0.0],
        [1.0, 0.0, 0.0],
        [0.0, -1.0, 0.0],
        [0.0, 1.0, 0.0],
        [0.0, 0.0, -1.0],
        [0.0, 0.0, 1.0],
    ]
)


def simulate(rig: SensorRig, scene: Scene) -> tuple[OrganizedScan, GroundTruth]:
    """Raycast the scene; returns the (possibly noisy) scan plus noiseless truth.

    Deterministic: range noise comes from a counter-based generator keyed by
    the rig seed, with one draw per (row, col) cell in row-major order.
    """
    rows, cols = rig.rows, rig.cols
    rot = rig.pose[:3, :3]
    origin = rig.pose[:3, 3]
    dirs_s = _ray_directions(rig)
    dirs_w = dirs_s @ rot.T

    best_t = np.full((rows, cols), np.inf)
    best_face = np.full((rows, cols), -1, dtype=np.int64)
    best_normal_w = np.zeros((rows, cols, 3))

    for idx, prim in enumerate(scene.primitives):
        base = scene.face_base(idx)
        if isinstance(prim, Plane):
            t, hit = _intersect_plane(prim, origin, dirs_w, rig.max_range)
            closer = hit & (t < best_t)
            best_t[closer] = t[closer]
            best_face[closer] = base
            best_normal_w[closer] = prim.normal
        else:
            t, hit, face = _intersect_box(prim, origin, dirs_w, rig.max_range)
            closer = hit & (t < best_t)
            best_t[closer] = t[closer]
            best_face[closer] = base + face[closer]
            best_normal_w[closer] = _BOX_FACE_NORMALS[face[closer]]

    valid = best_face >= 0
    t_meas = np.where(valid, best_t, 0.0)
    if rig.range_noise_sigma > 0.0:
        gen = np.random.Generator(np.random.Philox(rig.noise_seed))
        noise = gen.standard_normal((rows, cols))
        t_meas = t_meas + rig.range_noise_sigma * noise
        valid = valid & (t_meas > 0.0)

    points = dirs_s * np.where(valid, t_meas, 0.0)[..., None]
    scan = OrganizedScan(points, valid)

    hit_id = np.where(valid, best_face, -1)
    normals_s = np.where(valid[..., None], best_normal_w @ rot, 0.0)
    crease = _crease_flags(valid, hit_id)
    gt = GroundTruth(valid, hit_id, normals_s, crease)
    return scan, gt


def _crease_flags(valid: np.ndarray, hit_id: np.ndarray) -> np.ndarray:
    """Cells whose 4-neighborhood (horizontal wrap, no vertical wrap) spans
    more than one hit face."""
    crease = np.zeros_like(valid)
    for shifted_valid, shifted_id in _neighbor_grids(valid, hit_id):
        crease |= valid & shifted_valid & (shifted_id != hit_id)
    return crease


def _neighbor_grids(valid: np.ndarray, hit_id: np.ndarray):
    up_v = np.zeros_like(valid)
    up_v[:-1] = valid[1:]
    up_i = np.full_like(hit_id, -1)
    up_i[:-1] = hit_id[1:]
    down_v = np.zeros_like(valid)
    down_v[1:] = valid[:-1]
    down_i = np.full_like(hit_id, -1)
    down_i[1:] = hit_id[:-1]
    left_v = np.roll(valid, 1, axis=1)
    left_i = np.roll(hit_id, 1, axis=1)
    right_v = np.roll(valid, -1, axis=1)
    right_i = np.roll(hit_id, -1, axis=1)
    return [(up_v, up_i), (down_v, down_i), (left_v, left_i), (right_v, right_i)]


GT_CSV_HEADER = "row,col,hit_id,nx,ny,nz,crease"


def write_ground_truth(gt: GroundTruth, sink: Union[str, os.PathLike, BinaryIO]) -> None:
    """CSV with one line per valid cell."""
    lines = [GT_CSV_HEADER]
    for r in range(gt.rows):
        for c in range(gt.cols):
            if not gt.valid[r, c]:
                continue
            n = gt.normals[r, c]
            lines.append(
                f"{r},{c},{int(gt.hit_id[r, c])},"
                f"{float(n[0])!r},{float(n[1])!r},{float(n[2])!r},{int(gt.crease[r, c])}"
            )
    data = ("\n".join(lines) + "\n").encode()
    if isinstance(sink, (str, os.PathLike)):
        with open(sink, "wb") as fh:
            fh.write(data)
    else:
        sink.write(data)


def read_ground_truth(source, rows: int, cols: int) -> GroundTruth:
    """Parse a ground-truth CSV back onto a rows x cols grid."""
    if isinstance(source, bytes):
        text = source.decode()
    elif isinstance(source, (str, os.PathLike)):
        with open(source, "r") as fh:
            text = fh.read()
    else:
        text = source.read()
        if isinstance(text, bytes):
            text = text.decode()
    lines = [ln for ln in text.splitlines() if ln]
    if not lines or lines[0] != GT_CSV_HEADER:
        raise ValueError(f"bad ground-truth header, expected {GT_CSV_HEADER!r}")
    valid = np.zeros((rows, cols), dtype=bool)
    hit_id = np.full((rows, cols), -1, dtype=np.int64)
    normals = np.zeros((rows, cols, 3))
    crease = np.zeros((rows, cols), dtype=bool)
    for ln in lines[1:]:
        f = ln.split(",")
        if len(f) != 7:
            raise ValueError(f"bad ground-truth record {ln!r}")
        r, c = int(f[0]), int(f[1])
        if not (0 <= r < rows and 0 <= c < cols):
            raise ValueError(f"cell ({r},{c}) out of the {rows}x{cols} grid")
        valid[r, c] = True
        hit_id[r, c] = int(f[2])
        normals[r, c] = (float(f[3]), float(f[4]), float(f[5]))
        crease[r, c] = bool(int(f[6]))
    return GroundTruth(valid, hit_id, normals, crease)
