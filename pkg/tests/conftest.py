import math

import numpy as np
import pytest

from slicenormals import OrganizedScan, SensorRig, Slice, simulate
from slicenormals.simulate import Plane, Scene


def random_rotation(rng):
    q, r = np.linalg.qr(rng.normal(size=(3, 3)))
    q = q * np.sign(np.diag(r))
    if np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    return q


def make_random_slice(rng, n=None):
    """Random-walk slice: continuous geometry, no coincident consecutive points."""
    if n is None:
        n = int(rng.integers(2, 65))
    steps = rng.normal(size=(n - 1, 3))
    steps /= np.linalg.norm(steps, axis=1, keepdims=True)
    steps *= rng.uniform(0.05, 2.0, size=(n - 1, 1))
    pts = np.vstack([rng.normal(size=3) * 3.0, steps]).cumsum(axis=0)
    return Slice(0, np.arange(n, dtype=np.int64), pts)


def make_random_planar_scan(rng, beams=None, steps=None):
    """Scan of a random tilted plane below the sensor; every column is one
    straight chain, so it clusters to a single component."""
    if beams is None:
        beams = int(rng.integers(4, 13))
    if steps is None:
        steps = int(rng.integers(24, 97))
    elev = np.sort(rng.uniform(math.radians(-60.0), math.radians(-5.0), size=beams))
    while np.any(np.diff(elev) <= 1e-6):
        elev = np.sort(rng.uniform(math.radians(-60.0), math.radians(-5.0), size=beams))
    rig = SensorRig(beam_elevations=elev, azimuth_steps=steps)
    tilt = rng.normal(size=3)
    tilt[2] = abs(tilt[2]) + 2.0  # mostly upward-facing plane under the sensor
    normal = tilt / np.linalg.norm(tilt)
    scene = Scene([Plane(normal, -float(rng.uniform(0.5, 3.0)))])
    scan, gt = simulate(rig, scene)
    return scan, gt


def make_random_io_scan(rng):
    """Small scan with a random validity mask, for serialization tests."""
    rows = int(rng.integers(2, 9))
    cols = int(rng.integers(1, 9))
    points = rng.uniform(-10.0, 10.0, size=(rows, cols, 3))
    valid = rng.random((rows, cols)) < 0.8
    return OrganizedScan(points, valid)


def rle_label_fixture():
    """Slice whose 13 line segments produce the label string
    0,0,0,0,1,2,2,2,3,4,5,5,5 under a 30-degree threshold: the direction
    turns by 60 degrees exactly at each label change."""
    target = [0, 0, 0, 0, 1, 2, 2, 2, 3, 4, 5, 5, 5]
    turn = math.radians(60.0)
    pts = [np.zeros(3)]
    angle = 0.0
    for i, lab in enumerate(target):
        if i > 0 and lab != target[i - 1]:
            angle += turn
        d = np.array([0.0, math.cos(angle), math.sin(angle)])
        pts.append(pts[-1] + d)
    return target, Slice(0, np.arange(14, dtype=np.int64), np.array(pts))


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
