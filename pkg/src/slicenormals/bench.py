"""Single-threaded wall-clock benchmark of the two normal estimators.

Times the full per-scan pipeline (for the labeled method: clustering plus
normal computation) on a synthetic scan, excluding scan generation and I/O.
"""

from __future__ import annotations

import statistics
import time
from dataclasses import dataclass

from . import backend
from .clustering import ClusteringParams
from .scan import OrganizedScan
from .simulate import SCENE_BUILDERS, rig_preset, simulate


@dataclass(frozen=True)
class BenchResult:
    backend: str
    method: str
    mean_ms: float
    std_ms: float
    repetitions: int


def time_callable(fn, repetitions: int, warmup: int) -> tuple[float, float]:
    """Mean and stddev in milliseconds over repetitions, after warmup runs."""
    for _ in range(warmup):
        fn()
    samples = []
    for _ in range(repetitions):
        start = time.perf_counter()
        fn()
        samples.append((time.perf_counter() - start) * 1e3)
    mean = statistics.fmean(samples)
    std = statistics.stdev(samples) if len(samples) > 1 else 0.0
    return mean, std


def bench_scan(preset: str, scene_name: str = "corner", wall_distance: float = 5.0) -> OrganizedScan:
    scene = SCENE_BUILDERS[scene_name](wall_distance)
    scan, _ = simulate(rig_preset(preset), scene)
    return scan


def run_benchmark(
    scan: OrganizedScan,
    params: ClusteringParams,
    repetitions: int = 100,
    warmup: int = 10,
    backend_name: str | None = None,
) -> list[BenchResult]:
    """Benchmark both methods on one backend; returns [baseline, labeled]."""
    kernels = backend.get_kernels(backend_name)
    name = kernels.BACKEND_NAME
    points = scan.points
    valid = scan.valid.view("uint8")
    cos_thr = params.cos_threshold

    results = []
    mean, std = time_callable(
        lambda: kernels.normals_baseline(points, valid), repetitions, warmup
    )
    results.append(BenchResult(name, "baseline", mean, std, repetitions))
    mean, std = time_callable(
        lambda: kernels.normals_labeled(points, valid, cos_thr), repetitions, warmup
    )
    results.append(BenchResult(name, "labeled", mean, std, repetitions))
    return results
