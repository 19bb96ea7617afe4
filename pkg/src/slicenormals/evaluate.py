"""Normal-quality metrics against simulated ground truth."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .scan import NormalField, NormalStatus
from .simulate import GroundTruth


@dataclass(frozen=True)
class EvalReport:
    """Angular-error statistics for one normal field against ground truth.

    Error statistics are None when no cell has both an estimate and truth.
    Counts partition the ground-truth-valid cells by estimation status.
    """

    mean_deg: float | None
    median_deg: float | None
    p95_deg: float | None
    edge_mean_deg: float | None
    coverage: float
    normal_count: int
    high_curvature_count: int
    invalid_count: int


def angular_error(estimated: np.ndarray, truth: np.ndarray) -> float:
    """Orientation-agnostic angle between unit vectors, in degrees."""
    e = np.asarray(estimated, dtype=np.float64)
    t = np.asarray(truth, dtype=np.float64)
    for name, v in (("estimated", e), ("truth", t)):
        if abs(float(np.linalg.norm(v)) - 1.0) > 1e-6:
            raise ValueError(f"{name} vector must be unit length")
    c = min(1.0, abs(float(e @ t)))
    return float(np.degrees(np.arccos(c)))


def evaluate(normals: NormalField, gt: GroundTruth) -> EvalReport:
    """Aggregate angular errors over cells with both an estimate and truth.

    High-curvature cells are counted but excluded from the error statistics;
    they represent a deliberate refusal to estimate. Edge statistics cover
    the crease-flagged cells only.
    """
    if (normals.rows, normals.cols) != (gt.rows, gt.cols):
        raise ValueError(
            f"normal field {normals.rows}x{normals.cols} does not match "
            f"ground truth {gt.rows}x{gt.cols}"
        )
    gt_valid = gt.valid
    n_gt = int(gt_valid.sum())
    status = normals.status
    normal_count = int(np.count_nonzero(gt_valid & (status == NormalStatus.NORMAL)))
    high_curv_count = int(np.count_nonzero(gt_valid & (status == NormalStatus.HIGH_CURVATURE)))
    invalid_count = n_gt - normal_count - high_curv_count

    matched = gt_valid & (status == NormalStatus.NORMAL)
    dots = np.abs(np.einsum("rci,rci->rc", normals.normals, gt.normals))
    errors = np.degrees(np.arccos(np.clip(dots, -1.0, 1.0)))

    err = errors[matched]
    if err.size:
        mean = float(err.mean())
        median = float(np.median(err))
        p95 = float(np.percentile(err, 95.0))
    else:
        mean = median = p95 = None

    edge = errors[matched & gt.crease]
    edge_mean = float(edge.mean()) if edge.size else None

    coverage = normal_count / n_gt if n_gt else 0.0
    return EvalReport(
        mean_deg=mean,
        median_deg=median,
        p95_deg=p95,
        edge_mean_deg=edge_mean,
        coverage=coverage,
        normal_count=normal_count,
        high_curvature_count=high_curv_count,
        invalid_count=invalid_count,
    )
