"""Pure numpy kernels: slice clustering and grid normal estimation.

This is the fallback backend; slicenormals._kernels_cy implements the same
functions in Cython. Both are written with identical arithmetic expressions
(same operations in the same order, squared-distance and cosine comparisons
instead of sqrt/arccos where a threshold test suffices) so their outputs are
bit-for-bit interchangeable.

Status codes match scan.NormalStatus: 0 invalid, 1 normal, 2 high curvature.
"""

from __future__ import annotations

import numpy as np

BACKEND_NAME = "python"

# Cross products with sin(angle) below ~1e-12 determine no plane; treat as
# degenerate. Compared in squared form against |h|^2 |v|^2.
DEGENERATE_REL_SQ = 1e-24


def encode_lines(points: np.ndarray, cos_threshold: float) -> np.ndarray:
    """Run lengths of consecutive line segments whose direction change stays
    within the angle threshold.

    points: (n, 3) float64 with n >= 2 and no coincident consecutive points.
    Returns int64 strengths; their sum is n - 1.
    """
    v = points[1:] - points[:-1]
    vx, vy, vz = v[:, 0], v[:, 1], v[:, 2]
    norm = np.sqrt(vx * vx + vy * vy + vz * vz)
    dot = vx[:-1] * vx[1:] + vy[:-1] * vy[1:] + vz[:-1] * vz[1:]
    # angle > threshold  <=>  cos(angle) < cos(threshold)
    brk = dot < cos_threshold * (norm[:-1] * norm[1:])
    comp = np.empty(v.shape[0], dtype=np.int64)
    comp[0] = 0
    np.cumsum(brk, out=comp[1:])
    return np.bincount(comp).astype(np.int64)


def expand_labels(points: np.ndarray, strengths: np.ndarray) -> np.ndarray:
    """Expand per-line component strengths onto the points.

    Walks components in order; the point disputed between two components
    joins a strong (strength > 1) successor when the predecessor is weak,
    or when it is strictly closer to its next neighbor than its previous
    one if both components are strong.
    """
    n = int(np.sum(strengths)) + 1
    labels = np.empty(n, dtype=np.int64)
    labels[0] = 0
    pos = 1
    s_prev = 1
    for comp_label, s in enumerate(strengths):
        s = int(s)
        i_d = pos - 1
        if s > 1:
            if s_prev == 1:
                labels[i_d] = comp_label
            else:
                dn = points[i_d] - points[i_d + 1]
                dp = points[i_d] - points[i_d - 1]
                d2_next = dn[0] * dn[0] + dn[1] * dn[1] + dn[2] * dn[2]
                d2_prev = dp[0] * dp[0] + dp[1] * dp[1] + dp[2] * dp[2]
                if d2_next < d2_prev:
                    labels[i_d] = comp_label
        labels[pos : pos + s] = comp_label
        pos += s
        s_prev = s
    return labels


def label_slice(points: np.ndarray, cos_threshold: float) -> np.ndarray:
    """Per-point component labels for one slice, 0-based.

    Coincident consecutive points are merged before clustering; each
    duplicate inherits the label of its kept twin. Slices with fewer than
    two distinct points get all-zero labels.
    """
    n = points.shape[0]
    if n == 0:
        return np.zeros(0, dtype=np.int64)
    keep = np.empty(n, dtype=bool)
    keep[0] = True
    keep[1:] = np.any(points[1:] != points[:-1], axis=1)
    kept = points[keep]
    if kept.shape[0] == 1:
        return np.zeros(n, dtype=np.int64)
    strengths = encode_lines(kept, cos_threshold)
    kept_labels = expand_labels(kept, strengths)
    return kept_labels[np.cumsum(keep) - 1]


def _as_bool_mask(valid: np.ndarray) -> np.ndarray:
    # kernels accept bool or uint8 masks; boolean indexing needs bool
    valid = np.ascontiguousarray(valid)
    return valid if valid.dtype == bool else valid.view(bool)


def column_labels(points: np.ndarray, valid: np.ndarray, cos_threshold: float) -> np.ndarray:
    """Component labels for every valid cell, clustered per column.

    Labels are only meaningful for comparisons within a column; invalid
    cells carry -1. Semantics per column are exactly label_slice, evaluated
    for all columns at once.
    """
    valid = _as_bool_mask(valid)
    rows, cols = valid.shape
    label_grid = np.full((rows, cols), -1, dtype=np.int64)
    cidx, ridx = np.nonzero(valid.T)  # column-major order: by column, then row
    if cidx.size == 0:
        return label_grid
    pts = points[ridx, cidx]

    # merge exact consecutive duplicates within a column
    keep = np.empty(cidx.size, dtype=bool)
    keep[0] = True
    keep[1:] = ~((cidx[1:] == cidx[:-1]) & np.all(pts[1:] == pts[:-1], axis=1))
    kpts = pts[keep]
    kcols = cidx[keep]
    total = kpts.shape[0]

    if total == 1:
        kept_labels = np.zeros(1, dtype=np.int64)
    else:
        v = kpts[1:] - kpts[:-1]
        vx, vy, vz = v[:, 0], v[:, 1], v[:, 2]
        line_ok = kcols[1:] == kcols[:-1]
        norm = np.sqrt(vx * vx + vy * vy + vz * vz)
        dot = vx[:-1] * vx[1:] + vy[:-1] * vy[1:] + vz[:-1] * vz[1:]
        brk = dot < cos_threshold * (norm[:-1] * norm[1:])
        pair_ok = line_ok[:-1] & line_ok[1:]

        # a line continues the previous component unless separated by a break
        cont = np.zeros(total - 1, dtype=bool)
        cont[1:] = pair_ok & ~brk
        new_comp = line_ok & ~cont
        comp = np.cumsum(new_comp) - 1
        ncomp = int(new_comp.sum())
        strengths = np.bincount(comp[line_ok], minlength=max(ncomp, 1))

        kept_labels = np.empty(total, dtype=np.int64)
        start = np.ones(total, dtype=bool)
        start[1:] = ~line_ok  # no incoming line
        not_start = np.nonzero(~start)[0]
        kept_labels[not_start] = comp[not_start - 1]
        sidx = np.nonzero(start)[0]
        has_out = np.zeros(total, dtype=bool)
        has_out[:-1] = line_ok
        fresh = ncomp + np.arange(total, dtype=np.int64)  # isolated points
        kept_labels[sidx] = np.where(
            has_out[sidx], comp[np.minimum(sidx, total - 2)], fresh[sidx]
        )

        # disputed points on component boundaries within a column
        boundary = np.nonzero(pair_ok & brk)[0] + 1
        if boundary.size:
            s_new = strengths[comp[boundary]]
            s_prev = strengths[comp[boundary - 1]]
            dn = kpts[boundary] - kpts[boundary + 1]
            dp = kpts[boundary] - kpts[boundary - 1]
            d2_next = dn[:, 0] * dn[:, 0] + dn[:, 1] * dn[:, 1] + dn[:, 2] * dn[:, 2]
            d2_prev = dp[:, 0] * dp[:, 0] + dp[:, 1] * dp[:, 1] + dp[:, 2] * dp[:, 2]
            relabel = (s_new > 1) & ((s_prev == 1) | (d2_next < d2_prev))
            target = boundary[relabel]
            kept_labels[target] = comp[target]

    labels_all = kept_labels[np.cumsum(keep) - 1]  # duplicates inherit twin label
    label_grid[ridx, cidx] = labels_all
    return label_grid


# Column blocks keep every temporary a few tens of KB: resident in L2 and
# served from the malloc arena instead of mmap, whose per-call page faults
# otherwise dominate on large grids.
BLOCK_CELLS = 4096


def _grid_normals_block(points, valid, label_blk, c0, c1, status_out, normals_out):
    """Normals for columns [c0, c1); reads a one-column halo on each side."""
    rows, cols = valid.shape
    idx = np.arange(c0 - 1, c1 + 1) % cols
    p3 = points[:, idx]
    v3 = valid[:, idx]
    p = p3[:, 1:-1]
    v = v3[:, 1:-1]
    px, py, pz = p[..., 0], p[..., 1], p[..., 2]

    # horizontal neighbors (wrap handled by the halo gather)
    left_v = v3[:, :-2]
    right_v = v3[:, 2:]
    left_p = p3[:, :-2]
    right_p = p3[:, 2:]
    lx = np.where(left_v, left_p[..., 0], px)
    ly = np.where(left_v, left_p[..., 1], py)
    lz = np.where(left_v, left_p[..., 2], pz)
    rx = np.where(right_v, right_p[..., 0], px)
    ry = np.where(right_v, right_p[..., 1], py)
    rz = np.where(right_v, right_p[..., 2], pz)
    hx = rx - lx
    hy = ry - ly
    hz = rz - lz

    # vertical neighbors do not wrap
    width = c1 - c0
    up_v = np.zeros((rows, width), dtype=bool)
    up_v[:-1] = v[1:]
    down_v = np.zeros((rows, width), dtype=bool)
    down_v[1:] = v[:-1]
    up_p = np.zeros((rows, width, 3))
    up_p[:-1] = p[1:]
    down_p = np.zeros((rows, width, 3))
    down_p[1:] = p[:-1]

    high_curv = np.zeros((rows, width), dtype=bool)
    if label_blk is None:
        use_up = up_v
        use_down = down_v
    else:
        up_lab = np.full((rows, width), -2, dtype=np.int64)
        up_lab[:-1] = label_blk[1:]
        down_lab = np.full((rows, width), -2, dtype=np.int64)
        down_lab[1:] = label_blk[:-1]
        use_up = up_v & (up_lab == label_blk)
        use_down = down_v & (down_lab == label_blk)
        high_curv = v & up_v & down_v & ~use_up & ~use_down

    tx = np.where(use_up, up_p[..., 0], px)
    ty = np.where(use_up, up_p[..., 1], py)
    tz = np.where(use_up, up_p[..., 2], pz)
    bx = np.where(use_down, down_p[..., 0], px)
    by = np.where(use_down, down_p[..., 1], py)
    bz = np.where(use_down, down_p[..., 2], pz)
    vx = tx - bx
    vy = ty - by
    vz = tz - bz

    nx = hy * vz - hz * vy
    ny = hz * vx - hx * vz
    nz = hx * vy - hy * vx
    n2 = nx * nx + ny * ny + nz * nz
    h2 = hx * hx + hy * hy + hz * hz
    v2 = vx * vx + vy * vy + vz * vz
    degenerate = n2 <= DEGENERATE_REL_SQ * (h2 * v2)

    ok = v & ~high_curv & ~degenerate
    status = status_out[:, c0:c1]
    status[ok] = 1
    status[high_curv] = 2

    norm = np.sqrt(n2)
    with np.errstate(divide="ignore", invalid="ignore"):
        ux = nx / norm
        uy = ny / norm
        uz = nz / norm
    flip = ux * px + uy * py + uz * pz > 0.0
    sign = np.where(flip, -1.0, 1.0)
    out = normals_out[:, c0:c1]
    out[..., 0] = np.where(ok, sign * ux, 0.0)
    out[..., 1] = np.where(ok, sign * uy, 0.0)
    out[..., 2] = np.where(ok, sign * uz, 0.0)


def _grid_normals(points, valid, cos_threshold):
    valid = _as_bool_mask(valid)
    points = np.ascontiguousarray(points, dtype=np.float64)
    rows, cols = valid.shape
    status = np.zeros((rows, cols), dtype=np.uint8)
    normals = np.zeros((rows, cols, 3), dtype=np.float64)
    block = max(1, BLOCK_CELLS // rows)
    for c0 in range(0, cols, block):
        c1 = min(c0 + block, cols)
        if cos_threshold is None:
            label_blk = None
        else:
            label_blk = column_labels(points[:, c0:c1], valid[:, c0:c1], cos_threshold)
        _grid_normals_block(points, valid, label_blk, c0, c1, status, normals)
    return status, normals


def normals_baseline(points: np.ndarray, valid: np.ndarray):
    """Cross-product normals from the four grid neighbors, with single-missing
    neighbors substituted by the point itself."""
    return _grid_normals(points, valid, None)


def normals_labeled(points: np.ndarray, valid: np.ndarray, cos_threshold: float):
    """Cross-product normals restricted to same-component vertical neighbors."""
    return _grid_normals(points, valid, cos_threshold)
