# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels: slice clustering and grid normal estimation.

Mirror of slicenormals._kernels_py with identical arithmetic (same operations
in the same order) so both backends produce bit-identical output.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport sqrt

cnp.import_array()

BACKEND_NAME = "compiled"

# squared relative cross-product floor; keep equal to the numpy backend's
cdef double DEGENERATE_REL_SQ = 1e-24

ctypedef cnp.int64_t i64


def encode_lines(const double[:, ::1] points, double cos_threshold):
    """Run lengths of consecutive line segments within the angle threshold."""
    cdef Py_ssize_t n = points.shape[0]
    if n < 2:
        raise ValueError("encode_lines kernel needs at least 2 points")
    cdef Py_ssize_t nlines = n - 1
    comp_arr = np.empty(nlines, dtype=np.int64)
    cdef i64[::1] comp = comp_arr
    cdef Py_ssize_t ncomp = _encode_comp(points, cos_threshold, comp)
    strengths_arr = np.zeros(ncomp, dtype=np.int64)
    cdef i64[::1] strengths = strengths_arr
    cdef Py_ssize_t j
    for j in range(nlines):
        strengths[comp[j]] += 1
    return strengths_arr


cdef Py_ssize_t _encode_comp(const double[:, ::1] pts, double cos_threshold,
                             i64[::1] comp) noexcept nogil:
    """Component id per line segment; returns the component count."""
    cdef Py_ssize_t nlines = pts.shape[0] - 1
    cdef Py_ssize_t j
    cdef i64 cid = 0
    cdef double vpx, vpy, vpz, vnx, vny, vnz, dot, norm_prev, norm_next
    vpx = pts[1, 0] - pts[0, 0]
    vpy = pts[1, 1] - pts[0, 1]
    vpz = pts[1, 2] - pts[0, 2]
    norm_prev = sqrt(vpx * vpx + vpy * vpy + vpz * vpz)
    comp[0] = 0
    for j in range(1, nlines):
        vnx = pts[j + 1, 0] - pts[j, 0]
        vny = pts[j + 1, 1] - pts[j, 1]
        vnz = pts[j + 1, 2] - pts[j, 2]
        dot = vpx * vnx + vpy * vny + vpz * vnz
        norm_next = sqrt(vnx * vnx + vny * vny + vnz * vnz)
        # angle > threshold  <=>  cos(angle) < cos(threshold)
        if dot < cos_threshold * (norm_prev * norm_next):
            cid += 1
        comp[j] = cid
        vpx = vnx
        vpy = vny
        vpz = vnz
        norm_prev = norm_next
    return cid + 1


def expand_labels(const double[:, ::1] points, const i64[::1] strengths):
    """Expand per-line component strengths onto the points."""
    cdef Py_ssize_t ncomp = strengths.shape[0]
    cdef Py_ssize_t n = 0
    cdef Py_ssize_t l
    for l in range(ncomp):
        n += strengths[l]
    n += 1
    labels_arr = np.empty(n, dtype=np.int64)
    cdef i64[::1] labels = labels_arr
    _expand_into(points, strengths, labels)
    return labels_arr


cdef void _expand_into(const double[:, ::1] pts, const i64[::1] strengths,
                       i64[::1] labels) noexcept nogil:
    cdef Py_ssize_t ncomp = strengths.shape[0]
    cdef Py_ssize_t l, j, pos, i_d, a, b, p
    cdef i64 s, s_prev
    cdef double dnx, dny, dnz, dpx, dpy, dpz, d2_next, d2_prev
    labels[0] = 0
    pos = 1
    s_prev = 1
    for l in range(ncomp):
        s = strengths[l]
        i_d = pos - 1
        if s > 1:
            if s_prev == 1:
                labels[i_d] = l
            else:
                a = i_d
                b = i_d + 1
                p = i_d - 1
                dnx = pts[a, 0] - pts[b, 0]
                dny = pts[a, 1] - pts[b, 1]
                dnz = pts[a, 2] - pts[b, 2]
                dpx = pts[a, 0] - pts[p, 0]
                dpy = pts[a, 1] - pts[p, 1]
                dpz = pts[a, 2] - pts[p, 2]
                d2_next = dnx * dnx + dny * dny + dnz * dnz
                d2_prev = dpx * dpx + dpy * dpy + dpz * dpz
                if d2_next < d2_prev:
                    labels[i_d] = l
        for j in range(pos, pos + s):
            labels[j] = l
        pos += s
        s_prev = s
    return


cdef void _label_column(const double[:, :, ::1] P, const unsigned char[:, ::1] V,
                        Py_ssize_t c, double cos_threshold,
                        i64[::1] kept, i64[::1] comp, i64[::1] strengths,
                        i64[::1] klab, i64[::1] labrow) noexcept nogil:
    """Per-point labels for column c, written to labrow[row] for valid rows.

    Exact consecutive duplicates are merged for clustering and inherit the
    label of their kept twin.
    """
    cdef Py_ssize_t rows = V.shape[0]
    cdef Py_ssize_t r, i, j, m, nlines, ncomp, ki, pos, i_d, a, b, p
    cdef i64 s, s_prev, cid
    cdef double vpx, vpy, vpz, vnx, vny, vnz, dot, norm_prev, norm_next
    cdef double dnx, dny, dnz, dpx, dpy, dpz, d2_next, d2_prev
    # gather distinct valid rows (exact consecutive duplicates merged)
    m = 0
    for r in range(rows):
        if V[r, c]:
            if m == 0 or (
                P[r, c, 0] != P[kept[m - 1], c, 0]
                or P[r, c, 1] != P[kept[m - 1], c, 1]
                or P[r, c, 2] != P[kept[m - 1], c, 2]
            ):
                kept[m] = r
                m += 1
    if m == 0:
        return
    if m == 1:
        for r in range(rows):
            if V[r, c]:
                labrow[r] = 0
        return
    # component id per line over the kept points
    nlines = m - 1
    cid = 0
    vpx = P[kept[1], c, 0] - P[kept[0], c, 0]
    vpy = P[kept[1], c, 1] - P[kept[0], c, 1]
    vpz = P[kept[1], c, 2] - P[kept[0], c, 2]
    norm_prev = sqrt(vpx * vpx + vpy * vpy + vpz * vpz)
    comp[0] = 0
    for j in range(1, nlines):
        vnx = P[kept[j + 1], c, 0] - P[kept[j], c, 0]
        vny = P[kept[j + 1], c, 1] - P[kept[j], c, 1]
        vnz = P[kept[j + 1], c, 2] - P[kept[j], c, 2]
        dot = vpx * vnx + vpy * vny + vpz * vnz
        norm_next = sqrt(vnx * vnx + vny * vny + vnz * vnz)
        if dot < cos_threshold * (norm_prev * norm_next):
            cid += 1
        comp[j] = cid
        vpx = vnx
        vpy = vny
        vpz = vnz
        norm_prev = norm_next
    ncomp = cid + 1
    for j in range(ncomp):
        strengths[j] = 0
    for j in range(nlines):
        strengths[comp[j]] += 1
    # expand onto kept points
    klab[0] = 0
    pos = 1
    s_prev = 1
    for j in range(ncomp):
        s = strengths[j]
        i_d = pos - 1
        if s > 1:
            if s_prev == 1:
                klab[i_d] = j
            else:
                a = kept[i_d]
                b = kept[i_d + 1]
                p = kept[i_d - 1]
                dnx = P[a, c, 0] - P[b, c, 0]
                dny = P[a, c, 1] - P[b, c, 1]
                dnz = P[a, c, 2] - P[b, c, 2]
                dpx = P[a, c, 0] - P[p, c, 0]
                dpy = P[a, c, 1] - P[p, c, 1]
                dpz = P[a, c, 2] - P[p, c, 2]
                d2_next = dnx * dnx + dny * dny + dnz * dnz
                d2_prev = dpx * dpx + dpy * dpy + dpz * dpz
                if d2_next < d2_prev:
                    klab[i_d] = j
        for i in range(pos, pos + s):
            klab[i] = j
        pos += s
        s_prev = s
    # duplicates inherit the label of their kept twin
    ki = 0
    for r in range(rows):
        if V[r, c]:
            if ki + 1 < m and kept[ki + 1] == r:
                ki += 1
            labrow[r] = klab[ki]
    return


def label_slice(points, double cos_threshold):
    """Per-point component labels for one slice, 0-based."""
    pts = np.ascontiguousarray(points, dtype=np.float64)
    cdef Py_ssize_t n = pts.shape[0]
    labels_arr = np.zeros(n, dtype=np.int64)
    if n == 0:
        return labels_arr
    cdef const double[:, :, ::1] P = pts.reshape(n, 1, 3)
    ones_arr = np.ones((n, 1), dtype=np.uint8)
    cdef const unsigned char[:, ::1] V = ones_arr
    scratch = np.empty((4, n), dtype=np.int64)
    cdef i64[:, ::1] sc = scratch
    cdef i64[::1] labels = labels_arr
    _label_column(P, V, 0, cos_threshold, sc[0], sc[1], sc[2], sc[3], labels)
    return labels_arr


def column_labels(const double[:, :, ::1] points, const unsigned char[:, ::1] valid,
                  double cos_threshold):
    """Component labels for every valid cell, clustered per column; -1 elsewhere."""
    cdef Py_ssize_t rows = valid.shape[0]
    cdef Py_ssize_t cols = valid.shape[1]
    label_arr = np.full((rows, cols), -1, dtype=np.int64)
    cdef i64[:, ::1] lab = label_arr
    _fill_labels(points, valid, cos_threshold, lab)
    return label_arr


cdef void _fill_labels(const double[:, :, ::1] P, const unsigned char[:, ::1] V,
                       double cos_threshold, i64[:, ::1] lab):
    cdef Py_ssize_t rows = V.shape[0]
    cdef Py_ssize_t cols = V.shape[1]
    cdef Py_ssize_t r, c
    scratch = np.empty((5, rows), dtype=np.int64)
    cdef i64[:, ::1] sc = scratch
    cdef i64[::1] kept = sc[0]
    cdef i64[::1] comp = sc[1]
    cdef i64[::1] strengths = sc[2]
    cdef i64[::1] klab = sc[3]
    cdef i64[::1] labrow = sc[4]
    with nogil:
        for c in range(cols):
            _label_column(P, V, c, cos_threshold, kept, comp, strengths, klab, labrow)
            for r in range(rows):
                if V[r, c]:
                    lab[r, c] = labrow[r]
    return


cdef inline void _cell_normal(const double[:, :, ::1] P, const unsigned char[:, ::1] V,
                              Py_ssize_t r, Py_ssize_t c,
                              bint use_up, bint use_down,
                              unsigned char[:, ::1] status, double[:, :, ::1] N) noexcept nogil:
    """Cross-product normal at one cell from the selected vertical neighbors
    and the (possibly substituted) horizontal ones."""
    cdef Py_ssize_t cols = V.shape[1]
    cdef Py_ssize_t cl, cr
    cdef double px, py, pz, lx, ly, lz, rx, ry, rz, tx, ty, tz, bx, by, bz
    cdef double hx, hy, hz, vx, vy, vz, nx, ny, nz, n2, h2, v2, norm
    px = P[r, c, 0]
    py = P[r, c, 1]
    pz = P[r, c, 2]
    # horizontal neighbors wrap around the full revolution
    cl = c - 1 if c > 0 else cols - 1
    cr = c + 1 if c < cols - 1 else 0
    if V[r, cl]:
        lx = P[r, cl, 0]
        ly = P[r, cl, 1]
        lz = P[r, cl, 2]
    else:
        lx = px
        ly = py
        lz = pz
    if V[r, cr]:
        rx = P[r, cr, 0]
        ry = P[r, cr, 1]
        rz = P[r, cr, 2]
    else:
        rx = px
        ry = py
        rz = pz
    hx = rx - lx
    hy = ry - ly
    hz = rz - lz
    if use_up:
        tx = P[r + 1, c, 0]
        ty = P[r + 1, c, 1]
        tz = P[r + 1, c, 2]
    else:
        tx = px
        ty = py
        tz = pz
    if use_down:
        bx = P[r - 1, c, 0]
        by = P[r - 1, c, 1]
        bz = P[r - 1, c, 2]
    else:
        bx = px
        by = py
        bz = pz
    vx = tx - bx
    vy = ty - by
    vz = tz - bz
    nx = hy * vz - hz * vy
    ny = hz * vx - hx * vz
    nz = hx * vy - hy * vx
    n2 = nx * nx + ny * ny + nz * nz
    h2 = hx * hx + hy * hy + hz * hz
    v2 = vx * vx + vy * vy + vz * vz
    if n2 <= DEGENERATE_REL_SQ * (h2 * v2):
        return
    norm = sqrt(n2)
    nx = nx / norm
    ny = ny / norm
    nz = nz / norm
    if nx * px + ny * py + nz * pz > 0.0:
        nx = -nx
        ny = -ny
        nz = -nz
    status[r, c] = 1
    N[r, c, 0] = nx
    N[r, c, 1] = ny
    N[r, c, 2] = nz
    return


def normals_baseline(const double[:, :, ::1] points, const unsigned char[:, ::1] valid):
    """Cross-product normals from the four grid neighbors."""
    cdef Py_ssize_t rows = valid.shape[0]
    cdef Py_ssize_t cols = valid.shape[1]
    status_arr = np.zeros((rows, cols), dtype=np.uint8)
    normals_arr = np.zeros((rows, cols, 3), dtype=np.float64)
    cdef unsigned char[:, ::1] status = status_arr
    cdef double[:, :, ::1] N = normals_arr
    cdef Py_ssize_t r, c
    cdef bint use_up, use_down
    with nogil:
        for r in range(rows):
            for c in range(cols):
                if not valid[r, c]:
                    continue
                use_up = r + 1 < rows and valid[r + 1, c]
                use_down = r - 1 >= 0 and valid[r - 1, c]
                _cell_normal(points, valid, r, c, use_up, use_down, status, N)
    return status_arr, normals_arr


def normals_labeled(const double[:, :, ::1] points, const unsigned char[:, ::1] valid,
                    double cos_threshold):
    """Cross-product normals restricted to same-component vertical neighbors.

    One pass per column: label the column, then estimate its cells; vertical
    neighbor admissibility only ever consults the current column's labels.
    """
    cdef Py_ssize_t rows = valid.shape[0]
    cdef Py_ssize_t cols = valid.shape[1]
    status_arr = np.zeros((rows, cols), dtype=np.uint8)
    normals_arr = np.zeros((rows, cols, 3), dtype=np.float64)
    cdef unsigned char[:, ::1] status = status_arr
    cdef double[:, :, ::1] N = normals_arr
    scratch = np.empty((5, rows), dtype=np.int64)
    cdef i64[:, ::1] sc = scratch
    cdef i64[::1] kept = sc[0]
    cdef i64[::1] comp = sc[1]
    cdef i64[::1] strengths = sc[2]
    cdef i64[::1] klab = sc[3]
    cdef i64[::1] labrow = sc[4]
    cdef Py_ssize_t r, c
    cdef bint up_v, down_v, use_up, use_down
    cdef i64 own
    with nogil:
        for c in range(cols):
            _label_column(points, valid, c, cos_threshold, kept, comp, strengths,
                          klab, labrow)
            for r in range(rows):
                if not valid[r, c]:
                    continue
                up_v = r + 1 < rows and valid[r + 1, c]
                down_v = r - 1 >= 0 and valid[r - 1, c]
                own = labrow[r]
                use_up = up_v and labrow[r + 1] == own
                use_down = down_v and labrow[r - 1] == own
                if up_v and down_v and not use_up and not use_down:
                    status[r, c] = 2
                    continue
                _cell_normal(points, valid, r, c, use_up, use_down, status, N)
    return status_arr, normals_arr
