"""The compiled and numpy kernels must be interchangeable bit-for-bit."""

import math

import numpy as np
import pytest

from slicenormals import backend
from conftest import make_random_planar_scan, make_random_slice

needs_compiled = pytest.mark.skipif(
    "compiled" not in backend.available_backends(),
    reason="compiled extension not built",
)

COS_30 = math.cos(math.radians(30.0))


@needs_compiled
class TestKernelParity:
    def test_encode_lines(self, rng):
        kc = backend.get_kernels("compiled")
        kp = backend.get_kernels("python")
        for _ in range(200):
            slc = make_random_slice(rng)
            cos_thr = math.cos(float(rng.uniform(0.05, 3.0)))
            assert np.array_equal(
                kc.encode_lines(slc.points, cos_thr), kp.encode_lines(slc.points, cos_thr)
            )

    def test_expand_labels(self, rng):
        kc = backend.get_kernels("compiled")
        kp = backend.get_kernels("python")
        for _ in range(200):
            slc = make_random_slice(rng)
            strengths = kp.encode_lines(slc.points, COS_30)
            assert np.array_equal(
                kc.expand_labels(slc.points, strengths),
                kp.expand_labels(slc.points, strengths),
            )

    def test_label_slice_with_duplicates(self, rng):
        kc = backend.get_kernels("compiled")
        kp = backend.get_kernels("python")
        for _ in range(100):
            slc = make_random_slice(rng)
            pts = slc.points.copy()
            # inject exact duplicates
            for _ in range(int(rng.integers(0, 4))):
                i = int(rng.integers(1, len(pts)))
                pts[i] = pts[i - 1]
            assert np.array_equal(
                kc.label_slice(pts, COS_30), kp.label_slice(pts, COS_30)
            )

    def test_grid_normals(self, rng):
        kc = backend.get_kernels("compiled")
        kp = backend.get_kernels("python")
        from slicenormals import make_corner_scene, rig_preset, simulate

        scans = [make_random_planar_scan(rng)[0] for _ in range(3)]
        scans.append(
            simulate(
                rig_preset("vlp16", range_noise_sigma=0.02, noise_seed=5),
                make_corner_scene(5.0),
            )[0]
        )
        for scan in scans:
            v = scan.valid.view(np.uint8)
            sb_c, nb_c = kc.normals_baseline(scan.points, v)
            sb_p, nb_p = kp.normals_baseline(scan.points, v)
            assert np.array_equal(sb_c, sb_p)
            assert np.array_equal(nb_c, nb_p)
            sl_c, nl_c = kc.normals_labeled(scan.points, v, COS_30)
            sl_p, nl_p = kp.normals_labeled(scan.points, v, COS_30)
            assert np.array_equal(sl_c, sl_p)
            assert np.array_equal(nl_c, nl_p)

    def test_column_labels_same_partitions(self, rng):
        # label values may differ between backends; the grouping may not
        kc = backend.get_kernels("compiled")
        kp = backend.get_kernels("python")
        scan, _ = make_random_planar_scan(rng)
        lc = kc.column_labels(scan.points, scan.valid.view(np.uint8), COS_30)
        lp = kp.column_labels(scan.points, scan.valid.view(np.uint8), COS_30)
        for c in range(scan.cols):
            rows = np.nonzero(scan.valid[:, c])[0]
            a = lc[rows, c]
            b = lp[rows, c]
            assert np.array_equal(a[1:] == a[:-1], b[1:] == b[:-1])


@needs_compiled
class TestBackendSelection:
    def test_switching(self):
        original = backend.active_backend()
        try:
            backend.use_backend("python")
            assert backend.active_backend() == "python"
            backend.use_backend("compiled")
            assert backend.active_backend() == "compiled"
        finally:
            backend.use_backend(original)

    def test_unknown_backend(self):
        with pytest.raises(ValueError):
            backend.use_backend("gpu")
        with pytest.raises(ValueError):
            backend.get_kernels("gpu")

    def test_public_ops_identical_across_backends(self, rng):
        from slicenormals import ClusteringParams, normals_labeled

        scan, _ = make_random_planar_scan(rng)
        params = ClusteringParams()
        original = backend.active_backend()
        try:
            backend.use_backend("compiled")
            f_c = normals_labeled(scan, params)
            backend.use_backend("python")
            f_p = normals_labeled(scan, params)
        finally:
            backend.use_backend(original)
        assert np.array_equal(f_c.status, f_p.status)
        assert np.array_equal(f_c.normals, f_p.normals)
