"""Command-line interface: gen, normals, slice, eval, bench."""

from __future__ import annotations

import argparse
import sys


from . import backend
from .bench import run_benchmark
from .clustering import ClusteringParams, label_points
from .evaluate import evaluate
from .io import OsfParseError, export_ply, read_scan, write_scan
from .normals import normals_baseline, normals_labeled, slice_normals_2d
from .scan import NormalStatus, extract_slice
from .simulate import (
    SCENE_BUILDERS,
    read_ground_truth,
    rig_preset,
    simulate,
    write_ground_truth,
)

_STATUS_NAMES = {
    int(NormalStatus.INVALID): "invalid",
    int(NormalStatus.NORMAL): "normal",
    int(NormalStatus.HIGH_CURVATURE): "high_curvature",
}


def _add_alpha_flag(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--alpha-threshold-deg",
        type=float,
        default=30.0,
        help="orientation-change cutoff for slice clustering (degrees, default 30)",
    )


def _params(args) -> ClusteringParams:
    return ClusteringParams.from_degrees(args.alpha_threshold_deg)


def _load_scan(path: str):
    try:
        return read_scan(path)
    except FileNotFoundError:
        raise SystemExit(f"error: scan file not found: {path}")
    except OsfParseError as exc:
        raise SystemExit(f"error: cannot parse {path}: {exc}")


def cmd_gen(args) -> int:
    scene = SCENE_BUILDERS[args.scene](args.wall_distance)
    rig = rig_preset(
        args.preset, range_noise_sigma=args.noise_sigma, noise_seed=args.seed
    )
    scan, gt = simulate(rig, scene)
    write_scan(scan, args.out)
    print(f"wrote {scan.rows}x{scan.cols} scan ({int(scan.valid.sum())} returns) to {args.out}")
    if args.gt_out:
        write_ground_truth(gt, args.gt_out)
        print(f"wrote ground truth to {args.gt_out}")
    return 0


def cmd_normals(args) -> int:
    scan = _load_scan(args.scan)
    if args.method == "baseline":
        field = normals_baseline(scan)
    else:
        field = normals_labeled(scan, _params(args))
    if args.ply:
        export_ply(scan, field, args.ply)
        print(f"wrote PLY with {field.count(NormalStatus.NORMAL)} vertices to {args.ply}")
    if args.csv:
        with open(args.csv, "w") as fh:
            fh.write("row,col,status,nx,ny,nz\n")
            for r in range(scan.rows):
                for c in range(scan.cols):
                    status = _STATUS_NAMES[int(field.status[r, c])]
                    if field.status[r, c] == NormalStatus.NORMAL:
                        n = field.normals[r, c]
                        fh.write(
                            f"{r},{c},{status},"
                            f"{float(n[0])!r},{float(n[1])!r},{float(n[2])!r}\n"
                        )
                    else:
                        fh.write(f"{r},{c},{status},,,\n")
        print(f"wrote per-cell normals to {args.csv}")
    if not args.ply and not args.csv:
        print(
            f"method={args.method} normal={field.count(NormalStatus.NORMAL)} "
            f"high_curvature={field.count(NormalStatus.HIGH_CURVATURE)} "
            f"invalid={field.count(NormalStatus.INVALID)}"
        )
    return 0


def cmd_slice(args) -> int:
    scan = _load_scan(args.scan)
    if not 0 <= args.column < scan.cols:
        raise SystemExit(
            f"error: column {args.column} out of range for scan with {scan.cols} columns"
        )
    slc = extract_slice(scan, args.column)
    params = _params(args)
    labels = label_points(slc, params)
    norms = slice_normals_2d(slc, params)
    lines = ["row,x,y,z,label,nx,ny,nz,has_normal"]
    for i in range(len(slc)):
        p = slc.points[i]
        _, n = norms[i]
        if n is None:
            tail = ",,,0"
        else:
            tail = f"{float(n[0])!r},{float(n[1])!r},{float(n[2])!r},1"
        lines.append(
            f"{int(slc.rows[i])},{float(p[0])!r},{float(p[1])!r},{float(p[2])!r},"
            f"{int(labels[i])},{tail}"
        )
    text = "\n".join(lines) + "\n"
    if args.csv:
        with open(args.csv, "w") as fh:
            fh.write(text)
        print(f"wrote {len(slc)} slice points to {args.csv}")
    else:
        sys.stdout.write(text)
    return 0


def cmd_eval(args) -> int:
    scan = _load_scan(args.scan)
    gt = read_ground_truth(args.gt, scan.rows, scan.cols)
    params = _params(args)
    reports = {
        "baseline": evaluate(normals_baseline(scan), gt),
        "labeled": evaluate(normals_labeled(scan, params), gt),
    }

    def fmt(v):
        return "" if v is None else f"{v:.6f}"

    for method, rep in reports.items():
        print(f"{method}.mean_deg={fmt(rep.mean_deg)}")
        print(f"{method}.median_deg={fmt(rep.median_deg)}")
        print(f"{method}.p95_deg={fmt(rep.p95_deg)}")
        print(f"{method}.edge_mean_deg={fmt(rep.edge_mean_deg)}")
        print(f"{method}.coverage={rep.coverage:.6f}")
        print(f"{method}.high_curvature={rep.high_curvature_count}")
        print(f"{method}.invalid={rep.invalid_count}")
    if args.csv:
        with open(args.csv, "w") as fh:
            fh.write(
                "method,mean_deg,median_deg,p95_deg,edge_mean_deg,"
                "coverage,high_curvature,invalid\n"
            )
            for method, rep in reports.items():
                fh.write(
                    f"{method},{fmt(rep.mean_deg)},{fmt(rep.median_deg)},"
                    f"{fmt(rep.p95_deg)},{fmt(rep.edge_mean_deg)},"
                    f"{rep.coverage:.6f},{rep.high_curvature_count},{rep.invalid_count}\n"
                )
        print(f"wrote report to {args.csv}")
    return 0


def cmd_bench(args, parser: argparse.ArgumentParser) -> int:
    if args.repetitions < 10:
        parser.error("--repetitions must be at least 10")
    if args.backend == "both":
        backends = list(backend.available_backends())
    elif args.backend == "auto":
        backends = [backend.active_backend()]
    else:
        if args.backend not in backend.available_backends():
            parser.error(
                f"backend {args.backend!r} not available "
                f"(built backends: {', '.join(backend.available_backends())})"
            )
        backends = [args.backend]

    from .bench import bench_scan

    scan = bench_scan(args.preset, args.scene, args.wall_distance)
    params = _params(args)
    print(
        f"preset={args.preset} scene={args.scene} grid={scan.rows}x{scan.cols} "
        f"returns={int(scan.valid.sum())} repetitions={args.repetitions} warmup={args.warmup}"
    )
    for name in backends:
        results = run_benchmark(scan, params, args.repetitions, args.warmup, name)
        by_method = {r.method: r for r in results}
        for r in results:
            print(f"[{r.backend}] {r.method:<8} {r.mean_ms:9.4f} ms +- {r.std_ms:.4f} ms")
        ratio = by_method["labeled"].mean_ms / by_method["baseline"].mean_ms
        print(f"[{name}] labeled/baseline ratio = {ratio:.3f}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="slicenormals",
        description="Robust surface normals for sparse organized LiDAR scans",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_gen = sub.add_parser("gen", help="generate a synthetic scan and ground truth")
    p_gen.add_argument("--preset", choices=["vlp16", "os0-32"], default="vlp16")
    p_gen.add_argument("--scene", choices=sorted(SCENE_BUILDERS), default="corner")
    p_gen.add_argument("--wall-distance", type=float, default=5.0)
    p_gen.add_argument("--noise-sigma", type=float, default=0.0)
    p_gen.add_argument("--seed", type=int, default=0)
    p_gen.add_argument("--out", required=True, help="output scan file (OSF)")
    p_gen.add_argument("--gt-out", help="optional ground-truth CSV")

    p_norm = sub.add_parser("normals", help="estimate normals for a scan file")
    p_norm.add_argument("scan", help="input scan file (OSF)")
    p_norm.add_argument("--method", choices=["baseline", "labeled"], default="labeled")
    _add_alpha_flag(p_norm)
    p_norm.add_argument("--ply", help="output PLY colored by normals")
    p_norm.add_argument("--csv", help="output per-cell CSV")

    p_slice = sub.add_parser("slice", help="export labels and 2D normals of one column")
    p_slice.add_argument("scan", help="input scan file (OSF)")
    p_slice.add_argument("--column", type=int, required=True)
    _add_alpha_flag(p_slice)
    p_slice.add_argument("--csv", help="output CSV (stdout when omitted)")

    p_eval = sub.add_parser("eval", help="compare both methods against ground truth")
    p_eval.add_argument("scan", help="input scan file (OSF)")
    p_eval.add_argument("--gt", required=True, help="ground-truth CSV from gen")
    _add_alpha_flag(p_eval)
    p_eval.add_argument("--csv", help="optional report CSV")

    p_bench = sub.add_parser("bench", help="benchmark both methods")
    p_bench.add_argument("--preset", choices=["vlp16", "os0-32"], default="vlp16")
    p_bench.add_argument("--scene", choices=sorted(SCENE_BUILDERS), default="corner")
    p_bench.add_argument("--wall-distance", type=float, default=5.0)
    _add_alpha_flag(p_bench)
    p_bench.add_argument("--repetitions", type=int, default=100)
    p_bench.add_argument("--warmup", type=int, default=10)
    p_bench.add_argument(
        "--backend",
        choices=["auto", "both", "python", "compiled"],
        default="auto",
        help="kernel backend to time (default: the active one)",
    )
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "gen":
            return cmd_gen(args)
        if args.command == "normals":
            return cmd_normals(args)
        if args.command == "slice":
            return cmd_slice(args)
        if args.command == "eval":
            return cmd_eval(args)
        if args.command == "bench":
            return cmd_bench(args, parser)
    except SystemExit:
        raise
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 2


if __name__ == "__main__":
    sys.exit(main())
