"""Scan file I/O: the OSF text format and ASCII PLY export.

OSF layout: line 1 is the magic "OSF1", line 2 is "<rows> <cols>", followed
by rows*cols records in row-major order, one per line, "<valid:0|1> <x> <y>
<z>". Invalid cells carry exactly "0 0 0 0". Floats are written with
shortest round-trip formatting, so write -> read -> write is byte-stable.
"""

from __future__ import annotations

import math
import os
from typing import BinaryIO, Union

import numpy as np

from .scan import NormalField, NormalStatus, OrganizedScan

Source = Union[str, os.PathLike, BinaryIO, bytes]

MAGIC = b"OSF1"


class OsfParseError(ValueError):
    """Malformed OSF input; offset is the byte position of the problem."""

    def __init__(self, offset: int, message: str):
        super().__init__(f"byte {offset}: {message}")
        self.offset = offset


def _fmt(x: float) -> str:
    return repr(float(x))


def _read_bytes(source: Source) -> bytes:
    if isinstance(source, bytes):
        return source
    if isinstance(source, (str, os.PathLike)):
        with open(source, "rb") as fh:
            return fh.read()
    return source.read()


def write_scan(scan: OrganizedScan, sink: Union[str, os.PathLike, BinaryIO]) -> None:
    """Serialize a scan; output is deterministic for equal scans."""
    parts = [MAGIC.decode(), f"{scan.rows} {scan.cols}"]
    pts = scan.points
    valid = scan.valid
    for r in range(scan.rows):
        for c in range(scan.cols):
            if valid[r, c]:
                x, y, z = pts[r, c]
                parts.append(f"1 {_fmt(x)} {_fmt(y)} {_fmt(z)}")
            else:
                parts.append("0 0 0 0")
    data = ("\n".join(parts) + "\n").encode()
    if isinstance(sink, (str, os.PathLike)):
        with open(sink, "wb") as fh:
            fh.write(data)
    else:
        sink.write(data)


def read_scan(source: Source) -> OrganizedScan:
    """Parse an OSF stream; raises OsfParseError naming the byte offset."""
    data = _read_bytes(source)
    offset = 0
    lines = data.split(b"\n")

    def take(idx: int, what: str) -> bytes:
        nonlocal offset
        if idx >= len(lines) or (idx == len(lines) - 1 and lines[idx] == b""):
            raise OsfParseError(offset, f"truncated input, expected {what}")
        return lines[idx]

    magic = take(0, "magic header")
    if magic != MAGIC:
        raise OsfParseError(0, f"bad magic {magic[:16]!r}, expected {MAGIC!r}")
    offset += len(magic) + 1

    dims_line = take(1, "dimensions header")
    dims = dims_line.split()
    try:
        if len(dims) != 2:
            raise ValueError
        rows, cols = int(dims[0]), int(dims[1])
    except ValueError:
        raise OsfParseError(offset, f"bad dimensions line {dims_line!r}") from None
    if rows < 2 or cols < 1:
        raise OsfParseError(offset, f"dimensions {rows}x{cols} out of range (rows>=2, cols>=1)")
    offset += len(dims_line) + 1

    points = np.zeros((rows, cols, 3), dtype=np.float64)
    valid = np.zeros((rows, cols), dtype=bool)
    n_cells = rows * cols
    for i in range(n_cells):
        line = take(2 + i, f"point record {i} of {n_cells}")
        fields = line.split()
        if len(fields) != 4:
            raise OsfParseError(offset, f"record {i}: expected 4 fields, got {len(fields)}")
        r, c = divmod(i, cols)
        if fields[0] == b"0":
            if line != b"0 0 0 0":
                raise OsfParseError(offset, f"record {i}: invalid cell must be '0 0 0 0'")
        elif fields[0] == b"1":
            try:
                x, y, z = float(fields[1]), float(fields[2]), float(fields[3])
            except ValueError:
                raise OsfParseError(offset, f"record {i}: unparseable coordinates") from None
            if not (math.isfinite(x) and math.isfinite(y) and math.isfinite(z)):
                raise OsfParseError(offset, f"record {i}: non-finite coordinates on a valid cell")
            if x * x + y * y + z * z <= 0.0:
                raise OsfParseError(offset, f"record {i}: valid cell with zero range")
            points[r, c] = (x, y, z)
            valid[r, c] = True
        else:
            raise OsfParseError(offset, f"record {i}: validity flag must be 0 or 1")
        offset += len(line) + 1

    tail = lines[2 + n_cells :]
    if any(t for t in tail):
        raise OsfParseError(offset, "trailing data after the last record")
    return OrganizedScan(points, valid)


def normal_color(n: np.ndarray) -> tuple[int, int, int]:
    """Map a unit normal component-wise onto RGB: floor((n*0.5 + 0.5)*255)."""
    out = []
    for i in range(3):
        c = math.floor((float(n[i]) * 0.5 + 0.5) * 255.0)
        out.append(min(255, max(0, c)))
    return tuple(out)


def export_ply(
    scan: OrganizedScan, normals: NormalField, sink: Union[str, os.PathLike, BinaryIO]
) -> None:
    """ASCII PLY of every cell with an estimated normal, colored by normal."""
    if (normals.rows, normals.cols) != (scan.rows, scan.cols):
        raise ValueError(
            f"normal field {normals.rows}x{normals.cols} does not match "
            f"scan {scan.rows}x{scan.cols}"
        )
    body = []
    count = 0
    for r in range(scan.rows):
        for c in range(scan.cols):
            if normals.status[r, c] != NormalStatus.NORMAL:
                continue
            x, y, z = scan.points[r, c]
            n = normals.normals[r, c]
            red, green, blue = normal_color(n)
            body.append(
                f"{_fmt(x)} {_fmt(y)} {_fmt(z)} "
                f"{_fmt(n[0])} {_fmt(n[1])} {_fmt(n[2])} {red} {green} {blue}"
            )
            count += 1
    header = [
        "ply",
        "format ascii 1.0",
        f"element vertex {count}",
        "property float x",
        "property float y",
        "property float z",
        "property float nx",
        "property float ny",
        "property float nz",
        "property uchar red",
        "property uchar green",
        "property uchar blue",
        "end_header",
    ]
    data = ("\n".join(header + body) + "\n").encode()
    if isinstance(sink, (str, os.PathLike)):
        with open(sink, "wb") as fh:
            fh.write(data)
    else:
        sink.write(data)
