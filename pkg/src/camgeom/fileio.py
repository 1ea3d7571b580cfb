"""On-disk formats: CGEM float tensors, binary PPM rasters, JSON sidecars.

CGEM is a minimal grid-tensor container used for embeddings, depth maps and
point grids: a 16-byte header (magic ``CGEM``, then u32 rows, cols, dim,
little-endian) followed by row-major float32 little-endian samples.  Depth
maps use dim = 1 with NaN encoding invalid pixels.  Every tensor travels
with a ``<name>.json`` sidecar describing how it was produced.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path
from typing import Any

import numpy as np

from .camera import Intrinsics
from .depthmap import DepthMap

__all__ = [
    "write_cgem",
    "read_cgem",
    "sidecar_path",
    "write_sidecar",
    "read_sidecar",
    "write_depth",
    "read_depth",
    "write_ppm",
    "read_ppm",
    "load_intrinsics",
    "save_intrinsics",
]

MAGIC = b"CGEM"
_HEADER = struct.Struct("<4sIII")


def write_cgem(path: str | Path, data: np.ndarray) -> None:
    """Write a (rows, cols) or (rows, cols, dim) array as a CGEM tensor."""
    data = np.asarray(data)
    if data.ndim == 2:
        data = data[:, :, None]
    if data.ndim != 3:
        raise ValueError(f"CGEM tensors are rows x cols x dim, got shape {data.shape}")
    rows, cols, dim = data.shape
    payload = np.ascontiguousarray(data, dtype="<f4")
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, rows, cols, dim))
        fh.write(payload.tobytes())


def read_cgem(path: str | Path) -> np.ndarray:
    """Read a CGEM tensor as float32, shape (rows, cols, dim)."""
    raw = Path(path).read_bytes()
    if len(raw) < _HEADER.size:
        raise ValueError(f"{path}: truncated CGEM header")
    magic, rows, cols, dim = _HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise ValueError(f"{path}: bad magic {magic!r}, expected {MAGIC!r}")
    expected = rows * cols * dim * 4
    body = raw[_HEADER.size :]
    if len(body) != expected:
        raise ValueError(f"{path}: payload is {len(body)} bytes, expected {expected}")
    return np.frombuffer(body, dtype="<f4").reshape(rows, cols, dim).copy()


def sidecar_path(path: str | Path) -> Path:
    return Path(str(path) + ".json")


def write_sidecar(path: str | Path, meta: dict[str, Any]) -> None:
    sidecar_path(path).write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")


def read_sidecar(path: str | Path) -> dict[str, Any]:
    return json.loads(sidecar_path(path).read_text())


def write_depth(path: str | Path, depth: DepthMap, k: Intrinsics | None = None) -> None:
    """Depth map as CGEM dim=1 (NaN = invalid) with intrinsics in the sidecar."""
    values = np.where(depth.valid, depth.values, np.nan)
    write_cgem(path, values.astype(np.float32))
    meta: dict[str, Any] = {"kind": "depth", "invalid": "nan", "units": "meters"}
    if k is not None:
        meta["intrinsics"] = k.to_dict()
    write_sidecar(path, meta)


def read_depth(path: str | Path) -> tuple[DepthMap, Intrinsics | None]:
    """Read a depth CGEM; returns the map and the sidecar intrinsics if present."""
    data = read_cgem(path)
    if data.shape[2] != 1:
        raise ValueError(f"{path}: depth tensors must have dim = 1, got {data.shape[2]}")
    depth = DepthMap.from_array(data[:, :, 0].astype(np.float64))
    k = None
    if sidecar_path(path).exists():
        meta = read_sidecar(path)
        if "intrinsics" in meta:
            k = Intrinsics.from_mapping(meta["intrinsics"], where=f"{sidecar_path(path)}:intrinsics")
    return depth, k


def write_ppm(path: str | Path, data: np.ndarray) -> None:
    """Binary PPM (P6) for 8-bit 3-channel images, shape (H, W, 3)."""
    data = np.asarray(data)
    if data.ndim != 3 or data.shape[2] != 3 or data.dtype != np.uint8:
        raise ValueError(f"PPM needs uint8 H x W x 3 data, got {data.dtype} {data.shape}")
    height, width = data.shape[:2]
    with open(path, "wb") as fh:
        fh.write(f"P6\n{width} {height}\n255\n".encode("ascii"))
        fh.write(np.ascontiguousarray(data).tobytes())


def read_ppm(path: str | Path) -> np.ndarray:
    raw = Path(path).read_bytes()
    if not raw.startswith(b"P6"):
        raise ValueError(f"{path}: not a binary PPM (P6) file")
    fields: list[bytes] = []
    pos = 2
    while len(fields) < 3:
        while pos < len(raw) and raw[pos : pos + 1].isspace():
            pos += 1
        if raw[pos : pos + 1] == b"#":  # comment line
            pos = raw.index(b"\n", pos) + 1
            continue
        start = pos
        while pos < len(raw) and not raw[pos : pos + 1].isspace():
            pos += 1
        fields.append(raw[start:pos])
    width, height, maxval = (int(f) for f in fields)
    if maxval != 255:
        raise ValueError(f"{path}: only maxval 255 supported, got {maxval}")
    pos += 1  # single whitespace after maxval
    body = raw[pos : pos + width * height * 3]
    if len(body) != width * height * 3:
        raise ValueError(f"{path}: truncated pixel data")
    return np.frombuffer(body, dtype=np.uint8).reshape(height, width, 3).copy()


def load_intrinsics(path: str | Path) -> Intrinsics:
    return Intrinsics.from_json(Path(path).read_text(), where=str(path))


def save_intrinsics(path: str | Path, k: Intrinsics) -> None:
    Path(path).write_text(k.to_json() + "\n")
