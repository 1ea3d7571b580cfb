"""Camera-aware geometric augmentation: joint raster + intrinsics transforms.

The whole point of this module is consistency: each sample's raster,
intrinsics and depth map all move through the SAME :class:`PixelTransform`,
so every line of sight is preserved (verifiable with
``transforms.ray_preservation_check``).  3D box annotations are left
untouched -- a camera-space resize does not move world geometry, and that
asymmetry is exactly what makes the augmentation teach camera awareness.

Images are resampled bilinearly; depth maps use nearest-neighbor sampling
because interpolating across a depth discontinuity fabricates 3D points.
Batch runs seed each sample independently from (policy.seed, sample index),
so results do not depend on ordering or worker count.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .camera import Intrinsics
from .depthmap import DepthMap
from .errors import CropOutOfBounds, ExtentMismatch
from .evaluation import Detection
from .transforms import PixelTransform, apply_transform

__all__ = [
    "RasterImage",
    "AugmentationPolicy",
    "Sample",
    "Provenance",
    "AugmentedSample",
    "BatchReport",
    "resample",
    "resample_depth",
    "draw_transform",
    "augment",
    "batch_augment",
]


@dataclass(frozen=True, eq=False)
class RasterImage:
    """H x W x C raster, uint8 or float32, row-major."""

    data: np.ndarray

    def __post_init__(self):
        data = np.asarray(self.data)
        if data.ndim == 2:
            data = data[:, :, None]
        if data.ndim != 3 or data.shape[2] not in (1, 3):
            raise ValueError(f"raster must be H x W x (1|3), got shape {data.shape}")
        if data.dtype not in (np.uint8, np.float32):
            raise ValueError(f"raster dtype must be uint8 or float32, got {data.dtype}")
        data = data.copy()
        data.setflags(write=False)
        object.__setattr__(self, "data", data)

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def channels(self) -> int:
        return self.data.shape[2]


@dataclass(frozen=True)
class AugmentationPolicy:
    """Ranges for the synthetic intrinsic perturbations.

    ``scale_range`` brackets the resize factor draw; ``shift_fraction`` is
    the maximum principal-point shift as a fraction of the (post-scale)
    extent.  ``mode`` selects whether shifted content is padded with zeros
    on the original scaled canvas or re-cropped to a window that stays
    inside the source.
    """

    scale_range: tuple[float, float] = (0.7, 1.4)
    shift_fraction: float = 0.15
    mode: str = "pad"
    seed: int = 0

    def __post_init__(self):
        lo, hi = (float(v) for v in self.scale_range)
        if not (0 < lo <= hi) or not math.isfinite(hi):
            raise ValueError(f"scale_range must satisfy 0 < lo <= hi, got {self.scale_range}")
        object.__setattr__(self, "scale_range", (lo, hi))
        frac = float(self.shift_fraction)
        if not (0.0 <= frac <= 0.5):
            raise ValueError(f"shift_fraction must be in [0, 0.5], got {frac}")
        object.__setattr__(self, "shift_fraction", frac)
        if self.mode not in ("pad", "crop"):
            raise ValueError(f"mode must be 'pad' or 'crop', got {self.mode!r}")
        if not isinstance(self.seed, int) or not (0 <= self.seed < 2**64):
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {self.seed!r}")


@dataclass(frozen=True, eq=False)
class Sample:
    """Augmentation input: raster + intrinsics, optional depth and 3D boxes."""

    id: str
    image: RasterImage
    intrinsics: Intrinsics
    depth: DepthMap | None = None
    boxes: tuple[Detection, ...] | None = None


@dataclass(frozen=True)
class Provenance:
    source_id: str
    seed: int
    index: int = 0


@dataclass(frozen=True, eq=False)
class AugmentedSample:
    """Consistently transformed sample; re-applying ``transform`` to the
    source intrinsics reproduces ``intrinsics`` bit-exactly."""

    image: RasterImage
    intrinsics: Intrinsics
    transform: PixelTransform
    provenance: Provenance
    depth: DepthMap | None = None
    boxes: tuple[Detection, ...] | None = None


def _source_sample_coords(t: PixelTransform, out_width: int, out_height: int):
    u_out = np.arange(out_width, dtype=np.float64) + 0.5
    v_out = np.arange(out_height, dtype=np.float64) + 0.5
    u_src, v_src = t.source_coords(u_out[None, :], v_out[:, None])
    return np.broadcast_to(u_src, (out_height, out_width)), np.broadcast_to(v_src, (out_height, out_width))


def resample(image: RasterImage, t: PixelTransform, mode: str = "pad") -> RasterImage:
    """Bilinear resample under the half-integer pixel-center convention.

    In pad mode, samples falling outside the source contribute the pad
    value 0 and source-covered pixels are never altered.  In crop mode the
    output window must lie inside the scaled source (CropOutOfBounds
    otherwise) and edge samples clamp instead of padding.
    """
    if mode not in ("pad", "crop"):
        raise ValueError(f"mode must be 'pad' or 'crop', got {mode!r}")
    if mode == "crop":
        # window [du, du + out_w] x [dv, dv + out_h] in post-scale coordinates
        if (
            t.du < -1e-9
            or t.dv < -1e-9
            or t.du + t.out_width > t.sx * image.width + 1e-9
            or t.dv + t.out_height > t.sy * image.height + 1e-9
        ):
            raise CropOutOfBounds(
                f"crop window ({t.du:.3f}..{t.du + t.out_width:.3f}, "
                f"{t.dv:.3f}..{t.dv + t.out_height:.3f}) exceeds scaled source "
                f"{t.sx * image.width:.3f}x{t.sy * image.height:.3f}"
            )
    u_src, v_src = _source_sample_coords(t, t.out_width, t.out_height)
    x = u_src - 0.5
    y = v_src - 0.5
    j0 = np.floor(x).astype(np.int64)
    i0 = np.floor(y).astype(np.int64)
    fx = x - j0
    fy = y - i0
    weights = (
        ((1 - fy) * (1 - fx), i0, j0),
        ((1 - fy) * fx, i0, j0 + 1),
        (fy * (1 - fx), i0 + 1, j0),
        (fy * fx, i0 + 1, j0 + 1),
    )
    src = image.data.astype(np.float64)
    out = np.zeros((t.out_height, t.out_width, image.channels), dtype=np.float64)
    for w, ii, jj in weights:
        if mode == "pad":
            inside = (ii >= 0) & (ii < image.height) & (jj >= 0) & (jj < image.width)
            w = np.where(inside, w, 0.0)
        ii = np.clip(ii, 0, image.height - 1)
        jj = np.clip(jj, 0, image.width - 1)
        out += w[:, :, None] * src[ii, jj]
    if image.data.dtype == np.uint8:
        out = np.clip(np.rint(out), 0, 255).astype(np.uint8)
    else:
        out = out.astype(np.float32)
    return RasterImage(out)


def resample_depth(depth: DepthMap, t: PixelTransform) -> DepthMap:
    """Nearest-neighbor depth resample; out-of-source samples become invalid."""
    u_src, v_src = _source_sample_coords(t, t.out_width, t.out_height)
    jj = np.floor(u_src).astype(np.int64)
    ii = np.floor(v_src).astype(np.int64)
    inside = (ii >= 0) & (ii < depth.height) & (jj >= 0) & (jj < depth.width)
    ii_c = np.clip(ii, 0, depth.height - 1)
    jj_c = np.clip(jj, 0, depth.width - 1)
    values = depth.values[ii_c, jj_c]
    valid = inside & depth.valid[ii_c, jj_c]
    return DepthMap(np.where(valid, values, np.nan), valid)


def draw_transform(k: Intrinsics, policy: AugmentationPolicy, rng: np.random.Generator) -> PixelTransform:
    """Draw one scale + principal-point shift transform from the policy.

    Draw order (scale, then du, then dv) is part of the determinism
    contract.  Shifts are drawn in post-scale pixels.  In crop mode the
    output window is shrunk by the maximum shift on each side so that any
    drawn shift keeps the window inside the scaled source.
    """
    s = float(rng.uniform(*policy.scale_range))
    scaled_w = s * k.width
    scaled_h = s * k.height
    max_du = policy.shift_fraction * scaled_w
    max_dv = policy.shift_fraction * scaled_h
    du = float(rng.uniform(-max_du, max_du)) if max_du > 0 else 0.0
    dv = float(rng.uniform(-max_dv, max_dv)) if max_dv > 0 else 0.0
    if policy.mode == "pad":
        out_w = max(1, round(scaled_w))
        out_h = max(1, round(scaled_h))
        return PixelTransform(s, s, du, dv, out_w, out_h)
    out_w = max(1, math.floor(scaled_w - 2.0 * max_du))
    out_h = max(1, math.floor(scaled_h - 2.0 * max_dv))
    return PixelTransform(s, s, (scaled_w - out_w) / 2.0 + du, (scaled_h - out_h) / 2.0 + dv, out_w, out_h)


def augment(
    sample: Sample,
    policy: AugmentationPolicy,
    rng: np.random.Generator | int,
    index: int = 0,
) -> AugmentedSample:
    """Transform one sample consistently; deterministic given the rng state."""
    if isinstance(rng, (int, np.integer)):
        rng = np.random.default_rng(np.random.SeedSequence([int(rng), index]))
    k = sample.intrinsics
    if (sample.image.height, sample.image.width) != (k.height, k.width):
        raise ExtentMismatch(
            f"{sample.id}: image extent {sample.image.width}x{sample.image.height} "
            f"!= intrinsics extent {k.width}x{k.height}"
        )
    if sample.depth is not None and (sample.depth.height, sample.depth.width) != (k.height, k.width):
        raise ExtentMismatch(
            f"{sample.id}: depth extent {sample.depth.width}x{sample.depth.height} "
            f"!= intrinsics extent {k.width}x{k.height}"
        )
    t = draw_transform(sample.intrinsics, policy, rng)
    image = resample(sample.image, t, mode=policy.mode)
    intrinsics = apply_transform(sample.intrinsics, t)
    depth = resample_depth(sample.depth, t) if sample.depth is not None else None
    return AugmentedSample(
        image=image,
        intrinsics=intrinsics,
        transform=t,
        provenance=Provenance(sample.id, policy.seed, index),
        depth=depth,
        boxes=sample.boxes,  # world geometry does not move under a camera-space resize
    )


@dataclass(frozen=True)
class BatchReport:
    """Outcome of a batch run.

    ``elapsed_s`` and ``samples_per_s`` are wall-clock measurements and the
    only fields excluded from the byte-determinism contract.
    """

    n_samples: int
    n_ok: int
    n_failed: int
    failures: tuple[tuple[int, str, str], ...]
    transforms: tuple[dict | None, ...]
    elapsed_s: float
    samples_per_s: float

    def to_dict(self) -> dict:
        return {
            "n_samples": self.n_samples,
            "n_ok": self.n_ok,
            "n_failed": self.n_failed,
            "failures": [list(f) for f in self.failures],
            "transforms": list(self.transforms),
            "elapsed_s": self.elapsed_s,
            "samples_per_s": self.samples_per_s,
        }


def batch_augment(
    samples: Sequence[Sample],
    policy: AugmentationPolicy,
    workers: int = 1,
) -> tuple[list[AugmentedSample | None], BatchReport]:
    """Augment a batch with per-sample isolation.

    Each sample is seeded from (policy.seed, its index), so outputs are
    identical for any worker count and any submission order.  A failing
    sample yields None in the result list and a failure record; the batch
    continues.
    """
    results: list[AugmentedSample | None] = [None] * len(samples)
    failures: list[tuple[int, str, str]] = []

    def run_one(index: int) -> None:
        sample = samples[index]
        try:
            rng = np.random.default_rng(np.random.SeedSequence([policy.seed, index]))
            results[index] = augment(sample, policy, rng, index=index)
        except Exception as exc:  # isolation contract: keep the batch alive
            failures.append((index, sample.id, f"{type(exc).__name__}: {exc}"))

    start = time.perf_counter()
    if workers <= 1:
        for index in range(len(samples)):
            run_one(index)
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(run_one, range(len(samples))))
    elapsed = time.perf_counter() - start

    failures.sort()
    transforms = tuple(r.transform.to_dict() if r is not None else None for r in results)
    n_ok = sum(r is not None for r in results)
    report = BatchReport(
        n_samples=len(samples),
        n_ok=n_ok,
        n_failed=len(samples) - n_ok,
        failures=tuple(failures),
        transforms=transforms,
        elapsed_s=elapsed,
        samples_per_s=len(samples) / elapsed if elapsed > 0 else float("inf"),
    )
    return results, report
