"""Independent oracles shared by the unit and acceptance suites.

These deliberately avoid the library's clipping/volume code paths: box
membership is a direct frame-change test and volumes come from uniform
sampling, so they can arbitrate the analytic IoU.
"""

import math

import numpy as np

from camgeom import OrientedBox3, box_corners


def random_box(rng, center_span=2.0, size_range=(0.3, 2.5)) -> OrientedBox3:
    return OrientedBox3(
        tuple(rng.uniform(-center_span, center_span, size=3)),
        tuple(rng.uniform(*size_range, size=3)),
        rng.uniform(-math.pi, math.pi),
        rng.uniform(-math.pi / 2, math.pi / 2),
        rng.uniform(-math.pi, math.pi),
    )


def points_in_box(points: np.ndarray, box: OrientedBox3) -> np.ndarray:
    local = (points - np.asarray(box.center)) @ box.rotation()
    return np.all(np.abs(local) <= np.asarray(box.size) / 2.0, axis=1)


def monte_carlo_iou(a: OrientedBox3, b: OrientedBox3, n: int, rng) -> float:
    """IoU estimated from uniform samples over the union's bounding box.

    Sampling and membership run in float32: the classification band that
    introduces (~1e-7 of the box extent) is orders of magnitude below the
    Monte-Carlo noise the caller's tolerance must absorb anyway.
    """
    corners = np.vstack([box_corners(a), box_corners(b)]).astype(np.float32)
    lo = corners.min(axis=0)
    hi = corners.max(axis=0)
    samples = rng.random((n, 3), dtype=np.float32) * (hi - lo) + lo

    def member(box: OrientedBox3) -> np.ndarray:
        rot = box.rotation().astype(np.float32)
        half = np.asarray(box.size, dtype=np.float32) / 2
        rel = samples - np.asarray(box.center, dtype=np.float32)
        ok = np.abs(rel @ rot[:, 0]) <= half[0]
        ok &= np.abs(rel @ rot[:, 1]) <= half[1]
        ok &= np.abs(rel @ rot[:, 2]) <= half[2]
        return ok

    in_a = member(a)
    in_b = member(b)
    union = np.count_nonzero(in_a | in_b)
    if union == 0:
        return 0.0
    return np.count_nonzero(in_a & in_b) / union
