"""
Parsing 3D detections and scoring them at IoU 0.25
==================================================

Model transcripts carry a JSON list of {"label", "bbox_3d"} entries, where
the box is [x, y, z, x_size, y_size, z_size, yaw, pitch, roll].  Overlap
between oriented cuboids is computed exactly by clipping one box's faces
against the other's half-spaces; matching is class-wise greedy by
descending IoU.
"""

import math

from camgeom import OrientedBox3, aabb_iou, iou3d, match_and_score, parse_detections

transcript = """Here are the detections you asked for:
```json
[
    {"label": "Chair", "bbox_3d": [1.0, 0.2, 2.4, 0.5, 0.5, 0.9, 0.3, 0.0, 0.0]},
    {"label": "table", "bbox_3d": [0.0, 0.0, 3.0, 1.4, 0.8, 0.7, -0.2, 0.0, 0.0]},
    {"label": "lamp", "bbox_3d": [9.9, 9.9, 9.9, 0.2, 0.2, 0.2, 0, 0]},
    {"label": "door", "bbox_3d": [-1.5, 0.0, 2.0, 0.9, 0.1, 2.0, 1.57, 0.0, 0.0]}
]
```"""
preds = parse_detections(transcript)
print(f"parsed {len(preds)} detections (the 8-number lamp was skipped):")
for d in preds:
    print("  ", d.label, [round(v, 2) for v in d.box.to_list()])

# Oriented IoU behaves like the textbook cases say it should.
unit = OrientedBox3((0, 0, 0), (1, 1, 1), 0, 0, 0)
print("\nIoU(identical)          =", iou3d(unit, unit))
print("IoU(offset by half)     =", round(iou3d(unit, OrientedBox3((0.5, 0, 0), (1, 1, 1), 0, 0, 0)), 4))
spun = OrientedBox3((0, 0, 0), (1, 1, 1), math.pi / 4, 0, 0)
print("IoU(yawed 45 deg)       =", round(iou3d(unit, spun), 4), " (= 1/sqrt(2))")
print("axis-aligned shortcut   =", round(aabb_iou(unit, spun), 4), " (ignores attitude)")

# Score against ground truth: slightly perturbed copies of the predictions.
truths = parse_detections("""[
    {"label": "chair", "bbox_3d": [1.05, 0.2, 2.4, 0.5, 0.5, 0.9, 0.3, 0.0, 0.0]},
    {"label": "table", "bbox_3d": [0.0, 0.05, 3.0, 1.4, 0.8, 0.7, -0.2, 0.0, 0.0]},
    {"label": "sofa",  "bbox_3d": [4.0, 0.0, 2.0, 1.8, 0.8, 0.8, 0.0, 0.0, 0.0]}
]""")
report = match_and_score(preds, truths, threshold=0.25)
print(f"\nP={report.micro.precision:.1f} R={report.micro.recall:.1f} F1={report.micro.f1:.1f}")
for label, score in sorted(report.per_class.items()):
    print(f"  {label:<6} P={score.precision:6.1f} R={score.recall:6.1f} "
          f"({score.matched}/{score.n_pred} preds, {score.n_truth} truths)")
for label, i, j, overlap in report.matches:
    print(f"  matched {label}: pred[{i}] <-> truth[{j}] at IoU {overlap:.3f}")
