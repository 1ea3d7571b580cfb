"""
Pinhole projection and the focal/size/depth equivalence classes
===============================================================

A fronto-parallel object of height H at depth Z projects to fy * H / Z
pixels.  That single formula is why a monocular image cannot tell a zoomed
lens from a closer object, nor a small near object from a large far one.
"""

from camgeom import (
    Intrinsics,
    Pixel,
    Point3,
    back_project,
    make_witness,
    project,
    projected_height,
)

k = Intrinsics(fx=585.0, fy=585.0, cx=320.0, cy=240.0, width=640, height=480)
print("camera:", k)

# A point on the optical axis lands on the principal point, whatever its depth.
for depth in (0.5, 2.0, 50.0):
    print(f"  project (0, 0, {depth:>4}) ->", project(Point3(0.0, 0.0, depth), k))

# Off-axis points: u = fx * X / Z + cx.
p = project(Point3(0.5, -0.2, 2.0), k)
print("  project (0.5, -0.2, 2) ->", p)

# Back-projection recovers the viewing ray (unit direction).
ray = back_project(p, k)
print("  back_project ->", ray)

# A 1.7 m person at 4 m:
h = projected_height(1.7, 4.0, k)
print(f"\n1.70 m tall at 4.0 m -> {h:.1f} px")

# The same projected height arises from completely different worlds:
w1 = make_witness((k.fy, 1.7, 4.0), "focal_depth", 2.0)
w2 = make_witness((k.fy, 1.7, 4.0), "size_depth", 0.5)
print("focal-depth twin:  f, H, Z =", tuple(round(v, 3) for v in w1.variant), "-> same", round(w1.h_proj, 1), "px")
print("size-depth twin:   f, H, Z =", tuple(round(v, 3) for v in w2.variant), "-> same", round(w2.h_proj, 1), "px")
print("\nWithout the camera's focal length, these scenes are indistinguishable.")

# The general coupled form: (fy, H, Z) -> (a*fy, b*H, a*b*Z).
w3 = make_witness((k.fy, 1.7, 4.0), "coupled", (1.3, 0.6))
print("coupled twin:      f, H, Z =", tuple(round(v, 3) for v in w3.variant), "-> same", round(w3.h_proj, 1), "px")
