"""
Resizing an image IS a change of camera
=======================================

Scaling an image by s is equivalent to scaling the intrinsics:
(fx, fy, cx, cy) -> (s*fx, s*fy, s*cx, s*cy).  If the calibration is
updated alongside the pixels, every line of sight is preserved exactly;
if it is not, the whole ray field bends -- which is precisely how a
pipeline that resizes images while ignoring intrinsics corrupts geometry.
"""

from camgeom import Intrinsics, PixelTransform, apply_transform, ray_preservation_check, scale
from camgeom.transforms import compose, invert

k = Intrinsics(585.0, 585.0, 320.0, 240.0, 640, 480)
print("original:", k)
print("x0.8:    ", scale(k, 0.8))

# Crops shift the principal point (offsets measured after scaling).
crop = PixelTransform(sx=1.0, sy=1.0, du=100.0, dv=50.0, out_width=540, out_height=430)
print("cropped: ", apply_transform(k, crop))

# Transforms compose and invert like the group they are.
resize = PixelTransform.scaling(0.8, 640, 480)
round_trip = compose(resize, invert(resize))
print("resize o inverse =", round_trip)

# The consistency check: max angular ray deviation over a dense pixel grid.
for s in (0.5, 0.8, 1.2, 2.0):
    t = PixelTransform.scaling(s, k.width, k.height)
    updated = ray_preservation_check(k, t)
    stale = ray_preservation_check(k, t, transformed_intrinsics=k)
    print(f"s = {s:<4}: updated intrinsics {updated:.2e} rad   stale intrinsics {stale:.3f} rad")

print("\nWide-angle cameras suffer the most from stale calibrations:")
wide = Intrinsics(320.0, 320.0, 320.0, 240.0, 640, 480)  # 90 deg horizontal FOV
t = PixelTransform.scaling(0.8, 640, 480)
print(f"  90 deg FOV, s = 0.8, stale: {ray_preservation_check(wide, t, transformed_intrinsics=wide):.3f} rad")
