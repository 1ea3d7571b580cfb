"""
The systematic depth bias of camera-agnostic estimators
=======================================================

An estimator that recovers depth from apparent size with a baked-in
canonical focal length is wrong by exactly 1/s when images are resized by
s, and wrong by f_assumed/f_cluster when trained on a mixed pool of
cameras.  Both laws fall straight out of fy * H / Z; this experiment
renders synthetic scenes with exact annotations and measures them.
"""

from camgeom import Intrinsics, generate_scenes, run_bias_experiment, run_mixed_pool_experiment
from camgeom.ambiguity import MECHANISM_CAVEAT

print(MECHANISM_CAVEAT)


def camera(f: float) -> Intrinsics:
    return Intrinsics(f, f, 320.0, 240.0, 640, 480)


# --- resize sweep, single-source training pool ---------------------------
scenes = generate_scenes(400, [camera(585.0)], seed=42)
print(f"\n{len(scenes)} scenes, single camera f = 585 px, exact size priors")
print(f"{'s':>5} {'estimator':>9} {'Z_pred/Z':>9} {'depth err':>9} {'F1@0.25':>8}")
for estimator in ("agnostic", "aware"):
    for row in run_bias_experiment(scenes, [0.8, 1.0, 1.2], estimator=estimator):
        print(f"{row.s:>5} {row.estimator:>9} {row.ratio_mean:>9.4f} "
              f"{row.depth_error_mean:>9.4f} {row.f1:>8.1f}")
print("agnostic ratio = 1/s exactly; aware cancels s and stays at 1.")

# --- mixed-pool conflict --------------------------------------------------
mixed = generate_scenes(400, [camera(580.0), camera(1160.0)], seed=43)
f_assumed, rows = run_mixed_pool_experiment(mixed)
print(f"\ntwo-cluster pool (580 / 1160 px): canonical focal fit = {f_assumed:g} px")
print(f"{'cluster f':>9} {'estimator':>9} {'Z_pred/Z':>9} {'expected':>9}")
for row in rows:
    print(f"{row.cluster_focal:>9g} {row.estimator:>9} {row.ratio_mean:>9.4f} {row.expected_ratio:>9.4f}")
print("the agnostic estimator averages incompatible camera geometries;")
print("per cluster it is wrong by exactly f_assumed / f_cluster.")

# --- noisy priors: the law blurs but does not move ------------------------
noisy = generate_scenes(
    1000, [camera(585.0)],
    size_priors={"chair": (0.85, 0.15), "table": (0.75, 0.15)},
    seed=44,
)
(row,) = run_bias_experiment(noisy, [0.8], estimator="agnostic")
print(f"\nnoisy priors (lognormal spread 0.15), s = 0.8: "
      f"ratio {row.ratio_mean:.3f} +- {row.ratio_std:.3f} (law predicts 1.25)")
