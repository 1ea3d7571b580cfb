"""Command-line entry point: augment | embed | unproject | eval | ambiguity | version.

Settings resolve as defaults <- config file <- flags.  The config file is
taken from --config or the CAMGEOM_CONFIG environment variable; every
command echoes the fully resolved configuration into its output directory
as ``config.resolved.json`` so runs are self-describing.  Exit codes:
0 success, 1 fatal I/O error, 2 validation failure.
"""

from __future__ import annotations

import argparse
import copy
import csv
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .ambiguity import (
    MECHANISM_CAVEAT,
    SizePrior,
    generate_scenes,
    run_bias_experiment,
    run_mixed_pool_experiment,
)
from .augment import AugmentationPolicy, RasterImage, Sample, batch_augment
from .camera import Intrinsics
from .depthmap import token_point_grid, embed_points, unproject
from .errors import CamGeomError
from .evaluation import match_and_score, parse_detections
from .fileio import (
    load_intrinsics,
    read_cgem,
    read_depth,
    read_ppm,
    save_intrinsics,
    write_cgem,
    write_depth,
    write_ppm,
    write_sidecar,
)
from .rays import TokenGridSpec, embed, ray_grid

DEFAULTS: dict = {
    "seed": 0,
    "workers": 1,
    "embed": {
        "dim": 256,
        "base_period": 10000.0,
        "focal_reference": 1000.0,
        "patch": 14.0,
        "origin": "center",
    },
    "geo": {"dim": 240, "base_period": 100.0},
    "augment": {"scale_min": 0.7, "scale_max": 1.4, "shift_fraction": 0.15, "mode": "pad"},
    "eval": {"iou": 0.25, "axis_aligned": False, "rotation_order": "zyx"},
    "ambiguity": {
        "n_scenes": 200,
        "objects_per_scene": 5,
        "resize_factors": [0.8, 1.0, 1.2],
        "estimator": "both",
        "prior_spread": 0.0,
        "f_mode": "mean",
        # two-cluster pool: numbers are square-pixel 640x480 cameras
        "camera_pool": [580.0, 1160.0],
    },
}


def _deep_merge(base: dict, override: dict) -> dict:
    out = copy.deepcopy(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = _deep_merge(out[key], value)
        else:
            out[key] = copy.deepcopy(value)
    return out


def _load_config_file(path: str | None) -> dict:
    if path is None:
        path = os.environ.get("CAMGEOM_CONFIG")
    if not path:
        return {}
    obj = json.loads(Path(path).read_text())
    if not isinstance(obj, dict):
        raise CamGeomError(f"{path}: config must be a JSON object")
    return obj


def _drop_none(obj: dict) -> dict:
    out = {}
    for key, value in obj.items():
        if isinstance(value, dict):
            value = _drop_none(value)
        if value is not None:
            out[key] = value
    return out


def _resolve_config(args: argparse.Namespace, overrides: dict) -> dict:
    config = _deep_merge(DEFAULTS, _load_config_file(getattr(args, "config", None)))
    config = _deep_merge(config, _drop_none(overrides))
    if getattr(args, "seed", None) is not None:
        config["seed"] = args.seed
    if getattr(args, "workers", None) is not None:
        config["workers"] = args.workers
    return config


def _echo_config(out_dir: Path, config: dict) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "config.resolved.json").write_text(json.dumps(config, indent=2, sort_keys=True) + "\n")


def _add_common(parser: argparse.ArgumentParser, workers: bool = False) -> None:
    parser.add_argument("--config", help="JSON config file (default: $CAMGEOM_CONFIG)")
    parser.add_argument("--seed", type=int, help="base RNG seed")
    if workers:
        parser.add_argument("--workers", type=int, help="worker count (outputs do not depend on it)")


def _camera_from_pool_entry(entry, where: str) -> Intrinsics:
    if isinstance(entry, (int, float)):
        f = float(entry)
        return Intrinsics(f, f, 320.0, 240.0, 640, 480)
    return Intrinsics.from_mapping(entry, where=where)


# ---------------------------------------------------------------------------
# augment

def _load_raster(path: Path) -> RasterImage:
    if path.suffix == ".ppm":
        return RasterImage(read_ppm(path))
    if path.suffix == ".cgem":
        data = read_cgem(path)
        return RasterImage(data.astype(np.float32))
    raise CamGeomError(f"{path}: unsupported image format (use .ppm or .cgem)")


def _load_manifest(path: Path) -> list[dict]:
    entries = []
    for line_no, line in enumerate(path.read_text().splitlines(), start=1):
        line = line.strip()
        if not line:
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise CamGeomError(f"{path}:{line_no}: invalid JSON ({exc})") from None
        if not isinstance(obj, dict) or "image" not in obj or "intrinsics" not in obj or "id" not in obj:
            raise CamGeomError(f"{path}:{line_no}: manifest entries need id, image and intrinsics")
        entries.append(obj)
    return entries


def cmd_augment(args: argparse.Namespace) -> int:
    config = _resolve_config(
        args,
        {
            "augment": {
                "scale_min": args.scale_min,
                "scale_max": args.scale_max,
                "shift_fraction": args.shift,
                "mode": args.mode,
            }
        },
    )
    out_dir = Path(args.out)
    manifest_path = Path(args.manifest)
    entries = _load_manifest(manifest_path)
    root = manifest_path.parent

    policy = AugmentationPolicy(
        scale_range=(config["augment"]["scale_min"], config["augment"]["scale_max"]),
        shift_fraction=config["augment"]["shift_fraction"],
        mode=config["augment"]["mode"],
        seed=int(config["seed"]),
    )
    _echo_config(out_dir, config)

    samples = []
    load_failures: list[tuple[int, str, str]] = []
    box_bytes: dict[str, bytes] = {}
    for index, entry in enumerate(entries):
        try:
            image = _load_raster(root / entry["image"])
            raw_k = entry["intrinsics"]
            if isinstance(raw_k, str):
                k = load_intrinsics(root / raw_k)
            else:
                k = Intrinsics.from_mapping(raw_k, where=f"{entry['id']}.intrinsics")
            depth = None
            if entry.get("depth"):
                depth, _ = read_depth(root / entry["depth"])
            if entry.get("boxes"):
                raw = (root / entry["boxes"]).read_bytes()
                parse_detections(raw.decode("utf-8"))  # validate, but pass bytes through
                box_bytes[entry["id"]] = raw
            samples.append(Sample(entry["id"], image, k, depth=depth))
        except (OSError, CamGeomError, ValueError) as exc:
            samples.append(None)
            load_failures.append((index, entry["id"], f"{type(exc).__name__}: {exc}"))

    runnable = [s for s in samples if s is not None]
    results, report = batch_augment(runnable, policy, workers=int(config["workers"]))

    # re-align results with the original manifest order
    merged: list = [None] * len(samples)
    it = iter(results)
    for index, sample in enumerate(samples):
        if sample is not None:
            merged[index] = next(it)

    transforms_lines = []
    for index, (entry, result) in enumerate(zip(entries, merged)):
        if result is None:
            continue
        stem = entry["id"]
        image_path = out_dir / (stem + Path(entry["image"]).suffix)
        if result.image.data.dtype == np.uint8:
            write_ppm(image_path, np.ascontiguousarray(result.image.data))
        else:
            write_cgem(image_path, result.image.data)
        save_intrinsics(out_dir / f"{stem}.intrinsics.json", result.intrinsics)
        if result.depth is not None:
            write_depth(out_dir / f"{stem}.depth.cgem", result.depth, result.intrinsics)
        if stem in box_bytes:  # 3D annotations are invariant: bytes pass through
            (out_dir / f"{stem}.boxes.json").write_bytes(box_bytes[stem])
        transforms_lines.append(
            json.dumps({"id": stem, "index": index, "transform": result.transform.to_dict()}, sort_keys=True)
        )
    (out_dir / "transforms.jsonl").write_text("\n".join(transforms_lines) + ("\n" if transforms_lines else ""))

    full_report = report.to_dict()
    full_report["load_failures"] = [list(f) for f in load_failures]
    (out_dir / "report.json").write_text(json.dumps(full_report, indent=2, sort_keys=True) + "\n")
    n_failed = report.n_failed + len(load_failures)
    print(f"augmented {report.n_ok}/{len(entries)} samples ({n_failed} failed) -> {out_dir}")
    return 0


# ---------------------------------------------------------------------------
# embed / unproject

def cmd_embed(args: argparse.Namespace) -> int:
    config = _resolve_config(
        args,
        {
            "embed": {
                "dim": args.dim,
                "base_period": args.base_period,
                "focal_reference": args.focal_reference,
                "patch": args.patch,
                "origin": args.origin,
            },
            "geo": {"dim": args.geo_dim, "base_period": args.geo_period},
        },
    )
    k = load_intrinsics(args.intrinsics)
    patch = float(config["embed"]["patch"])
    if args.rows is not None and args.cols is not None:
        grid = TokenGridSpec(args.rows, args.cols, patch)
    else:
        grid = TokenGridSpec.cover(k, patch)
    out_path = Path(args.out)
    _echo_config(out_path.parent if out_path.parent != Path("") else Path("."), config)

    grid_meta = {"rows": grid.rows, "cols": grid.cols, "patch": grid.patch, "origin": config["embed"]["origin"]}
    if args.depth:
        depth, sidecar_k = read_depth(args.depth)
        k_depth = sidecar_k or k
        points = token_point_grid(depth, k_depth, grid)
        emb = embed_points(points, dim=int(config["geo"]["dim"]), base_period=float(config["geo"]["base_period"]))
        meta = {
            "kind": "geometric_prior_embedding",
            "channel_layout": list(emb.layout),
            "dims_per_channel": emb.dim // 3,
            "base_period": emb.base_period,
            "pooling": "token-center ray x nearest patch-center depth",
            "intrinsics": k_depth.to_dict(),
            "token_grid": grid_meta,
        }
    else:
        rays = ray_grid(k, grid, origin=config["embed"]["origin"])
        emb = embed(
            rays,
            k,
            dim=int(config["embed"]["dim"]),
            base_period=float(config["embed"]["base_period"]),
            focal_reference=float(config["embed"]["focal_reference"]),
        )
        meta = {
            "kind": "camera_ray_embedding",
            "channel_layout": list(emb.layout),
            "dims_per_channel": emb.dim // 4,
            "base_period": emb.base_period,
            "focal_reference": emb.meta["focal_reference"],
            "intrinsics": k.to_dict(),
            "token_grid": grid_meta,
        }
    write_cgem(out_path, emb.data)
    write_sidecar(out_path, meta)
    print(f"wrote {emb.data.shape[0]}x{emb.data.shape[1]}x{emb.dim} embedding -> {out_path}")
    return 0


def cmd_unproject(args: argparse.Namespace) -> int:
    config = _resolve_config(args, {})
    depth, sidecar_k = read_depth(args.depth)
    if args.intrinsics:
        k = load_intrinsics(args.intrinsics)
    elif sidecar_k is not None:
        k = sidecar_k
    else:
        raise CamGeomError(f"{args.depth}: no intrinsics sidecar; pass --intrinsics")
    points, valid = unproject(depth, k)
    out_path = Path(args.out)
    _echo_config(out_path.parent if out_path.parent != Path("") else Path("."), config)
    write_cgem(out_path, points)
    write_sidecar(
        out_path,
        {
            "kind": "point_cloud",
            "channel_layout": ["x", "y", "z"],
            "invalid": "nan",
            "units": "meters",
            "frame": "camera",
            "intrinsics": k.to_dict(),
            "n_valid": int(valid.sum()),
        },
    )
    print(f"unprojected {int(valid.sum())} valid pixels -> {out_path}")
    return 0


# ---------------------------------------------------------------------------
# eval

def cmd_eval(args: argparse.Namespace) -> int:
    config = _resolve_config(
        args,
        {"eval": {"iou": args.iou, "axis_aligned": args.axis_aligned, "rotation_order": args.rotation_order}},
    )
    preds = parse_detections(Path(args.preds).read_text())
    truths = parse_detections(Path(args.truths).read_text())
    classes = None
    if args.classes:
        classes = [line.strip() for line in Path(args.classes).read_text().splitlines() if line.strip()]
    report = match_and_score(
        preds,
        truths,
        threshold=float(config["eval"]["iou"]),
        classes=classes,
        axis_aligned=bool(config["eval"]["axis_aligned"]),
        rotation_order=config["eval"]["rotation_order"],
    )
    out_dir = Path(args.out)
    _echo_config(out_dir, config)
    (out_dir / "report.json").write_text(json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n")
    with open(out_dir / "per_class.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["label", "precision", "recall", "f1", "matched", "n_pred", "n_truth"])
        for label, score in sorted(report.per_class.items()):
            writer.writerow([label, f"{score.precision:.4f}", f"{score.recall:.4f}", f"{score.f1:.4f}",
                             score.matched, score.n_pred, score.n_truth])
        writer.writerow(["__micro__", f"{report.micro.precision:.4f}", f"{report.micro.recall:.4f}",
                         f"{report.micro.f1:.4f}", report.micro.matched, report.micro.n_pred,
                         report.micro.n_truth])
    print(
        f"P={report.micro.precision:.1f} R={report.micro.recall:.1f} F1={report.micro.f1:.1f} "
        f"@ IoU {report.threshold} ({report.micro.matched} matches)"
    )
    return 0


# ---------------------------------------------------------------------------
# ambiguity

def cmd_ambiguity(args: argparse.Namespace) -> int:
    overrides: dict = {"ambiguity": {}}
    if args.n_scenes is not None:
        overrides["ambiguity"]["n_scenes"] = args.n_scenes
    if args.factors is not None:
        overrides["ambiguity"]["resize_factors"] = [float(x) for x in args.factors.split(",") if x]
    if args.estimator is not None:
        overrides["ambiguity"]["estimator"] = args.estimator
    if args.prior_spread is not None:
        overrides["ambiguity"]["prior_spread"] = args.prior_spread
    config = _resolve_config(args, overrides)
    amb = config["ambiguity"]
    if amb["estimator"] not in ("agnostic", "aware", "both"):
        raise CamGeomError(f"ambiguity.estimator must be agnostic|aware|both, got {amb['estimator']!r}")
    pool = [
        _camera_from_pool_entry(entry, where=f"ambiguity.camera_pool[{i}]")
        for i, entry in enumerate(amb["camera_pool"])
    ]
    if not pool:
        raise CamGeomError("ambiguity.camera_pool must be non-empty")
    spread = float(amb["prior_spread"])
    priors = {
        label: SizePrior(prior[0] if isinstance(prior, (list, tuple)) else prior.mean, spread)
        for label, prior in _default_priors().items()
    }
    scenes = generate_scenes(
        int(amb["n_scenes"]),
        pool,
        size_priors=priors,
        seed=int(config["seed"]),
        objects_per_scene=int(amb["objects_per_scene"]),
    )
    estimators = ["agnostic", "aware"] if amb["estimator"] == "both" else [amb["estimator"]]

    out_dir = Path(args.out)
    _echo_config(out_dir, config)

    # The resize sweep mirrors the single-source setting (train on one
    # camera, evaluate resized), so it runs on the first cluster's scenes;
    # cross-camera mixing is what the mixed-pool experiment below isolates.
    bias_scenes = [s for s in scenes if s.camera_index == 0]
    bias_rows = []
    for estimator in estimators:
        bias_rows.extend(
            run_bias_experiment(bias_scenes, amb["resize_factors"], estimator=estimator, f_mode=amb["f_mode"])
        )
    with open(out_dir / "bias.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["s", "estimator", "ratio_mean", "ratio_std", "depth_error_mean", "f1"])
        for row in bias_rows:
            writer.writerow([row.s, row.estimator, f"{row.ratio_mean:.12g}", f"{row.ratio_std:.6g}",
                             f"{row.depth_error_mean:.6g}", f"{row.f1:.4f}"])

    lines = [MECHANISM_CAVEAT, ""]
    lines.append(f"{len(scenes)} scenes x {amb['objects_per_scene']} objects, "
                 f"pool of {len(pool)} cameras, prior spread {spread}")
    lines.append("")
    lines.append(f"resize bias (Z_pred/Z_true; single-source pool, f={pool[0].fy:g} px):")
    for row in bias_rows:
        lines.append(
            f"  s={row.s:<5g} {row.estimator:<9s} ratio={row.ratio_mean:.6f} "
            f"(std {row.ratio_std:.2g}) depth_err={row.depth_error_mean:.4f} F1={row.f1:.1f}"
        )

    if len(pool) >= 2:
        f_assumed, cluster_rows = run_mixed_pool_experiment(scenes, estimators, f_mode=amb["f_mode"])
        with open(out_dir / "clusters.csv", "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["cluster_focal", "estimator", "ratio_mean", "ratio_std", "expected_ratio", "n_objects"])
            for row in cluster_rows:
                writer.writerow([row.cluster_focal, row.estimator, f"{row.ratio_mean:.12g}",
                                 f"{row.ratio_std:.6g}", f"{row.expected_ratio:.12g}", row.n_objects])
        lines.append("")
        lines.append(f"mixed-pool conflict (canonical focal {f_assumed:g} px):")
        for row in cluster_rows:
            lines.append(
                f"  cluster f={row.cluster_focal:<6g} {row.estimator:<9s} "
                f"ratio={row.ratio_mean:.6f} expected={row.expected_ratio:.6f}"
            )
    summary = "\n".join(lines) + "\n"
    (out_dir / "summary.txt").write_text(summary)
    print(summary, end="")
    return 0


def _default_priors():
    from .ambiguity import DEFAULT_SIZE_PRIORS

    return DEFAULT_SIZE_PRIORS


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="camgeom", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("augment", help="camera-aware augmentation of a sample manifest")
    _add_common(p, workers=True)
    p.add_argument("--manifest", required=True, help="JSONL manifest of samples")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--scale-min", type=float, dest="scale_min")
    p.add_argument("--scale-max", type=float, dest="scale_max")
    p.add_argument("--shift", type=float, help="max principal-point shift fraction")
    p.add_argument("--mode", choices=["pad", "crop"])
    p.set_defaults(func=cmd_augment)

    p = sub.add_parser("embed", help="export camera ray embedding (or E_geo with --depth)")
    _add_common(p)
    p.add_argument("--intrinsics", required=True, help="intrinsics JSON file")
    p.add_argument("--out", required=True, help="output CGEM path")
    p.add_argument("--patch", type=float)
    p.add_argument("--rows", type=int)
    p.add_argument("--cols", type=int)
    p.add_argument("--dim", type=int)
    p.add_argument("--base-period", type=float, dest="base_period")
    p.add_argument("--focal-reference", type=float, dest="focal_reference")
    p.add_argument("--origin", choices=["center", "corner"])
    p.add_argument("--depth", help="depth CGEM; switches output to the geometric embedding")
    p.add_argument("--geo-dim", type=int, dest="geo_dim")
    p.add_argument("--geo-period", type=float, dest="geo_period")
    p.set_defaults(func=cmd_embed)

    p = sub.add_parser("unproject", help="depth map -> camera-frame point cloud")
    _add_common(p)
    p.add_argument("--depth", required=True, help="depth CGEM file")
    p.add_argument("--intrinsics", help="override the depth sidecar intrinsics")
    p.add_argument("--out", required=True, help="output CGEM path")
    p.set_defaults(func=cmd_unproject)

    p = sub.add_parser("eval", help="score detections against ground truth")
    _add_common(p)
    p.add_argument("--preds", required=True, help="predictions file (JSON or fenced transcript)")
    p.add_argument("--truths", required=True, help="ground-truth JSON file")
    p.add_argument("--iou", type=float)
    p.add_argument("--classes", help="file with one class name per line")
    p.add_argument("--axis-aligned", action="store_true", default=None, dest="axis_aligned")
    p.add_argument("--rotation-order", dest="rotation_order")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("ambiguity", help="run the depth-bias and mixed-pool experiments")
    _add_common(p)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--n-scenes", type=int, dest="n_scenes")
    p.add_argument("--factors", help="comma-separated resize factors")
    p.add_argument("--estimator", choices=["agnostic", "aware", "both"])
    p.add_argument("--prior-spread", type=float, dest="prior_spread")
    p.set_defaults(func=cmd_ambiguity)

    p = sub.add_parser("version", help="print the package version")
    p.set_defaults(func=lambda args: print(f"camgeom {__version__}") or 0)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args) or 0
    except (CamGeomError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
