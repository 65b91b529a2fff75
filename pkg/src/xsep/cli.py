"""Command-line interface.

Subcommands: train (learn coupled dictionaries from single-sided image
pairs), separate (guided unmixing of a mixed X-ray), mca (baseline
separation without side information), ssim (score two images), synth
(generate a synthetic double-sided scene). The separate/mca report path
writes the output images, a key=value metrics sidecar and a rendered
figure next to each other.
"""

import argparse
import sys

import numpy as np

from .config import load_config
from .dictlearn import sample_training_patches, train
from .io import read_dictionaries, read_pgm, write_dictionaries, write_pgm
from .metrics import ssim
from .numerics import normalize_columns
from .separation import mca_separate, separate_image
from .synth import generate_scene, write_scene


def _load_cosized(paths):
    imgs = []
    for path in paths:
        img, _ = read_pgm(path)
        imgs.append(img)
    shapes = {im.shape for im in imgs}
    if len(shapes) != 1:
        raise ValueError(f"input images must share dimensions, got {sorted(shapes)}")
    return imgs


def _write_metrics(path, entries):
    lines = [f"{k}={v}" for k, v in entries]
    with open(path, "w", encoding="ascii") as fh:
        fh.write("\n".join(lines) + "\n")


def _component_ssim(x1, x2, cfg):
    params = cfg.ssim_params()
    value = ssim(x1, x2, params)
    entries = [
        ("ssim", f"{value:.4f}"),
        ("ssim_window", params.window_side),
        ("ssim_sigma", params.sigma),
        ("ssim_k1", params.k1),
        ("ssim_k2", params.k2),
    ]
    return value, entries


def cmd_train(args):
    cfg = load_config(args.config)
    if args.seed is not None:
        cfg.seed = args.seed
    if len(args.images) < 2 or len(args.images) % 2 != 0:
        raise ValueError("expected an even list of paths: VISUAL XRAY [VISUAL XRAY ...]")
    pairs = []
    for vis_path, xray_path in zip(args.images[::2], args.images[1::2]):
        vis, _ = read_pgm(vis_path)
        xray, _ = read_pgm(xray_path)
        if vis.shape != xray.shape:
            raise ValueError(f"pair {vis_path} / {xray_path} differs in size")
        pairs.append((vis, xray))

    levels = cfg.levels
    trained_scales = max(1, cfg.scales - 1)
    triples = []
    for scale in range(1, trained_scales + 1):
        p = cfg.patch_sides[scale - 1]
        distinct = sum(
            max(0, (im.shape[0] - p + 1)) * max(0, (im.shape[1] - p + 1))
            for im, _ in pairs
        )
        if cfg.train_patches > distinct:
            print(
                f"warning: scale {scale}: {cfg.train_patches} patches requested but "
                f"only {distinct} distinct positions exist; sampling with replacement",
                file=sys.stderr,
            )
        ts = sample_training_patches(pairs, cfg.train_patches, levels, scale, cfg.seed + scale)
        triple, trace = train(ts, cfg.common_atoms, cfg.innovation_atoms, cfg.learn_config())
        triples.append(triple)
        for it, (obj_code, obj_psi, obj_phi) in enumerate(trace, start=1):
            print(f"scale {scale} iter {it}: coding={obj_code:.6g} "
                  f"psi={obj_psi:.6g} phi={obj_phi:.6g}")
    while len(triples) < cfg.scales:
        if cfg.patch_sides[len(triples)] != cfg.patch_sides[trained_scales - 1]:
            raise ValueError("cannot re-use finer dictionaries at a different patch size")
        triples.append(triples[-1])
    write_dictionaries(args.out, triples)
    print(f"wrote {args.out}")
    return 0


def cmd_separate(args):
    from .report import save_separation_report

    cfg = load_config(args.config)
    M, Y1, Y2 = _load_cosized([args.mixed, args.visual1, args.visual2])
    triples = read_dictionaries(args.dict)
    if len(triples) < cfg.scales:
        raise ValueError(f"dictionary file holds {len(triples)} scales, config needs {cfg.scales}")
    X1, X2 = separate_image(M, Y1, Y2, triples[: cfg.scales], cfg.separation_config())
    value, entries = _component_ssim(X1, X2, cfg)
    write_pgm(f"{args.out}_side1.pgm", X1)
    write_pgm(f"{args.out}_side2.pgm", X2)
    _write_metrics(f"{args.out}_metrics.txt", entries)
    save_separation_report(
        f"{args.out}_report.png",
        [("mixed", M), ("visual 1", Y1), ("visual 2", Y2), ("side 1", X1), ("side 2", X2)],
        f"guided separation: ssim={value:.4f}",
    )
    print(f"ssim={value:.4f}")
    return 0


def _mca_dictionary(triples, scales):
    if len(triples) < scales:
        raise ValueError(f"dictionary file holds {len(triples)} scales, config needs {scales}")
    lams = []
    for tr in triples[:scales]:
        lam, _ = normalize_columns(np.hstack([tr.phi_c, tr.phi]))
        lams.append(lam)
    return lams


def cmd_mca(args):
    from .report import save_separation_report

    cfg = load_config(args.config)
    M, _ = read_pgm(args.mixed)
    lam1 = _mca_dictionary(read_dictionaries(args.dict1), cfg.scales)
    lam2 = _mca_dictionary(read_dictionaries(args.dict2), cfg.scales)
    X1, X2 = mca_separate(M, lam1, lam2, cfg.mca_s1, cfg.mca_s2, cfg.separation_config())
    value, entries = _component_ssim(X1, X2, cfg)
    write_pgm(f"{args.out}_side1.pgm", X1)
    write_pgm(f"{args.out}_side2.pgm", X2)
    _write_metrics(f"{args.out}_metrics.txt", entries)
    save_separation_report(
        f"{args.out}_report.png",
        [("mixed", M), ("side 1", X1), ("side 2", X2)],
        f"mca separation: ssim={value:.4f}",
    )
    print(f"ssim={value:.4f}")
    return 0


def cmd_ssim(args):
    cfg = load_config(args.config)
    A, B = _load_cosized([args.image_a, args.image_b])
    value = ssim(A, B, cfg.ssim_params())
    print(f"ssim={value:.4f}")
    return 0


def cmd_synth(args):
    cfg = load_config(args.config)
    seed = cfg.seed if args.seed is None else args.seed
    scene = generate_scene(cfg, seed)
    write_scene(args.out, scene, cfg.scales)
    print(f"wrote synthetic scene to {args.out}")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="xsep",
        description="X-ray separation for double-sided paintings via coupled dictionaries",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="learn coupled dictionaries from image pairs")
    p.add_argument("images", nargs="+", help="alternating VISUAL XRAY paths")
    p.add_argument("--config", default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", required=True, help="output dictionary path")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("separate", help="guided separation of a mixed X-ray")
    p.add_argument("mixed")
    p.add_argument("visual1")
    p.add_argument("visual2")
    p.add_argument("--dict", required=True)
    p.add_argument("--config", default=None)
    p.add_argument("--out", required=True, help="output path prefix")
    p.set_defaults(func=cmd_separate)

    p = sub.add_parser("mca", help="MCA baseline separation")
    p.add_argument("mixed")
    p.add_argument("dict1")
    p.add_argument("dict2")
    p.add_argument("--config", default=None)
    p.add_argument("--out", required=True, help="output path prefix")
    p.set_defaults(func=cmd_mca)

    p = sub.add_parser("ssim", help="SSIM between two images")
    p.add_argument("image_a")
    p.add_argument("image_b")
    p.add_argument("--config", default=None)
    p.set_defaults(func=cmd_ssim)

    p = sub.add_parser("synth", help="generate a synthetic double-sided scene")
    p.add_argument("--config", default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_synth)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
