"""Synthetic double-sided scene generator.

Plants two disjoint coupled dictionary triples (one per side, sharing the
innovation dictionary), draws sparse codes on a non-overlapping tile grid,
and renders visual images y1/y2, per-side X-rays x1/x2 and their mixture
m = x1 + x2, together with the ground-truth dictionaries and codes. Used
for end-to-end experiments where the real painting data cannot be.
"""

import os

import numpy as np

from .dictlearn import CoupledDictionaryTriple
from .io import write_dictionaries, write_pgm
from .numerics import normalize_columns

__all__ = ["generate_scene", "write_scene"]

MAXVAL = 65535
# per-side X-ray intensities stay below 0.5 so the 16-bit mixture never clips
XRAY_HALF = 32767


def _random_dictionary(rng, n, k):
    M = rng.standard_normal((n, k))
    M, _ = normalize_columns(M)
    return M


def _smooth_background(rng, size):
    r = np.linspace(0.0, 2.0 * np.pi, size)
    fr, fc = rng.uniform(0.5, 1.5, size=2)
    pr, pc = rng.uniform(0.0, 2.0 * np.pi, size=2)
    return np.add.outer(np.sin(fr * r + pr), np.cos(fc * r + pc)) / 2.0


def _sparse_tile_codes(rng, dim, budget, tiles):
    codes = np.zeros((dim, tiles))
    for k in range(tiles):
        if budget > 0:
            idx = rng.choice(dim, size=budget, replace=False)
            codes[idx, k] = rng.standard_normal(budget)
    return codes


def generate_scene(cfg, seed):
    """Build the synthetic scene arrays for a RunConfig and seed."""
    p = cfg.patch_sides[0]
    size = cfg.synth_size
    if size % p != 0 or size < p:
        raise ValueError(f"synth_size {size} must be a positive multiple of {p}")
    n = p * p
    gamma, d = cfg.common_atoms, cfg.innovation_atoms
    rng = np.random.default_rng(seed)

    triples = []
    for _ in range(2):
        triples.append(
            (_random_dictionary(rng, n, gamma), _random_dictionary(rng, n, gamma))
        )
    phi = _random_dictionary(rng, n, d)

    g = size // p
    tiles = g * g
    z = [_sparse_tile_codes(rng, gamma, min(cfg.s_z, gamma), tiles) for _ in range(2)]
    v = _sparse_tile_codes(rng, d, min(cfg.s_v, min(d, n)), tiles)

    def tile_image(cols):
        # cols: n x tiles, one vectorized tile per grid position
        return cols.T.reshape(g, g, p, p).transpose(0, 2, 1, 3).reshape(size, size)

    ys, xs = [], []
    for i in range(2):
        psi_c, phi_c = triples[i]
        y_tex = tile_image(psi_c @ z[i])
        x_tex = tile_image(phi_c @ z[i] + phi @ v)
        for tex in (y_tex, x_tex):
            peak = np.abs(tex).max()
            if peak > 0:
                tex /= peak
        y = 0.5 + 0.15 * _smooth_background(rng, size) + 0.25 * y_tex
        x = 0.25 + 0.08 * _smooth_background(rng, size) + 0.12 * x_tex
        ys.append(np.clip(y, 0.0, 1.0))
        xs.append(np.clip(x, 0.0, 0.5))

    kx = [np.minimum(np.rint(x * MAXVAL), XRAY_HALF) for x in xs]
    x1, x2 = kx[0] / MAXVAL, kx[1] / MAXVAL
    m = (kx[0] + kx[1]) / MAXVAL

    union = CoupledDictionaryTriple(
        psi_c=np.hstack([triples[0][0], triples[1][0]]),
        phi_c=np.hstack([triples[0][1], triples[1][1]]),
        phi=phi,
    )
    side = [
        CoupledDictionaryTriple(psi_c=t[0], phi_c=t[1], phi=phi) for t in triples
    ]
    return {
        "y1": ys[0],
        "y2": ys[1],
        "x1": x1,
        "x2": x2,
        "m": m,
        "union": union,
        "side1": side[0],
        "side2": side[1],
        "z1": z[0],
        "z2": z[1],
        "v": v,
    }


def write_scene(outdir, scene, scales):
    """Write the scene to disk: PGMs, ground-truth dictionaries and codes."""
    os.makedirs(outdir, exist_ok=True)
    for name in ("y1", "y2", "x1", "x2", "m"):
        write_pgm(os.path.join(outdir, f"{name}.pgm"), scene[name], MAXVAL)
    write_dictionaries(os.path.join(outdir, "dict_union.cdl"), [scene["union"]] * scales)
    write_dictionaries(os.path.join(outdir, "dict_side1.cdl"), [scene["side1"]] * scales)
    write_dictionaries(os.path.join(outdir, "dict_side2.cdl"), [scene["side2"]] * scales)
    for name in ("z1", "z2", "v"):
        np.save(os.path.join(outdir, f"{name}.npy"), scene[name])
