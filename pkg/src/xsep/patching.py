"""Overlapping patch extraction, DC separation and the multi-level low-pass
pyramid.

An image of size HxW is covered by floor(H/step) x floor(W/step) patches
whose top-left corners sit on the step lattice; patches reaching past the
bottom/right edge read edge-replicated pixels. `overlap_add` folds those
padded contributions back onto the edge pixels they replicated, which makes
collapse_pyramid(build_pyramid(img)) an exact identity.
"""

from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

__all__ = [
    "PatchGrid",
    "PyramidLevel",
    "extract_patches",
    "remove_dc",
    "assemble_dc_image",
    "overlap_add",
    "upsample_lowpass",
    "build_pyramid",
    "collapse_pyramid",
]


@dataclass(frozen=True)
class PatchGrid:
    """Patches of one image, row-major over grid positions (u1, u2)."""

    patch_side: int
    step: int
    grid_h: int
    grid_w: int
    patches: np.ndarray  # shape (grid_h*grid_w, patch_side**2)

    def __post_init__(self):
        n = self.patch_side * self.patch_side
        if self.patches.shape != (self.grid_h * self.grid_w, n):
            raise ValueError(
                f"patch array shape {self.patches.shape} inconsistent with "
                f"{self.grid_h}x{self.grid_w} grid of side-{self.patch_side} patches"
            )


@dataclass(frozen=True)
class PyramidLevel:
    """One pyramid scale: zero-mean texture patches plus the DC low-pass."""

    scale: int
    texture: PatchGrid
    lowpass: np.ndarray  # shape (grid_h, grid_w)
    source_h: int
    source_w: int

    def __post_init__(self):
        if self.lowpass.shape != (self.texture.grid_h, self.texture.grid_w):
            raise ValueError("lowpass dimensions must match the texture grid")


def _check_geometry(H, W, patch_side, step):
    if patch_side < 1 or step < 1:
        raise ValueError("patch_side and step must be >= 1")
    if step > patch_side:
        raise ValueError(f"step {step} exceeds patch_side {patch_side}")
    if patch_side > min(H, W):
        raise ValueError(f"patch_side {patch_side} exceeds image side ({H}x{W})")
    # the floor(H/step) grid must cover every pixel, else overlap_add has
    # pixels no patch ever read
    if (H // step - 1) * step + patch_side < H or (W // step - 1) * step + patch_side < W:
        raise ValueError(
            f"patch grid (side {patch_side}, step {step}) leaves uncovered "
            f"pixels on a {H}x{W} image"
        )


def extract_patches(img, patch_side, step):
    """Slice img into overlapping patches on the step lattice.

    Bottom/right reads past the edge use edge replication.
    """
    img = np.asarray(img, dtype=np.float64)
    H, W = img.shape
    _check_geometry(H, W, patch_side, step)
    grid_h = H // step
    grid_w = W // step
    pad_h = max(0, (grid_h - 1) * step + patch_side - H)
    pad_w = max(0, (grid_w - 1) * step + patch_side - W)
    padded = np.pad(img, ((0, pad_h), (0, pad_w)), mode="edge")
    win = sliding_window_view(padded, (patch_side, patch_side))[::step, ::step]
    win = win[:grid_h, :grid_w]
    patches = win.reshape(grid_h * grid_w, patch_side * patch_side).copy()
    return PatchGrid(patch_side, step, grid_h, grid_w, patches)


def remove_dc(patch):
    """Split a patch vector into (zero-mean texture, mean value)."""
    patch = np.asarray(patch, dtype=np.float64)
    if patch.size < 1:
        raise ValueError("empty patch")
    dc = float(patch.mean())
    return patch - dc, dc


def assemble_dc_image(dc_values, grid_h, grid_w):
    """Place per-patch DC values on the grid: one pixel per patch position."""
    dc = np.asarray(dc_values, dtype=np.float64).reshape(grid_h, grid_w)
    return dc.copy()


def overlap_add(grid, H, W):
    """Reassemble an HxW image by averaging overlapping patch values.

    Each pixel takes the plain average of every patch value covering it;
    contributions that fell on replicated padding are folded back onto the
    edge pixel they replicated, so the operation exactly inverts
    extract_patches under identity per-patch processing.
    """
    p, step = grid.patch_side, grid.step
    gh, gw = grid.grid_h, grid.grid_w
    _check_geometry(H, W, p, step)
    if gh != H // step or gw != W // step:
        raise ValueError("grid dimensions inconsistent with target image size")
    pad_h = max(0, (gh - 1) * step + p - H)
    pad_w = max(0, (gw - 1) * step + p - W)
    acc = np.zeros((H + pad_h, W + pad_w))
    wt = np.zeros((H + pad_h, W + pad_w))
    vals = grid.patches.reshape(gh, gw, p, p)
    for di in range(p):
        for dj in range(p):
            sl = (slice(di, di + gh * step, step), slice(dj, dj + gw * step, step))
            acc[sl] += vals[:, :, di, dj]
            wt[sl] += 1.0
    if pad_h:
        acc[H - 1, :] += acc[H:, :].sum(axis=0)
        wt[H - 1, :] += wt[H:, :].sum(axis=0)
    if pad_w:
        acc[:H, W - 1] += acc[:H, W:].sum(axis=1)
        wt[:H, W - 1] += wt[:H, W:].sum(axis=1)
    return acc[:H, :W] / wt[:H, :W]


def upsample_lowpass(lowpass, H, W, patch_side, step):
    """Expand a low-pass image back to HxW.

    Each low-pass pixel becomes a constant patch at its grid position and
    the patches are overlap-added; this is the exact linear counterpart of
    DC aggregation, so pyramid reconstruction stays lossless.
    """
    lowpass = np.asarray(lowpass, dtype=np.float64)
    gh, gw = H // step, W // step
    if lowpass.shape != (gh, gw):
        raise ValueError(
            f"lowpass shape {lowpass.shape} does not match expected ({gh}, {gw})"
        )
    n = patch_side * patch_side
    patches = np.repeat(lowpass.reshape(-1, 1), n, axis=1)
    grid = PatchGrid(patch_side, step, gh, gw, patches)
    return overlap_add(grid, H, W)


def build_pyramid(img, levels):
    """Decompose img into texture/low-pass levels.

    `levels` is a sequence of (patch_side, step) pairs, finest first. Level
    l+1 decomposes level l's low-pass. Returns (level list, coarsest
    low-pass image).
    """
    img = np.asarray(img, dtype=np.float64)
    if not levels:
        raise ValueError("need at least one pyramid level")
    out = []
    cur = img
    for idx, (patch_side, step) in enumerate(levels, start=1):
        H, W = cur.shape
        if patch_side > min(H, W):
            raise ValueError(
                f"level {idx}: low-pass of size {H}x{W} is smaller than "
                f"patch_side {patch_side}"
            )
        grid = extract_patches(cur, patch_side, step)
        dc = grid.patches.mean(axis=1)
        texture = PatchGrid(
            patch_side, step, grid.grid_h, grid.grid_w, grid.patches - dc[:, None]
        )
        lowpass = assemble_dc_image(dc, grid.grid_h, grid.grid_w)
        out.append(PyramidLevel(idx, texture, lowpass, H, W))
        cur = lowpass
    return out, cur


def collapse_pyramid(levels, coarsest_lowpass):
    """Invert build_pyramid: upsample-and-add from coarsest to finest."""
    if not levels:
        raise ValueError("need at least one pyramid level")
    cur = np.asarray(coarsest_lowpass, dtype=np.float64)
    if cur.shape != levels[-1].lowpass.shape:
        raise ValueError(
            f"coarsest low-pass shape {cur.shape} does not match final level "
            f"shape {levels[-1].lowpass.shape}"
        )
    for upper, lower in zip(levels[:-1], levels[1:]):
        if (lower.source_h, lower.source_w) != upper.lowpass.shape:
            raise ValueError(
                f"level {lower.scale} source size does not match level "
                f"{upper.scale} low-pass size"
            )
    for level in reversed(levels):
        H, W = level.source_h, level.source_w
        tex = overlap_add(level.texture, H, W)
        lp = upsample_lowpass(cur, H, W, level.texture.patch_side, level.texture.step)
        cur = tex + lp
    return cur
