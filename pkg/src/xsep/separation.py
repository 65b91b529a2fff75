"""Guided X-ray separation and the MCA baseline.

Per texture patch, the guided path solves the stacked system

    [ m  ]   [ Phi_c  Phi_c  2*Phi ] [ z1c ]
    [ y1 ] = [ Psi_c    0      0   ] [ z2c ]
    [ y2 ]   [   0    Psi_c    0   ] [  v  ]

with per-block sparsity budgets, then reconstructs each side from its
common code only (the innovation part is solved for but deliberately left
out of the outputs). A multi-scale wrapper runs this patch-per-patch over a
DC pyramid and splits the coarsest low-pass between the two sides.
"""

from dataclasses import dataclass

import numpy as np

from .numerics import as_matrix, as_vector, normalize_columns
from .parallel import chunked_map
from .patching import PatchGrid, PyramidLevel, build_pyramid, collapse_pyramid
from .sparse import BudgetPartition, budgeted_omp

__all__ = [
    "StackedSystem",
    "SeparationConfig",
    "build_stacked_system",
    "separate_patch",
    "separate_image",
    "mca_separate",
]


@dataclass(frozen=True)
class StackedSystem:
    """Per-patch pursuit problem: signal, normalized operator, budgets."""

    b: np.ndarray
    theta: np.ndarray
    scales: np.ndarray
    partition: BudgetPartition


@dataclass(frozen=True)
class SeparationConfig:
    """Multi-scale separation parameters; levels are (patch_side, step)."""

    levels: tuple
    s_z: int
    s_v: int
    lowpass_split: float = 0.5

    def __post_init__(self):
        object.__setattr__(self, "levels", tuple((int(p), int(e)) for p, e in self.levels))
        if not self.levels:
            raise ValueError("need at least one scale")
        for p, e in self.levels:
            if not 1 <= e <= p:
                raise ValueError(f"invalid (patch_side, step) = ({p}, {e})")
        if not 0.0 <= self.lowpass_split <= 1.0:
            raise ValueError("lowpass_split must lie in [0, 1]")
        if self.s_z < 0 or self.s_v < 0:
            raise ValueError("budgets must be >= 0")


def _stacked_operator(dicts, s_z, s_v):
    """Normalized guided-separation operator shared by all patches of a scale."""
    n, gamma, d = dicts.n, dicts.gamma, dicts.d
    theta = np.zeros((3 * n, 2 * gamma + d))
    theta[:n, :gamma] = dicts.phi_c
    theta[:n, gamma : 2 * gamma] = dicts.phi_c
    theta[:n, 2 * gamma :] = 2.0 * dicts.phi
    theta[n : 2 * n, :gamma] = dicts.psi_c
    theta[2 * n : 3 * n, gamma : 2 * gamma] = dicts.psi_c
    theta, scales = normalize_columns(theta)
    partition = BudgetPartition.contiguous([gamma, gamma, d], [s_z, s_z, s_v])
    return theta, scales, partition


def build_stacked_system(m, y1, y2, dicts, s_z, s_v):
    """Assemble the guided pursuit problem for one patch triple."""
    m = as_vector(m, "m")
    y1 = as_vector(y1, "y1")
    y2 = as_vector(y2, "y2")
    if not (m.shape == y1.shape == y2.shape == (dicts.n,)):
        raise ValueError("m, y1, y2 must all have the dictionaries' patch dimension")
    theta, scales, partition = _stacked_operator(dicts, s_z, s_v)
    b = np.concatenate([m, y1, y2])
    return StackedSystem(b=b, theta=theta, scales=scales, partition=partition)


def _solve_stacked(b, theta, scales, partition, gamma, d):
    code = budgeted_omp(theta, b, partition)
    w = np.zeros(2 * gamma + d)
    w[code.indices] = code.values / scales[code.indices]
    return w[:gamma], w[gamma : 2 * gamma], w[2 * gamma :]


def separate_patch(m, y1, y2, dicts, s_z, s_v, return_codes=False):
    """Separate one mixed texture patch guided by its two visual patches.

    Returns the two per-side texture estimates Phi_c @ z_ic; the shared
    innovation code is solved for but omitted from both reconstructions
    (set return_codes=True to inspect it).
    """
    sys = build_stacked_system(m, y1, y2, dicts, s_z, s_v)
    z1, z2, v = _solve_stacked(
        sys.b, sys.theta, sys.scales, sys.partition, dicts.gamma, dicts.d
    )
    x1 = dicts.phi_c @ z1
    x2 = dicts.phi_c @ z2
    if return_codes:
        return x1, x2, (z1, z2, v)
    return x1, x2


def _replace_texture(level, patches):
    grid = level.texture
    new_grid = PatchGrid(grid.patch_side, grid.step, grid.grid_h, grid.grid_w, patches)
    return PyramidLevel(level.scale, new_grid, level.lowpass, level.source_h, level.source_w)


def _check_cosized(*imgs):
    shapes = {np.asarray(i).shape for i in imgs}
    if len(shapes) != 1:
        raise ValueError(f"images must share dimensions, got {sorted(shapes)}")


def separate_image(M, Y1, Y2, dicts_per_scale, cfg):
    """Full multi-scale guided separation of a mixed X-ray image.

    `dicts_per_scale` holds one CoupledDictionaryTriple per level (repeat
    the finest trained triple for the coarsest scale when training data ran
    out there). The mixed coarsest low-pass is split lowpass_split /
    (1 - lowpass_split) between the sides.
    """
    M = np.asarray(M, dtype=np.float64)
    Y1 = np.asarray(Y1, dtype=np.float64)
    Y2 = np.asarray(Y2, dtype=np.float64)
    _check_cosized(M, Y1, Y2)
    if len(dicts_per_scale) != len(cfg.levels):
        raise ValueError("need one dictionary triple per scale")

    m_levels, m_lp = build_pyramid(M, cfg.levels)
    y1_levels, _ = build_pyramid(Y1, cfg.levels)
    y2_levels, _ = build_pyramid(Y2, cfg.levels)

    side1_levels, side2_levels = [], []
    for ml, y1l, y2l, dicts in zip(m_levels, y1_levels, y2_levels, dicts_per_scale):
        n = ml.texture.patch_side ** 2
        if dicts.n != n:
            raise ValueError(
                f"scale {ml.scale}: dictionary patch dim {dicts.n} != {n}"
            )
        theta, scales, partition = _stacked_operator(dicts, cfg.s_z, cfg.s_v)
        mp, y1p, y2p = ml.texture.patches, y1l.texture.patches, y2l.texture.patches

        def solve(tau):
            b = np.concatenate([mp[tau], y1p[tau], y2p[tau]])
            z1, z2, _ = _solve_stacked(b, theta, scales, partition, dicts.gamma, dicts.d)
            return dicts.phi_c @ z1, dicts.phi_c @ z2

        results = chunked_map(solve, range(mp.shape[0]))
        x1 = np.array([r[0] for r in results]).reshape(mp.shape)
        x2 = np.array([r[1] for r in results]).reshape(mp.shape)
        side1_levels.append(_replace_texture(ml, x1))
        side2_levels.append(_replace_texture(ml, x2))

    X1 = collapse_pyramid(side1_levels, cfg.lowpass_split * m_lp)
    X2 = collapse_pyramid(side2_levels, (1.0 - cfg.lowpass_split) * m_lp)
    return X1, X2


def mca_separate(M, lam1, lam2, s1, s2, cfg):
    """Multi-scale MCA baseline: greedy split of M over two dictionaries.

    Per texture patch, runs the budgeted pursuit on [lam1 lam2] with
    budgets (s1, s2) and reconstructs side i from its own atoms; low-pass
    handling matches separate_image. `lam1`/`lam2` may be single matrices
    (reused across scales) or per-scale lists.
    """
    M = np.asarray(M, dtype=np.float64)
    if isinstance(lam1, np.ndarray):
        lam1 = [lam1] * len(cfg.levels)
    if isinstance(lam2, np.ndarray):
        lam2 = [lam2] * len(cfg.levels)
    if len(lam1) != len(cfg.levels) or len(lam2) != len(cfg.levels):
        raise ValueError("need one dictionary per scale for each side")

    m_levels, m_lp = build_pyramid(M, cfg.levels)
    side1_levels, side2_levels = [], []
    for ml, L1, L2 in zip(m_levels, lam1, lam2):
        L1 = as_matrix(L1, "lam1")
        L2 = as_matrix(L2, "lam2")
        n = ml.texture.patch_side ** 2
        if L1.shape[0] != n or L2.shape[0] != n:
            raise ValueError(f"scale {ml.scale}: dictionary patch dim mismatch")
        theta = np.hstack([L1, L2])
        theta, scales = normalize_columns(theta)
        d1 = L1.shape[1]
        partition = BudgetPartition.contiguous([d1, L2.shape[1]], [s1, s2])
        mp = ml.texture.patches

        def solve(tau):
            code = budgeted_omp(theta, mp[tau], partition)
            w = np.zeros(theta.shape[1])
            w[code.indices] = code.values / scales[code.indices]
            return L1 @ w[:d1], L2 @ w[d1:]

        results = chunked_map(solve, range(mp.shape[0]))
        x1 = np.array([r[0] for r in results]).reshape(mp.shape)
        x2 = np.array([r[1] for r in results]).reshape(mp.shape)
        side1_levels.append(_replace_texture(ml, x1))
        side2_levels.append(_replace_texture(ml, x2))

    X1 = collapse_pyramid(side1_levels, cfg.lowpass_split * m_lp)
    X2 = collapse_pyramid(side2_levels, (1.0 - cfg.lowpass_split) * m_lp)
    return X1, X2
