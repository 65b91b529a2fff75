"""Coupled dictionary learning.

Alternates between sparse-coding every training column against the stacked
system [[Psi_c, 0], [Phi_c, Phi]] (budgeted pursuit with separate caps for
common and innovation coefficients) and two closed-form ridge least-squares
dictionary updates: Psi_c from the visual patches, [Phi_c Phi] jointly from
the X-ray patches.
"""

from dataclasses import dataclass

import numpy as np

from .numerics import as_matrix, normalize_columns, odct_dictionary
from .parallel import chunked_map
from .patching import build_pyramid
from .sparse import BudgetPartition, budgeted_omp

__all__ = [
    "CoupledDictionaryTriple",
    "TrainingSet",
    "LearnConfig",
    "init_dictionary",
    "coupled_sparse_coding",
    "coupled_objective",
    "update_psi",
    "update_phi",
    "train",
    "sample_training_patches",
]

UNIT_NORM_TOL = 1e-10
DEAD_ATOM_TOL = 1e-12


@dataclass(frozen=True)
class CoupledDictionaryTriple:
    """Per-scale dictionaries: visual common, X-ray common, X-ray innovation."""

    psi_c: np.ndarray  # n x gamma
    phi_c: np.ndarray  # n x gamma
    phi: np.ndarray  # n x d

    def __post_init__(self):
        psi_c = as_matrix(self.psi_c, "psi_c")
        phi_c = as_matrix(self.phi_c, "phi_c")
        phi = as_matrix(self.phi, "phi")
        n = psi_c.shape[0]
        if phi_c.shape != psi_c.shape:
            raise ValueError("psi_c and phi_c must share their shape")
        if phi.shape[0] != n:
            raise ValueError("phi must share the row dimension of psi_c/phi_c")
        for name, mat in (("psi_c", psi_c), ("phi_c", phi_c), ("phi", phi)):
            norms = np.linalg.norm(mat, axis=0)
            if np.any(np.abs(norms - 1.0) > UNIT_NORM_TOL):
                bad = int(np.argmax(np.abs(norms - 1.0)))
                raise ValueError(f"{name} column {bad} is not unit-norm")
        object.__setattr__(self, "psi_c", psi_c)
        object.__setattr__(self, "phi_c", phi_c)
        object.__setattr__(self, "phi", phi)

    @property
    def n(self):
        return self.psi_c.shape[0]

    @property
    def gamma(self):
        return self.psi_c.shape[1]

    @property
    def d(self):
        return self.phi.shape[1]


@dataclass(frozen=True)
class TrainingSet:
    """Co-located DC-free visual (Y) and X-ray (X) texture patch columns."""

    X: np.ndarray
    Y: np.ndarray

    def __post_init__(self):
        X = as_matrix(self.X, "X")
        Y = as_matrix(self.Y, "Y")
        if X.shape != Y.shape:
            raise ValueError("X and Y must have identical dimensions")
        for name, mat in (("X", X), ("Y", Y)):
            scale = max(1.0, float(np.abs(mat).max(initial=0.0)))
            if np.any(np.abs(mat.mean(axis=0)) > 1e-10 * scale):
                raise ValueError(f"{name} columns must be DC-free")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "Y", Y)

    @property
    def n(self):
        return self.X.shape[0]

    @property
    def t(self):
        return self.X.shape[1]


@dataclass(frozen=True)
class LearnConfig:
    s_z: int
    s_v: int
    iterations: int = 50
    objective_tol: float = 1e-4
    seed: int = 0


def init_dictionary(n, k):
    """Overcomplete-DCT initialization for an n x k dictionary.

    When k is not a perfect square the ODCT is built at the next perfect
    square >= max(k, n) and the first k columns are kept.
    """
    rd = int(np.ceil(np.sqrt(max(k, n))))
    return odct_dictionary(n, rd * rd)[:, :k].copy()


def stacked_coding_operator(dicts):
    """Normalized stacked system for the coding step.

    Returns (theta, scales) with theta = [[psi_c, 0], [phi_c, phi]] column
    normalized; divide pursuit coefficients by `scales` afterward so codes
    refer to the original stacked columns.
    """
    n, gamma, d = dicts.n, dicts.gamma, dicts.d
    theta = np.zeros((2 * n, gamma + d))
    theta[:n, :gamma] = dicts.psi_c
    theta[n:, :gamma] = dicts.phi_c
    theta[n:, gamma:] = dicts.phi
    return normalize_columns(theta)


def coupled_sparse_coding(train_set, dicts, cfg):
    """Sparse-code every training column; returns (Z, V) dense code matrices."""
    if train_set.n != dicts.n:
        raise ValueError("training patches and dictionaries disagree on patch dim")
    gamma, d = dicts.gamma, dicts.d
    theta, scales = stacked_coding_operator(dicts)
    partition = BudgetPartition.contiguous([gamma, d], [cfg.s_z, cfg.s_v])

    def code_column(tau):
        b = np.concatenate([train_set.Y[:, tau], train_set.X[:, tau]])
        code = budgeted_omp(theta, b, partition)
        w = np.zeros(gamma + d)
        w[code.indices] = code.values / scales[code.indices]
        return w

    codes = chunked_map(code_column, range(train_set.t))
    W = np.column_stack(codes) if codes else np.zeros((gamma + d, 0))
    return W[:gamma, :], W[gamma:, :]


def coupled_objective(train_set, psi_c, phi_c, phi, Z, V):
    """0.5*||Y - Psi_c Z||_F^2 + 0.5*||X - Phi_c Z - Phi V||_F^2."""
    ry = train_set.Y - psi_c @ Z
    rx = train_set.X - phi_c @ Z - phi @ V
    return 0.5 * float(np.sum(ry * ry)) + 0.5 * float(np.sum(rx * rx))


def _ridge_update(B, C):
    """argmin_A ||B - A C||_F^2 with a tiny ridge on C C^T.

    The ridge keeps the system solvable when some atoms went unused.
    """
    k = C.shape[0]
    G = C @ C.T
    tr = float(np.trace(G))
    if tr == 0.0:
        raise ValueError("code matrix is all-zero; cannot update dictionary")
    lam = 1e-10 * tr / k
    G[np.diag_indices_from(G)] += lam
    return np.linalg.solve(G, (B @ C.T).T).T


def _normalize_with_scales(M):
    """Unit-normalize columns; dead (tiny) columns get scale 0 and are left
    for the caller's dead-atom replacement."""
    norms = np.linalg.norm(M, axis=0)
    out = M.copy()
    scales = norms.copy()
    alive = norms > DEAD_ATOM_TOL
    out[:, alive] /= norms[alive]
    scales[~alive] = 0.0
    return out, scales


def update_psi(Y, Z):
    """Closed-form visual-dictionary update.

    Returns (unit-norm matrix, column scales); fold the scales into the
    matching code rows if the product must be preserved. Columns of dead
    atoms come back with scale 0.
    """
    raw = _ridge_update(as_matrix(Y, "Y"), as_matrix(Z, "Z"))
    return _normalize_with_scales(raw)


def update_phi(X, Z, V):
    """Closed-form joint X-ray update over [Phi_c Phi] against [Z; V].

    Returns (unit-norm n x (gamma+d) matrix, column scales); split at
    column gamma for the common/innovation parts.
    """
    C = np.vstack([as_matrix(Z, "Z"), as_matrix(V, "V")])
    raw = _ridge_update(as_matrix(X, "X"), C)
    return _normalize_with_scales(raw)


def _replace_dead_atoms(train_set, psi_c, phi_c, phi, Z, V, scales_common, scales_innov):
    """Overwrite unused atoms with the worst-reconstructed training columns."""
    dead_common = np.flatnonzero((np.abs(Z) > 0).sum(axis=1) == 0)
    dead_innov = np.flatnonzero((np.abs(V) > 0).sum(axis=1) == 0)
    dead_common = np.union1d(dead_common, np.flatnonzero(scales_common == 0.0))
    dead_innov = np.union1d(dead_innov, np.flatnonzero(scales_innov == 0.0))
    if dead_common.size == 0 and dead_innov.size == 0:
        return psi_c, phi_c, phi

    ry = train_set.Y - psi_c @ (scales_common[:, None] * Z)
    rx = train_set.X - phi_c @ (scales_common[:, None] * Z) - phi @ (scales_innov[:, None] * V)
    badness = np.sum(ry * ry, axis=0) + np.sum(rx * rx, axis=0)
    order = np.argsort(-badness, kind="stable")

    psi_c, phi_c, phi = psi_c.copy(), phi_c.copy(), phi.copy()
    pos = 0
    for j in dead_common:
        while pos < order.size:
            tau = order[pos]
            pos += 1
            ny = np.linalg.norm(train_set.Y[:, tau])
            nx = np.linalg.norm(train_set.X[:, tau])
            if ny > DEAD_ATOM_TOL and nx > DEAD_ATOM_TOL:
                psi_c[:, j] = train_set.Y[:, tau] / ny
                phi_c[:, j] = train_set.X[:, tau] / nx
                break
        else:
            break
    for j in dead_innov:
        while pos < order.size:
            tau = order[pos]
            pos += 1
            nx = np.linalg.norm(train_set.X[:, tau])
            if nx > DEAD_ATOM_TOL:
                phi[:, j] = train_set.X[:, tau] / nx
                break
        else:
            break
    return psi_c, phi_c, phi


def train(train_set, gamma, d, cfg):
    """Learn a coupled triple from paired training patches.

    Returns (triple, trace) where trace rows are the objective measured
    after the coding step, after the visual update and after the X-ray
    update of each iteration. The two update entries are evaluated before
    column re-normalization, where the closed form is guaranteed not to
    increase the objective.
    """
    n = train_set.n
    psi_c = init_dictionary(n, gamma)
    phi_c = init_dictionary(n, gamma)
    phi = init_dictionary(n, d)
    trace = []
    prev = None
    for _ in range(cfg.iterations):
        dicts = CoupledDictionaryTriple(psi_c, phi_c, phi)
        Z, V = coupled_sparse_coding(train_set, dicts, cfg)
        obj_code = coupled_objective(train_set, psi_c, phi_c, phi, Z, V)

        psi_raw = _ridge_update(train_set.Y, Z)
        obj_psi = coupled_objective(train_set, psi_raw, phi_c, phi, Z, V)

        phibar_raw = _ridge_update(train_set.X, np.vstack([Z, V]))
        phi_c_raw = phibar_raw[:, :gamma]
        phi_raw = phibar_raw[:, gamma:]
        obj_phi = coupled_objective(train_set, psi_raw, phi_c_raw, phi_raw, Z, V)
        trace.append((obj_code, obj_psi, obj_phi))

        psi_c, scales_psi = _normalize_with_scales(psi_raw)
        phibar, scales_bar = _normalize_with_scales(phibar_raw)
        phi_c, phi = phibar[:, :gamma], phibar[:, gamma:]
        # dead columns inherit the previous atom so norms stay valid
        for j in np.flatnonzero(scales_psi == 0.0):
            psi_c[:, j] = dicts.psi_c[:, j]
        for j in np.flatnonzero(scales_bar[:gamma] == 0.0):
            phi_c[:, j] = dicts.phi_c[:, j]
        for j in np.flatnonzero(scales_bar[gamma:] == 0.0):
            phi[:, j] = dicts.phi[:, j]
        psi_c, phi_c, phi = _replace_dead_atoms(
            train_set, psi_c, phi_c, phi, Z, V, scales_bar[:gamma], scales_bar[gamma:]
        )

        if prev is not None and prev > 0:
            if abs(prev - obj_phi) / prev < cfg.objective_tol:
                prev = obj_phi
                break
        prev = obj_phi
    return CoupledDictionaryTriple(psi_c, phi_c, phi), trace


def sample_training_patches(pairs, t, levels, scale, seed):
    """Draw t random co-located DC-free patch pairs at the given scale.

    `pairs` is a list of (visual image, xray image) arrays; `levels` the
    per-scale (patch_side, step) list; positions are uniform over all valid
    top-left corners at that scale (with replacement).
    """
    if not pairs:
        raise ValueError("need at least one training image pair")
    if not 1 <= scale <= len(levels):
        raise ValueError(f"scale {scale} outside configured levels")
    patch_side = levels[scale - 1][0]
    rng = np.random.default_rng(seed)
    sources = []
    for vis, xray in pairs:
        vis = np.asarray(vis, dtype=np.float64)
        xray = np.asarray(xray, dtype=np.float64)
        if vis.shape != xray.shape:
            raise ValueError("co-registered pair images must share dimensions")
        if scale > 1:
            _, vis = build_pyramid(vis, levels[: scale - 1])
            _, xray = build_pyramid(xray, levels[: scale - 1])
        if min(vis.shape) < patch_side:
            raise ValueError(f"pair too small for patch_side {patch_side} at scale {scale}")
        sources.append((vis, xray))

    ys, xs = [], []
    for _ in range(t):
        pi = int(rng.integers(len(sources)))
        vis, xray = sources[pi]
        H, W = vis.shape
        r = int(rng.integers(H - patch_side + 1))
        c = int(rng.integers(W - patch_side + 1))
        yp = vis[r : r + patch_side, c : c + patch_side].ravel()
        xp = xray[r : r + patch_side, c : c + patch_side].ravel()
        ys.append(yp - yp.mean())
        xs.append(xp - xp.mean())
    n = patch_side * patch_side
    Y = np.column_stack(ys) if ys else np.zeros((n, 0))
    X = np.column_stack(xs) if xs else np.zeros((n, 0))
    return TrainingSet(X=X, Y=Y)
