"""Greedy sparse decomposition: plain OMP and its budget-partitioned variant.

The budgeted pursuit walks the correlation-sorted atom list each iteration
and admits the best atom whose block still has budget, then refits all
selected coefficients by least squares. Ties in the correlation sort break
toward the lower atom index, which makes every pursuit deterministic.
"""

from dataclasses import dataclass, field

import numpy as np

from .numerics import as_matrix, as_vector, least_squares

__all__ = ["SparseCode", "BudgetPartition", "omp", "budgeted_omp", "greedy_step_oracle"]

# Pursuits stop once the residual is negligible relative to the signal;
# running further would only pick noise atoms.
RESIDUAL_TOL = 1e-12

UNIT_NORM_TOL = 1e-8


@dataclass(frozen=True)
class SparseCode:
    """Sparse vector as sorted (index, value) pairs in an ambient dimension."""

    dim: int
    indices: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        idx = np.asarray(self.indices, dtype=np.int64)
        val = np.asarray(self.values, dtype=np.float64)
        if idx.shape != val.shape or idx.ndim != 1:
            raise ValueError("indices and values must be 1-D and equally long")
        if idx.size and (np.any(np.diff(idx) <= 0) or idx[0] < 0 or idx[-1] >= self.dim):
            raise ValueError("indices must be strictly increasing and < dim")
        if np.any(val == 0.0):
            raise ValueError("stored values must be nonzero")
        object.__setattr__(self, "indices", idx)
        object.__setattr__(self, "values", val)

    def to_dense(self):
        w = np.zeros(self.dim)
        w[self.indices] = self.values
        return w

    @classmethod
    def from_pairs(cls, dim, indices, values):
        """Build a code from unsorted pairs, dropping exact zeros."""
        idx = np.asarray(indices, dtype=np.int64)
        val = np.asarray(values, dtype=np.float64)
        keep = val != 0.0
        idx, val = idx[keep], val[keep]
        order = np.argsort(idx)
        return cls(dim, idx[order], val[order])


@dataclass(frozen=True)
class BudgetPartition:
    """Disjoint covering blocks of atom indices, each with a sparsity cap."""

    blocks: tuple
    block_of: np.ndarray = field(repr=False, default=None)

    def __post_init__(self):
        blocks = tuple((np.asarray(ix, dtype=np.int64), int(budget)) for ix, budget in self.blocks)
        dim = sum(ix.size for ix, _ in blocks)
        block_of = np.full(dim, -1, dtype=np.int64)
        for k, (ix, budget) in enumerate(blocks):
            if budget < 0:
                raise ValueError(f"block {k} has negative budget")
            if ix.size and (ix.min() < 0 or ix.max() >= dim):
                raise ValueError("block indices out of range")
            if np.any(block_of[ix] != -1):
                raise ValueError("blocks must be disjoint")
            block_of[ix] = k
        if np.any(block_of == -1):
            raise ValueError("blocks must cover all indices")
        object.__setattr__(self, "blocks", blocks)
        object.__setattr__(self, "block_of", block_of)

    @property
    def dim(self):
        return self.block_of.size

    @property
    def budgets(self):
        return np.array([budget for _, budget in self.blocks], dtype=np.int64)

    @classmethod
    def contiguous(cls, sizes, budgets):
        """Partition 0..sum(sizes)-1 into consecutive blocks."""
        blocks, start = [], 0
        for size, budget in zip(sizes, budgets):
            blocks.append((np.arange(start, start + size), budget))
            start += size
        return cls(tuple(blocks))


def _check_dictionary(theta, b):
    theta = as_matrix(theta, "theta")
    b = as_vector(b, "b")
    if theta.shape[0] != b.shape[0]:
        raise ValueError("dictionary and signal dimensions differ")
    norms = np.linalg.norm(theta, axis=0)
    if np.any(np.abs(norms - 1.0) > UNIT_NORM_TOL):
        bad = int(np.argmax(np.abs(norms - 1.0)))
        raise ValueError(f"dictionary column {bad} is not unit-norm (norm={norms[bad]:.3g})")
    return theta, b


def greedy_step_oracle(theta, r, partition, selected, counts):
    """Pick the next atom the budgeted pursuit would admit.

    Walks atoms by decreasing |<r, theta_col>| (ties to the lower index) and
    returns the first one that is not yet selected and whose block budget is
    not exhausted.
    """
    corr = np.abs(theta.T @ r)
    order = np.argsort(-corr, kind="stable")
    budgets = partition.budgets
    for idx in order:
        if selected[idx]:
            continue
        k = partition.block_of[idx]
        if counts[k] < budgets[k]:
            return int(idx)
    raise RuntimeError("no admissible atom: all block budgets exhausted")


def budgeted_omp(theta, b, partition):
    """Greedy pursuit of b over theta with per-block sparsity budgets.

    Runs sum(budgets) iterations (early exit once the residual is
    negligible); each iteration admits one atom via greedy_step_oracle,
    refits all selected coefficients by least squares on the grown support,
    and updates the residual.
    """
    theta, b = _check_dictionary(theta, b)
    n, D = theta.shape
    if partition.dim != D:
        raise ValueError(f"partition covers {partition.dim} atoms, dictionary has {D}")
    budgets = partition.budgets
    total = int(budgets.sum())
    if total > n:
        raise ValueError(f"total budget {total} exceeds signal dimension {n}")

    selected = np.zeros(D, dtype=bool)
    counts = np.zeros(len(partition.blocks), dtype=np.int64)
    support = []
    coef = np.zeros(0)
    r = b.copy()
    b_norm = np.linalg.norm(b)
    for _ in range(total):
        if np.linalg.norm(r) <= RESIDUAL_TOL * b_norm:
            break
        idx = greedy_step_oracle(theta, r, partition, selected, counts)
        selected[idx] = True
        counts[partition.block_of[idx]] += 1
        support.append(idx)
        coef = least_squares(theta[:, support], b)
        r = b - theta[:, support] @ coef
    assert np.all(counts <= budgets), "block budget exceeded"
    return SparseCode.from_pairs(D, support, coef)


def omp(theta, b, s):
    """Plain orthogonal matching pursuit with sparsity budget s.

    Equivalent to budgeted_omp with a single all-atoms block.
    """
    theta = as_matrix(theta, "theta")
    d = theta.shape[1]
    if s > d:
        raise ValueError(f"budget {s} exceeds atom count {d}")
    partition = BudgetPartition.contiguous([d], [int(s)])
    return budgeted_omp(theta, b, partition)
