"""Dense linear-algebra kernels shared by the rest of the toolkit.

Everything works on plain float64 numpy arrays: matrices are 2-D arrays
(columns are atoms), vectors are 1-D arrays. All functions are pure.
"""

import numpy as np

__all__ = [
    "as_matrix",
    "as_vector",
    "least_squares",
    "normalize_columns",
    "odct_frame",
    "odct_dictionary",
]


def as_matrix(a, name="matrix"):
    """Coerce to a finite float64 2-D array, raising ValueError otherwise."""
    m = np.asarray(a, dtype=np.float64)
    if m.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got ndim={m.ndim}")
    if not np.all(np.isfinite(m)):
        raise ValueError(f"{name} contains non-finite entries")
    return m


def as_vector(a, name="vector"):
    """Coerce to a finite float64 1-D array, raising ValueError otherwise."""
    v = np.asarray(a, dtype=np.float64)
    if v.ndim != 1:
        raise ValueError(f"{name} must be 1-D, got ndim={v.ndim}")
    if not np.all(np.isfinite(v)):
        raise ValueError(f"{name} contains non-finite entries")
    return v


def least_squares(A, b):
    """Minimize ||A x - b||_2; returns the minimum-norm minimizer.

    Uses a rank-revealing (SVD-based) solver so rank-deficient systems
    yield the minimum-norm solution instead of failing.
    """
    A = as_matrix(A, "A")
    b = as_vector(b, "b")
    if A.shape[0] != b.shape[0]:
        raise ValueError(
            f"dimension mismatch: A has {A.shape[0]} rows, b has length {b.shape[0]}"
        )
    x, _, _, _ = np.linalg.lstsq(A, b, rcond=None)
    return x


def normalize_columns(M):
    """Rescale each column of M to unit l2 norm.

    Returns (normalized matrix, original column norms). A zero column is
    an error since it cannot be normalized.
    """
    M = as_matrix(M, "M")
    norms = np.linalg.norm(M, axis=0)
    zero = np.flatnonzero(norms == 0.0)
    if zero.size:
        raise ValueError(f"cannot normalize zero column at index {int(zero[0])}")
    return M / norms, norms


def odct_frame(size, natoms):
    """1-D overcomplete DCT frame: `size` samples x `natoms` atoms.

    Atom j samples cos(pi * j * (2i+1) / (2*natoms)) over pixel index i.
    Non-DC atoms are mean-removed; all atoms are unit-normalized.
    """
    if size < 1 or natoms < size:
        raise ValueError(f"need natoms >= size >= 1, got {size}, {natoms}")
    i = np.arange(size, dtype=np.float64)
    j = np.arange(natoms, dtype=np.float64)
    F = np.cos(np.pi * np.outer(2.0 * i + 1.0, j) / (2.0 * natoms))
    F[:, 1:] -= F[:, 1:].mean(axis=0)
    F, _ = normalize_columns(F)
    return F


def odct_dictionary(n, d):
    """2-D overcomplete DCT dictionary of shape n x d (both perfect squares).

    Kronecker product of two 1-D ODCT frames of size sqrt(n) x sqrt(d);
    columns come out unit-norm.
    """
    rn = int(round(np.sqrt(n)))
    rd = int(round(np.sqrt(d)))
    if rn * rn != n:
        raise ValueError(f"patch dimension n={n} is not a perfect square")
    if rd * rd != d:
        raise ValueError(f"atom count d={d} is not a perfect square")
    if d < n:
        raise ValueError(f"need d >= n, got n={n}, d={d}")
    F = odct_frame(rn, rd)
    D = np.kron(F, F)
    D, _ = normalize_columns(D)
    return D
