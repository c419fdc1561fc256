"""Kernel evaluation and Gram-matrix construction.

The Gaussian kernel is ``exp(-||x - z||**2 / sigma**2)``; note the width
enters squared in the denominator. Gram matrices are materialized in
full because the trainer repeatedly needs arbitrary rows; construction
refuses above a documented size cap to keep memory bounded.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import CapacityError, ParameterError, ShapeError

# n*n float64 entries; 20000 keeps the matrix around 3 GB worst case.
GRAM_CAPACITY = 20000


class KernelKind(str, enum.Enum):
    GAUSSIAN = "gaussian"
    LINEAR = "linear"


@dataclass(frozen=True)
class KernelSpec:
    kind: KernelKind
    sigma: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "kind", KernelKind(self.kind))
        if self.kind is KernelKind.GAUSSIAN and not self.sigma > 0:
            raise ParameterError(f"gaussian kernel width sigma must be > 0, got sigma={self.sigma}")

    @classmethod
    def gaussian(cls, sigma: float = 1.0) -> "KernelSpec":
        return cls(KernelKind.GAUSSIAN, sigma=sigma)

    @classmethod
    def linear(cls) -> "KernelSpec":
        return cls(KernelKind.LINEAR)


@dataclass(frozen=True)
class KernelMatrix:
    """Precomputed symmetric Gram matrix over one sample set.

    ``entries`` is read-only; rows handed out by :func:`kernel_row` are
    views into it, so the matrix can be shared across threads freely.
    """

    n: int
    entries: np.ndarray
    spec: KernelSpec


def kernel_eval(spec: KernelSpec, x, z) -> float:
    """Kernel value between two feature vectors."""
    x = np.asarray(x, dtype=float)
    z = np.asarray(z, dtype=float)
    if x.shape != z.shape:
        raise ShapeError("kernel arguments must have equal dimension", x.shape, z.shape)
    if spec.kind is KernelKind.LINEAR:
        return float(x @ z)
    d = x - z
    return float(np.exp(-(d @ d) / (spec.sigma * spec.sigma)))


def kernel_vector(spec: KernelSpec, X: np.ndarray, z) -> np.ndarray:
    """Kernel values between every row of ``X`` and the single point ``z``."""
    X = np.asarray(X, dtype=float)
    z = np.asarray(z, dtype=float)
    if X.ndim != 2 or z.shape != (X.shape[1],):
        raise ShapeError("point dimension must match sample matrix", X.shape, z.shape)
    if spec.kind is KernelKind.LINEAR:
        return X @ z
    d = X - z
    return np.exp(-np.einsum("ij,ij->i", d, d) / (spec.sigma * spec.sigma))


def gram_matrix(spec: KernelSpec, X) -> KernelMatrix:
    """Build the n-by-n kernel matrix of the rows of ``X``.

    The upper triangle is computed once and mirrored, so symmetry holds
    bit-exactly. Gaussian diagonals are exactly 1.
    """
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[0] == 0:
        raise ShapeError("sample matrix must be 2-d and non-empty", X.shape)
    n = X.shape[0]
    if n > GRAM_CAPACITY:
        raise CapacityError(
            f"gram matrix for n={n} samples exceeds the {GRAM_CAPACITY} cap; "
            "subsample or raise the cap knowingly"
        )
    if spec.kind is KernelKind.LINEAR:
        G = X @ X.T
        K = np.triu(G) + np.triu(G, 1).T
    else:
        K = np.empty((n, n), dtype=float)
        inv_s2 = 1.0 / (spec.sigma * spec.sigma)
        for i in range(n):
            d = X[i + 1 :] - X[i]
            row = np.exp(-np.einsum("ij,ij->i", d, d) * inv_s2)
            K[i, i] = 1.0
            K[i, i + 1 :] = row
            K[i + 1 :, i] = row
    K.setflags(write=False)
    return KernelMatrix(n=n, entries=K, spec=spec)


def kernel_row(matrix: KernelMatrix, j: int) -> np.ndarray:
    """Read-only view of row ``j`` of the Gram matrix."""
    if not 0 <= j < matrix.n:
        raise IndexError(f"row index {j} out of range for {matrix.n} samples")
    return matrix.entries[j]
