"""Kernel evaluation and Gram matrices, including the bias-augmented variant.

The augmented Gram ``K + 1`` realizes a constant bias coordinate in feature
space: under the linear kernel it equals the dot product of rows with a
trailing 1 appended, and it gives nonlinear kernels a bias without a separate
code path.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

KERNEL_KINDS = ("linear", "rbf", "polynomial")


@dataclass(frozen=True)
class KernelSpec:
    """Kernel family plus its single parameter.

    ``delta`` is the RBF length scale in exp(-||x-z||^2 / delta^2) or the
    integer polynomial degree in (x.z + 1)^delta; it is unused for linear.
    """

    kind: str
    delta: float = 1.0

    def __post_init__(self):
        if self.kind not in KERNEL_KINDS:
            raise ValueError(f"unknown kernel kind {self.kind!r}, expected one of {KERNEL_KINDS}")
        if not np.isfinite(self.delta) or self.delta <= 0:
            raise ValueError(f"kernel delta must be positive, got {self.delta}")
        if self.kind == "polynomial" and not float(self.delta).is_integer():
            raise ValueError(f"polynomial degree must be an integer, got {self.delta}")


def gram(spec: KernelSpec, X, Z) -> np.ndarray:
    """Pairwise kernel matrix with entry (i, j) = k(X_i, Z_j)."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    Z = np.atleast_2d(np.asarray(Z, dtype=float))
    if X.shape[1] != Z.shape[1]:
        raise ValueError(f"dimension mismatch: {X.shape[1]} vs {Z.shape[1]} columns")
    if spec.kind == "linear":
        return X @ Z.T
    if spec.kind == "rbf":
        return np.exp(-cdist(X, Z, "sqeuclidean") / spec.delta**2)
    return (X @ Z.T + 1.0) ** int(spec.delta)


def augmented_gram(spec: KernelSpec, X, Z) -> np.ndarray:
    """Gram matrix plus one in every entry (the bias coordinate)."""
    return gram(spec, X, Z) + 1.0


def kernel_eval(spec: KernelSpec, x, z) -> float:
    """Kernel value for a single pair of vectors."""
    x = np.asarray(x, dtype=float).ravel()
    z = np.asarray(z, dtype=float).ravel()
    if x.shape != z.shape:
        raise ValueError(f"dimension mismatch: {x.shape[0]} vs {z.shape[0]}")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(z))):
        raise ValueError("non-finite input vector")
    return float(gram(spec, x[None, :], z[None, :])[0, 0])
